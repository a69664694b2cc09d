#pragma once

#include <tuple>
#include <vector>

#include "dd/dual_edp.hpp"

namespace dd {

struct FeasibilityStep {
    double x = 0.0;
    double u = 0.0;
    double s = 0.0;
};

FeasibilityStep feasibility_primal_step(const EdpAgentState& st, double v, const std::vector<double>& w,
                                        double u_max, double tau, double s_cap);

// 2 * sum d / n
double default_share_cap(const std::vector<BusSpec>& buses);

EdpResult run_feasibility(const std::vector<BusSpec>& buses, const LossModel& model, const MixingMatrix& mixing,
                          const std::vector<double>& u_max, double tau, const DualRunOptions& opt);

struct P1Solution {
    double shortage = 0.0;       // minimal total shed
    double deliverable = 0.0;    // max of sum x - x'Bx over the box
    Eigen::VectorXd x;
};

P1Solution solve_p1(const std::vector<BusSpec>& buses, const LossModel& model);

} // namespace dd
