#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dd/power_model.hpp"
#include "dd/priority_shed.hpp"

namespace dd {

struct OracleSolution {
    Eigen::VectorXd x, u, s;   // EDP / P2 primal
    Eigen::VectorXd y, z;      // shedding primal
    double lambda = 0.0;
    Eigen::VectorXd xi;        // EDP / P2 coupling multipliers
    Eigen::VectorXd eta;       // shedding multipliers
    double objective = 0.0;
    double dual_value = 0.0;
    long iterations = 0;
    std::map<std::string, double> kkt_residuals;
};

struct OracleOptions {
    double tolerance = 1e-8;
    long max_iters = 200000;
};

OracleSolution solve_edp_centralized(const std::vector<BusSpec>& buses, const LossModel& model,
                                     const OracleOptions& opt = {});

// relaxed feasibility problem: min sum s^2 + tau sum x^2
OracleSolution solve_p2_centralized(const std::vector<BusSpec>& buses, const LossModel& model, double tau,
                                    const OracleOptions& opt = {});

OracleSolution solve_shedding_centralized(const std::vector<ShedBus>& buses, const PriorityAssignment& pa,
                                          const std::vector<double>& s, double kappa,
                                          const OracleOptions& opt = {});

double shedding_objective(const std::vector<ShedBus>& buses, const PriorityAssignment& pa,
                          const std::vector<double>& s, double kappa, const std::vector<double>& y,
                          const std::vector<double>& z);

struct GridResult {
    std::vector<double> x;      // EDP decision (all buses)
    std::vector<double> y, z;   // shedding decision
    double objective = 0.0;
    double constraint_slack = 0.0;  // admitted constraint violation
    double objective_slack = 0.0;   // Lipschitz bound times resolution
    long points = 0;
    bool found = false;
};

GridResult brute_force_grid_edp(const std::vector<BusSpec>& buses, const LossModel& model, double resolution);

GridResult brute_force_grid_shedding(const std::vector<ShedBus>& buses, const PriorityAssignment& pa,
                                     const std::vector<double>& s, double kappa, double resolution);

} // namespace dd
