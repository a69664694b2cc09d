#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dd/net_graph.hpp"
#include "dd/power_model.hpp"
#include "dd/schedule.hpp"
#include "dd/trace.hpp"

namespace dd {

struct EdpAgentState {
    int index = 0;
    double x = 0.0;
    double u = 0.0;
    double lambda = 0.0;
    std::vector<double> xi;
    double v = 0.0;
    std::vector<double> w;
    Eigen::VectorXd r_col;
    double r_max = 0.0;
    BusSpec bus;
};

EdpAgentState make_edp_agent(const BusSpec& bus, const LossModel& model, int i);

// minimizer of the local Lagrangian over the box; w is the mixed xi
std::pair<double, double> edp_primal_step(const EdpAgentState& s, double v, const std::vector<double>& w,
                                          double u_max);

struct Subgradient {
    double balance_term = 0.0;
    std::vector<double> g;
};

Subgradient edp_subgradient(const EdpAgentState& s, double x, double u);

std::pair<double, std::vector<double>> edp_dual_step(double v, const std::vector<double>& w, double balance_term,
                                                     const std::vector<double>& g, double alpha);

// minimizer of lambda*u^2 - w_i*u over [-u_max, u_max]
double loss_slack_step(double v, double w_i, double u_max);

struct DualRunOptions {
    StepSchedule schedule = StepSchedule::harmonic_power(100.0, 0.6);
    StopRule stop;
    long trace_stride = 100;
    bool record_trace = true;
};

struct EdpResult {
    Eigen::VectorXd x, u, lambda, v, s;
    std::vector<std::vector<double>> xi, w;
    long iterations = 0;
    bool stopped_by_rule = false;
    bool converged = false;
    double balance_sum = 0.0;  // sum of (u^2 + d - x [- s]) at the final iterates
    double residual = 0.0;     // Upsilon(x) + sum d - sum x [- sum s], recomputed from x
    double v_spread = 0.0;     // max |v_i - v_j|
    double w_spread = 0.0;     // max ||w_i - w_j||_inf
    double lambda_spread = 0.0;
    IterationTrace trace;
};

// Shared engine for the EDP (cost a x^2 + b x) and the relaxed feasibility problem (s^2 + tau x^2).
class LossDualRunner {
public:
    enum class Mode { Edp, Feasibility };

    LossDualRunner(std::vector<BusSpec> buses, const LossModel& model, MixingMatrix mixing,
                   std::vector<double> u_max, DualRunOptions opt, Mode mode = Mode::Edp, double tau = 0.0,
                   double s_cap = 0.0);

    // one lockstep round; returns false once the stop rule has fired or the budget is spent
    bool step();
    bool done() const { return done_; }
    long iterations() const { return k_; }
    EdpResult result() const;

private:
    void record_row();
    double true_residual() const;

    std::vector<BusSpec> buses_;
    const LossModel* model_;
    MixingMatrix A_;
    std::vector<double> umax_;
    DualRunOptions opt_;
    Mode mode_;
    double tau_, s_cap_, demand_scale_;
    int n_;
    long k_ = 0;
    bool done_ = false, stopped_by_rule_ = false;
    std::vector<double> R_;  // column-major copy of R
    std::vector<double> lambda_, xi_, v_, w_, x_, u_, s_, bal_, g_;
    std::vector<double> x_hist_;  // primal snapshot from window start
    long hist_k_ = 0;
    double balance_sum_ = 0.0;
    IterationTrace trace_;
};

EdpResult run_edp(const std::vector<BusSpec>& buses, const LossModel& model, const MixingMatrix& mixing,
                  const DualRunOptions& opt, double u_max);

double max_spread(const Eigen::VectorXd& v);
double max_spread(const std::vector<std::vector<double>>& vs);

} // namespace dd
