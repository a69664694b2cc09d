#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dd/net_graph.hpp"
#include "dd/schedule.hpp"
#include "dd/trace.hpp"

namespace dd {

struct PriorityAssignment {
    std::vector<int> priority;              // per bus, 0 = regular
    int m = 0;
    std::vector<std::vector<int>> rungs;    // rungs[l-1] = M_l
    std::vector<int> regular;

    bool is_prioritized(int i) const { return priority[i] > 0; }
};

// priorities: 0 marks a regular bus, positive values are rungs
PriorityAssignment partition_priorities(const std::vector<int>& priorities);

struct ShedBus {
    double y_max = 0.0;  // MW
    double q = 1.0;      // D_i(y) = q/2 y^2 (regular buses)
    double r = 0.0;      // utility slope (regular buses)
};

struct ShedAgentState {
    int index = 0;
    int n = 0;
    int priority = 0;
    double y_max = 0.0;
    double q = 1.0;
    double r = 0.0;
    double kappa = 1.0;
    double s = 0.0;  // per-agent share
    double y = 0.0;
    double z = 0.0;
    std::vector<double> eta, phi;
};

ShedAgentState make_shed_agent(int i, int n, int priority, const ShedBus& bus, double kappa, double s, int m);

std::vector<double> shed_constraint_g(const ShedAgentState& st, double z, double y, int m);

// returns (z, y); z is 0 for regular buses
std::pair<double, double> shed_primal_step(const ShedAgentState& st, const std::vector<double>& phi, int m);

std::vector<double> shed_dual_step(const std::vector<double>& phi, const std::vector<double>& g, double alpha);

double default_kappa(const std::vector<ShedBus>& buses, const PriorityAssignment& pa);

struct ShedRunOptions {
    StepSchedule schedule = StepSchedule::shifted_harmonic(1000.0, 500.0);
    StopRule stop{200000, 1e-3, 1e-6, 100};
    long trace_stride = 100;
    bool record_trace = true;
};

struct ShedResult {
    std::vector<double> y, z;
    std::vector<std::vector<double>> eta, phi;
    long iterations = 0;
    bool stopped_by_rule = false;
    bool converged = false;
    double budget_residual = 0.0;      // sum y - sum s
    double constraint_residual = 0.0;  // max over nu of |sum_i g_i^(nu)|
    double eta_spread = 0.0;
    double phi_spread = 0.0;
    std::vector<std::string> diagnostics;
    IterationTrace trace;
};

class ShedRunner {
public:
    ShedRunner(std::vector<ShedBus> buses, PriorityAssignment pa, std::vector<double> s, double kappa,
               MixingMatrix mixing, ShedRunOptions opt);

    bool step();
    bool done() const { return done_; }
    long iterations() const { return k_; }
    ShedResult result() const;

private:
    void record_row();

    std::vector<ShedBus> buses_;
    PriorityAssignment pa_;
    std::vector<double> s_;
    double kappa_;
    MixingMatrix A_;
    ShedRunOptions opt_;
    int n_, dim_;
    double y_tot_, scale_;
    long k_ = 0;
    bool done_ = false, stopped_by_rule_ = false;
    std::vector<double> eta_, phi_, y_, z_, gsum_;
    std::vector<double> hist_;
    long hist_k_ = 0;
    std::vector<std::string> diag_;
    IterationTrace trace_;
};

ShedResult run_shedding(const std::vector<ShedBus>& buses, const PriorityAssignment& pa,
                        const std::vector<double>& s, double kappa, const MixingMatrix& mixing,
                        const ShedRunOptions& opt);

// the m+1 coupled equality residuals sum_i g_i^(nu) at (y, z)
std::vector<double> shed_constraint_sums(const PriorityAssignment& pa, const std::vector<double>& s,
                                         const std::vector<double>& y, const std::vector<double>& z);

} // namespace dd
