#pragma once

#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dd/dual_edp.hpp"
#include "dd/net_graph.hpp"
#include "dd/power_model.hpp"
#include "dd/priority_shed.hpp"

namespace dd {

struct ScenarioConfig {
    std::string name;
    std::vector<BusSpec> buses;
    Eigen::MatrixXd B;
    LossModel loss;
    std::string topology = "complete";
    Graph graph;

    std::vector<int> priority;
    std::vector<ShedBus> shed;
    double kappa = 0.0;  // 0 selects default_kappa
    double y_tot = 0.0;
    bool y_tot_set = false;

    double tau = 1e-4;
    double epsilon = 0.4;
    double u_max_epsilon = 1e-5;

    DualRunOptions edp;
    DualRunOptions feasibility;
    ShedRunOptions shedding;

    std::set<std::string> overrides;
    std::vector<AssumptionFinding> findings;

    int n() const { return static_cast<int>(buses.size()); }
    double effective_kappa() const;
};

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<string>");
ScenarioConfig load_scenario(const std::string& path);

// recomputes the loss factorization, graph and assumption report; throws ValidationError
// for any finding whose label is not listed in overrides (A6 is informational)
void validate_scenario(ScenarioConfig& cfg);

// rescales every demand by the same factor so the total equals total
void set_total_demand(ScenarioConfig& cfg, double total);

// A8 check for a shedding request; returns the per-agent shares y_tot / n
std::vector<double> uniform_shares(const ScenarioConfig& cfg, double y_tot);

} // namespace dd
