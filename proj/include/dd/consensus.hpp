#pragma once

#include <functional>
#include <vector>

#include "dd/net_graph.hpp"

namespace dd {

struct ConsensusState {
    std::vector<double> theta;
    std::vector<double> omega;
};

ConsensusState consensus_init(const std::vector<double>& omega0);

ConsensusState consensus_step(const ConsensusState& state, const Graph& g, int n);

// p = 0 for a regular agent; rung_size = |M_p|, regular_size = |V \ M|
double encode_priority_initial(int p, int rung_size, int regular_size, int n);

double theta_ss(int m);

int decode_m(double theta, double epsilon, int n);

long iteration_budget(int n, double spread0, double epsilon);

// ||theta - mean(theta) 1||_2
double spread_norm(const std::vector<double>& theta);

// runs k steps; observer(k, state) is called after every step when set
ConsensusState run_consensus(const Graph& g, const std::vector<double>& omega0, long steps,
                             const std::function<void(long, const ConsensusState&)>& observer = {});

// every agent's estimate of sum(values); budget from iteration_budget on the actual spread
std::vector<double> average_consensus_scaled(const Graph& g, const std::vector<double>& values, int n,
                                             double epsilon);

} // namespace dd
