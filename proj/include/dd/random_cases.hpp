#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dd/net_graph.hpp"
#include "dd/power_model.hpp"
#include "dd/priority_shed.hpp"

namespace dd {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi);  // inclusive

// random spanning tree plus each remaining pair with probability extra_p
Graph random_connected_graph(int n, double extra_p, Rng& rng);

// G'G with rank between 1 and n, scaled so the largest entry is about scale
Eigen::MatrixXd random_psd(int n, double scale, Rng& rng);

struct EdpInstance {
    std::vector<BusSpec> buses;
    LossModel loss;
    Graph graph;
};

// generators on the first `gens` buses; demand strictly inside the feasible range
EdpInstance random_edp_instance(int n, int gens, Rng& rng);

// same construction with total demand above the deliverable maximum by `excess`
EdpInstance random_overload_instance(int n, int gens, double excess, Rng& rng);

struct ShedInstance {
    std::vector<ShedBus> buses;
    std::vector<int> priority;
    std::vector<double> shares;
    double kappa = 1.0;
    Graph graph;
};

ShedInstance random_shed_instance(int n, int max_m, Rng& rng);

// random ladder with at least one regular agent; returns priorities with m rungs
std::vector<int> random_priority_ladder(int n, int m, Rng& rng);

} // namespace dd
