#include "dd/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dd/errors.hpp"

namespace dd {

ConsensusState consensus_init(const std::vector<double>& omega0) { return {omega0, omega0}; }

ConsensusState consensus_step(const ConsensusState& state, const Graph& g, int n) {
    if (static_cast<int>(state.theta.size()) != g.n || static_cast<int>(state.omega.size()) != g.n)
        throw DimensionMismatch("consensus_step: state size differs from graph size");
    const double beta = 1.0 - 2.0 / (9.0 * n + 1.0);
    ConsensusState next;
    next.theta.resize(g.n);
    next.omega.resize(g.n);
    for (int i = 0; i < g.n; ++i) {
        double acc = 0.0;
        for (int j : g.nbrs[i]) acc += (state.omega[j] - state.omega[i]) / std::max(g.degree(i), g.degree(j));
        next.theta[i] = state.omega[i] + 0.5 * acc;
    }
    for (int i = 0; i < g.n; ++i) next.omega[i] = state.theta[i] + beta * (next.theta[i] - state.theta[i]);
    return next;
}

double encode_priority_initial(int p, int rung_size, int regular_size, int n) {
    if (p > 0) {
        if (rung_size <= 0) throw ZeroCardinality("priority rung " + std::to_string(p) + " has zero cardinality");
        return static_cast<double>(n) * p / rung_size;
    }
    if (regular_size <= 0) throw ZeroCardinality("regular set has zero cardinality");
    return static_cast<double>(n) / regular_size;
}

double theta_ss(int m) { return (2.0 + static_cast<double>(m) * (m + 1)) / 2.0; }

int decode_m(double theta, double epsilon, int n) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw ValidationError("epsilon", "decoding requires 0 < epsilon < 0.5");
    int best = 0;
    double dist = std::abs(theta - theta_ss(0));
    for (int m = 1; m <= n; ++m) {
        double d = std::abs(theta - theta_ss(m));
        if (d < dist) {
            dist = d;
            best = m;
        }
        if (theta_ss(m) > theta + 1.0) break;
    }
    if (dist > epsilon) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "theta = %.6g is %.3g from the nearest band (m = %d)", theta, dist, best);
        throw Undecodable(buf);
    }
    return best;
}

long iteration_budget(int n, double spread0, double epsilon) {
    if (!(epsilon > 0.0)) throw ValidationError("epsilon", "epsilon must be positive");
    if (spread0 <= epsilon) return 1;
    return static_cast<long>(std::ceil(18.0 * n * std::log(std::sqrt(2.0) * spread0 / epsilon))) + 1;
}

double spread_norm(const std::vector<double>& theta) {
    if (theta.empty()) return 0.0;
    double mean = 0.0;
    for (double t : theta) mean += t;
    mean /= static_cast<double>(theta.size());
    double s = 0.0;
    for (double t : theta) s += (t - mean) * (t - mean);
    return std::sqrt(s);
}

ConsensusState run_consensus(const Graph& g, const std::vector<double>& omega0, long steps,
                             const std::function<void(long, const ConsensusState&)>& observer) {
    ConsensusState st = consensus_init(omega0);
    for (long k = 1; k <= steps; ++k) {
        st = consensus_step(st, g, g.n);
        if (observer) observer(k, st);
    }
    return st;
}

std::vector<double> average_consensus_scaled(const Graph& g, const std::vector<double>& values, int n,
                                             double epsilon) {
    if (static_cast<int>(values.size()) != g.n) throw DimensionMismatch("average_consensus_scaled: size mismatch");
    long budget = iteration_budget(n, spread_norm(values), epsilon);
    auto st = run_consensus(g, values, budget);
    std::vector<double> est(g.n);
    for (int i = 0; i < g.n; ++i) est[i] = n * st.theta[i];
    return est;
}

} // namespace dd
