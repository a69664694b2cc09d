#include "dd/random_cases.hpp"

#include <algorithm>
#include <numeric>

namespace dd {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Graph random_connected_graph(int n, double extra_p, Rng& rng) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<bool>> have(n, std::vector<bool>(n, false));
    for (int k = 1; k < n; ++k) {
        int a = order[k], b = order[uniform_int(rng, 0, k - 1)];
        edges.push_back({a, b});
        have[a][b] = have[b][a] = true;
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!have[i][j] && uniform(rng, 0.0, 1.0) < extra_p) edges.push_back({i, j});
    return build_graph(n, edges);
}

Eigen::MatrixXd random_psd(int n, double scale, Rng& rng) {
    const int rank = uniform_int(rng, 1, n);
    Eigen::MatrixXd G(rank, n);
    for (int r = 0; r < rank; ++r)
        for (int c = 0; c < n; ++c) G(r, c) = uniform(rng, -1.0, 1.0);
    Eigen::MatrixXd B = G.transpose() * G;
    const double mx = B.cwiseAbs().maxCoeff();
    if (mx > 0.0) B *= scale / mx;
    return B;
}

namespace {

EdpInstance base_instance(int n, int gens, Rng& rng) {
    EdpInstance inst;
    inst.buses.resize(n);
    for (int i = 0; i < n; ++i) {
        BusSpec& b = inst.buses[i];
        b.index = i + 1;
        if (i < gens) {
            b.is_generator = true;
            b.x_min = uniform(rng, 0.0, 3.0);
            b.x_max = b.x_min + uniform(rng, 2.0, 6.0);
            b.cost_a = uniform(rng, 0.02, 0.1);
            b.cost_b = uniform(rng, 1.0, 5.0);
        }
    }
    double xmax_norm = 0.0;
    for (const auto& b : inst.buses) xmax_norm += b.x_max;
    // keep losses at x_max near 2..8 % of generation
    const double target = uniform(rng, 0.02, 0.08);
    Eigen::MatrixXd B = random_psd(n, 1.0, rng);
    const Eigen::VectorXd hi = upper_bounds(inst.buses);
    const double loss = hi.dot(B * hi);
    if (loss > 0.0) B *= target * xmax_norm / loss;
    inst.loss = factor_loss_matrix(B);
    inst.graph = random_connected_graph(n, 0.3, rng);
    return inst;
}

void spread_demand(EdpInstance& inst, double total, Rng& rng) {
    std::vector<double> w(inst.buses.size());
    double ws = 0.0;
    for (auto& v : w) ws += (v = uniform(rng, 0.2, 1.0));
    for (size_t i = 0; i < w.size(); ++i) inst.buses[i].demand = total * w[i] / ws;
}

} // namespace

EdpInstance random_edp_instance(int n, int gens, Rng& rng) {
    EdpInstance inst = base_instance(n, gens, rng);
    const Eigen::VectorXd lo = lower_bounds(inst.buses);
    const double low = lo.sum() - evaluate_loss(inst.loss.B, lo);
    const double high = max_deliverable(inst.buses, inst.loss).first;
    spread_demand(inst, low + uniform(rng, 0.1, 0.9) * (high - low), rng);
    return inst;
}

EdpInstance random_overload_instance(int n, int gens, double excess, Rng& rng) {
    EdpInstance inst = base_instance(n, gens, rng);
    spread_demand(inst, max_deliverable(inst.buses, inst.loss).first + excess, rng);
    return inst;
}

std::vector<int> random_priority_ladder(int n, int m, Rng& rng) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> p(n, 0);
    // one bus per rung first, then sprinkle extra prioritized buses; the last slot stays regular
    for (int l = 1; l <= m; ++l) p[order[l - 1]] = l;
    if (m == 0) return p;
    for (int k = m; k < n - 1; ++k)
        if (uniform(rng, 0.0, 1.0) < 0.3) p[order[k]] = uniform_int(rng, 1, m);
    return p;
}

ShedInstance random_shed_instance(int n, int max_m, Rng& rng) {
    ShedInstance inst;
    const int m = uniform_int(rng, 0, std::min(max_m, n - 1));
    inst.priority = random_priority_ladder(n, m, rng);
    inst.buses.resize(n);
    double ymax = 0.0;
    for (int i = 0; i < n; ++i) {
        ShedBus& b = inst.buses[i];
        b.y_max = uniform(rng, 0.5, 1.2);
        b.q = uniform(rng, 1.0, 4.0);
        b.r = uniform(rng, 0.0, 3.0);
        ymax += b.y_max;
    }
    const double y_tot = uniform(rng, 0.15, 0.85) * ymax;
    inst.shares.assign(n, y_tot / n);
    inst.kappa = default_kappa(inst.buses, partition_priorities(inst.priority));
    inst.graph = random_connected_graph(n, 0.3, rng);
    return inst;
}

} // namespace dd
