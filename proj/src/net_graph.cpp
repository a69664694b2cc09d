#include "dd/net_graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <string>

#include "dd/errors.hpp"

namespace dd {

namespace {

std::vector<int> bfs_dist(const Graph& g, int src) {
    std::vector<int> dist(g.n, -1);
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
        int i = q.front();
        q.pop();
        for (int j : g.nbrs[i]) {
            if (dist[j] < 0) {
                dist[j] = dist[i] + 1;
                q.push(j);
            }
        }
    }
    return dist;
}

} // namespace

Graph build_graph(int n, const std::vector<std::pair<int, int>>& edge_list) {
    if (n <= 0) throw InvalidEdge("agent count must be positive");
    Graph g;
    g.n = n;
    g.nbrs.assign(n, {});
    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : edge_list) {
        if (a < 0 || b < 0 || a >= n || b >= n)
            throw InvalidEdge("edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
        if (a == b) throw InvalidEdge("self-loop at " + std::to_string(a));
        auto e = std::minmax(a, b);
        if (!seen.insert({e.first, e.second}).second)
            throw InvalidEdge("duplicate edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
        g.edges.push_back({e.first, e.second});
        g.nbrs[a].push_back(b);
        g.nbrs[b].push_back(a);
    }
    std::sort(g.edges.begin(), g.edges.end());
    for (auto& l : g.nbrs) std::sort(l.begin(), l.end());

    auto dist = bfs_dist(g, 0);
    int reached = static_cast<int>(std::count_if(dist.begin(), dist.end(), [](int d) { return d >= 0; }));
    if (reached != n)
        throw DisconnectedGraph("graph has unreachable agents (" + std::to_string(n - reached) + " of " +
                                std::to_string(n) + ")");
    return g;
}

Graph ring_graph(int n) {
    std::vector<std::pair<int, int>> e;
    if (n == 2) e.push_back({0, 1});
    else if (n > 2)
        for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
    return build_graph(n, e);
}

Graph path_graph(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
    return build_graph(n, e);
}

Graph complete_graph(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.push_back({i, j});
    return build_graph(n, e);
}

int diameter(const Graph& g) {
    int d = 0;
    for (int s = 0; s < g.n; ++s) {
        auto dist = bfs_dist(g, s);
        d = std::max(d, *std::max_element(dist.begin(), dist.end()));
    }
    return d;
}

double MixingMatrix::at(int i, int j) const {
    if (i == j) return diag[i];
    for (auto [k, a] : off[i])
        if (k == j) return a;
    return 0.0;
}

MixingMatrix metropolis_weights(const Graph& g) {
    MixingMatrix M;
    M.n = g.n;
    M.diag.assign(g.n, 1.0);
    M.off.assign(g.n, {});
    for (int i = 0; i < g.n; ++i) {
        for (int j : g.nbrs[i]) {
            double a = 1.0 / (1.0 + std::max(g.degree(i), g.degree(j)));
            M.off[i].push_back({j, a});
            M.diag[i] -= a;
        }
    }
    return M;
}

std::vector<std::vector<double>> mix(const MixingMatrix& M, const std::vector<std::vector<double>>& values) {
    if (static_cast<int>(values.size()) != M.n)
        throw DimensionMismatch("mix: expected " + std::to_string(M.n) + " agents, got " +
                                std::to_string(values.size()));
    int dim = M.n ? static_cast<int>(values[0].size()) : 0;
    std::vector<double> in(static_cast<size_t>(M.n) * dim), out(in.size());
    for (int i = 0; i < M.n; ++i) {
        if (static_cast<int>(values[i].size()) != dim)
            throw DimensionMismatch("mix: agent " + std::to_string(i) + " has dimension " +
                                    std::to_string(values[i].size()) + ", expected " + std::to_string(dim));
        std::copy(values[i].begin(), values[i].end(), in.begin() + static_cast<long>(i) * dim);
    }
    mix_flat(M, in.data(), out.data(), dim);
    std::vector<std::vector<double>> res(M.n);
    for (int i = 0; i < M.n; ++i)
        res[i].assign(out.begin() + static_cast<long>(i) * dim, out.begin() + static_cast<long>(i + 1) * dim);
    return res;
}

void mix_flat(const MixingMatrix& M, const double* in, double* out, int dim) {
    for (int i = 0; i < M.n; ++i) {
        double* o = out + static_cast<long>(i) * dim;
        const double* self = in + static_cast<long>(i) * dim;
        double ai = M.diag[i];
        for (int c = 0; c < dim; ++c) o[c] = ai * self[c];
        for (auto [j, a] : M.off[i]) {
            const double* src = in + static_cast<long>(j) * dim;
            for (int c = 0; c < dim; ++c) o[c] += a * src[c];
        }
    }
}

} // namespace dd
