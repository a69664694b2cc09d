#pragma once

#include <utility>
#include <vector>

namespace dd {

struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;   // i < j
    std::vector<std::vector<int>> nbrs;       // sorted N_i

    int degree(int i) const { return static_cast<int>(nbrs[i].size()); }
};

Graph build_graph(int n, const std::vector<std::pair<int, int>>& edge_list);

Graph ring_graph(int n);
Graph path_graph(int n);
Graph complete_graph(int n);

int diameter(const Graph& g);

// Sparse row storage: row i holds (j, a_ij) for j in N_i, diagonal kept apart.
struct MixingMatrix {
    int n = 0;
    std::vector<double> diag;
    std::vector<std::vector<std::pair<int, double>>> off;

    double at(int i, int j) const;
};

MixingMatrix metropolis_weights(const Graph& g);

std::vector<std::vector<double>> mix(const MixingMatrix& M,
                                     const std::vector<std::vector<double>>& values);

// Flat agent-major layout: values[i*dim + c]. out must not alias in.
void mix_flat(const MixingMatrix& M, const double* in, double* out, int dim);

} // namespace dd
