#include <doctest.h>

#include <numeric>
#include <random>

#include "dd/errors.hpp"
#include "dd/net_graph.hpp"
#include "dd/random_cases.hpp"

using namespace dd;

TEST_CASE("build_graph neighbor sets") {
    Graph g = build_graph(2, {{0, 1}});
    CHECK(g.nbrs[0] == std::vector<int>{1});
    CHECK(g.nbrs[1] == std::vector<int>{0});

    CHECK_THROWS_AS(build_graph(3, {{0, 1}}), DisconnectedGraph);
    CHECK_THROWS_AS(build_graph(3, {{0, 0}, {1, 2}}), InvalidEdge);
    CHECK_THROWS_AS(build_graph(3, {{0, 3}, {1, 2}}), InvalidEdge);

    Graph ring = ring_graph(30);
    for (int i = 0; i < 30; ++i) CHECK(ring.degree(i) == 2);
    CHECK(diameter(ring) == 15);
    CHECK(diameter(complete_graph(5)) == 1);
    CHECK(diameter(path_graph(4)) == 3);
}

TEST_CASE("metropolis weights on small graphs") {
    MixingMatrix p2 = metropolis_weights(path_graph(2));
    CHECK(p2.at(0, 0) == doctest::Approx(0.5));
    CHECK(p2.at(0, 1) == doctest::Approx(0.5));
    CHECK(p2.at(1, 1) == doctest::Approx(0.5));

    MixingMatrix p3 = metropolis_weights(path_graph(3));
    CHECK(p3.at(0, 1) == doctest::Approx(1.0 / 3));
    CHECK(p3.at(1, 2) == doctest::Approx(1.0 / 3));
    CHECK(p3.at(0, 0) == doctest::Approx(2.0 / 3));
    CHECK(p3.at(2, 2) == doctest::Approx(2.0 / 3));
    CHECK(p3.at(1, 1) == doctest::Approx(1.0 / 3));
    CHECK(p3.at(0, 2) == 0.0);

    MixingMatrix r = metropolis_weights(ring_graph(30));
    for (int i = 0; i < 30; ++i) {
        CHECK(r.at(i, i) == doctest::Approx(1.0 / 3));
        CHECK(r.at(i, (i + 1) % 30) == doctest::Approx(1.0 / 3));
    }
}

TEST_CASE("metropolis matrix is doubly stochastic on random graphs") {
    Rng rng(7);
    for (int t = 0; t < 20; ++t) {
        int n = uniform_int(rng, 2, 25);
        MixingMatrix A = metropolis_weights(random_connected_graph(n, 0.2, rng));
        for (int i = 0; i < n; ++i) {
            double row = 0.0, col = 0.0;
            for (int j = 0; j < n; ++j) {
                row += A.at(i, j);
                col += A.at(j, i);
                CHECK(A.at(i, j) == A.at(j, i));
                CHECK(A.at(i, j) >= 0.0);
            }
            CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(col == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("mix averages and keeps the mean") {
    MixingMatrix p2 = metropolis_weights(path_graph(2));
    auto out = mix(p2, {{0.0}, {2.0}});
    CHECK(out[0][0] == doctest::Approx(1.0));
    CHECK(out[1][0] == doctest::Approx(1.0));

    MixingMatrix A = metropolis_weights(ring_graph(30));
    std::vector<std::vector<double>> same(30, std::vector<double>{4.25, -1.0});
    for (const auto& v : mix(A, same)) {
        CHECK(v[0] == doctest::Approx(4.25));
        CHECK(v[1] == doctest::Approx(-1.0));
    }

    Rng rng(11);
    std::vector<std::vector<double>> vals(30, std::vector<double>(1));
    double mean_in = 0.0;
    for (auto& v : vals) {
        v[0] = uniform(rng, -10.0, 10.0);
        mean_in += v[0] / 30;
    }
    double mean_out = 0.0;
    for (const auto& v : mix(A, vals)) mean_out += v[0] / 30;
    CHECK(std::abs(mean_out - mean_in) <= 1e-12);

    CHECK_THROWS_AS(mix(A, std::vector<std::vector<double>>(29, std::vector<double>(1))), DimensionMismatch);
}

TEST_CASE("mix_flat matches mix") {
    Rng rng(3);
    Graph g = random_connected_graph(12, 0.3, rng);
    MixingMatrix A = metropolis_weights(g);
    std::vector<std::vector<double>> vals(12, std::vector<double>(3));
    std::vector<double> flat;
    for (auto& v : vals)
        for (auto& c : v) {
            c = uniform(rng, -1.0, 1.0);
            flat.push_back(c);
        }
    std::vector<double> out(flat.size());
    mix_flat(A, flat.data(), out.data(), 3);
    auto ref = mix(A, vals);
    for (int i = 0; i < 12; ++i)
        for (int c = 0; c < 3; ++c) CHECK(out[i * 3 + c] == doctest::Approx(ref[i][c]).epsilon(1e-14));
}
