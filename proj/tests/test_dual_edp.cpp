#include <doctest.h>

#include <cmath>

#include "dd/dual_edp.hpp"
#include "dd/errors.hpp"
#include "dd/oracle.hpp"
#include "dd/random_cases.hpp"
#include "ieee30_data.hpp"

using namespace dd;

namespace {

// local Lagrangian in x for w = 0: a x^2 + b x - v x
double lagrangian_x(const BusSpec& b, double v, double x) { return b.cost_a * x * x + b.cost_b * x - v * x; }

} // namespace

TEST_CASE("edp_primal_step closed form") {
    BusSpec g1{1, 5, 20, 0.08, 2.0, 0, true};
    LossModel m = factor_loss_matrix(Eigen::MatrixXd::Zero(1, 1));
    EdpAgentState st = make_edp_agent(g1, m, 0);
    auto [x, u] = edp_primal_step(st, 2.8, {0.0}, 10.0);
    CHECK(x == doctest::Approx(5.0));
    CHECK(u == 0.0);

    double best = x, best_val = lagrangian_x(g1, 2.8, x);
    for (double t = g1.x_min; t <= g1.x_max; t += 1e-4) {
        if (lagrangian_x(g1, 2.8, t) < best_val) {
            best_val = lagrangian_x(g1, 2.8, t);
            best = t;
        }
    }
    CHECK(std::abs(best - x) <= 1e-4);

    // interior and upper clip
    CHECK(edp_primal_step(st, 3.6, {0.0}, 10.0).first == doctest::Approx(10.0));
    CHECK(edp_primal_step(st, 100.0, {0.0}, 10.0).first == doctest::Approx(20.0));
}

TEST_CASE("loss_slack_step") {
    CHECK(loss_slack_step(0.0, 0.0, 5.0) == 0.0);
    CHECK(loss_slack_step(1.0, 4.0, 1.0) == 1.0);
    CHECK(loss_slack_step(1.0, 1.0, 5.0) == doctest::Approx(0.5));
    CHECK(loss_slack_step(1.0, -40.0, 5.0) == -5.0);
    // v = 0 with nonzero w: linear objective, boundary in the direction of w
    CHECK(loss_slack_step(0.0, 2.0, 3.0) == 3.0);
    CHECK(loss_slack_step(0.0, -2.0, 3.0) == -3.0);
}

TEST_CASE("edp_subgradient") {
    BusSpec load{3, 0, 0, 0, 0, 2.0, false};
    LossModel z = factor_loss_matrix(Eigen::MatrixXd::Zero(3, 3));
    Subgradient s = edp_subgradient(make_edp_agent(load, z, 0), 0.0, 0.0);
    CHECK(s.balance_term == 2.0);
    for (double g : s.g) CHECK(g == 0.0);

    BusSpec gen{2, 0, 10, 0.1, 1.0, 0.0, true};
    LossModel id = factor_loss_matrix(Eigen::MatrixXd::Identity(3, 3));
    s = edp_subgradient(make_edp_agent(gen, id, 1), 3.0, 1.0);
    CHECK(s.g[1] == doctest::Approx(2.0));
    CHECK(s.g[0] == 0.0);
    CHECK(s.g[2] == 0.0);
    CHECK(s.balance_term == doctest::Approx(1.0 - 3.0));
}

TEST_CASE("edp_dual_step") {
    CHECK(edp_dual_step(0.0, {0.0}, -1.0, {0.0}, 1.0).first == 0.0);
    CHECK(edp_dual_step(2.0, {0.0}, 0.5, {0.0}, 0.1).first == doctest::Approx(2.05));
    auto [lam, xi] = edp_dual_step(1.0, {0.0, 0.0}, 0.0, {1.0, 0.0}, 0.5);
    CHECK(lam == 1.0);
    CHECK(xi[0] == doctest::Approx(0.5));
    CHECK(xi[1] == 0.0);
}

TEST_CASE("run_edp splits evenly between identical lossless generators") {
    std::vector<BusSpec> buses{{1, 1, 10, 0.1, 1.0, 6.0, true}, {2, 1, 10, 0.1, 1.0, 5.0, true}};
    LossModel m = factor_loss_matrix(Eigen::MatrixXd::Zero(2, 2));
    DualRunOptions opt;
    opt.schedule = StepSchedule::harmonic_power(1.0, 0.6);
    opt.stop = {200000, 1e-5, 1e-7, 100};
    EdpResult r = run_edp(buses, m, metropolis_weights(path_graph(2)), opt, 0.0);
    CHECK(std::abs(r.x[0] - 5.5) <= 1e-3);
    CHECK(std::abs(r.x[1] - 5.5) <= 1e-3);
    CHECK(r.converged);
}

TEST_CASE("run_edp on IEEE-30 at 48 MW") {
    auto buses = testdata::ieee30_generators(48.0);
    LossModel m = factor_loss_matrix(testdata::ieee30_b());
    DualRunOptions opt;
    opt.stop = {400000, 5e-3, 1e-5, 100};
    opt.trace_stride = 1000;
    EdpResult r = run_edp(buses, m, metropolis_weights(complete_graph(6)), opt, compute_u_bound(m, buses).u_max);
    OracleSolution o = solve_edp_centralized(buses, m);

    CHECK(r.converged);
    CHECK(std::abs(r.residual) <= 5e-3 * 48.0);
    CHECK((r.x - o.x).cwiseAbs().maxCoeff() <= 0.05);
    CHECK(r.v_spread <= 1e-2);
    CHECK(r.w_spread <= 1e-2);
    for (int i = 0; i < 6; ++i) {
        CHECK(r.x[i] >= buses[i].x_min);
        CHECK(r.x[i] <= buses[i].x_max);
    }

    REQUIRE(!r.trace.empty());
    CHECK(r.trace.k.front() == 1);
    CHECK(r.trace.k.back() == r.iterations);
    CHECK(std::abs(r.trace.rows.back().back()) <= 5e-3 * 48.0);
}

TEST_CASE("run_edp is deterministic") {
    Rng rng(9);
    EdpInstance inst = random_edp_instance(5, 3, rng);
    DualRunOptions opt;
    opt.schedule = StepSchedule::harmonic_power(1.0, 0.6);
    opt.stop.max_iters = 5000;
    MixingMatrix A = metropolis_weights(inst.graph);
    const double umax = compute_u_bound(inst.loss, inst.buses).u_max;
    EdpResult a = run_edp(inst.buses, inst.loss, A, opt, umax);
    EdpResult b = run_edp(inst.buses, inst.loss, A, opt, umax);
    CHECK(a.x == b.x);
    CHECK(a.lambda == b.lambda);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("step schedules") {
    StepSchedule p = StepSchedule::harmonic_power(100.0, 0.6);
    CHECK(p.alpha(0) == doctest::Approx(100.0));
    CHECK(p.alpha(31) == doctest::Approx(100.0 / std::pow(32.0, 0.6)));
    StepSchedule h = StepSchedule::shifted_harmonic(1000.0, 500.0);
    CHECK(h.alpha(0) == doctest::Approx(1000.0 / 501.0));
    CHECK(h.alpha(499) == doctest::Approx(1.0));
    CHECK_THROWS_AS(StepSchedule::harmonic_power(1.0, 0.5).validate(), ValidationError);
    CHECK_THROWS_AS(StepSchedule::harmonic_power(1.0, 1.2).validate(), ValidationError);
    CHECK_THROWS_AS(StepSchedule::harmonic_power(0.0, 0.6).validate(), ValidationError);
    CHECK_NOTHROW(StepSchedule::harmonic_power(1.0, 1.0).validate());
}
