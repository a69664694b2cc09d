#include "dd/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "dd/errors.hpp"

namespace dd {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);
    return buf;
}

template <class F>
auto tagged(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw StageError(stage, 2, e.what());
    } catch (const InfeasibleShedding& e) {
        throw StageError(stage, 2, e.what());
    } catch (const EmptyPriorityLevel& e) {
        throw StageError(stage, 2, e.what());
    } catch (const ZeroCardinality& e) {
        throw StageError(stage, 2, e.what());
    } catch (const Undecodable& e) {
        throw StageError(stage, 3, e.what());
    } catch (const NotConverged& e) {
        throw StageError(stage, 3, e.what());
    }
}

double shed_budget_scale(double y_tot) { return std::max(1.0, std::abs(y_tot)); }

void put_edp(RunSummary& s, const std::string& prefix, const EdpResult& r, const std::vector<BusSpec>& buses,
             const StopRule& stop) {
    s.put(prefix + ".iterations", r.iterations);
    s.put(prefix + ".stopped_by_rule", std::string(r.stopped_by_rule ? "true" : "false"));
    s.put(prefix + ".converged", std::string(r.converged ? "true" : "false"));
    s.put(prefix + ".x", r.x);
    s.put(prefix + ".u", r.u);
    s.put(prefix + ".lambda", r.lambda);
    s.put(prefix + ".balance_sum", r.balance_sum);
    s.put(prefix + ".residual", r.residual);
    s.put(prefix + ".residual_threshold", stop.residual_tol * std::max(1.0, std::abs(total_demand(buses))));
    s.put(prefix + ".mixed_lambda_spread", r.v_spread);
    s.put(prefix + ".mixed_xi_spread", r.w_spread);
    s.put(prefix + ".lambda_spread", r.lambda_spread);
    s.put(prefix + ".cost", total_cost(buses, r.x));
    if (!r.converged) s.converged = false;
}

void put_shed(RunSummary& s, const std::string& prefix, const ShedResult& r, double y_tot, double kappa,
              const StopRule& stop) {
    s.put(prefix + ".kappa", kappa);
    s.put(prefix + ".y_tot", y_tot);
    s.put(prefix + ".iterations", r.iterations);
    s.put(prefix + ".stopped_by_rule", std::string(r.stopped_by_rule ? "true" : "false"));
    s.put(prefix + ".converged", std::string(r.converged ? "true" : "false"));
    s.put(prefix + ".y", r.y);
    s.put(prefix + ".z", r.z);
    double ysum = 0.0;
    for (double v : r.y) ysum += v;
    s.put(prefix + ".budget_residual", ysum - y_tot);
    s.put(prefix + ".constraint_residual", r.constraint_residual);
    s.put(prefix + ".residual_threshold", stop.residual_tol * shed_budget_scale(y_tot));
    s.put(prefix + ".eta_spread", r.eta_spread);
    s.put(prefix + ".phi_spread", r.phi_spread);
    for (size_t i = 0; i < r.diagnostics.size(); ++i) s.put(prefix + ".note_" + std::to_string(i + 1), r.diagnostics[i]);
    if (!r.converged) s.converged = false;
}

std::vector<double> per_bus_max_terms(const ScenarioConfig& cfg) {
    std::vector<double> t(cfg.buses.size());
    for (size_t i = 0; i < cfg.buses.size(); ++i)
        t[i] = local_loss_column(cfg.loss, static_cast<int>(i)).r_max * cfg.buses[i].x_max;
    return t;
}

} // namespace

void RunSummary::put(const std::string& key, const std::string& value) { entries.push_back({key, value}); }
void RunSummary::put(const std::string& key, double value) { put(key, num(value)); }
void RunSummary::put(const std::string& key, long value) { put(key, std::to_string(value)); }

void RunSummary::put(const std::string& key, const Eigen::VectorXd& values) {
    std::string s;
    for (long i = 0; i < values.size(); ++i) s += (i ? " " : "") + num(values[i]);
    put(key, s);
}

void RunSummary::put(const std::string& key, const std::vector<double>& values) {
    put(key, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<long>(values.size())).eval());
}

const std::string* RunSummary::get(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

std::string RunSummary::text() const {
    std::string out;
    for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
    return out;
}

void emit_summary(const RunSummary& summary, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open summary file " + path);
    f << summary.text();
    if (!f) throw IoError("write failed for " + path);
}

Stage1aResult run_stage1a(const Graph& g, const PriorityAssignment& pa, double epsilon, long trace_stride) {
    const int n = g.n;
    std::vector<double> omega0(n);
    const int regular = static_cast<int>(pa.regular.size());
    for (int i = 0; i < n; ++i) {
        const int p = pa.priority[i];
        const int rung = p > 0 ? static_cast<int>(pa.rungs[p - 1].size()) : 0;
        omega0[i] = encode_priority_initial(p, rung, regular, n);
    }
    Stage1aResult r;
    r.budget = iteration_budget(n, spread_norm(omega0), epsilon);
    r.trace.stage = "consensus";
    append_columns(r.trace.columns, "theta", n);
    r.trace.columns.push_back("spread");
    auto record = [&](long k, const ConsensusState& st) {
        if (k == 1 || k % std::max(1L, trace_stride) == 0 || k == r.budget) {
            std::vector<double> row = st.theta;
            row.push_back(spread_norm(st.theta));
            r.trace.add(k, std::move(row));
        }
    };
    auto st = run_consensus(g, omega0, r.budget, record);
    r.theta = st.theta;
    r.m = decode_m(st.theta[0], epsilon, n);
    for (int i = 1; i < n; ++i) {
        int mi = decode_m(st.theta[i], epsilon, n);
        if (mi != r.m)
            throw Undecodable("agents decoded different m (" + std::to_string(r.m) + " vs " + std::to_string(mi) + ")");
    }
    return r;
}

std::vector<double> distributed_u_max(const ScenarioConfig& cfg) {
    return average_consensus_scaled(cfg.graph, per_bus_max_terms(cfg), cfg.n(), cfg.u_max_epsilon);
}

StageOutput run_algorithm1(const ScenarioConfig& cfg, const Algorithm1Options& opt) {
    StageOutput out;
    RunSummary& s = out.summary;
    const int n = cfg.n();
    s.put("scenario", cfg.name);
    s.put("buses", static_cast<long>(n));
    s.put("topology", cfg.topology);
    s.put("total_demand", total_demand(cfg.buses));

    const PriorityAssignment pa = tagged("1a", [&] { return partition_priorities(cfg.priority); });
    Stage1aResult s1a = tagged("1a", [&] { return run_stage1a(cfg.graph, pa, cfg.epsilon, cfg.edp.trace_stride); });
    if (s1a.m != pa.m)
        throw StageError("1a", 3, "decoded m = " + std::to_string(s1a.m) + " but the scenario has m = " + std::to_string(pa.m));
    s.put("stage1a.m", static_cast<long>(s1a.m));
    s.put("stage1a.iterations", s1a.budget);
    s.put("stage1a.theta_mean", std::accumulate(s1a.theta.begin(), s1a.theta.end(), 0.0) / n);
    out.traces.push_back(s1a.trace);

    const std::vector<double> umax = distributed_u_max(cfg);
    s.put("u_max.exact", compute_u_bound(cfg.loss, cfg.buses).u_max);
    s.put("u_max.estimate_min", *std::min_element(umax.begin(), umax.end()));
    s.put("u_max.estimate_max", *std::max_element(umax.begin(), umax.end()));

    const MixingMatrix A = metropolis_weights(cfg.graph);
    EdpResult feas = tagged("1b", [&] { return run_feasibility(cfg.buses, cfg.loss, A, umax, cfg.tau, cfg.feasibility); });
    s.put("stage1b.tau", cfg.tau);
    s.put("stage1b.iterations", feas.iterations);
    s.put("stage1b.converged", std::string(feas.converged ? "true" : "false"));
    s.put("stage1b.s", feas.s);
    s.put("stage1b.share_spread", max_spread(feas.s));
    s.put("stage1b.residual", feas.residual);
    s.put("stage1b.p1_shortage", solve_p1(cfg.buses, cfg.loss).shortage);
    if (!feas.converged) s.converged = false;
    out.traces.push_back(feas.trace);

    std::vector<BusSpec> reduced = cfg.buses;
    std::vector<double> shares(n);
    double y_tot = 0.0;
    for (int i = 0; i < n; ++i) {
        reduced[i].demand = cfg.buses[i].demand - feas.s[i];
        shares[i] = feas.s[i];
        y_tot += feas.s[i];
    }
    s.put("stage2.y_tot", y_tot);
    s.put("stage2.total_demand", total_demand(reduced));

    const double kappa = cfg.effective_kappa();
    auto [edp_res, shed_res] = tagged("2", [&] {
        LossDualRunner edp(reduced, cfg.loss, A, umax, cfg.edp);
        ShedRunner shed(cfg.shed, pa, shares, kappa, A, cfg.shedding);
        while (!edp.done() || !shed.done()) {
            if (!edp.done()) edp.step();
            if (!shed.done()) shed.step();
        }
        return std::make_pair(edp.result(), shed.result());
    });
    put_edp(s, "stage2.edp", edp_res, reduced, cfg.edp.stop);
    put_shed(s, "stage2.shed", shed_res, y_tot, kappa, cfg.shedding.stop);
    out.traces.push_back(edp_res.trace);
    out.traces.push_back(shed_res.trace);

    if (opt.with_oracle) {
        // a distributed share can leave a sliver of overload behind
        const double shortfall = total_demand(reduced) - max_deliverable(reduced, cfg.loss).first;
        s.put("oracle.edp.shortfall", std::max(0.0, shortfall));
        if (shortfall <= 0.0) {
            auto orc = tagged("2", [&] { return solve_edp_centralized(reduced, cfg.loss); });
            s.put("oracle.edp.x", orc.x);
            s.put("oracle.edp.max_delta", (orc.x - edp_res.x).cwiseAbs().maxCoeff());
        }
        auto osh = tagged("2", [&] { return solve_shedding_centralized(cfg.shed, pa, shares, kappa); });
        s.put("oracle.shed.y", osh.y);
        double d = 0.0;
        for (int i = 0; i < n; ++i) d = std::max(d, std::abs(osh.y[i] - shed_res.y[static_cast<size_t>(i)]));
        s.put("oracle.shed.max_delta", d);
    }
    s.put("converged", std::string(s.converged ? "true" : "false"));
    return out;
}

StageOutput run_edp_command(const ScenarioConfig& cfg, bool with_oracle) {
    StageOutput out;
    RunSummary& s = out.summary;
    s.put("scenario", cfg.name);
    s.put("topology", cfg.topology);
    s.put("total_demand", total_demand(cfg.buses));
    s.put("schedule", cfg.edp.schedule.describe());
    const double umax = compute_u_bound(cfg.loss, cfg.buses).u_max;
    s.put("u_max", umax);
    EdpResult r = run_edp(cfg.buses, cfg.loss, metropolis_weights(cfg.graph), cfg.edp, umax);
    put_edp(s, "edp", r, cfg.buses, cfg.edp.stop);
    if (with_oracle) {
        auto orc = solve_edp_centralized(cfg.buses, cfg.loss);
        s.put("oracle.x", orc.x);
        s.put("oracle.max_delta", (orc.x - r.x).cwiseAbs().maxCoeff());
    }
    s.put("converged", std::string(s.converged ? "true" : "false"));
    out.traces.push_back(r.trace);
    return out;
}

StageOutput run_shed_command(const ScenarioConfig& cfg, double y_tot, bool with_oracle) {
    StageOutput out;
    RunSummary& s = out.summary;
    s.put("scenario", cfg.name);
    s.put("topology", cfg.topology);
    s.put("schedule", cfg.shedding.schedule.describe());
    const auto shares = uniform_shares(cfg, y_tot);
    const auto pa = partition_priorities(cfg.priority);
    const double kappa = cfg.effective_kappa();
    s.put("m", static_cast<long>(pa.m));
    ShedResult r = run_shedding(cfg.shed, pa, shares, kappa, metropolis_weights(cfg.graph), cfg.shedding);
    put_shed(s, "shed", r, y_tot, kappa, cfg.shedding.stop);
    if (with_oracle) {
        auto orc = solve_shedding_centralized(cfg.shed, pa, shares, kappa);
        s.put("oracle.y", orc.y);
        s.put("oracle.z", orc.z);
        double d = 0.0;
        for (int i = 0; i < cfg.n(); ++i) d = std::max(d, std::abs(orc.y[i] - r.y[static_cast<size_t>(i)]));
        s.put("oracle.max_delta", d);
    }
    s.put("converged", std::string(s.converged ? "true" : "false"));
    out.traces.push_back(r.trace);
    return out;
}

StageOutput run_consensus_command(const ScenarioConfig& cfg) {
    StageOutput out;
    RunSummary& s = out.summary;
    s.put("scenario", cfg.name);
    s.put("topology", cfg.topology);
    s.put("epsilon", cfg.epsilon);
    const auto pa = partition_priorities(cfg.priority);
    auto r = run_stage1a(cfg.graph, pa, cfg.epsilon, cfg.edp.trace_stride);
    s.put("m", static_cast<long>(r.m));
    s.put("iterations", r.budget);
    s.put("theta_ss", theta_ss(r.m));
    s.put("theta", r.theta);
    const std::vector<double> umax = distributed_u_max(cfg);
    s.put("u_max.exact", compute_u_bound(cfg.loss, cfg.buses).u_max);
    s.put("u_max.estimates", umax);
    s.put("converged", std::string("true"));
    out.traces.push_back(r.trace);
    return out;
}

StageOutput run_feasibility_command(const ScenarioConfig& cfg) {
    StageOutput out;
    RunSummary& s = out.summary;
    s.put("scenario", cfg.name);
    s.put("topology", cfg.topology);
    s.put("total_demand", total_demand(cfg.buses));
    s.put("tau", cfg.tau);
    s.put("schedule", cfg.feasibility.schedule.describe());
    const std::vector<double> umax(cfg.buses.size(), compute_u_bound(cfg.loss, cfg.buses).u_max);
    EdpResult r = run_feasibility(cfg.buses, cfg.loss, metropolis_weights(cfg.graph), umax, cfg.tau, cfg.feasibility);
    put_edp(s, "feasibility", r, cfg.buses, cfg.feasibility.stop);
    s.put("feasibility.s", r.s);
    s.put("feasibility.total_shed", r.s.sum());
    s.put("feasibility.share_spread", max_spread(r.s));
    auto p1 = solve_p1(cfg.buses, cfg.loss);
    s.put("p1.deliverable", p1.deliverable);
    s.put("p1.shortage", p1.shortage);
    s.put("converged", std::string(s.converged ? "true" : "false"));
    out.traces.push_back(r.trace);
    return out;
}

StageOutput run_oracle_command(const ScenarioConfig& cfg, bool with_shedding, double y_tot) {
    StageOutput out;
    RunSummary& s = out.summary;
    s.put("scenario", cfg.name);
    s.put("total_demand", total_demand(cfg.buses));
    auto p1 = solve_p1(cfg.buses, cfg.loss);
    s.put("p1.deliverable", p1.deliverable);
    s.put("p1.shortage", p1.shortage);
    if (p1.shortage == 0.0) {
        auto o = solve_edp_centralized(cfg.buses, cfg.loss);
        s.put("edp.x", o.x);
        s.put("edp.lambda", o.lambda);
        s.put("edp.cost", o.objective);
        s.put("edp.loss_minus_generation", evaluate_loss(cfg.loss.B, o.x) - o.x.sum());
        s.put("edp.iterations", o.iterations);
        for (const auto& [k, v] : o.kkt_residuals) s.put("edp.kkt." + k, v);
    } else {
        s.put("edp.status", std::string("infeasible (overload)"));
        auto o = solve_p2_centralized(cfg.buses, cfg.loss, cfg.tau);
        s.put("p2.s", o.s);
        s.put("p2.total_shed", o.s.sum());
        for (const auto& [k, v] : o.kkt_residuals) s.put("p2.kkt." + k, v);
    }
    if (with_shedding) {
        const auto shares = uniform_shares(cfg, y_tot);
        const auto pa = partition_priorities(cfg.priority);
        auto o = solve_shedding_centralized(cfg.shed, pa, shares, cfg.effective_kappa());
        s.put("shed.y_tot", y_tot);
        s.put("shed.y", o.y);
        s.put("shed.z", o.z);
        s.put("shed.eta", o.eta);
        s.put("shed.objective", o.objective);
        for (const auto& [k, v] : o.kkt_residuals) s.put("shed.kkt." + k, v);
    }
    s.put("converged", std::string("true"));
    return out;
}

StageOutput run_validate_command(const ScenarioConfig& cfg) {
    StageOutput out;
    RunSummary& s = out.summary;
    s.put("scenario", cfg.name);
    s.put("buses", static_cast<long>(cfg.n()));
    long gens = 0;
    for (const auto& b : cfg.buses) gens += b.is_generator ? 1 : 0;
    s.put("generators", gens);
    s.put("topology", cfg.topology);
    s.put("edges", static_cast<long>(cfg.graph.edges.size()));
    s.put("total_demand", total_demand(cfg.buses));
    s.put("loss.min_eigenvalue", cfg.loss.min_eigenvalue);
    s.put("u_max", compute_u_bound(cfg.loss, cfg.buses).u_max);
    const auto pa = partition_priorities(cfg.priority);
    s.put("m", static_cast<long>(pa.m));
    s.put("kappa", cfg.effective_kappa());
    for (const auto& f : cfg.findings)
        s.put("finding." + f.label, f.message + (f.label == "A6" || cfg.overrides.count(f.label) ? " (allowed)" : ""));
    s.put("valid", std::string("true"));
    return out;
}

} // namespace dd
