// ddsim: command-line driver for the distributed dispatch simulator.
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dd/errors.hpp"
#include "dd/orchestrator.hpp"
#include "dd/scenario.hpp"

namespace {

struct Common {
    std::string scenario;
    std::string trace;
    std::string summary;
    long max_iters = -1;
    double tol = -1.0;
    long seed = 0;
    double total_demand = -1.0;
    double y_tot = -1.0;
    bool oracle = false;
};

void add_common(CLI::App* sub, Common& c, bool demand, bool shed) {
    sub->add_option("--scenario", c.scenario, "scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--trace", c.trace, "trace CSV path (multi-stage runs add .<stage> before .csv)");
    sub->add_option("--summary", c.summary, "summary path (default: stdout)");
    sub->add_option("--max-iters", c.max_iters, "override every stage's iteration cap");
    sub->add_option("--tol", c.tol, "override every stage's residual tolerance");
    sub->add_option("--seed", c.seed, "seed for randomized scenario generation (solvers are deterministic)");
    if (demand) sub->add_option("--total-demand", c.total_demand, "rescale demands to this total [MW]");
    if (shed) sub->add_option("--y-tot", c.y_tot, "total load to shed [MW]");
}

std::string stage_path(const std::string& base, const std::string& stage) {
    auto dot = base.rfind('.');
    if (dot == std::string::npos || base.find('/', dot) != std::string::npos) return base + "." + stage;
    return base.substr(0, dot) + "." + stage + base.substr(dot);
}

int finish(const dd::StageOutput& out, const Common& c) {
    dd::RunSummary s = out.summary;
    s.put("seed", c.seed);
    if (!c.trace.empty()) {
        if (out.traces.size() == 1) dd::emit_trace(out.traces[0], c.trace);
        else
            for (const auto& t : out.traces) dd::emit_trace(t, stage_path(c.trace, t.stage));
    }
    if (c.summary.empty()) std::cout << s.text();
    else dd::emit_summary(s, c.summary);
    return s.converged ? 0 : 3;
}

dd::ScenarioConfig load(const Common& c) {
    auto cfg = dd::load_scenario(c.scenario);
    if (c.total_demand >= 0.0) dd::set_total_demand(cfg, c.total_demand);
    for (dd::StopRule* r : {&cfg.edp.stop, &cfg.feasibility.stop, &cfg.shedding.stop}) {
        if (c.max_iters > 0) r->max_iters = c.max_iters;
        if (c.tol > 0.0) r->residual_tol = c.tol;
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed economic dispatch with losses, priority load shedding and feasibility restoration"};
    app.require_subcommand(1);
    Common c;

    auto* run = app.add_subcommand("run", "all stages: find m, estimate shares, joint EDP + shedding");
    add_common(run, c, true, false);
    run->add_flag("--oracle", c.oracle, "report deltas against the centralized solutions");
    auto* edp = app.add_subcommand("edp", "distributed economic dispatch only");
    add_common(edp, c, true, false);
    edp->add_flag("--oracle", c.oracle, "report deltas against the centralized solution");
    auto* shed = app.add_subcommand("shed", "distributed priority-considered load shedding only");
    add_common(shed, c, false, true);
    shed->add_flag("--oracle", c.oracle, "report deltas against the centralized solution");
    auto* cons = app.add_subcommand("consensus", "priority-count discovery and u_max averaging");
    add_common(cons, c, false, false);
    auto* feas = app.add_subcommand("feasibility", "distributed shed-share estimation");
    add_common(feas, c, true, false);
    auto* orc = app.add_subcommand("oracle", "centralized reference solutions");
    add_common(orc, c, true, true);
    auto* val = app.add_subcommand("validate", "parse and check a scenario");
    add_common(val, c, true, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const dd::ScenarioConfig cfg = load(c);
        if (*run) return finish(dd::run_algorithm1(cfg, {c.oracle}), c);
        if (*edp) return finish(dd::run_edp_command(cfg, c.oracle), c);
        if (*shed) {
            double y = c.y_tot >= 0.0 ? c.y_tot : cfg.y_tot;
            if (c.y_tot < 0.0 && !cfg.y_tot_set)
                throw dd::ValidationError("shedding", "no y_tot given (use --y-tot or [shedding] y_tot)");
            return finish(dd::run_shed_command(cfg, y, c.oracle), c);
        }
        if (*cons) return finish(dd::run_consensus_command(cfg), c);
        if (*feas) return finish(dd::run_feasibility_command(cfg), c);
        if (*orc) {
            bool with_shed = c.y_tot >= 0.0 || cfg.y_tot_set;
            return finish(dd::run_oracle_command(cfg, with_shed, c.y_tot >= 0.0 ? c.y_tot : cfg.y_tot), c);
        }
        return finish(dd::run_validate_command(cfg), c);
    } catch (const dd::StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code;
    } catch (const dd::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const dd::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const dd::InfeasibleShedding& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const dd::EmptyPriorityLevel& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const dd::Infeasible& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const dd::NotConverged& e) {
        std::cerr << "not converged: " << e.what() << "\n";
        return 3;
    } catch (const dd::Undecodable& e) {
        std::cerr << "not converged: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
