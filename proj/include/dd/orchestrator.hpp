#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dd/consensus.hpp"
#include "dd/dual_edp.hpp"
#include "dd/errors.hpp"
#include "dd/feasibility.hpp"
#include "dd/oracle.hpp"
#include "dd/priority_shed.hpp"
#include "dd/scenario.hpp"
#include "dd/trace.hpp"

namespace dd {

// ordered key = value report
struct RunSummary {
    std::vector<std::pair<std::string, std::string>> entries;
    bool converged = true;

    void put(const std::string& key, const std::string& value);
    void put(const std::string& key, double value);
    void put(const std::string& key, long value);
    void put(const std::string& key, const Eigen::VectorXd& values);
    void put(const std::string& key, const std::vector<double>& values);
    const std::string* get(const std::string& key) const;
    std::string text() const;
};

void emit_summary(const RunSummary& summary, const std::string& path);

struct StageOutput {
    RunSummary summary;
    std::vector<IterationTrace> traces;
};

struct Stage1aResult {
    int m = 0;
    long budget = 0;
    std::vector<double> theta;
    IterationTrace trace;
};

// encode, run the accelerated consensus for the budget, decode on every agent
Stage1aResult run_stage1a(const Graph& g, const PriorityAssignment& pa, double epsilon, long trace_stride = 100);

// every agent's estimate of u_max
std::vector<double> distributed_u_max(const ScenarioConfig& cfg);

struct Algorithm1Options {
    bool with_oracle = false;
};

StageOutput run_algorithm1(const ScenarioConfig& cfg, const Algorithm1Options& opt = {});

StageOutput run_edp_command(const ScenarioConfig& cfg, bool with_oracle);
StageOutput run_shed_command(const ScenarioConfig& cfg, double y_tot, bool with_oracle);
StageOutput run_consensus_command(const ScenarioConfig& cfg);
StageOutput run_feasibility_command(const ScenarioConfig& cfg);
StageOutput run_oracle_command(const ScenarioConfig& cfg, bool with_shedding, double y_tot);
StageOutput run_validate_command(const ScenarioConfig& cfg);

// error tagged with the Algorithm 1 stage it came from
struct StageError : Error {
    StageError(const std::string& stage, int exit_code, const std::string& what)
        : Error("stage " + stage + ": " + what), stage(stage), exit_code(exit_code) {}
    std::string stage;
    int exit_code;
};

} // namespace dd
