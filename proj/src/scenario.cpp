#include "dd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "dd/errors.hpp"

namespace dd {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

double to_double(const std::string& tok, int line, const std::string& field) {
    try {
        size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, field, "'" + tok + "' is not a number");
    }
}

long to_long(const std::string& tok, int line, const std::string& field) {
    double v = to_double(tok, line, field);
    if (v != std::floor(v)) throw ParseError(line, field, "'" + tok + "' is not an integer");
    return static_cast<long>(v);
}

// "7" or "7..30"; 1-based inclusive
std::pair<int, int> bus_range(const std::string& tok, int line, int n) {
    auto dots = tok.find("..");
    int a, b;
    if (dots == std::string::npos) {
        a = b = static_cast<int>(to_long(tok, line, "bus"));
    } else {
        a = static_cast<int>(to_long(tok.substr(0, dots), line, "bus"));
        b = static_cast<int>(to_long(tok.substr(dots + 2), line, "bus"));
    }
    if (a < 1 || b > n || a > b)
        throw ParseError(line, "bus", "'" + tok + "' is outside 1.." + std::to_string(n));
    return {a, b};
}

std::string column_name(const std::string& c) { return c.substr(0, c.find('[')); }

struct Line {
    int no;
    std::string text;
};

struct Section {
    std::string name;
    int line = 0;
    std::map<std::string, std::pair<int, std::string>> keys;
    std::vector<std::pair<int, std::string>> repeated;  // row = / edges = lines in order
    std::vector<std::string> columns;
    int columns_line = 0;
    std::vector<Line> rows;
};

void expect_columns(const Section& s, const std::vector<std::string>& want) {
    if (s.columns.empty()) throw ParseError(s.line, "columns", "section [" + s.name + "] needs a columns line");
    std::vector<std::string> got;
    for (const auto& c : s.columns) got.push_back(column_name(c));
    if (got != want) {
        std::string w;
        for (const auto& c : want) w += (w.empty() ? "" : " ") + c;
        throw ParseError(s.columns_line, "columns", "expected columns: " + w);
    }
}

StepSchedule parse_schedule(const std::string& v, int line, const std::string& field) {
    auto t = split_ws(v);
    if (t.size() != 3) throw ParseError(line, field, "expected '<kind> <c> <exponent|shift>'");
    StepSchedule s;
    try {
        s.kind = parse_schedule_kind(t[0]);
    } catch (const ValidationError&) {
        throw ParseError(line, field, "unknown schedule kind '" + t[0] + "'");
    }
    s.c = to_double(t[1], line, field);
    if (s.kind == StepSchedule::Kind::HarmonicPower) s.exponent = to_double(t[2], line, field);
    else s.shift = to_double(t[2], line, field);
    return s;
}

StopRule parse_stop(const std::string& v, int line, const std::string& field, StopRule r) {
    auto t = split_ws(v);
    if (t.size() != 4 && t.size() != 5)
        throw ParseError(line, field, "expected '<max_iters> <residual> <change> <window> [spread]'");
    r.max_iters = to_long(t[0], line, field);
    r.residual_tol = to_double(t[1], line, field);
    r.change_tol = to_double(t[2], line, field);
    r.window = to_long(t[3], line, field);
    if (r.window <= 0) throw ParseError(line, field, "window must be positive");
    if (t.size() == 5) r.spread_tol = to_double(t[4], line, field);
    return r;
}

} // namespace

double ScenarioConfig::effective_kappa() const {
    if (kappa > 0.0) return kappa;
    return default_kappa(shed, partition_priorities(priority));
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
    std::vector<Section> sections;
    std::istringstream is(text);
    std::string raw;
    int no = 0;
    while (std::getline(is, raw)) {
        ++no;
        auto hash = raw.find('#');
        std::string l = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (l.empty()) continue;
        if (l.front() == '[') {
            if (l.back() != ']') throw ParseError(no, "section", "unterminated section header");
            Section s;
            s.name = trim(l.substr(1, l.size() - 2));
            s.line = no;
            for (const auto& o : sections)
                if (o.name == s.name) throw ParseError(no, "section", "duplicate section [" + s.name + "]");
            sections.push_back(s);
            continue;
        }
        if (sections.empty()) throw ParseError(no, "section", "content before the first section header");
        Section& s = sections.back();
        auto eq = l.find('=');
        if (eq != std::string::npos) {
            std::string key = trim(l.substr(0, eq)), val = trim(l.substr(eq + 1));
            if (key == "columns") {
                s.columns = split_ws(val);
                s.columns_line = no;
            } else if (key == "row" || key == "edges") {
                s.repeated.push_back({no, key + " " + val});
            } else {
                if (s.keys.count(key)) throw ParseError(no, key, "duplicate key");
                s.keys[key] = {no, val};
            }
        } else {
            s.rows.push_back({no, l});
        }
    }

    auto find = [&](const std::string& name) -> const Section* {
        for (const auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    };
    static const std::set<std::string> known = {"case", "generators", "demand", "loss", "graph", "shedding",
                                                "feasibility", "consensus", "schedule", "stop", "output",
                                                "overrides"};
    for (const auto& s : sections)
        if (!known.count(s.name)) throw ParseError(s.line, "section", "unknown section [" + s.name + "]");
    auto require_keys = [](const Section& s, const std::set<std::string>& allowed) {
        for (const auto& [k, v] : s.keys)
            if (!allowed.count(k)) throw ParseError(v.first, k, "unknown key in [" + s.name + "]");
    };

    ScenarioConfig cfg;
    const Section* cs = find("case");
    if (!cs) throw ParseError(0, "case", origin + ": missing [case] section");
    require_keys(*cs, {"name", "buses"});
    if (!cs->keys.count("buses")) throw ParseError(cs->line, "buses", "missing bus count");
    auto [bl, bv] = cs->keys.at("buses");
    const long n = to_long(bv, bl, "buses");
    if (n <= 0 || n > 100000) throw ParseError(bl, "buses", "bus count must be positive");
    cfg.name = cs->keys.count("name") ? cs->keys.at("name").second : origin;
    cfg.buses.resize(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) cfg.buses[static_cast<size_t>(i)].index = static_cast<int>(i + 1);
    const int N = static_cast<int>(n);

    if (const Section* s = find("generators")) {
        require_keys(*s, {});
        expect_columns(*s, {"bus", "x_min", "x_max", "a", "b"});
        std::set<int> seen;
        for (const auto& r : s->rows) {
            auto t = split_ws(r.text);
            if (t.size() != 5) throw ParseError(r.no, "generators", "expected 5 values");
            auto [a, b] = bus_range(t[0], r.no, N);
            for (int i = a; i <= b; ++i) {
                if (!seen.insert(i).second) throw ParseError(r.no, "bus", "generator " + std::to_string(i) + " listed twice");
                BusSpec& bs = cfg.buses[static_cast<size_t>(i - 1)];
                bs.is_generator = true;
                bs.x_min = to_double(t[1], r.no, "x_min");
                bs.x_max = to_double(t[2], r.no, "x_max");
                bs.cost_a = to_double(t[3], r.no, "a");
                bs.cost_b = to_double(t[4], r.no, "b");
            }
        }
    }
    if (const Section* s = find("demand")) {
        require_keys(*s, {});
        expect_columns(*s, {"bus", "d"});
        for (const auto& r : s->rows) {
            auto t = split_ws(r.text);
            if (t.size() != 2) throw ParseError(r.no, "demand", "expected 2 values");
            auto [a, b] = bus_range(t[0], r.no, N);
            double d = to_double(t[1], r.no, "d");
            for (int i = a; i <= b; ++i) cfg.buses[static_cast<size_t>(i - 1)].demand = d;
        }
    }

    cfg.B = Eigen::MatrixXd::Zero(N, N);
    if (const Section* s = find("loss")) {
        require_keys(*s, {"scale", "buses", "b0", "b00"});
        double scale = 1.0;
        if (s->keys.count("scale")) scale = to_double(s->keys.at("scale").second, s->keys.at("scale").first, "scale");
        for (const char* k : {"b0", "b00"}) {
            if (!s->keys.count(k)) continue;
            auto [ln, v] = s->keys.at(k);
            for (const auto& tok : split_ws(v))
                if (to_double(tok, ln, k) != 0.0) throw ParseError(ln, k, "nonzero linear/constant loss terms are not supported");
        }
        std::vector<int> idx;
        if (s->keys.count("buses")) {
            auto [ln, v] = s->keys.at("buses");
            for (const auto& tok : split_ws(v)) {
                auto [a, b] = bus_range(tok, ln, N);
                for (int i = a; i <= b; ++i) idx.push_back(i - 1);
            }
        } else {
            for (int i = 0; i < N; ++i) idx.push_back(i);
        }
        if (s->repeated.size() != idx.size())
            throw ParseError(s->line, "row", "expected " + std::to_string(idx.size()) + " rows, found " +
                                                 std::to_string(s->repeated.size()));
        for (size_t r = 0; r < idx.size(); ++r) {
            auto [ln, text] = s->repeated[r];
            auto t = split_ws(text);
            if (t.empty() || t[0] != "row") throw ParseError(ln, "row", "edges line in [loss]");
            if (t.size() - 1 != idx.size())
                throw ParseError(ln, "row", "expected " + std::to_string(idx.size()) + " entries");
            for (size_t c = 0; c < idx.size(); ++c) cfg.B(idx[r], idx[c]) = scale * to_double(t[c + 1], ln, "row");
        }
        if (!s->rows.empty()) throw ParseError(s->rows[0].no, "loss", "unexpected line");
    }

    std::vector<std::pair<int, int>> edges;
    if (const Section* s = find("graph")) {
        require_keys(*s, {"topology"});
        if (s->keys.count("topology")) cfg.topology = s->keys.at("topology").second;
        for (auto [ln, text] : s->repeated) {
            auto t = split_ws(text);
            if (t.empty() || t[0] != "edges") throw ParseError(ln, "edges", "row line in [graph]");
            for (size_t k = 1; k < t.size(); ++k) {
                auto dash = t[k].find('-');
                if (dash == std::string::npos) throw ParseError(ln, "edges", "edge '" + t[k] + "' must look like i-j");
                int a = static_cast<int>(to_long(t[k].substr(0, dash), ln, "edges"));
                int b = static_cast<int>(to_long(t[k].substr(dash + 1), ln, "edges"));
                edges.push_back({a - 1, b - 1});
            }
        }
        if (cfg.topology == "edges" && edges.empty()) throw ParseError(s->line, "edges", "topology 'edges' needs edge lines");
        if (cfg.topology != "edges" && !edges.empty()) throw ParseError(s->line, "edges", "edge lines need topology = edges");
        if (cfg.topology != "edges" && cfg.topology != "complete" && cfg.topology != "ring" && cfg.topology != "path")
            throw ParseError(s->keys.at("topology").first, "topology", "unknown topology '" + cfg.topology + "'");
    }
    try {
        if (cfg.topology == "complete") cfg.graph = complete_graph(N);
        else if (cfg.topology == "ring") cfg.graph = ring_graph(N);
        else if (cfg.topology == "path") cfg.graph = path_graph(N);
        else cfg.graph = build_graph(N, edges);
    } catch (const InvalidEdge& e) {
        throw ValidationError("A1", e.what());
    } catch (const DisconnectedGraph& e) {
        throw ValidationError("A1", e.what());
    }

    cfg.priority.assign(static_cast<size_t>(N), 0);
    cfg.shed.assign(static_cast<size_t>(N), ShedBus{});
    if (const Section* s = find("shedding")) {
        require_keys(*s, {"kappa", "y_tot"});
        if (s->keys.count("kappa")) cfg.kappa = to_double(s->keys.at("kappa").second, s->keys.at("kappa").first, "kappa");
        if (s->keys.count("y_tot")) {
            cfg.y_tot = to_double(s->keys.at("y_tot").second, s->keys.at("y_tot").first, "y_tot");
            cfg.y_tot_set = true;
        }
        if (!s->rows.empty()) expect_columns(*s, {"bus", "priority", "y_max", "q", "r"});
        for (const auto& r : s->rows) {
            auto t = split_ws(r.text);
            if (t.size() != 5) throw ParseError(r.no, "shedding", "expected 5 values");
            auto [a, b] = bus_range(t[0], r.no, N);
            long p = to_long(t[1], r.no, "priority");
            if (p < 0) throw ParseError(r.no, "priority", "priority must be 0 (regular) or positive");
            for (int i = a; i <= b; ++i) {
                cfg.priority[static_cast<size_t>(i - 1)] = static_cast<int>(p);
                ShedBus& sb = cfg.shed[static_cast<size_t>(i - 1)];
                sb.y_max = to_double(t[2], r.no, "y_max");
                if (t[3] != "-") sb.q = to_double(t[3], r.no, "q");
                if (t[4] != "-") sb.r = to_double(t[4], r.no, "r");
                if (p == 0 && (t[3] == "-" || t[4] == "-"))
                    throw ParseError(r.no, "q", "regular buses need q and r");
            }
        }
    }
    if (const Section* s = find("feasibility")) {
        require_keys(*s, {"tau"});
        if (s->keys.count("tau")) cfg.tau = to_double(s->keys.at("tau").second, s->keys.at("tau").first, "tau");
    }
    if (const Section* s = find("consensus")) {
        require_keys(*s, {"epsilon", "u_max_epsilon"});
        if (s->keys.count("epsilon")) cfg.epsilon = to_double(s->keys.at("epsilon").second, s->keys.at("epsilon").first, "epsilon");
        if (s->keys.count("u_max_epsilon"))
            cfg.u_max_epsilon = to_double(s->keys.at("u_max_epsilon").second, s->keys.at("u_max_epsilon").first, "u_max_epsilon");
    }
    cfg.feasibility.schedule = StepSchedule::harmonic_power(1.0, 0.6);
    cfg.feasibility.stop = StopRule{2000000, 1e-4, 1e-6, 100, 1e-3};
    if (const Section* s = find("schedule")) {
        require_keys(*s, {"edp", "shed", "feasibility"});
        for (auto& [k, v] : s->keys) {
            StepSchedule sch = parse_schedule(v.second, v.first, k);
            if (k == "edp") cfg.edp.schedule = sch;
            else if (k == "shed") cfg.shedding.schedule = sch;
            else cfg.feasibility.schedule = sch;
        }
    }
    if (const Section* s = find("stop")) {
        require_keys(*s, {"edp", "shed", "feasibility"});
        for (auto& [k, v] : s->keys) {
            StopRule& dst = k == "edp" ? cfg.edp.stop : k == "shed" ? cfg.shedding.stop : cfg.feasibility.stop;
            dst = parse_stop(v.second, v.first, k, dst);
        }
    }
    if (const Section* s = find("output")) {
        require_keys(*s, {"trace_stride"});
        if (s->keys.count("trace_stride")) {
            long st = to_long(s->keys.at("trace_stride").second, s->keys.at("trace_stride").first, "trace_stride");
            if (st <= 0) throw ParseError(s->keys.at("trace_stride").first, "trace_stride", "must be positive");
            cfg.edp.trace_stride = cfg.feasibility.trace_stride = cfg.shedding.trace_stride = st;
        }
    }
    if (const Section* s = find("overrides")) {
        require_keys(*s, {"allow"});
        if (s->keys.count("allow"))
            for (const auto& t : split_ws(s->keys.at("allow").second)) cfg.overrides.insert(t);
    }
    validate_scenario(cfg);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open scenario " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scenario(ss.str(), path);
}

void validate_scenario(ScenarioConfig& cfg) {
    const int n = cfg.n();
    for (const auto& b : cfg.buses) {
        const std::string who = "bus " + std::to_string(b.index);
        if (b.demand < 0.0) throw ValidationError("A5", who + " has negative demand");
        if (b.is_generator) {
            if (!(b.x_min >= 0.0 && b.x_min < b.x_max)) throw ValidationError("A5", who + " needs 0 <= x_min < x_max");
        } else if (b.x_min != 0.0 || b.x_max != 0.0 || b.cost_a != 0.0 || b.cost_b != 0.0) {
            throw ValidationError("A5", who + " has no generator but nonzero limits or costs");
        }
    }
    if (cfg.graph.n != n) throw ValidationError("A1", "graph size differs from bus count");
    if ((cfg.B - cfg.B.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, cfg.B.cwiseAbs().maxCoeff()))
        throw ValidationError("A2", "loss matrix is not symmetric");
    try {
        cfg.loss = factor_loss_matrix(cfg.B);
    } catch (const NotPositiveSemidefinite& e) {
        throw ValidationError("A2", e.what());
    }
    for (size_t i = 0; i < cfg.shed.size(); ++i) {
        if (cfg.shed[i].y_max < 0.0) throw ValidationError("shedding", "bus " + std::to_string(i + 1) + " has negative y_max");
        if (cfg.priority[i] == 0 && !(cfg.shed[i].q > 0.0))
            throw ValidationError("A7", "bus " + std::to_string(i + 1) + " shedding cost is not strongly convex");
    }
    try {
        partition_priorities(cfg.priority);
    } catch (const EmptyPriorityLevel& e) {
        throw ValidationError("priority", e.what());
    }
    if (cfg.kappa != 0.0 && cfg.kappa < 1.0) throw ValidationError("kappa", "kappa must be at least 1");
    if (!(cfg.tau > 0.0)) throw ValidationError("tau", "tau must be positive");
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5)) throw ValidationError("epsilon", "epsilon must lie in (0, 0.5)");
    for (const StepSchedule* s : {&cfg.edp.schedule, &cfg.feasibility.schedule, &cfg.shedding.schedule}) s->validate();
    if (cfg.y_tot_set) uniform_shares(cfg, cfg.y_tot);

    cfg.findings = check_power_assumptions(cfg.buses, cfg.loss);
    for (const auto& f : cfg.findings) {
        if (f.label == "A6" || cfg.overrides.count(f.label)) continue;
        throw ValidationError(f.label, f.message);
    }
}

void set_total_demand(ScenarioConfig& cfg, double total) {
    const double cur = total_demand(cfg.buses);
    if (!(cur > 0.0)) throw ValidationError("demand", "cannot rescale a scenario with zero total demand");
    if (!(total >= 0.0)) throw ValidationError("demand", "total demand must be nonnegative");
    const double f = total / cur;
    for (auto& b : cfg.buses) b.demand *= f;
    validate_scenario(cfg);
}

std::vector<double> uniform_shares(const ScenarioConfig& cfg, double y_tot) {
    double ymax = 0.0;
    for (const auto& s : cfg.shed) ymax += s.y_max;
    if (!(ymax > y_tot)) {
        std::ostringstream os;
        os << "sum y_max = " << ymax << " does not exceed y_tot = " << y_tot;
        throw ValidationError("Assumption 8", os.str());
    }
    if (y_tot < 0.0) throw ValidationError("shedding", "y_tot must be nonnegative");
    return std::vector<double>(cfg.buses.size(), y_tot / static_cast<double>(cfg.buses.size()));
}

} // namespace dd
