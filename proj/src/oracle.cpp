#include "dd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "dd/dual_edp.hpp"
#include "dd/errors.hpp"

namespace dd {

namespace {

inline double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

using Eval = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;
using Project = std::function<void(Eigen::VectorXd&)>;
using Done = std::function<bool(const Eigen::VectorXd&)>;

// Accelerated projected gradient ascent on a concave dual with backtracking and gradient restart.
Eigen::VectorXd fista_maximize(Eigen::VectorXd x, const Eval& eval, const Project& project, const Done& done,
                               long max_iters, long& iters) {
    project(x);
    Eigen::VectorXd y = x, gy(x.size()), gx(x.size()), xn;
    double t = 1.0, L = 1.0;
    iters = 0;
    for (long k = 0; k < max_iters; ++k) {
        ++iters;
        const double qy = eval(y, gy);
        for (;;) {
            xn = y + gy / L;
            project(xn);
            const double qn = eval(xn, gx);
            const Eigen::VectorXd d = xn - y;
            if (qn >= qy + gy.dot(d) - 0.5 * L * d.squaredNorm() - 1e-14 * (1.0 + std::abs(qy))) break;
            L *= 2.0;
            if (L > 1e20) break;
        }
        if (done(xn)) return xn;
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        Eigen::VectorXd yn = xn + ((t - 1.0) / tn) * (xn - x);
        // restart momentum when it points against the ascent direction
        if (gy.dot(xn - x) < 0.0) {
            yn = xn;
            t = 1.0;
        } else {
            t = tn;
        }
        x = xn;
        y = yn;
        L = std::max(L * 0.9, 1e-12);
    }
    return x;
}

struct LossProblem {
    const std::vector<BusSpec>& buses;
    const LossModel& model;
    bool feasibility;
    double tau;
    double s_cap;
    double u_max;

    // eta = (lambda, xi); fills primal and returns the dual value
    double primal(const Eigen::VectorXd& eta, Eigen::VectorXd& x, Eigen::VectorXd& u, Eigen::VectorXd& s) const {
        const long n = static_cast<long>(buses.size());
        const double lambda = eta[0];
        const Eigen::VectorXd xi = eta.tail(n);
        const Eigen::VectorXd coupling = model.R.transpose() * xi;  // sum_j xi_j r_ji
        x.resize(n);
        u.resize(n);
        s.resize(n);
        double q = 0.0;
        for (long i = 0; i < n; ++i) {
            const BusSpec& b = buses[static_cast<size_t>(i)];
            double xv, sv = 0.0;
            if (feasibility) {
                xv = clip((lambda - coupling[i]) / (2.0 * tau), b.x_min, b.x_max);
                sv = clip(lambda / 2.0, 0.0, s_cap);
                q += sv * sv + tau * xv * xv;
            } else {
                xv = b.is_generator ? clip((lambda - b.cost_b - coupling[i]) / (2.0 * b.cost_a), b.x_min, b.x_max) : 0.0;
                q += b.cost_a * xv * xv + b.cost_b * xv;
            }
            const double uv = loss_slack_step(lambda, xi[i], u_max);
            x[i] = xv;
            u[i] = uv;
            s[i] = sv;
            q += lambda * (uv * uv + b.demand - xv - sv) + coupling[i] * xv - xi[i] * uv;
        }
        return q;
    }

    double eval(const Eigen::VectorXd& eta, Eigen::VectorXd& grad) const {
        Eigen::VectorXd x, u, s;
        const double q = primal(eta, x, u, s);
        const long n = x.size();
        grad.resize(n + 1);
        double bal = 0.0;
        for (long i = 0; i < n; ++i) bal += u[i] * u[i] + buses[static_cast<size_t>(i)].demand - x[i] - s[i];
        grad[0] = bal;
        grad.tail(n) = model.R * x - u;
        return q;
    }

    std::map<std::string, double> kkt(const Eigen::VectorXd& eta, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                      const Eigen::VectorXd& s) const {
        const long n = x.size();
        const double lambda = eta[0];
        const Eigen::VectorXd xi = eta.tail(n);
        const Eigen::VectorXd coupling = model.R.transpose() * xi;
        double bal = 0.0, stat = 0.0;
        for (long i = 0; i < n; ++i) {
            const BusSpec& b = buses[static_cast<size_t>(i)];
            bal += u[i] * u[i] + b.demand - x[i] - s[i];
            double gx = feasibility ? 2.0 * tau * x[i] : (b.is_generator ? 2.0 * b.cost_a * x[i] + b.cost_b : 0.0);
            gx += -lambda + coupling[i];
            stat = std::max(stat, std::abs(x[i] - clip(x[i] - gx, b.x_min, b.x_max)));
            const double gu = 2.0 * lambda * u[i] - xi[i];
            stat = std::max(stat, std::abs(u[i] - clip(u[i] - gu, -u_max, u_max)));
            if (feasibility) {
                const double gs = 2.0 * s[i] - lambda;
                stat = std::max(stat, std::abs(s[i] - clip(s[i] - gs, 0.0, s_cap)));
            }
        }
        std::map<std::string, double> r;
        r["stationarity"] = stat;
        r["dual_feasibility"] = std::max(0.0, -lambda);
        r["primal_balance"] = std::max(0.0, bal);
        r["complementarity"] = std::abs(lambda * bal);
        r["coupling"] = (model.R * x - u).cwiseAbs().maxCoeff();
        return r;
    }
};

OracleSolution solve_loss_problem(const LossProblem& P, const OracleOptions& opt, double lambda0) {
    const long n = static_cast<long>(P.buses.size());
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n + 1);
    eta[0] = lambda0;
    auto eval = [&](const Eigen::VectorXd& e, Eigen::VectorXd& g) { return P.eval(e, g); };
    auto project = [](Eigen::VectorXd& e) { e[0] = std::max(0.0, e[0]); };
    auto done = [&](const Eigen::VectorXd& e) {
        Eigen::VectorXd x, u, s;
        P.primal(e, x, u, s);
        auto r = P.kkt(e, x, u, s);
        for (auto& [k, v] : r)
            if (v > opt.tolerance) return false;
        const double obj = P.feasibility ? s.squaredNorm() + P.tau * x.squaredNorm() : total_cost(P.buses, x);
        Eigen::VectorXd g;
        return std::abs(obj - P.eval(e, g)) <= 10.0 * opt.tolerance;
    };
    long iters = 0;
    eta = fista_maximize(eta, eval, project, done, opt.max_iters, iters);

    OracleSolution sol;
    Eigen::VectorXd x, u, s;
    sol.dual_value = P.primal(eta, x, u, s);
    sol.x = x;
    sol.u = u;
    sol.s = s;
    sol.lambda = eta[0];
    sol.xi = eta.tail(n);
    sol.iterations = iters;
    if (P.feasibility) sol.objective = s.squaredNorm() + P.tau * x.squaredNorm();
    else sol.objective = total_cost(P.buses, x);
    sol.kkt_residuals = P.kkt(eta, x, u, s);
    sol.kkt_residuals["balance"] = std::abs(u.squaredNorm() + total_demand(P.buses) - x.sum() - s.sum());
    sol.kkt_residuals["duality_gap"] = std::abs(sol.objective - sol.dual_value);
    if (sol.kkt_residuals["duality_gap"] > 10.0 * opt.tolerance)
        throw NotConverged("oracle duality gap above tolerance after " + std::to_string(iters) + " iterations");
    for (const char* key : {"stationarity", "dual_feasibility", "primal_balance", "complementarity", "coupling"})
        if (sol.kkt_residuals[key] > opt.tolerance)
            throw NotConverged(std::string("oracle did not certify ") + key + " within tolerance after " +
                               std::to_string(iters) + " iterations");
    return sol;
}

} // namespace

OracleSolution solve_edp_centralized(const std::vector<BusSpec>& buses, const LossModel& model,
                                     const OracleOptions& opt) {
    auto [dmax, xm] = max_deliverable(buses, model);
    if (dmax < total_demand(buses) - 1e-12) throw Infeasible("demand exceeds deliverable generation (overload)");
    LossProblem P{buses, model, false, 0.0, 0.0, compute_u_bound(model, buses).u_max};
    double lambda0 = 0.0;
    for (const auto& b : buses)
        if (b.is_generator) lambda0 = std::max(lambda0, 2.0 * b.cost_a * 0.5 * (b.x_min + b.x_max) + b.cost_b);
    return solve_loss_problem(P, opt, std::max(lambda0, 1.0));
}

OracleSolution solve_p2_centralized(const std::vector<BusSpec>& buses, const LossModel& model, double tau,
                                    const OracleOptions& opt) {
    if (!(tau > 0.0)) throw ValidationError("tau", "tau must be positive");
    double s_cap = 0.0;
    if (!buses.empty()) s_cap = 2.0 * total_demand(buses) / static_cast<double>(buses.size());
    LossProblem P{buses, model, true, tau, s_cap, compute_u_bound(model, buses).u_max};
    double lambda0 = 0.0;
    for (const auto& b : buses) lambda0 = std::max(lambda0, 2.0 * tau * b.x_max);
    return solve_loss_problem(P, opt, std::max(lambda0, 1e-3));
}

double shedding_objective(const std::vector<ShedBus>& buses, const PriorityAssignment& pa,
                          const std::vector<double>& s, double kappa, const std::vector<double>& y,
                          const std::vector<double>& z) {
    const int n = static_cast<int>(buses.size());
    double f = 0.0;
    for (int i = 0; i < n; ++i) {
        if (pa.priority[i] == 0) {
            f += 0.5 * buses[i].q * y[i] * y[i] - buses[i].r * y[i];
        } else {
            const double t = n * s[i] / pa.priority[i];
            f += kappa * z[i] * z[i] + (y[i] - t) * (y[i] - t);
        }
    }
    return f;
}

OracleSolution solve_shedding_centralized(const std::vector<ShedBus>& buses, const PriorityAssignment& pa,
                                          const std::vector<double>& s, double kappa, const OracleOptions& opt) {
    const int n = static_cast<int>(buses.size());
    const int m = pa.m;
    double y_tot = 0.0, ymax = 0.0;
    for (int i = 0; i < n; ++i) {
        y_tot += s[i];
        ymax += buses[i].y_max;
    }
    if (!(ymax > y_tot)) throw InfeasibleShedding("Assumption 8: sum y_max does not exceed y_tot");

    std::vector<ShedAgentState> agents;
    for (int i = 0; i < n; ++i) agents.push_back(make_shed_agent(i, n, pa.priority[i], buses[i], kappa, s[i], m));

    auto primal = [&](const Eigen::VectorXd& eta, std::vector<double>& y, std::vector<double>& z) {
        std::vector<double> phi(eta.data(), eta.data() + eta.size());
        y.resize(n);
        z.resize(n);
        for (int i = 0; i < n; ++i) {
            auto [zi, yi] = shed_primal_step(agents[i], phi, m);
            y[i] = yi;
            z[i] = zi;
        }
    };
    auto eval = [&](const Eigen::VectorXd& eta, Eigen::VectorXd& grad) {
        std::vector<double> y, z;
        primal(eta, y, z);
        auto sums = shed_constraint_sums(pa, s, y, z);
        grad = Eigen::Map<Eigen::VectorXd>(sums.data(), m + 1);
        return shedding_objective(buses, pa, s, kappa, y, z) + grad.dot(eta);
    };
    auto residual = [&](const Eigen::VectorXd& eta) {
        Eigen::VectorXd g;
        eval(eta, g);
        return g.cwiseAbs().maxCoeff();
    };
    auto done = [&](const Eigen::VectorXd& eta) {
        if (residual(eta) > opt.tolerance) return false;
        std::vector<double> y, z;
        primal(eta, y, z);
        Eigen::VectorXd g;
        return std::abs(shedding_objective(buses, pa, s, kappa, y, z) - eval(eta, g)) <= 10.0 * opt.tolerance;
    };
    long iters = 0;
    Eigen::VectorXd eta = fista_maximize(Eigen::VectorXd::Zero(m + 1), eval, [](Eigen::VectorXd&) {}, done,
                                         opt.max_iters, iters);
    OracleSolution sol;
    std::vector<double> y, z;
    primal(eta, y, z);
    Eigen::VectorXd g;
    sol.dual_value = eval(eta, g);
    sol.y = Eigen::Map<Eigen::VectorXd>(y.data(), n);
    sol.z = Eigen::Map<Eigen::VectorXd>(z.data(), n);
    sol.eta = eta;
    sol.iterations = iters;
    sol.objective = shedding_objective(buses, pa, s, kappa, y, z);
    sol.kkt_residuals["equality"] = g.cwiseAbs().maxCoeff();
    sol.kkt_residuals["duality_gap"] = std::abs(sol.objective - sol.dual_value);
    if (sol.kkt_residuals["equality"] > opt.tolerance || sol.kkt_residuals["duality_gap"] > 10.0 * opt.tolerance)
        throw NotConverged("shedding oracle did not certify the equality constraints after " +
                           std::to_string(iters) + " iterations");
    return sol;
}

namespace {

struct GridAxes {
    std::vector<int> vars;
    std::vector<std::vector<double>> values;
    long points = 1;
};

std::vector<double> axis(double lo, double hi, double h) {
    std::vector<double> v;
    const long cnt = static_cast<long>(std::floor((hi - lo) / h + 1e-9));
    for (long k = 0; k <= cnt; ++k) v.push_back(lo + k * h);
    if (hi - v.back() > 1e-12) v.push_back(hi);
    return v;
}

void check_size(GridAxes& g) {
    double total = 1.0;
    for (const auto& v : g.values) total *= static_cast<double>(v.size());
    if (total > 1e8) throw GridTooLarge("grid has " + std::to_string(static_cast<long long>(total)) + " points");
    g.points = static_cast<long>(total);
}

// visits every grid point; f receives the current assignment
void scan(const GridAxes& g, std::vector<double>& point, const std::function<void()>& f, size_t depth = 0) {
    if (depth == g.vars.size()) {
        f();
        return;
    }
    for (double v : g.values[depth]) {
        point[static_cast<size_t>(g.vars[depth])] = v;
        scan(g, point, f, depth + 1);
    }
}

} // namespace

GridResult brute_force_grid_edp(const std::vector<BusSpec>& buses, const LossModel& model, double resolution) {
    if (!(resolution > 0.0)) throw ValidationError("resolution", "grid resolution must be positive");
    GridAxes g;
    const long n = static_cast<long>(buses.size());
    for (long i = 0; i < n; ++i)
        if (buses[static_cast<size_t>(i)].is_generator && buses[static_cast<size_t>(i)].x_max > buses[static_cast<size_t>(i)].x_min) {
            g.vars.push_back(static_cast<int>(i));
            g.values.push_back(axis(buses[static_cast<size_t>(i)].x_min, buses[static_cast<size_t>(i)].x_max, resolution));
        }
    if (g.vars.size() > 4) throw GridTooLarge("brute force grid supports at most 4 decision buses");
    check_size(g);

    GridResult res;
    res.points = g.points;
    const Eigen::VectorXd hi = upper_bounds(buses);
    // |d residual / dx_i| <= |1 - 2 (B x)_i| <= 1 + 2 |B| x_max
    const Eigen::VectorXd bx = model.B.cwiseAbs() * hi;
    double rl = 0.0, ol = 0.0;
    for (int i : g.vars) {
        rl += 1.0 + 2.0 * bx[i];
        const BusSpec& b = buses[static_cast<size_t>(i)];
        ol += std::abs(2.0 * b.cost_a * b.x_max + b.cost_b);
    }
    res.constraint_slack = 0.5 * resolution * rl;
    res.objective_slack = resolution * ol;
    const double sd = total_demand(buses);

    std::vector<double> point(static_cast<size_t>(n), 0.0);
    for (long i = 0; i < n; ++i) point[static_cast<size_t>(i)] = buses[static_cast<size_t>(i)].is_generator ? buses[static_cast<size_t>(i)].x_min : 0.0;
    Eigen::Map<Eigen::VectorXd> xv(point.data(), n);
    res.objective = std::numeric_limits<double>::infinity();
    scan(g, point, [&] {
        const double r = xv.dot(model.B * xv) + sd - xv.sum();
        if (r > res.constraint_slack) return;
        const double c = total_cost(buses, xv);
        if (c < res.objective) {
            res.objective = c;
            res.x = point;
            res.found = true;
        }
    });
    return res;
}

GridResult brute_force_grid_shedding(const std::vector<ShedBus>& buses, const PriorityAssignment& pa,
                                     const std::vector<double>& s, double kappa, double resolution) {
    if (!(resolution > 0.0)) throw ValidationError("resolution", "grid resolution must be positive");
    const int n = static_cast<int>(buses.size());
    const int m = pa.m;
    GridAxes g;
    for (int i = 0; i < n; ++i)
        if (buses[i].y_max > 0.0) {
            g.vars.push_back(i);
            g.values.push_back(axis(0.0, buses[i].y_max, resolution));
        }
    if (g.vars.size() > 4) throw GridTooLarge("brute force grid supports at most 4 decision buses");
    check_size(g);

    GridResult res;
    res.points = g.points;
    res.constraint_slack = 0.5 * resolution * static_cast<double>(g.vars.size());
    double ol = 0.0;
    for (int i : g.vars) {
        if (pa.priority[i] == 0) ol += std::abs(buses[i].q * buses[i].y_max) + std::abs(buses[i].r);
        else ol += 2.0 * std::max(buses[i].y_max, n * s[i] / pa.priority[i]);
    }
    res.objective_slack = resolution * ol;
    double s_tot = 0.0;
    for (double v : s) s_tot += v;

    std::vector<double> y(static_cast<size_t>(n), 0.0), z(static_cast<size_t>(n), 0.0);
    res.objective = std::numeric_limits<double>::infinity();
    scan(g, y, [&] {
        std::fill(z.begin(), z.end(), 0.0);
        double reg = 0.0;
        for (int i : pa.regular) reg += y[static_cast<size_t>(i)];
        double Z = s_tot;
        if (m == 0) {
            if (std::abs(Z - reg) > res.constraint_slack) return;
        } else {
            for (int l = 1; l <= m; ++l) {
                for (int i : pa.rungs[l - 1]) Z -= y[static_cast<size_t>(i)];
                if (Z < 0.0) return;
                const double zi = Z / static_cast<double>(pa.rungs[l - 1].size());
                for (int i : pa.rungs[l - 1]) {
                    if (zi > n * s[static_cast<size_t>(i)]) return;
                    z[static_cast<size_t>(i)] = zi;
                }
            }
            if (std::abs(Z - reg) > res.constraint_slack) return;
        }
        const double f = shedding_objective(buses, pa, s, kappa, y, z);
        if (f < res.objective) {
            res.objective = f;
            res.y = y;
            res.z = z;
            res.found = true;
        }
    });
    return res;
}

} // namespace dd
