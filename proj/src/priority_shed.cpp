#include "dd/priority_shed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dd/errors.hpp"

namespace dd {

namespace {

inline double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// writes g_i into out[0..m]
inline void constraint_into(int priority, double s, double z, double y, int m, double* out) {
    std::fill(out, out + m + 1, 0.0);
    if (m == 0) {
        out[0] = s - y;
        return;
    }
    out[0] = s;
    if (priority == 0) {
        out[m] = -y;
        return;
    }
    const int l = priority;
    if (l == 1) out[0] = s - y - z;
    else out[l - 1] = -y - z;
    out[l] = z;  // nu = l+1, or the last component when l = m
}

inline void primal_into(int priority, int n, double s, double y_max, double q, double r, double kappa,
                        const double* phi, int m, double& z, double& y) {
    if (priority == 0) {
        z = 0.0;
        y = clip((r + phi[m]) / q, 0.0, y_max);
        return;
    }
    const int l = priority;
    const double target = n * s / l;
    y = clip(target + phi[l - 1] / 2.0, 0.0, y_max);
    z = clip((phi[l - 1] - phi[l]) / (2.0 * kappa), 0.0, std::max(0.0, n * s));
}

} // namespace

PriorityAssignment partition_priorities(const std::vector<int>& priorities) {
    PriorityAssignment pa;
    pa.priority = priorities;
    for (size_t i = 0; i < priorities.size(); ++i) {
        if (priorities[i] < 0) throw ValidationError("priority", "bus " + std::to_string(i + 1) + " has negative priority");
        pa.m = std::max(pa.m, priorities[i]);
    }
    pa.rungs.assign(pa.m, {});
    for (size_t i = 0; i < priorities.size(); ++i) {
        if (priorities[i] > 0) pa.rungs[priorities[i] - 1].push_back(static_cast<int>(i));
        else pa.regular.push_back(static_cast<int>(i));
    }
    for (int l = 1; l <= pa.m; ++l)
        if (pa.rungs[l - 1].empty()) throw EmptyPriorityLevel("priority level " + std::to_string(l) + " has no buses");
    return pa;
}

ShedAgentState make_shed_agent(int i, int n, int priority, const ShedBus& bus, double kappa, double s, int m) {
    ShedAgentState st;
    st.index = i;
    st.n = n;
    st.priority = priority;
    st.y_max = bus.y_max;
    st.q = bus.q;
    st.r = bus.r;
    st.kappa = kappa;
    st.s = s;
    st.eta.assign(m + 1, 0.0);
    st.phi.assign(m + 1, 0.0);
    return st;
}

std::vector<double> shed_constraint_g(const ShedAgentState& st, double z, double y, int m) {
    if (m < 0 || st.priority > m) throw ValidationError("priority", "bus priority exceeds m");
    std::vector<double> g(m + 1);
    constraint_into(st.priority, st.s, z, y, m, g.data());
    return g;
}

std::pair<double, double> shed_primal_step(const ShedAgentState& st, const std::vector<double>& phi, int m) {
    if (static_cast<int>(phi.size()) != m + 1) throw DimensionMismatch("shed_primal_step: phi must have m+1 entries");
    if (st.priority > m) throw ValidationError("priority", "bus priority exceeds m");
    double z, y;
    primal_into(st.priority, st.n, st.s, st.y_max, st.q, st.r, st.kappa, phi.data(), m, z, y);
    return {z, y};
}

std::vector<double> shed_dual_step(const std::vector<double>& phi, const std::vector<double>& g, double alpha) {
    if (phi.size() != g.size()) throw DimensionMismatch("shed_dual_step: phi and g differ in size");
    std::vector<double> eta(phi.size());
    for (size_t c = 0; c < phi.size(); ++c) eta[c] = phi[c] + alpha * g[c];
    return eta;
}

double default_kappa(const std::vector<ShedBus>& buses, const PriorityAssignment& pa) {
    double worst = 0.0;
    for (int i : pa.regular) worst = std::max(worst, buses[i].q * buses[i].y_max + std::abs(buses[i].r));
    return std::max(1.0, 10.0 * worst);
}

std::vector<double> shed_constraint_sums(const PriorityAssignment& pa, const std::vector<double>& s,
                                         const std::vector<double>& y, const std::vector<double>& z) {
    const int m = pa.m;
    std::vector<double> sum(m + 1, 0.0), g(m + 1);
    for (size_t i = 0; i < y.size(); ++i) {
        constraint_into(pa.priority[i], s[i], z[i], y[i], m, g.data());
        for (int c = 0; c <= m; ++c) sum[c] += g[c];
    }
    return sum;
}

ShedRunner::ShedRunner(std::vector<ShedBus> buses, PriorityAssignment pa, std::vector<double> s, double kappa,
                       MixingMatrix mixing, ShedRunOptions opt)
    : buses_(std::move(buses)), pa_(std::move(pa)), s_(std::move(s)), kappa_(kappa), A_(std::move(mixing)),
      opt_(opt) {
    n_ = static_cast<int>(buses_.size());
    if (static_cast<int>(pa_.priority.size()) != n_ || static_cast<int>(s_.size()) != n_ || A_.n != n_)
        throw DimensionMismatch("ShedRunner: buses, priorities, shares and mixing matrix disagree in size");
    if (!(kappa_ >= 1.0)) throw ValidationError("kappa", "kappa must be at least 1");
    opt_.schedule.validate();
    dim_ = pa_.m + 1;
    y_tot_ = 0.0;
    double ymax_sum = 0.0;
    for (int i = 0; i < n_; ++i) {
        y_tot_ += s_[i];
        ymax_sum += buses_[i].y_max;
        if (pa_.priority[i] == 0 && !(buses_[i].q > 0.0))
            throw ValidationError("A7", "bus " + std::to_string(i + 1) + " shedding cost is not strongly convex");
        if (pa_.priority[i] == 0 && buses_[i].q > 0.0 && buses_[i].r / buses_[i].q > buses_[i].y_max &&
            buses_[i].y_max > 0.0)
            diag_.push_back("bus " + std::to_string(i + 1) + ": utility maximizer r/q exceeds y_max, clipped");
    }
    if (!(ymax_sum > y_tot_)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "sum y_max = %.6g does not exceed y_tot = %.6g", ymax_sum, y_tot_);
        throw InfeasibleShedding(std::string("Assumption 8: ") + buf);
    }
    scale_ = std::max(1.0, std::abs(y_tot_));
    const size_t nd = static_cast<size_t>(n_) * dim_;
    eta_.assign(nd, 0.0);
    phi_.assign(nd, 0.0);
    y_.assign(n_, 0.0);
    z_.assign(n_, 0.0);
    gsum_.assign(dim_, 0.0);
    hist_.assign(2 * static_cast<size_t>(n_), 0.0);

    trace_.stage = "shed";
    trace_.columns.push_back("alpha");
    append_columns(trace_.columns, "y", n_);
    append_columns(trace_.columns, "z", n_);
    trace_.columns.push_back("eta_spread");
    trace_.columns.push_back("budget_residual");
    if (opt_.stop.max_iters <= 0) done_ = true;
}

bool ShedRunner::step() {
    if (done_) return false;
    const int m = pa_.m;
    const double alpha = opt_.schedule.alpha(k_);
    std::fill(gsum_.begin(), gsum_.end(), 0.0);
    double g[64];
    std::vector<double> gbuf;
    double* gp = g;
    if (dim_ > 64) {
        gbuf.resize(dim_);
        gp = gbuf.data();
    }
    for (int i = 0; i < n_; ++i) {
        const ShedBus& b = buses_[i];
        const double* phi = &phi_[static_cast<size_t>(i) * dim_];
        double z, y;
        primal_into(pa_.priority[i], n_, s_[i], b.y_max, b.q, b.r, kappa_, phi, m, z, y);
        y_[i] = y;
        z_[i] = z;
        constraint_into(pa_.priority[i], s_[i], z, y, m, gp);
        double* eta = &eta_[static_cast<size_t>(i) * dim_];
        for (int c = 0; c < dim_; ++c) {
            eta[c] = phi[c] + alpha * gp[c];
            gsum_[c] += gp[c];
        }
    }
    mix_flat(A_, eta_.data(), phi_.data(), dim_);
    ++k_;

    double cres = 0.0;
    for (double v : gsum_) cres = std::max(cres, std::abs(v));
    const auto& st = opt_.stop;
    const bool res_ok = cres <= st.residual_tol * scale_;
    bool stop_now = false;
    if (k_ - hist_k_ >= st.window) {
        double change = 0.0;
        for (int i = 0; i < n_; ++i) {
            change = std::max(change, std::abs(y_[i] - hist_[i]));
            change = std::max(change, std::abs(z_[i] - hist_[n_ + i]));
        }
        if (hist_k_ > 0 && res_ok && change <= st.change_tol) stop_now = true;
        std::copy(y_.begin(), y_.end(), hist_.begin());
        std::copy(z_.begin(), z_.end(), hist_.begin() + n_);
        hist_k_ = k_;
    }
    if (stop_now) stopped_by_rule_ = true;
    if (stop_now || k_ >= st.max_iters) done_ = true;
    if (opt_.record_trace && (k_ == 1 || k_ % std::max(1L, opt_.trace_stride) == 0 || done_)) record_row();
    return !done_;
}

namespace {

double flat_spread(const std::vector<double>& a, int n, int dim) {
    double sp = 0.0;
    for (int c = 0; c < dim; ++c) {
        double lo = a[c], hi = a[c];
        for (int i = 1; i < n; ++i) {
            double v = a[static_cast<size_t>(i) * dim + c];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        sp = std::max(sp, hi - lo);
    }
    return sp;
}

} // namespace

void ShedRunner::record_row() {
    std::vector<double> row;
    row.reserve(trace_.columns.size());
    row.push_back(opt_.schedule.alpha(k_ - 1));
    row.insert(row.end(), y_.begin(), y_.end());
    row.insert(row.end(), z_.begin(), z_.end());
    row.push_back(flat_spread(eta_, n_, dim_));
    double ysum = 0.0;
    for (double v : y_) ysum += v;
    row.push_back(ysum - y_tot_);
    trace_.add(k_, std::move(row));
}

ShedResult ShedRunner::result() const {
    ShedResult r;
    r.y = y_;
    r.z = z_;
    r.eta.resize(n_);
    r.phi.resize(n_);
    for (int i = 0; i < n_; ++i) {
        r.eta[i].assign(eta_.begin() + static_cast<long>(i) * dim_, eta_.begin() + static_cast<long>(i + 1) * dim_);
        r.phi[i].assign(phi_.begin() + static_cast<long>(i) * dim_, phi_.begin() + static_cast<long>(i + 1) * dim_);
    }
    r.iterations = k_;
    r.stopped_by_rule = stopped_by_rule_;
    double ysum = 0.0;
    for (double v : y_) ysum += v;
    r.budget_residual = ysum - y_tot_;
    auto sums = shed_constraint_sums(pa_, s_, y_, z_);
    for (double v : sums) r.constraint_residual = std::max(r.constraint_residual, std::abs(v));
    r.converged = r.constraint_residual <= opt_.stop.residual_tol * scale_;
    r.eta_spread = flat_spread(eta_, n_, dim_);
    r.phi_spread = flat_spread(phi_, n_, dim_);
    r.diagnostics = diag_;
    r.trace = trace_;
    return r;
}

ShedResult run_shedding(const std::vector<ShedBus>& buses, const PriorityAssignment& pa,
                        const std::vector<double>& s, double kappa, const MixingMatrix& mixing,
                        const ShedRunOptions& opt) {
    ShedRunner run(buses, pa, s, kappa, mixing, opt);
    while (run.step()) {
    }
    return run.result();
}

} // namespace dd
