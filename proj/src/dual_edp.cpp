#include "dd/dual_edp.hpp"

#include <algorithm>
#include <cmath>

#include "dd/errors.hpp"

namespace dd {

namespace {

inline double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

} // namespace

EdpAgentState make_edp_agent(const BusSpec& bus, const LossModel& model, int i) {
    EdpAgentState s;
    s.index = i;
    auto col = local_loss_column(model, i);
    s.r_col = col.r_col;
    s.r_max = col.r_max;
    s.bus = bus;
    s.xi.assign(static_cast<size_t>(model.R.rows()), 0.0);
    s.w = s.xi;
    return s;
}

double loss_slack_step(double v, double w_i, double u_max) {
    if (v > 0.0) return clip(w_i / (2.0 * v), -u_max, u_max);
    if (w_i > 0.0) return u_max;
    if (w_i < 0.0) return -u_max;
    return 0.0;
}

std::pair<double, double> edp_primal_step(const EdpAgentState& s, double v, const std::vector<double>& w,
                                          double u_max) {
    if (static_cast<long>(w.size()) != s.r_col.size()) throw DimensionMismatch("edp_primal_step: w size");
    double x = 0.0;
    if (s.bus.is_generator) {
        double coupling = 0.0;
        for (size_t j = 0; j < w.size(); ++j) coupling += w[j] * s.r_col[static_cast<long>(j)];
        x = clip((v - s.bus.cost_b - coupling) / (2.0 * s.bus.cost_a), s.bus.x_min, s.bus.x_max);
    }
    double u = loss_slack_step(v, w[static_cast<size_t>(s.index)], u_max);
    return {x, u};
}

Subgradient edp_subgradient(const EdpAgentState& s, double x, double u) {
    Subgradient sg;
    sg.balance_term = u * u + s.bus.demand - x;
    sg.g.resize(static_cast<size_t>(s.r_col.size()));
    for (long j = 0; j < s.r_col.size(); ++j) sg.g[static_cast<size_t>(j)] = s.r_col[j] * x;
    sg.g[static_cast<size_t>(s.index)] -= u;
    return sg;
}

std::pair<double, std::vector<double>> edp_dual_step(double v, const std::vector<double>& w, double balance_term,
                                                     const std::vector<double>& g, double alpha) {
    if (w.size() != g.size()) throw DimensionMismatch("edp_dual_step: w and g differ in size");
    std::vector<double> xi(w.size());
    for (size_t j = 0; j < w.size(); ++j) xi[j] = w[j] + alpha * g[j];
    return {std::max(0.0, v + alpha * balance_term), xi};
}

LossDualRunner::LossDualRunner(std::vector<BusSpec> buses, const LossModel& model, MixingMatrix mixing,
                               std::vector<double> u_max, DualRunOptions opt, Mode mode, double tau,
                               double s_cap)
    : buses_(std::move(buses)), model_(&model), A_(std::move(mixing)), umax_(std::move(u_max)),
      opt_(opt), mode_(mode), tau_(tau), s_cap_(s_cap) {
    n_ = static_cast<int>(buses_.size());
    if (A_.n != n_ || model.R.rows() != n_ || static_cast<int>(umax_.size()) != n_)
        throw DimensionMismatch("LossDualRunner: buses, loss model, mixing matrix and u_max disagree in size");
    if (mode_ == Mode::Feasibility && !(tau_ > 0.0)) throw ValidationError("tau", "tau must be positive");
    opt_.schedule.validate();
    demand_scale_ = std::max(1.0, std::abs(total_demand(buses_)));

    const size_t nn = static_cast<size_t>(n_) * n_;
    R_.resize(nn);
    for (int j = 0; j < n_; ++j)
        for (int r = 0; r < n_; ++r) R_[static_cast<size_t>(j) * n_ + r] = model.R(r, j);
    lambda_.assign(n_, 0.0);
    v_.assign(n_, 0.0);
    xi_.assign(nn, 0.0);
    w_.assign(nn, 0.0);
    x_.assign(n_, 0.0);
    u_.assign(n_, 0.0);
    s_.assign(n_, 0.0);
    bal_.assign(n_, 0.0);
    x_hist_.assign(3 * static_cast<size_t>(n_), 0.0);

    trace_.stage = mode_ == Mode::Edp ? "edp" : "feasibility";
    trace_.columns.push_back("alpha");
    append_columns(trace_.columns, "x", n_);
    append_columns(trace_.columns, "u", n_);
    append_columns(trace_.columns, "lambda", n_);
    if (mode_ == Mode::Feasibility) append_columns(trace_.columns, "s", n_);
    trace_.columns.push_back("residual");
    if (opt_.stop.max_iters <= 0) done_ = true;
}

bool LossDualRunner::step() {
    if (done_) return false;
    const int n = n_;
    mix_flat(A_, lambda_.data(), v_.data(), 1);
    mix_flat(A_, xi_.data(), w_.data(), n);
    const double alpha = opt_.schedule.alpha(k_);

    balance_sum_ = 0.0;
    for (int i = 0; i < n; ++i) {
        const BusSpec& b = buses_[i];
        const double* w = &w_[static_cast<size_t>(i) * n];
        const double* r = &R_[static_cast<size_t>(i) * n];
        const double v = v_[i];
        double coupling = 0.0;
        for (int j = 0; j < n; ++j) coupling += w[j] * r[j];
        double x;
        if (mode_ == Mode::Edp)
            x = b.is_generator ? clip((v - b.cost_b - coupling) / (2.0 * b.cost_a), b.x_min, b.x_max) : 0.0;
        else
            x = clip((v - coupling) / (2.0 * tau_), b.x_min, b.x_max);
        double u = loss_slack_step(v, w[i], umax_[i]);
        double s = mode_ == Mode::Feasibility ? clip(v / 2.0, 0.0, s_cap_) : 0.0;
        x_[i] = x;
        u_[i] = u;
        s_[i] = s;
        double bt = u * u + b.demand - x - s;
        bal_[i] = bt;
        balance_sum_ += bt;

        lambda_[i] = std::max(0.0, v + alpha * bt);
        double* xi = &xi_[static_cast<size_t>(i) * n];
        for (int j = 0; j < n; ++j) xi[j] = w[j] + alpha * r[j] * x;
        xi[i] -= alpha * u;
    }
    ++k_;

    const auto& st = opt_.stop;
    const bool res_ok = std::abs(balance_sum_) <= st.residual_tol * demand_scale_;
    bool stop_now = false;
    if (k_ - hist_k_ >= st.window) {
        double change = 0.0;
        for (int i = 0; i < n; ++i) {
            change = std::max(change, std::abs(x_[i] - x_hist_[i]));
            change = std::max(change, std::abs(s_[i] - x_hist_[n + i]));
            change = std::max(change, std::abs(u_[i] - x_hist_[2 * n + i]));
        }
        const auto [lo, hi] = std::minmax_element(s_.begin(), s_.end());
        const bool agree = st.spread_tol < 0.0 || *hi - *lo <= st.spread_tol;
        if (hist_k_ > 0 && res_ok && agree && change <= st.change_tol &&
            std::abs(true_residual()) <= st.residual_tol * demand_scale_)
            stop_now = true;
        std::copy(x_.begin(), x_.end(), x_hist_.begin());
        std::copy(s_.begin(), s_.end(), x_hist_.begin() + n);
        std::copy(u_.begin(), u_.end(), x_hist_.begin() + 2 * n);
        hist_k_ = k_;
    }
    if (stop_now) stopped_by_rule_ = true;
    if (stop_now || k_ >= st.max_iters) done_ = true;

    if (opt_.record_trace && (k_ == 1 || k_ % std::max(1L, opt_.trace_stride) == 0 || done_)) record_row();
    return !done_;
}

double LossDualRunner::true_residual() const {
    Eigen::Map<const Eigen::VectorXd> x(x_.data(), n_), s(s_.data(), n_);
    return balance_residual(buses_, *model_, x) - s.sum();
}

void LossDualRunner::record_row() {
    std::vector<double> row;
    row.reserve(trace_.columns.size());
    row.push_back(opt_.schedule.alpha(k_ - 1));
    row.insert(row.end(), x_.begin(), x_.end());
    row.insert(row.end(), u_.begin(), u_.end());
    row.insert(row.end(), lambda_.begin(), lambda_.end());
    if (mode_ == Mode::Feasibility) row.insert(row.end(), s_.begin(), s_.end());
    row.push_back(balance_sum_);
    trace_.add(k_, std::move(row));
}

double max_spread(const Eigen::VectorXd& v) {
    if (v.size() == 0) return 0.0;
    return v.maxCoeff() - v.minCoeff();
}

double max_spread(const std::vector<std::vector<double>>& vs) {
    double sp = 0.0;
    if (vs.empty()) return sp;
    for (size_t c = 0; c < vs[0].size(); ++c) {
        double lo = vs[0][c], hi = vs[0][c];
        for (const auto& v : vs) {
            lo = std::min(lo, v[c]);
            hi = std::max(hi, v[c]);
        }
        sp = std::max(sp, hi - lo);
    }
    return sp;
}

EdpResult LossDualRunner::result() const {
    const int n = n_;
    EdpResult r;
    auto to_vec = [](const std::vector<double>& a) { return Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<long>(a.size())).eval(); };
    r.x = to_vec(x_);
    r.u = to_vec(u_);
    r.lambda = to_vec(lambda_);
    r.v = to_vec(v_);
    r.s = to_vec(s_);
    r.xi.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        r.xi[i].assign(xi_.begin() + static_cast<long>(i) * n, xi_.begin() + static_cast<long>(i + 1) * n);
        r.w[i].assign(w_.begin() + static_cast<long>(i) * n, w_.begin() + static_cast<long>(i + 1) * n);
    }
    r.iterations = k_;
    r.stopped_by_rule = stopped_by_rule_;
    r.balance_sum = balance_sum_;
    r.residual = balance_residual(buses_, *model_, r.x) - r.s.sum();
    r.converged = std::abs(balance_sum_) <= opt_.stop.residual_tol * demand_scale_ &&
                  std::abs(r.residual) <= opt_.stop.residual_tol * demand_scale_;
    r.v_spread = max_spread(r.v);
    r.w_spread = max_spread(r.w);
    r.lambda_spread = max_spread(r.lambda);
    r.trace = trace_;
    return r;
}

EdpResult run_edp(const std::vector<BusSpec>& buses, const LossModel& model, const MixingMatrix& mixing,
                  const DualRunOptions& opt, double u_max) {
    LossDualRunner run(buses, model, mixing, std::vector<double>(buses.size(), u_max), opt);
    while (run.step()) {
    }
    return run.result();
}

} // namespace dd
