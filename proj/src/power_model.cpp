#include "dd/power_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dd/errors.hpp"

namespace dd {

namespace {

double inf_norm(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    return M.cwiseAbs().rowwise().sum().maxCoeff();
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

} // namespace

LossModel factor_loss_matrix(const Eigen::MatrixXd& B_in, double psd_tolerance) {
    if (B_in.rows() != B_in.cols()) throw DimensionMismatch("loss matrix must be square");
    LossModel m;
    m.B = 0.5 * (B_in + B_in.transpose());
    m.psd_tolerance = psd_tolerance < 0 ? 1e-8 * inf_norm(m.B) : psd_tolerance;
    const auto n = m.B.rows();
    if (n == 0) {
        m.R = m.B;
        return m;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.B);
    Eigen::VectorXd ev = es.eigenvalues();
    m.min_eigenvalue = ev.minCoeff();
    if (m.min_eigenvalue < -m.psd_tolerance)
        throw NotPositiveSemidefinite("loss matrix has eigenvalue " + fmt_num(m.min_eigenvalue) +
                                      " below -" + fmt_num(m.psd_tolerance));
    Eigen::VectorXd root = ev.cwiseMax(0.0).cwiseSqrt();
    m.R = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    m.R = 0.5 * (m.R + m.R.transpose());
    return m;
}

double evaluate_loss(const Eigen::MatrixXd& B, const Eigen::VectorXd& x) {
    if (B.rows() != x.size() || B.cols() != x.size())
        throw DimensionMismatch("evaluate_loss: B is " + std::to_string(B.rows()) + "x" +
                                std::to_string(B.cols()) + ", x has " + std::to_string(x.size()));
    return x.dot(B * x);
}

LossColumn local_loss_column(const LossModel& model, int i) {
    if (i < 0 || i >= model.R.cols()) throw IndexOutOfRange("loss column " + std::to_string(i));
    LossColumn c;
    c.r_col = model.R.col(i);
    c.r_max = c.r_col.size() ? c.r_col.cwiseAbs().maxCoeff() : 0.0;
    return c;
}

UBound compute_u_bound(const LossModel& model, const std::vector<BusSpec>& buses) {
    if (static_cast<long>(buses.size()) != model.R.cols())
        throw DimensionMismatch("compute_u_bound: bus count differs from loss model size");
    UBound u;
    for (size_t i = 0; i < buses.size(); ++i)
        u.u_max += local_loss_column(model, static_cast<int>(i)).r_max * buses[i].x_max;
    return u;
}

std::pair<double, double> cost_value_and_slope(const BusSpec& bus, double x) {
    if (!bus.is_generator) throw NotAGenerator("bus " + std::to_string(bus.index) + " has no generator");
    return {bus.cost_a * x * x + bus.cost_b * x, 2.0 * bus.cost_a * x + bus.cost_b};
}

double total_demand(const std::vector<BusSpec>& buses) {
    double s = 0.0;
    for (const auto& b : buses) s += b.demand;
    return s;
}

double balance_residual(const std::vector<BusSpec>& buses, const LossModel& model, const Eigen::VectorXd& x) {
    if (static_cast<long>(buses.size()) != x.size()) throw DimensionMismatch("balance_residual: size mismatch");
    return evaluate_loss(model.B, x) + total_demand(buses) - x.sum();
}

double total_cost(const std::vector<BusSpec>& buses, const Eigen::VectorXd& x) {
    double c = 0.0;
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].is_generator) c += cost_value_and_slope(buses[i], x[static_cast<long>(i)]).first;
    return c;
}

Eigen::VectorXd lower_bounds(const std::vector<BusSpec>& buses) {
    Eigen::VectorXd v(static_cast<long>(buses.size()));
    for (size_t i = 0; i < buses.size(); ++i) v[static_cast<long>(i)] = buses[i].x_min;
    return v;
}

Eigen::VectorXd upper_bounds(const std::vector<BusSpec>& buses) {
    Eigen::VectorXd v(static_cast<long>(buses.size()));
    for (size_t i = 0; i < buses.size(); ++i) v[static_cast<long>(i)] = buses[i].x_max;
    return v;
}

std::pair<double, Eigen::VectorXd> max_deliverable(const std::vector<BusSpec>& buses, const LossModel& model) {
    // concave QP over a box; projected gradient ascent with a 1/L step
    const Eigen::VectorXd lo = lower_bounds(buses), hi = upper_bounds(buses);
    const long n = lo.size();
    double L = 2.0 * (n ? model.B.cwiseAbs().rowwise().sum().maxCoeff() : 0.0);
    Eigen::VectorXd x = hi;
    auto f = [&](const Eigen::VectorXd& v) { return v.sum() - v.dot(model.B * v); };
    if (L <= 0.0) return {f(x), x};
    const double step = 1.0 / L;
    for (int it = 0; it < 200000; ++it) {
        Eigen::VectorXd grad = Eigen::VectorXd::Ones(n) - 2.0 * (model.B * x);
        Eigen::VectorXd nx = (x + step * grad).cwiseMax(lo).cwiseMin(hi);
        double moved = (nx - x).cwiseAbs().maxCoeff();
        x = nx;
        if (moved < 1e-13) break;
    }
    return {f(x), x};
}

std::vector<AssumptionFinding> check_power_assumptions(const std::vector<BusSpec>& buses, const LossModel& model) {
    std::vector<AssumptionFinding> out;
    for (const auto& b : buses) {
        if (!b.is_generator) continue;
        if (b.cost_a <= 0.0)
            out.push_back({"A4", "bus " + std::to_string(b.index) + " cost is not strongly convex (a <= 0)"});
        else if (2.0 * b.cost_a * b.x_min + b.cost_b < 0.0)
            out.push_back({"A4", "bus " + std::to_string(b.index) + " has negative marginal cost at x_min"});
    }
    const Eigen::VectorXd lo = lower_bounds(buses), hi = upper_bounds(buses);
    const double sd = total_demand(buses);
    const double loss_lo = evaluate_loss(model.B, lo), loss_hi = evaluate_loss(model.B, hi);
    if (!(lo.sum() < sd + loss_lo))
        out.push_back({"A5.1", "sum x_min = " + fmt_num(lo.sum()) + " is not below demand plus losses " +
                                   fmt_num(sd + loss_lo)});
    if (loss_lo > lo.sum())
        out.push_back({"A5.2", "losses at x_min exceed sum x_min"});
    if (loss_hi > hi.sum())
        out.push_back({"A5.2", "losses at x_max exceed sum x_max"});
    auto [dmax, xm] = max_deliverable(buses, model);
    if (!(dmax > sd))
        out.push_back({"A6", "overload: deliverable " + fmt_num(dmax) + " MW does not exceed demand " + fmt_num(sd) +
                                 " MW"});
    return out;
}

} // namespace dd
