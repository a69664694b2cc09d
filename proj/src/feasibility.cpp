#include "dd/feasibility.hpp"

#include <algorithm>

#include "dd/errors.hpp"

namespace dd {

FeasibilityStep feasibility_primal_step(const EdpAgentState& st, double v, const std::vector<double>& w,
                                        double u_max, double tau, double s_cap) {
    if (!(tau > 0.0)) throw ValidationError("tau", "tau must be positive");
    if (static_cast<long>(w.size()) != st.r_col.size()) throw DimensionMismatch("feasibility_primal_step: w size");
    double coupling = 0.0;
    for (size_t j = 0; j < w.size(); ++j) coupling += w[j] * st.r_col[static_cast<long>(j)];
    FeasibilityStep out;
    out.x = std::clamp((v - coupling) / (2.0 * tau), st.bus.x_min, st.bus.x_max);
    out.u = loss_slack_step(v, w[static_cast<size_t>(st.index)], u_max);
    out.s = std::clamp(v / 2.0, 0.0, s_cap);
    return out;
}

double default_share_cap(const std::vector<BusSpec>& buses) {
    if (buses.empty()) return 0.0;
    return 2.0 * total_demand(buses) / static_cast<double>(buses.size());
}

EdpResult run_feasibility(const std::vector<BusSpec>& buses, const LossModel& model, const MixingMatrix& mixing,
                          const std::vector<double>& u_max, double tau, const DualRunOptions& opt) {
    LossDualRunner run(buses, model, mixing, u_max, opt, LossDualRunner::Mode::Feasibility, tau,
                       default_share_cap(buses));
    while (run.step()) {
    }
    return run.result();
}

P1Solution solve_p1(const std::vector<BusSpec>& buses, const LossModel& model) {
    P1Solution p;
    auto [dmax, x] = max_deliverable(buses, model);
    p.deliverable = dmax;
    p.x = x;
    p.shortage = std::max(0.0, total_demand(buses) - dmax);
    return p;
}

} // namespace dd
