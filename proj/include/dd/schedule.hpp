#pragma once

#include <string>

namespace dd {

struct StepSchedule {
    enum class Kind { HarmonicPower, ShiftedHarmonic };
    Kind kind = Kind::HarmonicPower;
    double c = 1.0;
    double exponent = 1.0;  // harmonic-power: c / k^exponent
    double shift = 0.0;     // shifted-harmonic: c / (k + shift)

    static StepSchedule harmonic_power(double c, double exponent);
    static StepSchedule shifted_harmonic(double c, double shift);

    // step used in round k (0-based); the formula is evaluated at k+1
    double alpha(long k) const;

    // throws ValidationError when the parameters break sum a = inf, sum a^2 < inf
    void validate() const;

    std::string describe() const;
};

StepSchedule::Kind parse_schedule_kind(const std::string& s);

struct StopRule {
    long max_iters = 50000;
    double residual_tol = 5e-3;  // relative to max(1, scale)
    double change_tol = 1e-5;
    long window = 100;
    double spread_tol = -1.0;  // max |s_i - s_j| required to stop; negative disables
};

} // namespace dd
