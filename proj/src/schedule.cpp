#include "dd/schedule.hpp"

#include <cmath>
#include <cstdio>

#include "dd/errors.hpp"

namespace dd {

StepSchedule StepSchedule::harmonic_power(double c, double exponent) {
    StepSchedule s;
    s.kind = Kind::HarmonicPower;
    s.c = c;
    s.exponent = exponent;
    return s;
}

StepSchedule StepSchedule::shifted_harmonic(double c, double shift) {
    StepSchedule s;
    s.kind = Kind::ShiftedHarmonic;
    s.c = c;
    s.shift = shift;
    return s;
}

double StepSchedule::alpha(long k) const {
    const double t = static_cast<double>(k + 1);
    if (kind == Kind::HarmonicPower) return c / std::pow(t, exponent);
    return c / (t + shift);
}

void StepSchedule::validate() const {
    if (!(c > 0.0)) throw ValidationError("schedule", "step scale c must be positive");
    if (kind == Kind::HarmonicPower && !(exponent > 0.5 && exponent <= 1.0))
        throw ValidationError("schedule", "harmonic-power exponent must lie in (0.5, 1]");
    if (kind == Kind::ShiftedHarmonic && !(shift > -1.0))
        throw ValidationError("schedule", "shifted-harmonic shift must exceed -1");
}

std::string StepSchedule::describe() const {
    char buf[96];
    if (kind == Kind::HarmonicPower)
        std::snprintf(buf, sizeof buf, "harmonic-power c=%.10g exponent=%.10g", c, exponent);
    else
        std::snprintf(buf, sizeof buf, "shifted-harmonic c=%.10g shift=%.10g", c, shift);
    return buf;
}

StepSchedule::Kind parse_schedule_kind(const std::string& s) {
    if (s == "harmonic-power") return StepSchedule::Kind::HarmonicPower;
    if (s == "shifted-harmonic") return StepSchedule::Kind::ShiftedHarmonic;
    throw ValidationError("schedule", "unknown schedule kind '" + s + "'");
}

} // namespace dd
