// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#include "eitsim/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "eitsim/errors.hpp"

namespace eitsim {

void SweepProgram::validate() const {
    if (!(duration_single > 0.0) || !std::isfinite(duration_single)) {
        throw InvalidParameterError("SweepProgram.duration_single must be > 0");
    }
    if (!std::isfinite(delta_start) || !std::isfinite(delta_end) ||
        delta_start == delta_end) {
        throw InvalidParameterError(
            "SweepProgram requires finite delta_start != delta_end");
    }
}

double SweepProgram::detuning(double t) const {
    const double total = total_duration();
    t = std::clamp(t, 0.0, total);
    double leg_t = t;
    if (mode == SweepMode::Double && t > duration_single) {
        leg_t = 2.0 * duration_single - t; // mirrored return leg
    }
    const double frac = leg_t / duration_single;
    return delta_start + (delta_end - delta_start) * frac;
}

double SweepProgram::slope(double t) const {
    const double ramp = (delta_end - delta_start) / duration_single;
    if (mode == SweepMode::Double && t > duration_single) return -ramp;
    return ramp;
}

} // namespace eitsim
