// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace eitsim {

enum class SweepMode { Single, Double };

enum class ScanDirection { Forward, Backward };

/// Piecewise-linear probe-detuning schedule. A Double sweep runs the linear
/// ramp forward over duration_single and then exactly mirrors it, so
/// detuning(duration_single + s) == detuning(duration_single - s).
struct SweepProgram {
    double delta_start = 0.0;    ///< rad/us
    double delta_end = 0.0;      ///< rad/us
    double duration_single = 0.0; ///< us
    SweepMode mode = SweepMode::Double;

    /// Throws InvalidParameterError on a degenerate program.
    void validate() const;

    double total_duration() const {
        return mode == SweepMode::Double ? 2.0 * duration_single : duration_single;
    }

    /// Probe detuning at time t (t clamped to [0, total_duration]).
    double detuning(double t) const;

    /// Ramp slope d(delta)/dt on the leg containing t (the fold instant
    /// belongs to the first leg).
    double slope(double t) const;

    /// Direction tag by the sign of d(delta)/dt at t.
    ScanDirection direction(double t) const {
        return slope(t) >= 0.0 ? ScanDirection::Forward : ScanDirection::Backward;
    }
};

} // namespace eitsim
