// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <numbers>

namespace eitsim::units {

// Internal unit system: time in us, angular frequencies and rates in rad/us.
// Laboratory-facing quantities are ordinary frequencies in MHz (and kHz in
// prose), powers in uW, lengths in mm, intensities in mW/cm^2. Every 2*pi
// conversion in the code base goes through these two helpers.

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Ordinary frequency in MHz -> angular rate in rad/us.
inline constexpr double rad_per_us(double mhz) { return two_pi * mhz; }

/// Angular rate in rad/us -> ordinary frequency in MHz.
inline constexpr double to_mhz(double rad_us) { return rad_us / two_pi; }

} // namespace eitsim::units
