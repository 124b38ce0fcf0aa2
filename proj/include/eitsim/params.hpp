// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "eitsim/units.hpp"

namespace eitsim {

/// Physical rates and couplings of the four-level model. All angular
/// quantities are rad/us; see units.hpp for the laboratory-unit boundary.
///
/// Level order: |1> ground, |2> intermediate, |3> Rydberg, |4> reservoir.
struct SystemParams {
    double omega_p = 0.0;   ///< probe Rabi frequency, |1>-|2>
    double omega_c = 0.0;   ///< coupling Rabi frequency, |2>-|3>
    double delta_c = 0.0;   ///< coupling detuning
    double gamma2 = units::rad_per_us(6.065);  ///< |2> spontaneous decay
    double gamma3 = 0.1;    ///< |3> spontaneous decay (10 us lifetime)
    double gamma3p = 0.0;   ///< nonlinear depopulation coefficient
    double gamma4 = units::rad_per_us(2.0e-4); ///< reservoir return |4>->|1>
    double gamma31 = 0.0;   ///< extra |1>-|3> dephasing
    double branch_b = 0.5;  ///< fraction of gamma3 decay routed to |2>
    double od0 = 1.0;       ///< resonant two-level optical depth
    double density_scale = 1.0;  ///< rho/rho0, scales gamma3p and od0
    bool gamma31_in_gamma32 = true; ///< gamma31 also dephases the |2>-|3> coherence

    /// Density-scaled nonlinear loss coefficient.
    double gamma3p_eff() const { return gamma3p * density_scale; }
    /// Density-scaled optical depth.
    double od0_eff() const { return od0 * density_scale; }

    /// Throws InvalidParameterError if any field is out of domain.
    void validate() const;
};

/// Result of the power -> Rabi frequency conversion.
struct ProbeDrive {
    double sat_fraction; ///< I / I_sat, dimensionless
    double omega_p;      ///< rad/us
};

/// Converts probe power to a saturation fraction and Rabi frequency for a
/// top-hat beam: I = P/(pi r^2), s = I/I_sat, omega_p = gamma2*sqrt(s/2).
ProbeDrive probe_rabi_from_power(double power_uW, double beam_radius_mm,
                                 double i_sat_mW_per_cm2,
                                 double gamma2 = units::rad_per_us(6.065));

} // namespace eitsim
