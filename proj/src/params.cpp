// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#include "eitsim/params.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "eitsim/errors.hpp"

namespace eitsim {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "SystemParams." << name << " is not finite";
        throw InvalidParameterError(os.str());
    }
}

void require_nonneg(double v, const char* name) {
    require_finite(v, name);
    if (v < 0.0) {
        std::ostringstream os;
        os << "SystemParams." << name << " must be >= 0, got " << v;
        throw InvalidParameterError(os.str());
    }
}

} // namespace

void SystemParams::validate() const {
    require_finite(omega_p, "omega_p");
    require_finite(omega_c, "omega_c");
    require_finite(delta_c, "delta_c");
    require_nonneg(gamma2, "gamma2");
    require_nonneg(gamma3, "gamma3");
    require_nonneg(gamma3p, "gamma3p");
    require_nonneg(gamma4, "gamma4");
    require_nonneg(gamma31, "gamma31");
    require_nonneg(od0, "od0");
    require_nonneg(density_scale, "density_scale");
    if (!(branch_b >= 0.0 && branch_b <= 1.0)) {
        throw InvalidParameterError("SystemParams.branch_b must be in [0,1]");
    }
}

ProbeDrive probe_rabi_from_power(double power_uW, double beam_radius_mm,
                                 double i_sat_mW_per_cm2, double gamma2) {
    if (!(power_uW > 0.0) || !(beam_radius_mm > 0.0) ||
        !(i_sat_mW_per_cm2 > 0.0) || !(gamma2 > 0.0)) {
        throw InvalidParameterError(
            "probe_rabi_from_power: power, radius, I_sat and gamma2 must be > 0");
    }
    const double radius_cm = beam_radius_mm / 10.0;
    const double area_cm2 = std::numbers::pi * radius_cm * radius_cm;
    const double intensity_mW_cm2 = power_uW * 1e-3 / area_cm2; // top-hat beam
    const double sat = intensity_mW_cm2 / i_sat_mW_per_cm2;
    return ProbeDrive{sat, gamma2 * std::sqrt(sat / 2.0)};
}

} // namespace eitsim
