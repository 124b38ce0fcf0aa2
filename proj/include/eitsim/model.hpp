// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include "eitsim/density_matrix.hpp"
#include "eitsim/params.hpp"

namespace eitsim {

/// Rotating-frame RWA Hamiltonian (divided by hbar, rad/us):
/// H11 = H44 = 0, H22 = -delta_p, H33 = -(delta_p + delta_c),
/// H12 = H21 = omega_p/2, H23 = H32 = omega_c/2.
Eigen::Matrix4cd hamiltonian(const SystemParams& params, double delta_p);

/// Population-flow and coherence-decay rates at a given Rydberg population.
/// Flow rates are per unit source population; multiply by the source
/// population to get the flow. The nonlinear channel gamma3p*sigma33^2
/// routes entirely to the reservoir |4>.
struct DecayRates {
    double rate_2_to_1; ///< gamma2
    double rate_3_to_2; ///< b * gamma3
    double rate_3_to_4; ///< (1-b)*gamma3 + gamma3p*sigma33
    double rate_4_to_1; ///< gamma4
    double coh21;       ///< Gamma21 = gamma2/2
    double coh31;       ///< Gamma31 = (gamma3 + gamma3p*sigma33)/2 + gamma31
    double coh32;       ///< Gamma32 = (gamma2 + gamma3 + gamma3p*sigma33)/2 [+ gamma31]
};

DecayRates decay_rates(const SystemParams& params, double sigma33);

/// Right-hand side of the nonlinear master equation on the packed state.
/// This is the production path used by the integrator; the coupling phase is
/// the absorptive gauge (probe coherence has Im sigma21 >= 0 under
/// absorption), i.e. the commutator uses G*hamiltonian()*G with
/// G = diag(1,-1,1,1).
PackedState packed_rhs(const PackedState& y, const SystemParams& params,
                       double delta_p);

/// Matrix form of the same generator: d(sigma)/dt for a valid DensityMatrix.
/// Hermitian and traceless by construction; row/column 4 off-diagonal
/// derivatives are zero.
Eigen::Matrix4cd liouvillian_rhs(const DensityMatrix& state,
                                 const SystemParams& params, double delta_p);

} // namespace eitsim
