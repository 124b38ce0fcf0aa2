// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

namespace eitsim {

/// Packed real representation of the valid state manifold: four populations
/// plus Re/Im of sigma21, sigma31, sigma32. The reservoir level |4> never
/// carries coherences (not laser coupled, fed only by incoherent flow), so
/// they are eliminated rather than evolved.
using PackedState = std::array<double, 10>;

namespace idx {
inline constexpr int p1 = 0, p2 = 1, p3 = 2, p4 = 3;
inline constexpr int re21 = 4, im21 = 5;
inline constexpr int re31 = 6, im31 = 7;
inline constexpr int re32 = 8, im32 = 9;
} // namespace idx

/// Ensemble-averaged 4x4 density matrix, basis order |1>,|2>,|3>,|4>.
///
/// Invariants: Hermitian (1e-12 elementwise), unit trace (1e-9), diagonal
/// real in [-1e-9, 1+1e-9], row/column 4 off-diagonals exactly zero.
class DensityMatrix {
public:
    /// Ground state |1><1| (the optically pumped preparation).
    static DensityMatrix ground();

    /// Pure state |k><k|, k in 0..3.
    static DensityMatrix pure(int level);

    /// Builds from an explicit matrix; throws StateValidityError on invariant
    /// violation.
    static DensityMatrix from_matrix(const Eigen::Matrix4cd& sigma);

    /// Builds from the packed representation (trusted: Hermiticity and zero
    /// |4>-coherences hold by construction; trace/range still checked).
    static DensityMatrix from_packed(const PackedState& y);

    const Eigen::Matrix4cd& matrix() const { return sigma_; }
    PackedState packed() const;

    double population(int level) const { return sigma_(level, level).real(); }
    std::complex<double> sigma21() const { return sigma_(1, 0); }
    std::complex<double> sigma31() const { return sigma_(2, 0); }
    std::complex<double> sigma32() const { return sigma_(2, 1); }

    /// Throws StateValidityError if the invariants do not hold.
    void validate() const;

private:
    DensityMatrix() : sigma_(Eigen::Matrix4cd::Zero()) {}
    Eigen::Matrix4cd sigma_;
};

/// Invariant check on a packed state: populations in [-tol, 1+tol] and
/// trace within tol of one. Throws StateValidityError.
void validate_packed(const PackedState& y, double tol = 1e-9);

} // namespace eitsim
