// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#include "eitsim/density_matrix.hpp"

#include <cmath>
#include <sstream>

#include "eitsim/errors.hpp"

namespace eitsim {

DensityMatrix DensityMatrix::ground() { return pure(0); }

DensityMatrix DensityMatrix::pure(int level) {
    if (level < 0 || level > 3) {
        throw InvalidParameterError("DensityMatrix::pure: level out of range");
    }
    DensityMatrix dm;
    dm.sigma_(level, level) = 1.0;
    return dm;
}

DensityMatrix DensityMatrix::from_matrix(const Eigen::Matrix4cd& sigma) {
    DensityMatrix dm;
    dm.sigma_ = sigma;
    dm.validate();
    return dm;
}

DensityMatrix DensityMatrix::from_packed(const PackedState& y) {
    validate_packed(y);
    DensityMatrix dm;
    Eigen::Matrix4cd& s = dm.sigma_;
    s(0, 0) = y[idx::p1];
    s(1, 1) = y[idx::p2];
    s(2, 2) = y[idx::p3];
    s(3, 3) = y[idx::p4];
    s(1, 0) = {y[idx::re21], y[idx::im21]};
    s(2, 0) = {y[idx::re31], y[idx::im31]};
    s(2, 1) = {y[idx::re32], y[idx::im32]};
    s(0, 1) = std::conj(s(1, 0));
    s(0, 2) = std::conj(s(2, 0));
    s(1, 2) = std::conj(s(2, 1));
    return dm;
}

PackedState DensityMatrix::packed() const {
    PackedState y;
    y[idx::p1] = sigma_(0, 0).real();
    y[idx::p2] = sigma_(1, 1).real();
    y[idx::p3] = sigma_(2, 2).real();
    y[idx::p4] = sigma_(3, 3).real();
    y[idx::re21] = sigma_(1, 0).real();
    y[idx::im21] = sigma_(1, 0).imag();
    y[idx::re31] = sigma_(2, 0).real();
    y[idx::im31] = sigma_(2, 0).imag();
    y[idx::re32] = sigma_(2, 1).real();
    y[idx::im32] = sigma_(2, 1).imag();
    return y;
}

void DensityMatrix::validate() const {
    constexpr double herm_tol = 1e-12;
    constexpr double trace_tol = 1e-9;
    constexpr double pop_tol = 1e-9;

    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (std::abs(sigma_(i, j) - std::conj(sigma_(j, i))) > herm_tol) {
                throw StateValidityError("density matrix is not Hermitian");
            }
        }
    }
    double tr = 0.0;
    for (int i = 0; i < 4; ++i) {
        const auto d = sigma_(i, i);
        if (std::abs(d.imag()) > herm_tol) {
            throw StateValidityError("diagonal entry has imaginary part");
        }
        if (d.real() < -pop_tol || d.real() > 1.0 + pop_tol) {
            std::ostringstream os;
            os << "population " << i + 1 << " out of [0,1]: " << d.real();
            throw StateValidityError(os.str());
        }
        tr += d.real();
    }
    if (std::abs(tr - 1.0) > trace_tol) {
        std::ostringstream os;
        os << "trace deviates from 1 by " << tr - 1.0;
        throw StateValidityError(os.str());
    }
    for (int j = 0; j < 3; ++j) {
        if (sigma_(3, j) != std::complex<double>(0.0, 0.0) ||
            sigma_(j, 3) != std::complex<double>(0.0, 0.0)) {
            throw StateValidityError("reservoir coherences must be exactly zero");
        }
    }
}

void validate_packed(const PackedState& y, double tol) {
    double tr = 0.0;
    for (int i = 0; i < 4; ++i) {
        if (!std::isfinite(y[i])) {
            throw StateValidityError("packed state has non-finite population");
        }
        if (y[i] < -tol || y[i] > 1.0 + tol) {
            std::ostringstream os;
            os << "population " << i + 1 << " out of [0,1]: " << y[i];
            throw StateValidityError(os.str());
        }
        tr += y[i];
    }
    if (std::abs(tr - 1.0) > tol) {
        std::ostringstream os;
        os << "packed state trace deviates from 1 by " << tr - 1.0;
        throw StateValidityError(os.str());
    }
    for (int i = 4; i < 10; ++i) {
        if (!std::isfinite(y[i])) {
            throw StateValidityError("packed state has non-finite coherence");
        }
    }
}

} // namespace eitsim
