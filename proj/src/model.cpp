// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#include "eitsim/model.hpp"

#include <cmath>
#include <sstream>

#include "eitsim/errors.hpp"

namespace eitsim {

Eigen::Matrix4cd hamiltonian(const SystemParams& params, double delta_p) {
    params.validate();
    if (!std::isfinite(delta_p)) {
        throw InvalidParameterError("hamiltonian: delta_p is not finite");
    }
    Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
    h(1, 1) = -delta_p;
    h(2, 2) = -(delta_p + params.delta_c);
    h(0, 1) = h(1, 0) = params.omega_p / 2.0;
    h(1, 2) = h(2, 1) = params.omega_c / 2.0;
    return h;
}

DecayRates decay_rates(const SystemParams& params, double sigma33) {
    constexpr double tol = 1e-9;
    if (!(sigma33 >= -tol && sigma33 <= 1.0 + tol)) {
        std::ostringstream os;
        os << "decay_rates: sigma33 out of [0,1]: " << sigma33;
        throw StateValidityError(os.str());
    }
    const double nl = params.gamma3p_eff() * sigma33; // instantaneous nonlinear rate
    DecayRates r;
    r.rate_2_to_1 = params.gamma2;
    r.rate_3_to_2 = params.branch_b * params.gamma3;
    r.rate_3_to_4 = (1.0 - params.branch_b) * params.gamma3 + nl;
    r.rate_4_to_1 = params.gamma4;
    r.coh21 = params.gamma2 / 2.0;
    r.coh31 = (params.gamma3 + nl) / 2.0 + params.gamma31;
    r.coh32 = (params.gamma2 + params.gamma3 + nl) / 2.0 +
              (params.gamma31_in_gamma32 ? params.gamma31 : 0.0);
    return r;
}

PackedState packed_rhs(const PackedState& y, const SystemParams& params,
                       double delta_p) {
    using namespace idx;
    const double a = params.omega_p / 2.0;
    const double c = params.omega_c / 2.0;
    const double dp = delta_p;
    const double d31 = delta_p + params.delta_c;
    const double dc = params.delta_c;

    const double p1 = y[idx::p1], p2 = y[idx::p2];
    const double p3 = y[idx::p3], p4 = y[idx::p4];
    const double x1 = y[re21], y1 = y[im21];
    const double x2 = y[re31], y2 = y[im31];
    const double x3 = y[re32], y3 = y[im32];

    const double nl = params.gamma3p_eff() * p3;
    const double g21 = params.gamma2 / 2.0;
    const double g31 = (params.gamma3 + nl) / 2.0 + params.gamma31;
    const double g32 = (params.gamma2 + params.gamma3 + nl) / 2.0 +
                       (params.gamma31_in_gamma32 ? params.gamma31 : 0.0);

    PackedState d;
    d[idx::p1] = -params.omega_p * y1 + params.gamma2 * p2 + params.gamma4 * p4;
    d[idx::p2] = params.omega_p * y1 - params.omega_c * y3 -
                 params.gamma2 * p2 + params.branch_b * params.gamma3 * p3;
    d[idx::p3] = params.omega_c * y3 - (params.gamma3 + nl) * p3;
    d[idx::p4] = (1.0 - params.branch_b) * params.gamma3 * p3 + nl * p3 -
                 params.gamma4 * p4;
    d[re21] = -dp * y1 - c * y2 - g21 * x1;
    d[im21] = a * (p1 - p2) + dp * x1 + c * x2 - g21 * y1;
    d[re31] = -c * y1 - d31 * y2 + a * y3 - g31 * x2;
    d[im31] = c * x1 + d31 * x2 - a * x3 - g31 * y2;
    d[re32] = a * y2 - dc * y3 - g32 * x3;
    d[im32] = c * (p2 - p3) + dc * x3 - a * x2 - g32 * y3;
    return d;
}

Eigen::Matrix4cd liouvillian_rhs(const DensityMatrix& state,
                                 const SystemParams& params, double delta_p) {
    state.validate();
    params.validate();
    const PackedState d = packed_rhs(state.packed(), params, delta_p);
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 0) = d[idx::p1];
    m(1, 1) = d[idx::p2];
    m(2, 2) = d[idx::p3];
    m(3, 3) = d[idx::p4];
    m(1, 0) = {d[idx::re21], d[idx::im21]};
    m(2, 0) = {d[idx::re31], d[idx::im31]};
    m(2, 1) = {d[idx::re32], d[idx::im32]};
    m(0, 1) = std::conj(m(1, 0));
    m(0, 2) = std::conj(m(2, 0));
    m(1, 2) = std::conj(m(2, 1));
    return m;
}

} // namespace eitsim
