// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#include "eitsim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "eitsim/errors.hpp"
#include "eitsim/model.hpp"

namespace eitsim {

namespace {

constexpr int kDim = 10;

// Dormand-Prince 5(4) tableau (FSAL: the last stage is the derivative at the
// accepted point).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Weights of (5th order) - (embedded 4th order) for the error estimate.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

using State = PackedState;

struct StepResult {
    State y_new;
    State f_new;
    double err; // weighted RMS error estimate
};

template <typename Rhs>
StepResult dp5_step(const Rhs& rhs, double t, const State& y, const State& f0,
                    double h, double rtol, double atol, SolverStats& stats) {
    State tmp, k2, k3, k4, k5, k6;
    for (int i = 0; i < kDim; ++i) tmp[i] = y[i] + h * a21 * f0[i];
    k2 = rhs(t + c2 * h, tmp);
    for (int i = 0; i < kDim; ++i) tmp[i] = y[i] + h * (a31 * f0[i] + a32 * k2[i]);
    k3 = rhs(t + c3 * h, tmp);
    for (int i = 0; i < kDim; ++i)
        tmp[i] = y[i] + h * (a41 * f0[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(t + c4 * h, tmp);
    for (int i = 0; i < kDim; ++i)
        tmp[i] = y[i] + h * (a51 * f0[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(t + c5 * h, tmp);
    for (int i = 0; i < kDim; ++i)
        tmp[i] = y[i] + h * (a61 * f0[i] + a62 * k2[i] + a63 * k3[i] +
                             a64 * k4[i] + a65 * k5[i]);
    k6 = rhs(t + h, tmp);

    StepResult r;
    for (int i = 0; i < kDim; ++i)
        r.y_new[i] = y[i] + h * (b1 * f0[i] + b3 * k3[i] + b4 * k4[i] +
                                 b5 * k5[i] + b6 * k6[i]);
    r.f_new = rhs(t + h, r.y_new);
    stats.rhs_evals += 6;

    double sum = 0.0;
    for (int i = 0; i < kDim; ++i) {
        const double e = h * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] +
                              e5 * k5[i] + e6 * k6[i] + e7 * r.f_new[i]);
        const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(r.y_new[i]));
        const double q = e / sc;
        sum += q * q;
    }
    r.err = std::sqrt(sum / kDim);
    return r;
}

void hermite(const State& y0, const State& f0, const State& y1,
             const State& f1, double h, double theta, State& out) {
    const double t2 = theta * theta, t3 = t2 * theta;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + theta;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    for (int i = 0; i < kDim; ++i)
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
}

template <typename Rhs>
double initial_step(const Rhs& rhs, double t0, const State& y0, const State& f0,
                    double rtol, double atol, double hmax, SolverStats& stats) {
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < kDim; ++i) {
        const double sc = atol + rtol * std::abs(y0[i]);
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / kDim);
    d1 = std::sqrt(d1 / kDim);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, hmax);
    State y1;
    for (int i = 0; i < kDim; ++i) y1[i] = y0[i] + h0 * f0[i];
    const State f1 = rhs(t0 + h0, y1);
    stats.rhs_evals += 1;
    double d2 = 0.0;
    for (int i = 0; i < kDim; ++i) {
        const double sc = atol + rtol * std::abs(y0[i]);
        const double df = (f1[i] - f0[i]) / sc;
        d2 += df * df;
    }
    d2 = std::sqrt(d2 / kDim) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = (dmax <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                      : std::pow(0.01 / dmax, 0.2);
    return std::min({100 * h0, h1, hmax});
}

/// Integrates one leg from t0 to t1 in place, emitting Hermite-interpolated
/// samples at the ascending `times` (all inside (t0, t1]).
template <typename Rhs, typename Emit>
void integrate_leg(const Rhs& rhs, double t0, double t1, State& y,
                   const SolverOptions& opts, const std::vector<double>& times,
                   SolverStats& stats, const Emit& emit) {
    const double leg_span = t1 - t0;
    const double t_eps = 1e-12 * leg_span;
    double t = t0;
    State f = rhs(t, y);
    stats.rhs_evals += 1;
    std::size_t next_out = 0;

    const auto emit_through = [&](double t_step, double h, const State& y0,
                                  const State& f0, const State& y1,
                                  const State& f1) {
        while (next_out < times.size() && times[next_out] <= t_step + h + t_eps) {
            const double theta = std::clamp((times[next_out] - t_step) / h, 0.0, 1.0);
            State out;
            hermite(y0, f0, y1, f1, h, theta, out);
            emit(times[next_out], out);
            ++next_out;
        }
    };

    if (opts.fixed_step) {
        while (t1 - t > t_eps) {
            const double h = std::min(opts.max_step, t1 - t);
            StepResult s = dp5_step(rhs, t, y, f, h, opts.rtol, opts.atol, stats);
            stats.steps += 1;
            emit_through(t, h, y, f, s.y_new, s.f_new);
            y = s.y_new;
            f = s.f_new;
            t += h;
        }
    } else {
        double h = initial_step(rhs, t, y, f, opts.rtol, opts.atol,
                                std::min(opts.max_step, leg_span), stats);
        const double h_min = std::max(1e-14 * leg_span, 1e-13);
        double err_old = 1e-4;
        // PI controller (beta stabilization): avoids accept/reject chatter
        // when the step rides the stability boundary of the explicit pair.
        constexpr double beta = 0.04, alpha = 0.2 - 0.75 * beta, safety = 0.9;
        bool last_rejected = false;

        while (t1 - t > t_eps) {
            if (h < h_min) {
                std::ostringstream os;
                os << "step size underflow at t = " << t
                   << " us (stiffness suspected)";
                throw IntegrationFailureError(os.str(), t);
            }
            const double h_eff = std::min(h, t1 - t);
            StepResult s =
                dp5_step(rhs, t, y, f, h_eff, opts.rtol, opts.atol, stats);
            if (s.err <= 1.0) {
                stats.steps += 1;
                emit_through(t, h_eff, y, f, s.y_new, s.f_new);
                y = s.y_new;
                f = s.f_new;
                t += h_eff;
                const double err = std::max(s.err, 1e-10);
                double fac = safety * std::pow(err, -alpha) * std::pow(err_old, beta);
                fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
                h = std::min(h_eff * fac, opts.max_step);
                err_old = err;
                last_rejected = false;
            } else {
                stats.rejected_steps += 1;
                h = h_eff * std::max(0.2, safety * std::pow(s.err, -alpha));
                last_rejected = true;
            }
        }
    }
    // Grid times that coincide with the leg end within roundoff.
    while (next_out < times.size()) {
        emit(times[next_out], y);
        ++next_out;
    }
}

} // namespace

void SolverOptions::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) {
        throw InvalidParameterError("SolverOptions: rtol and atol must be > 0");
    }
    if (!(max_step > 0.0)) {
        throw InvalidParameterError("SolverOptions: max_step must be > 0");
    }
    if (output_points < 2) {
        throw InvalidParameterError("SolverOptions: output_points must be >= 2");
    }
}

Trajectory evolve(const DensityMatrix& initial, const SystemParams& params,
                  const SweepProgram& sweep, const SolverOptions& opts) {
    initial.validate();
    params.validate();
    sweep.validate();
    opts.validate();

    const double total = sweep.total_duration();
    const int n_per_dir = opts.output_points;
    const bool dbl = sweep.mode == SweepMode::Double;
    const int n_total = dbl ? 2 * n_per_dir - 1 : n_per_dir;
    const double dt_out = sweep.duration_single / (n_per_dir - 1);

    // Uniform output grid with exact leg boundaries (the fold sample is
    // shared between the two directions of a Double sweep).
    std::vector<double> tgrid(static_cast<std::size_t>(n_total));
    for (int k = 0; k < n_total; ++k) tgrid[k] = k * dt_out;
    tgrid[n_per_dir - 1] = sweep.duration_single;
    tgrid[n_total - 1] = total;

    Trajectory traj;
    traj.samples.reserve(tgrid.size());

    const auto rhs = [&](double t, const PackedState& y) {
        return packed_rhs(y, params, sweep.detuning(t));
    };
    const auto emit = [&](double t, const PackedState& y) {
        validate_packed(y);
        traj.samples.push_back({t, sweep.detuning(t), y});
    };

    PackedState y = initial.packed();
    emit(0.0, y);

    const std::vector<double> leg1(tgrid.begin() + 1, tgrid.begin() + n_per_dir);
    integrate_leg(rhs, 0.0, sweep.duration_single, y, opts, leg1, traj.stats, emit);
    if (dbl) {
        const std::vector<double> leg2(tgrid.begin() + n_per_dir, tgrid.end());
        integrate_leg(rhs, sweep.duration_single, total, y, opts, leg2,
                      traj.stats, emit);
    }
    return traj;
}

namespace {

/// Linearized generator with the nonlinear rate frozen at `nl` (rad/us).
PackedState frozen_rhs(const PackedState& y, const SystemParams& params,
                       double delta_p, double nl) {
    using namespace idx;
    const double a = params.omega_p / 2.0;
    const double c = params.omega_c / 2.0;
    const double dp = delta_p;
    const double d31 = delta_p + params.delta_c;
    const double dc = params.delta_c;
    const double g21 = params.gamma2 / 2.0;
    const double g31 = (params.gamma3 + nl) / 2.0 + params.gamma31;
    const double g32 = (params.gamma2 + params.gamma3 + nl) / 2.0 +
                       (params.gamma31_in_gamma32 ? params.gamma31 : 0.0);

    PackedState d;
    d[p1] = -params.omega_p * y[im21] + params.gamma2 * y[p2] +
            params.gamma4 * y[p4];
    d[p2] = params.omega_p * y[im21] - params.omega_c * y[im32] -
            params.gamma2 * y[p2] + params.branch_b * params.gamma3 * y[p3];
    d[p3] = params.omega_c * y[im32] - (params.gamma3 + nl) * y[p3];
    d[p4] = ((1.0 - params.branch_b) * params.gamma3 + nl) * y[p3] -
            params.gamma4 * y[p4];
    d[re21] = -dp * y[im21] - c * y[im31] - g21 * y[re21];
    d[im21] = a * (y[p1] - y[p2]) + dp * y[re21] + c * y[re31] - g21 * y[im21];
    d[re31] = -c * y[im21] - d31 * y[im31] + a * y[im32] - g31 * y[re31];
    d[im31] = c * y[re21] + d31 * y[re31] - a * y[re32] - g31 * y[im31];
    d[re32] = a * y[im31] - dc * y[im32] - g32 * y[re32];
    d[im32] = c * (y[p2] - y[p3]) + dc * y[re32] - a * y[re31] - g32 * y[im32];
    return d;
}

} // namespace

DensityMatrix steady_state(const SystemParams& params, double delta_p,
                           double tol) {
    params.validate();
    if (!(tol > 0.0)) {
        throw InvalidParameterError("steady_state: tol must be > 0");
    }

    using Mat = Eigen::Matrix<double, kDim, kDim>;
    using Vec = Eigen::Matrix<double, kDim, 1>;

    const int n_max = 200;
    double r = 0.0;
    PackedState sol{};

    for (int iter = 0; iter < n_max; ++iter) {
        Mat A;
        for (int k = 0; k < kDim; ++k) {
            PackedState e{};
            e[k] = 1.0;
            const PackedState col = frozen_rhs(e, params, delta_p, r);
            for (int i = 0; i < kDim; ++i) A(i, k) = col[i];
        }
        // The four population rows sum to zero identically; replace the first
        // with the trace constraint.
        for (int k = 0; k < kDim; ++k) A(0, k) = k < 4 ? 1.0 : 0.0;
        Vec b = Vec::Zero();
        b(0) = 1.0;

        const Eigen::PartialPivLU<Mat> lu(A);
        const Vec x = lu.solve(b);
        if (!x.allFinite() || (A * x - b).norm() > 1e-8) {
            throw ConvergenceError(
                "steady_state: linear system is singular (gamma4 = 0 with a "
                "decoupled reservoir?)");
        }
        for (int i = 0; i < kDim; ++i) sol[i] = x(i);

        const double p3 = std::max(0.0, sol[idx::p3]);
        const double r_new = params.gamma3p_eff() * p3;
        if (std::abs(r_new - r) <= tol * (1.0 + std::abs(r_new))) {
            return DensityMatrix::from_packed(sol);
        }
        r += 0.5 * (r_new - r); // damped update
    }
    throw ConvergenceError(
        "steady_state: nonlinear fixed point did not converge in 200 iterations");
}

} // namespace eitsim
