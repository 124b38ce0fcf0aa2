// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#include "eitsim/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "eitsim/errors.hpp"
#include "eitsim/units.hpp"

namespace eitsim {

// ---------------------------------------------------------------------------
// PRNG (splitmix64 + Box-Muller). The algorithm is pinned for reproducibility
// across builds and platforms; see README.
// ---------------------------------------------------------------------------

std::uint64_t SplitMix64::next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::normal() {
    const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------
// Free-parameter plumbing
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string>& fittable_names() {
    static const std::set<std::string> names = {
        "omega_p",   "omega_c",  "delta_c",       "gamma2",
        "gamma3",    "gamma3p",  "gamma4",        "gamma31",
        "branch_b",  "od0",      "density_scale", "detuning_offset"};
    return names;
}

bool is_frequency_like(const std::string& name) {
    return name != "branch_b" && name != "od0" && name != "density_scale" &&
           name != "detuning_offset";
}

} // namespace

bool is_fittable_parameter(const std::string& name) {
    return fittable_names().count(name) > 0;
}

void apply_parameter(SystemParams& params, const std::string& name,
                     double lab_value) {
    const double v =
        is_frequency_like(name) ? units::rad_per_us(lab_value) : lab_value;
    if (name == "omega_p") params.omega_p = v;
    else if (name == "omega_c") params.omega_c = v;
    else if (name == "delta_c") params.delta_c = v;
    else if (name == "gamma2") params.gamma2 = v;
    else if (name == "gamma3") params.gamma3 = v;
    else if (name == "gamma3p") params.gamma3p = v;
    else if (name == "gamma4") params.gamma4 = v;
    else if (name == "gamma31") params.gamma31 = v;
    else if (name == "branch_b") params.branch_b = v;
    else if (name == "od0") params.od0 = v;
    else if (name == "density_scale") params.density_scale = v;
    else {
        throw InvalidParameterError("apply_parameter: unknown name '" + name +
                                    "'");
    }
}

void FitProblem::validate() const {
    data.validate();
    if (free.empty()) throw InvalidInputError("fit problem has no free parameters");
    std::set<std::string> seen;
    for (const FreeParameter& p : free) {
        if (!is_fittable_parameter(p.name)) {
            throw InvalidInputError("unknown fit parameter '" + p.name + "'");
        }
        if (!seen.insert(p.name).second) {
            throw InvalidInputError("duplicate fit parameter '" + p.name + "'");
        }
        if (!(p.lower <= p.initial && p.initial <= p.upper)) {
            throw InvalidInputError("fit parameter '" + p.name +
                                    "': bounds must satisfy lower <= initial <= upper");
        }
    }
    if (data.rows.size() < 2 * free.size()) {
        throw InvalidInputError(
            "fit problem needs at least 2x more data points than free parameters");
    }
    fixed.validate();
    sweep.validate();
    solver.validate();
    if (options.multistart < 1 || options.max_iter < 1) {
        throw InvalidInputError("fit options: multistart and max_iter must be >= 1");
    }
}

namespace {

/// Transmission of one monotone direction segment, prepared for linear
/// interpolation in detuning.
struct SegmentTable {
    std::vector<double> x; // detuning_MHz, ascending
    std::vector<double> t;

    double interp(double q) const {
        if (x.empty()) return 1.0;
        if (q <= x.front()) return t.front();
        if (q >= x.back()) return t.back();
        const auto it = std::upper_bound(x.begin(), x.end(), q);
        const std::size_t j = static_cast<std::size_t>(it - x.begin());
        const double w = (q - x[j - 1]) / (x[j] - x[j - 1]);
        return t[j - 1] + w * (t[j] - t[j - 1]);
    }
};

SegmentTable make_table(const Spectrum& spec, ScanDirection dir) {
    SegmentTable tab;
    std::vector<SpectrumRow> seg = spec.segment(dir);
    std::sort(seg.begin(), seg.end(),
              [](const SpectrumRow& a, const SpectrumRow& b) {
                  return a.delta_p_MHz < b.delta_p_MHz;
              });
    tab.x.reserve(seg.size());
    tab.t.reserve(seg.size());
    for (const SpectrumRow& r : seg) {
        tab.x.push_back(r.delta_p_MHz);
        tab.t.push_back(r.transmission);
    }
    return tab;
}

/// Applies a candidate onto the baseline parameters; returns the detuning
/// offset (MHz) separately.
SystemParams candidate_params(const std::vector<double>& candidate,
                              const FitProblem& problem, double* offset_MHz) {
    SystemParams p = problem.fixed;
    *offset_MHz = 0.0;
    for (std::size_t i = 0; i < problem.free.size(); ++i) {
        const std::string& name = problem.free[i].name;
        if (name == "detuning_offset") {
            *offset_MHz = candidate[i];
        } else {
            apply_parameter(p, name, candidate[i]);
        }
    }
    return p;
}

} // namespace

std::vector<double> residuals(const std::vector<double>& candidate,
                              const FitProblem& problem) {
    if (candidate.size() != problem.free.size()) {
        throw InvalidInputError("residuals: candidate size mismatch");
    }
    double offset = 0.0;
    const SystemParams params = candidate_params(candidate, problem, &offset);

    Trajectory traj;
    try {
        traj = evolve(DensityMatrix::ground(), params, problem.sweep,
                      problem.solver);
    } catch (const IntegrationFailureError& e) {
        std::ostringstream os;
        os << e.what() << " [candidate:";
        for (std::size_t i = 0; i < candidate.size(); ++i) {
            os << ' ' << problem.free[i].name << '=' << candidate[i];
        }
        os << ']';
        throw IntegrationFailureError(os.str(), e.last_good_t_us);
    }
    const Spectrum model = spectrum_from_trajectory(traj, params);
    const SegmentTable fwd = make_table(model, ScanDirection::Forward);
    const SegmentTable bwd = make_table(model, ScanDirection::Backward);

    std::vector<double> out;
    out.reserve(problem.data.rows.size());
    for (const SpectrumRow& r : problem.data.rows) {
        const SegmentTable& tab =
            r.direction == ScanDirection::Forward ? fwd : bwd;
        if (tab.x.empty()) {
            throw InvalidInputError(
                "residuals: data contains a scan direction absent from the model sweep");
        }
        // The rigid offset shifts the model's detuning axis by +offset, so the
        // model is sampled at (data detuning - offset).
        out.push_back(tab.interp(r.delta_p_MHz - offset) - r.transmission);
    }
    return out;
}

double objective_sse(const std::vector<double>& candidate,
                     const FitProblem& problem) {
    const std::vector<double> r = residuals(candidate, problem);
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
}

// ---------------------------------------------------------------------------
// Bounded Nelder-Mead
// ---------------------------------------------------------------------------

namespace {

void project(std::vector<double>& x, const std::vector<double>& lo,
             const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::clamp(x[i], lo[i], hi[i]);
    }
}

} // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0,
                          const std::vector<double>& lower,
                          const std::vector<double>& upper,
                          int max_iter, double sse_tol, double param_tol) {
    const std::size_t n = x0.size();
    constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;
    project(x0, lower, upper);

    std::vector<std::vector<double>> xs(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        double step = 0.05 * (upper[i] - lower[i]);
        if (step == 0.0) step = 0.05 * std::max(1.0, std::abs(x0[i]));
        if (x0[i] + step > upper[i]) step = -step;
        xs[i + 1][i] = std::clamp(x0[i] + step, lower[i], upper[i]);
    }
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

    SimplexResult res;
    res.best_trace.reserve(static_cast<std::size_t>(max_iter));

    std::vector<std::size_t> order(n + 1);
    for (int iter = 0; iter < max_iter; ++iter) {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        const std::size_t best = order[0], worst = order[n];
        res.best_trace.push_back(fs[best]);
        res.iterations = iter + 1;

        // Convergence: SSE spread or relative parameter spread of the simplex.
        const double spread = fs[worst] - fs[best];
        double pspread = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double rel = std::abs(xs[i][j] - xs[best][j]) /
                                   (1.0 + std::abs(xs[best][j]));
                pspread = std::max(pspread, rel);
            }
        }
        if (spread < sse_tol * (1.0 + std::abs(fs[best])) || pspread < param_tol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += xs[i][j];
        }
        for (std::size_t j = 0; j < n; ++j) centroid[j] /= static_cast<double>(n);

        std::vector<double> xr(n);
        for (std::size_t j = 0; j < n; ++j)
            xr[j] = centroid[j] + alpha * (centroid[j] - xs[worst][j]);
        project(xr, lower, upper);
        const double fr = f(xr);

        if (fr < fs[order[0]]) {
            std::vector<double> xe(n);
            for (std::size_t j = 0; j < n; ++j)
                xe[j] = centroid[j] + gamma * (centroid[j] - xs[worst][j]);
            project(xe, lower, upper);
            const double fe = f(xe);
            if (fe < fr) {
                xs[worst] = xe;
                fs[worst] = fe;
            } else {
                xs[worst] = xr;
                fs[worst] = fr;
            }
        } else if (fr < fs[order[n - 1]]) {
            xs[worst] = xr;
            fs[worst] = fr;
        } else {
            // Contraction (outside if the reflection helped at all).
            std::vector<double> xc(n);
            const bool outside = fr < fs[worst];
            const std::vector<double>& towards = outside ? xr : xs[worst];
            for (std::size_t j = 0; j < n; ++j)
                xc[j] = centroid[j] + rho * (towards[j] - centroid[j]);
            project(xc, lower, upper);
            const double fc = f(xc);
            if (fc < std::min(fr, fs[worst])) {
                xs[worst] = xc;
                fs[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j)
                        xs[i][j] = xs[best][j] + shrink * (xs[i][j] - xs[best][j]);
                    project(xs[i], lower, upper);
                    fs[i] = f(xs[i]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (fs[i] < fs[best]) best = i;
    }
    res.x = xs[best];
    res.fx = fs[best];
    if (!res.best_trace.empty()) res.best_trace.back() = std::min(
        res.best_trace.back(), res.fx);
    return res;
}

// ---------------------------------------------------------------------------
// fit() with multi-start and curvature uncertainties
// ---------------------------------------------------------------------------

namespace {

int thread_cap() {
    if (const char* env = std::getenv("EIT_SIM_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Curvature (finite-difference Hessian of SSE) -> 1-sigma estimates via
/// cov = 2 s^2 H^{-1}, s^2 = SSE/(n-p).
std::vector<double> curvature_uncertainties(
    const std::vector<double>& x, double sse, std::size_t n_data,
    const FitProblem& problem,
    const std::function<double(const std::vector<double>&)>& f) {
    const std::size_t p = x.size();
    std::vector<double> out(p, std::numeric_limits<double>::quiet_NaN());
    if (n_data <= p) return out;

    std::vector<double> h(p), lo(p), hi(p);
    for (std::size_t i = 0; i < p; ++i) {
        const double span = problem.free[i].upper - problem.free[i].lower;
        h[i] = std::max(1e-3 * span, 1e-9 * (1.0 + std::abs(x[i])));
        lo[i] = problem.free[i].lower;
        hi[i] = problem.free[i].upper;
    }
    Eigen::MatrixXd H(p, p);
    try {
        const auto at = [&](std::vector<double> q) {
            project(q, lo, hi);
            return f(q);
        };
        for (std::size_t i = 0; i < p; ++i) {
            std::vector<double> xp = x, xm = x;
            xp[i] += h[i];
            xm[i] -= h[i];
            H(i, i) = (at(xp) - 2.0 * sse + at(xm)) / (h[i] * h[i]);
            for (std::size_t j = i + 1; j < p; ++j) {
                std::vector<double> pp = x, pm = x, mp = x, mm = x;
                pp[i] += h[i]; pp[j] += h[j];
                pm[i] += h[i]; pm[j] -= h[j];
                mp[i] -= h[i]; mp[j] += h[j];
                mm[i] -= h[i]; mm[j] -= h[j];
                H(i, j) = H(j, i) =
                    (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h[i] * h[j]);
            }
        }
        const double s2 = sse / static_cast<double>(n_data - p);
        const Eigen::MatrixXd cov = 2.0 * s2 * H.inverse();
        for (std::size_t i = 0; i < p; ++i) {
            const double v = cov(i, i);
            out[i] = v > 0.0 ? std::sqrt(v) : std::numeric_limits<double>::quiet_NaN();
        }
    } catch (const Error&) {
        // Leave NaN uncertainties if the stencil cannot be evaluated.
    }
    return out;
}

} // namespace

FitResult fit(const FitProblem& problem) {
    problem.validate();
    const std::size_t p = problem.free.size();

    std::vector<double> lo(p), hi(p), init(p);
    for (std::size_t i = 0; i < p; ++i) {
        lo[i] = problem.free[i].lower;
        hi[i] = problem.free[i].upper;
        init[i] = problem.free[i].initial;
    }

    // Degenerate-problem guard: constant data cannot constrain anything.
    {
        double tmin = problem.data.rows.front().transmission;
        double tmax = tmin;
        for (const SpectrumRow& r : problem.data.rows) {
            tmin = std::min(tmin, r.transmission);
            tmax = std::max(tmax, r.transmission);
        }
        if (tmax - tmin < 1e-12) {
            throw InvalidInputError("fit: data transmission is constant (ill-posed)");
        }
    }

    const auto objective = [&](const std::vector<double>& x) {
        return objective_sse(x, problem);
    };

    // Deterministically jittered starts (start 0 is the user's initial point).
    std::vector<std::vector<double>> starts(
        static_cast<std::size_t>(problem.options.multistart));
    for (int k = 0; k < problem.options.multistart; ++k) {
        starts[k] = init;
        if (k > 0) {
            SplitMix64 rng(problem.seed ^
                           (0xA5A5A5A5ULL + 0x9E3779B97F4A7C15ULL *
                                                static_cast<std::uint64_t>(k)));
            for (std::size_t i = 0; i < p; ++i) {
                starts[k][i] += (rng.uniform() - 0.5) * 0.3 * (hi[i] - lo[i]);
                starts[k][i] = std::clamp(starts[k][i], lo[i], hi[i]);
            }
        }
    }

    std::vector<SimplexResult> runs(starts.size());
    const int n_threads =
        std::min<int>(thread_cap(), static_cast<int>(starts.size()));
    if (n_threads <= 1) {
        for (std::size_t k = 0; k < starts.size(); ++k) {
            runs[k] = nelder_mead(objective, starts[k], lo, hi,
                                  problem.options.max_iter,
                                  problem.options.sse_tol,
                                  problem.options.param_tol);
        }
    } else {
        // Starts are independent and deterministic, so a static partition
        // keeps the result identical to the sequential path.
        std::vector<std::thread> pool;
        for (int w = 0; w < n_threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t k = static_cast<std::size_t>(w);
                     k < starts.size(); k += static_cast<std::size_t>(n_threads)) {
                    runs[k] = nelder_mead(objective, starts[k], lo, hi,
                                          problem.options.max_iter,
                                          problem.options.sse_tol,
                                          problem.options.param_tol);
                }
            });
        }
        for (std::thread& th : pool) th.join();
    }

    std::size_t best = 0;
    for (std::size_t k = 1; k < runs.size(); ++k) {
        if (runs[k].fx < runs[best].fx) best = k;
    }

    FitResult result;
    for (const FreeParameter& fp : problem.free) result.names.push_back(fp.name);
    result.values = runs[best].x;
    result.sse = runs[best].fx;
    result.converged = runs[best].converged;
    result.best_sse_trace = runs[best].best_trace;
    for (const SimplexResult& r : runs) {
        result.n_iter += r.iterations;
        result.n_eval += static_cast<std::int64_t>(r.best_trace.size());
    }
    result.uncertainties = curvature_uncertainties(
        result.values, result.sse, problem.data.rows.size(), problem, objective);
    return result;
}

Spectrum model_on_data_grid(const std::vector<double>& candidate,
                            const FitProblem& problem) {
    double offset = 0.0;
    const SystemParams params = candidate_params(candidate, problem, &offset);
    const Trajectory traj =
        evolve(DensityMatrix::ground(), params, problem.sweep, problem.solver);
    const Spectrum model = spectrum_from_trajectory(traj, params);

    // Per-direction interpolation tables for every column.
    struct Columns {
        std::vector<double> x;
        std::vector<std::array<double, 8>> v; // T, p1..p4, re21, im21, t_us
    };
    const auto build = [&](ScanDirection dir) {
        Columns c;
        std::vector<SpectrumRow> seg = model.segment(dir);
        std::sort(seg.begin(), seg.end(),
                  [](const SpectrumRow& a, const SpectrumRow& b) {
                      return a.delta_p_MHz < b.delta_p_MHz;
                  });
        for (const SpectrumRow& r : seg) {
            c.x.push_back(r.delta_p_MHz);
            c.v.push_back({r.transmission, r.pop1, r.pop2, r.pop3, r.pop4,
                           r.re_sigma21, r.im_sigma21, r.t_us});
        }
        return c;
    };
    const Columns fwd = build(ScanDirection::Forward);
    const Columns bwd = build(ScanDirection::Backward);

    Spectrum out;
    out.rows.reserve(problem.data.rows.size());
    for (const SpectrumRow& d : problem.data.rows) {
        const Columns& c = d.direction == ScanDirection::Forward ? fwd : bwd;
        if (c.x.empty()) {
            throw InvalidInputError(
                "model_on_data_grid: data direction absent from the model sweep");
        }
        const double q =
            std::clamp(d.delta_p_MHz - offset, c.x.front(), c.x.back());
        const auto it = std::upper_bound(c.x.begin(), c.x.end(), q);
        std::size_t j = static_cast<std::size_t>(it - c.x.begin());
        if (j == 0) j = 1;
        if (j >= c.x.size()) j = c.x.size() - 1;
        const double w = (q - c.x[j - 1]) / (c.x[j] - c.x[j - 1]);
        std::array<double, 8> vi;
        for (std::size_t k = 0; k < 8; ++k) {
            vi[k] = c.v[j - 1][k] + w * (c.v[j][k] - c.v[j - 1][k]);
        }
        SpectrumRow r;
        r.t_us = d.t_us;
        r.delta_p_MHz = d.delta_p_MHz;
        r.direction = d.direction;
        r.transmission = vi[0];
        r.pop1 = vi[1];
        r.pop2 = vi[2];
        r.pop3 = vi[3];
        r.pop4 = vi[4];
        r.re_sigma21 = vi[5];
        r.im_sigma21 = vi[6];
        out.rows.push_back(r);
    }
    return out;
}

Spectrum synthesize_data(const SystemParams& params, const SweepProgram& sweep,
                         const SolverOptions& solver, double noise_sigma,
                         std::uint64_t seed) {
    if (noise_sigma < 0.0) {
        throw InvalidParameterError("synthesize_data: noise_sigma must be >= 0");
    }
    const Trajectory traj = evolve(DensityMatrix::ground(), params, sweep, solver);
    Spectrum spec = spectrum_from_trajectory(traj, params);
    if (noise_sigma > 0.0) {
        SplitMix64 rng(seed);
        for (SpectrumRow& r : spec.rows) {
            const double noisy = r.transmission + noise_sigma * rng.normal();
            r.transmission = std::clamp(noisy, 1e-12, 1.0);
        }
    }
    return spec;
}

} // namespace eitsim
