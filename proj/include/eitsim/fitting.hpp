// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eitsim/spectroscopy.hpp"

namespace eitsim {

/// Deterministic 64-bit PRNG (splitmix64). The exact algorithm is part of
/// the reproducibility contract; see README.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    /// Uniform double in [0, 1).
    double uniform();
    /// Standard normal via Box-Muller (cosine branch, one deviate per pair).
    double normal();

private:
    std::uint64_t state_;
};

/// One free parameter of a fit, in laboratory units (MHz for frequencies and
/// rates, dimensionless for od0/branch_b/density_scale, MHz for
/// detuning_offset).
struct FreeParameter {
    std::string name;
    double initial;
    double lower;
    double upper;
};

/// Names accepted in FreeParameter::name.
bool is_fittable_parameter(const std::string& name);

struct FitOptions {
    int multistart = 5;      ///< jittered Nelder-Mead starts
    int max_iter = 2000;     ///< simplex iterations per start
    double sse_tol = 1e-12;  ///< converged when SSE spread < sse_tol*(1+SSE)
    double param_tol = 1e-6; ///< ... or relative parameter spread below this
};

struct FitProblem {
    Spectrum data;             ///< transmission vs detuning, one or both directions
    std::vector<FreeParameter> free;
    SystemParams fixed;        ///< baseline parameters (internal units)
    SweepProgram sweep;
    SolverOptions solver;
    FitOptions options;
    std::uint64_t seed = 1;    ///< jitter seed; fit is pure given (problem, seed)

    void validate() const;
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> values;        ///< laboratory units, within bounds
    std::vector<double> uncertainties; ///< curvature estimates; NaN if singular
    double sse = 0.0;
    int n_iter = 0;        ///< simplex iterations summed over starts
    std::int64_t n_eval = 0;
    bool converged = false;
    std::vector<double> best_sse_trace; ///< best SSE after each iteration (best start)
};

/// Applies a named candidate value (laboratory units) onto params. The
/// detuning_offset pseudo-parameter is returned separately by the caller.
void apply_parameter(SystemParams& params, const std::string& name,
                     double lab_value);

/// Forward-simulates the candidate and returns model-minus-data transmission
/// at the data's (detuning, direction) samples, interpolating the model
/// linearly in detuning; a rigid detuning_offset (MHz) shifts the model axis.
std::vector<double> residuals(const std::vector<double>& candidate,
                              const FitProblem& problem);

/// Sum of squared residuals for a candidate.
double objective_sse(const std::vector<double>& candidate,
                     const FitProblem& problem);

/// Bounded Nelder-Mead (reflection/expansion/contraction/shrink with bound
/// projection), multi-start with best-of selection, curvature-based
/// uncertainties at the optimum.
FitResult fit(const FitProblem& problem);

/// Forward simulation plus i.i.d. Gaussian transmission noise (clamped to
/// (0,1]); deterministic for a fixed seed.
Spectrum synthesize_data(const SystemParams& params, const SweepProgram& sweep,
                         const SolverOptions& solver, double noise_sigma,
                         std::uint64_t seed);

/// Forward-simulates a candidate and resamples every model column onto the
/// data's (detuning, direction) grid; used for the fit-report overlay CSV.
Spectrum model_on_data_grid(const std::vector<double>& candidate,
                            const FitProblem& problem);

/// Stand-alone bounded Nelder-Mead used by fit(); exposed for testing.
struct SimplexResult {
    std::vector<double> x;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> best_trace;
};
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0,
                          const std::vector<double>& lower,
                          const std::vector<double>& upper,
                          int max_iter, double sse_tol, double param_tol);

} // namespace eitsim
