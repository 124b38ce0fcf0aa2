// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "eitsim/density_matrix.hpp"
#include "eitsim/params.hpp"
#include "eitsim/sweep.hpp"

namespace eitsim {

struct SolverOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double max_step = 1.0;  ///< us; in fixed-step mode this is the step size
    int output_points = 801; ///< samples per scan direction
    bool fixed_step = false; ///< disable error control (convergence studies)

    void validate() const;
};

struct SolverStats {
    std::int64_t steps = 0;          ///< accepted steps
    std::int64_t rejected_steps = 0;
    std::int64_t rhs_evals = 0;
};

/// One dense-output sample of the evolution.
struct TrajectorySample {
    double t;        ///< us
    double delta_p;  ///< rad/us, equals SweepProgram::detuning(t)
    PackedState y;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    SolverStats stats;

    DensityMatrix state(std::size_t i) const {
        return DensityMatrix::from_packed(samples.at(i).y);
    }
};

/// Integrates the master equation along the sweep with an adaptive embedded
/// Dormand-Prince 5(4) pair (cubic Hermite dense output on a uniform grid,
/// opts.output_points per scan direction; a Double sweep shares the fold
/// sample between directions). Deterministic: identical inputs give
/// bit-identical trajectories on the same build.
Trajectory evolve(const DensityMatrix& initial, const SystemParams& params,
                  const SweepProgram& sweep, const SolverOptions& opts);

/// Fixed-detuning steady state. Freezes the nonlinear rate r = gamma3p*sigma33,
/// solves the resulting 10x10 linear system (trace row replacing the redundant
/// population-1 row), and iterates r to a damped fixed point with relative
/// tolerance tol (N_max = 200). For gamma3p = 0 a single solve suffices.
DensityMatrix steady_state(const SystemParams& params, double delta_p,
                           double tol = 1e-12);

} // namespace eitsim
