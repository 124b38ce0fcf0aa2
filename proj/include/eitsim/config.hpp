// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eitsim/fitting.hpp"
#include "eitsim/integrator.hpp"
#include "eitsim/params.hpp"
#include "eitsim/sweep.hpp"

namespace eitsim {

enum class Command { Simulate, Fit, Synth };

/// Validated run configuration in laboratory units. Produced by parse_config;
/// converted to internal units in one place (to_system_params etc.).
struct RunConfig {
    Command command = Command::Simulate;

    // physics (MHz ordinary frequency unless noted)
    double omega_c_MHz = 0.0;
    double delta_c_MHz = 0.0;
    std::optional<double> probe_power_uW; // exactly one of these two is set
    std::optional<double> omega_p_MHz;
    double beam_radius_mm = 0.75;
    double i_sat_mW_per_cm2 = 1.67;
    double gamma2_MHz = 6.065;
    double gamma3_MHz = 0.0159155; // 1/(10 us) lifetime as ordinary frequency
    double gamma3p_MHz = 0.0;
    double gamma4_MHz = 2.0e-4;
    double gamma31_MHz = 0.0;
    double branch_b = 0.5;
    double od0 = 1.0;
    double density_scale = 1.0;
    bool gamma31_in_gamma32 = true;

    // sweep
    double sweep_start_MHz = -20.0;
    double sweep_end_MHz = 20.0;
    double sweep_duration_us = 480.0;
    bool double_scan = true;

    // solver
    double rtol = 1e-8;
    double atol = 1e-10;
    double max_step_us = 1.0;
    int output_points = 801;

    // synth
    double noise_sigma = 0.005;
    std::uint64_t seed = 1;

    // fit
    std::string data_csv;
    std::vector<std::string> free_names; // default set applied for FIT
    std::vector<FreeParameter> free_params; // resolved (with bounds)
    int fit_multistart = 5;
    int fit_max_iter = 2000;
    std::string fit_use_direction = "both"; // forward|backward|both
    double fit_rtol = 1e-6;
    double fit_atol = 1e-9;

    // io
    std::string output_prefix = "run";

    SystemParams to_system_params() const;
    SweepProgram to_sweep() const;
    SolverOptions to_solver_options() const;
    /// Probe Rabi frequency in rad/us (from power or direct omega_p_MHz).
    double probe_omega_p() const;
};

/// Parses a line-oriented key=value document ('#' starts a comment, keys are
/// case-sensitive, unknown or duplicate keys are errors). Defaults applied;
/// every error names the offending key and line number.
RunConfig parse_config(const std::string& text);

RunConfig parse_config_file(const std::string& path);

} // namespace eitsim
