// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#include "eitsim/run.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "eitsim/csv_io.hpp"
#include "eitsim/errors.hpp"
#include "eitsim/fitting.hpp"
#include "eitsim/model.hpp"
#include "eitsim/spectroscopy.hpp"
#include "eitsim/units.hpp"

namespace eitsim {

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) {
        throw InvalidInputError("cannot open '" + path + "' for writing");
    }
    return os;
}

/// Re-throws any library error with the pipeline stage prepended.
template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const IntegrationFailureError& e) {
        throw IntegrationFailureError(std::string(name) + ": " + e.what(),
                                      e.last_good_t_us);
    } catch (const Error& e) {
        throw Error(std::string(name) + ": " + e.what());
    }
}

void echo_params(std::ostream& os, const RunConfig& cfg, const SystemParams& p) {
    os << "parameters (internal rad/us unless noted):\n"
       << "  omega_p = " << p.omega_p << " (2pi x "
       << units::to_mhz(p.omega_p) << " MHz)\n"
       << "  omega_c = " << p.omega_c << " (2pi x "
       << units::to_mhz(p.omega_c) << " MHz)\n"
       << "  delta_c = " << p.delta_c << '\n'
       << "  gamma2 = " << p.gamma2 << ", gamma3 = " << p.gamma3
       << ", gamma3p = " << p.gamma3p << ", gamma4 = " << p.gamma4
       << ", gamma31 = " << p.gamma31 << '\n'
       << "  branch_b = " << p.branch_b << ", od0 = " << p.od0
       << ", density_scale = " << p.density_scale << '\n'
       << "  sweep: " << cfg.sweep_start_MHz << " .. " << cfg.sweep_end_MHz
       << " MHz in " << cfg.sweep_duration_us << " us, "
       << (cfg.double_scan ? "double" : "single") << " scan\n";
}

int run_simulate(const RunRequest& req) {
    const RunConfig& cfg = req.config;
    const SystemParams params = cfg.to_system_params();
    const SweepProgram sweep = cfg.to_sweep();
    const SolverOptions opts = cfg.to_solver_options();

    const Trajectory traj = stage("evolve", [&] {
        return evolve(DensityMatrix::ground(), params, sweep, opts);
    });
    const Spectrum spec = stage("spectrum", [&] {
        return spectrum_from_trajectory(traj, params);
    });

    const std::string spec_path =
        join_path(req.output_dir, cfg.output_prefix + "_spectrum.csv");
    const std::string traj_path =
        join_path(req.output_dir, cfg.output_prefix + "_trajectory.csv");
    const std::string summary_path =
        join_path(req.output_dir, cfg.output_prefix + "_summary.txt");
    stage("write", [&] {
        write_spectrum_csv_file(spec_path, spec);
        write_trajectory_csv_file(traj_path, traj);
        return 0;
    });

    const PeakPopulations pops = extract_peak_populations(traj);
    double min_t = 1.0;
    for (const SpectrumRow& r : spec.rows) min_t = std::min(min_t, r.transmission);

    std::ofstream sm = open_out(summary_path);
    sm << "simulation summary\n==================\n";
    echo_params(sm, cfg, params);
    sm << "samples: " << spec.rows.size() << "\n";
    sm << "solver: " << traj.stats.steps << " steps, "
       << traj.stats.rejected_steps << " rejected, " << traj.stats.rhs_evals
       << " rhs evaluations\n";
    sm << "min transmission: " << format_g9(min_t) << "\n";
    sm << "max sigma33: " << format_g9(pops.max_pop3) << "\n";
    sm << "final sigma44: " << format_g9(pops.final_pop4) << "\n";
    try {
        const double w = extract_fwhm(spec);
        sm << "EIT FWHM: " << format_g9(w) << " MHz\n";
    } catch (const Error& e) {
        sm << "EIT FWHM: not extracted (" << e.what() << ")\n";
    }
    if (!sm.good()) throw InvalidInputError("write failed for '" + summary_path + "'");

    if (!req.quiet) {
        std::cout << "simulate: wrote " << spec_path << ", " << traj_path
                  << ", " << summary_path << '\n';
    }
    return 0;
}

int run_synth(const RunRequest& req) {
    const RunConfig& cfg = req.config;
    const std::uint64_t seed = req.seed_override.value_or(cfg.seed);
    const Spectrum spec = stage("synthesize", [&] {
        return synthesize_data(cfg.to_system_params(), cfg.to_sweep(),
                               cfg.to_solver_options(), cfg.noise_sigma, seed);
    });
    const std::string path =
        join_path(req.output_dir, cfg.output_prefix + "_synth.csv");
    stage("write", [&] {
        write_spectrum_csv_file(path, spec);
        return 0;
    });
    if (!req.quiet) {
        std::cout << "synth: wrote " << path << " (seed " << seed << ")\n";
    }
    return 0;
}

int run_fit(const RunRequest& req) {
    const RunConfig& cfg = req.config;
    FitProblem problem;
    problem.fixed = cfg.to_system_params();
    problem.sweep = cfg.to_sweep();
    problem.solver = cfg.to_solver_options();
    problem.solver.rtol = cfg.fit_rtol;
    problem.solver.atol = cfg.fit_atol;
    problem.free = cfg.free_params;
    problem.options.multistart = cfg.fit_multistart;
    problem.options.max_iter = cfg.fit_max_iter;
    problem.seed = req.seed_override.value_or(cfg.seed);

    const Spectrum full = stage("read data", [&] {
        return read_spectrum_csv_file(cfg.data_csv);
    });
    if (cfg.fit_use_direction == "both") {
        problem.data = full;
    } else {
        const ScanDirection dir = cfg.fit_use_direction == "forward"
                                      ? ScanDirection::Forward
                                      : ScanDirection::Backward;
        problem.data.rows = full.segment(dir);
    }

    const FitResult result = stage("fit", [&] { return fit(problem); });

    const std::string report_path =
        join_path(req.output_dir, cfg.output_prefix + "_fit_report.txt");
    const std::string model_path =
        join_path(req.output_dir, cfg.output_prefix + "_fit_model.csv");

    const Spectrum model = stage("model overlay", [&] {
        return model_on_data_grid(result.values, problem);
    });
    stage("write", [&] {
        write_spectrum_csv_file(model_path, model);
        return 0;
    });

    std::ofstream rp = open_out(report_path);
    rp << "fit report\n==========\n";
    rp << "data: " << cfg.data_csv << " (" << problem.data.rows.size()
       << " points, direction " << cfg.fit_use_direction << ")\n";
    rp << "converged: " << (result.converged ? "yes" : "no") << "\n";
    rp << "sse: " << format_g9(result.sse) << "\n";
    rp << "iterations: " << result.n_iter << " (over "
       << cfg.fit_multistart << " starts), objective evaluations: "
       << result.n_eval << "\n";
    rp << "fitted parameters (laboratory units; frequencies/rates in MHz):\n";
    for (std::size_t i = 0; i < result.names.size(); ++i) {
        rp << "  " << result.names[i] << " = " << format_g9(result.values[i]);
        if (std::isfinite(result.uncertainties[i])) {
            rp << " +- " << format_g9(result.uncertainties[i]);
        } else {
            rp << " +- n/a";
        }
        rp << "\n";
    }
    if (!rp.good()) throw InvalidInputError("write failed for '" + report_path + "'");

    if (!req.quiet) {
        std::cout << "fit: sse = " << result.sse
                  << (result.converged ? " (converged)" : " (not converged)")
                  << ", wrote " << report_path << ", " << model_path << '\n';
    }
    return 0;
}

} // namespace

int run(const RunRequest& req) {
    if (!std::filesystem::exists(req.output_dir)) {
        throw InvalidInputError("output directory '" + req.output_dir +
                                "' does not exist");
    }
    switch (req.config.command) {
        case Command::Simulate: return run_simulate(req);
        case Command::Synth: return run_synth(req);
        case Command::Fit: return run_fit(req);
    }
    throw InvalidInputError("unknown command");
}

} // namespace eitsim
