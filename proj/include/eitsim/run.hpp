// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "eitsim/config.hpp"

namespace eitsim {

struct RunRequest {
    RunConfig config;
    std::string output_dir = ".";
    std::optional<std::uint64_t> seed_override;
    bool quiet = false;
};

/// Executes a validated configuration:
///   SIMULATE -> <prefix>_spectrum.csv, <prefix>_trajectory.csv, <prefix>_summary.txt
///   FIT      -> <prefix>_fit_report.txt, <prefix>_fit_model.csv
///   SYNTH    -> <prefix>_synth.csv
/// Returns 0 on success; errors propagate as eitsim exceptions.
int run(const RunRequest& req);

} // namespace eitsim
