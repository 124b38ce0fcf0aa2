// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>

#include "eitsim/integrator.hpp"
#include "eitsim/spectroscopy.hpp"

namespace eitsim {

// Spectrum CSV format (bit-exact): header row
//   time_us,detuning_MHz,direction,transmission,pop1,pop2,pop3,pop4,re_sigma21,im_sigma21
// comma separated, '.' decimal, 9 significant digits, direction is
// "forward" or "backward".

extern const char* const kSpectrumCsvHeader;

void write_spectrum_csv(std::ostream& os, const Spectrum& spec);
void write_spectrum_csv_file(const std::string& path, const Spectrum& spec);

/// Parses a spectrum written by write_spectrum_csv. Throws InvalidInputError
/// on malformed content (message names the line).
Spectrum read_spectrum_csv(std::istream& is);
Spectrum read_spectrum_csv_file(const std::string& path);

// Trajectory CSV: header row
//   time_us,detuning_MHz,pop1,pop2,pop3,pop4,re_sigma21,im_sigma21,
//   re_sigma31,im_sigma31,re_sigma32,im_sigma32
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv_file(const std::string& path, const Trajectory& traj);

/// Formats one double with 9 significant digits (shared by all writers).
std::string format_g9(double v);

} // namespace eitsim
