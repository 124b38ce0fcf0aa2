// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <vector>

#include "eitsim/integrator.hpp"
#include "eitsim/params.hpp"

namespace eitsim {

struct SpectrumRow {
    double t_us;
    double delta_p_MHz;
    ScanDirection direction;
    double transmission;
    double pop1, pop2, pop3, pop4;
    double re_sigma21, im_sigma21;
};

/// Sampled transmission record. Populations sum to one (1e-6) per row,
/// transmission in (0,1], detuning monotone within each direction segment.
struct Spectrum {
    std::vector<SpectrumRow> rows;

    void validate() const;
    /// Rows of one direction, in stored order.
    std::vector<SpectrumRow> segment(ScanDirection dir) const;
};

/// Beer-Lambert readout of the probe coherence for a thin medium:
/// T = exp(-od0 * (gamma2/omega_p) * Im sigma21), normalized so the
/// resonant two-level weak-probe steady state (Im sigma21 = omega_p/gamma2)
/// gives T = exp(-od0).
double transmission(std::complex<double> sigma21, double omega_p,
                    double gamma2, double od0);

/// First-order (weak-probe) steady-state probe coherence of the three-level
/// ladder, all population in |1>:
/// sigma21 = (i omega_p/2) / (Gamma21 - i delta_p
///            + (omega_c^2/4)/(Gamma31 - i(delta_p + delta_c))),
/// Gamma21 = gamma2/2, Gamma31 = gamma3/2 + gamma31. Independent oracle for
/// the master-equation dynamics at gamma3p = 0.
std::complex<double> weak_probe_analytic(const SystemParams& params,
                                         double delta_p);

/// Applies the transmission readout row-wise to a trajectory; tags the scan
/// direction by the sign of d(delta_p)/dt between samples. Turn-on ringing can
/// push the raw readout microscopically above unity, so T is clamped to 1.
Spectrum spectrum_from_trajectory(const Trajectory& traj,
                                  const SystemParams& params);

/// Full width of the transparency feature at half height between the peak
/// and the mean of the two flanking absorption minima, linearly interpolated,
/// on the forward segment (falls back to backward if no forward rows). MHz.
double extract_fwhm(const Spectrum& spec);

struct PeakPopulations {
    double max_pop3;   ///< maximum Rydberg population over the trajectory
    double final_pop4; ///< reservoir population at the last sample
};

PeakPopulations extract_peak_populations(const Trajectory& traj);

} // namespace eitsim
