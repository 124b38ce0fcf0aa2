// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#include "eitsim/spectroscopy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eitsim/errors.hpp"
#include "eitsim/units.hpp"

namespace eitsim {

void Spectrum::validate() const {
    if (rows.empty()) throw InvalidInputError("spectrum has no rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SpectrumRow& r = rows[i];
        if (!(r.transmission > 0.0 && r.transmission <= 1.0 + 1e-9)) {
            std::ostringstream os;
            os << "spectrum row " << i << ": transmission out of (0,1]: "
               << r.transmission;
            throw InvalidInputError(os.str());
        }
        const double pops[4] = {r.pop1, r.pop2, r.pop3, r.pop4};
        double sum = 0.0;
        for (double p : pops) {
            if (p < -1e-6 || p > 1.0 + 1e-6) {
                throw InvalidInputError("spectrum row population out of [0,1]");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-6) {
            throw InvalidInputError("spectrum row populations do not sum to 1");
        }
        if (i > 0 && rows[i - 1].direction == r.direction) {
            const double step = r.delta_p_MHz - rows[i - 1].delta_p_MHz;
            const bool fwd = r.direction == ScanDirection::Forward;
            if ((fwd && step < 0.0) || (!fwd && step > 0.0)) {
                throw InvalidInputError(
                    "spectrum detuning not monotone within a direction segment");
            }
        }
    }
}

std::vector<SpectrumRow> Spectrum::segment(ScanDirection dir) const {
    std::vector<SpectrumRow> out;
    for (const SpectrumRow& r : rows) {
        if (r.direction == dir) out.push_back(r);
    }
    return out;
}

double transmission(std::complex<double> sigma21, double omega_p,
                    double gamma2, double od0) {
    if (!(omega_p > 0.0)) {
        throw InvalidParameterError("transmission: omega_p must be > 0");
    }
    if (!(gamma2 > 0.0) || od0 < 0.0) {
        throw InvalidParameterError("transmission: gamma2 > 0 and od0 >= 0 required");
    }
    return std::exp(-od0 * (gamma2 / omega_p) * sigma21.imag());
}

std::complex<double> weak_probe_analytic(const SystemParams& params,
                                         double delta_p) {
    using namespace std::complex_literals;
    const double g21 = params.gamma2 / 2.0;
    const double g31 = params.gamma3 / 2.0 + params.gamma31;
    const std::complex<double> denom =
        g21 - 1i * delta_p +
        (params.omega_c * params.omega_c / 4.0) /
            (g31 - 1i * (delta_p + params.delta_c));
    return 1i * params.omega_p / 2.0 / denom;
}

Spectrum spectrum_from_trajectory(const Trajectory& traj,
                                  const SystemParams& params) {
    if (traj.samples.empty()) {
        throw InvalidInputError("spectrum_from_trajectory: empty trajectory");
    }
    params.validate();
    Spectrum spec;
    spec.rows.reserve(traj.samples.size());
    const std::size_t n = traj.samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        const TrajectorySample& s = traj.samples[i];
        // Backward-looking slope so the fold sample closes the forward leg.
        const double slope = (i > 0)
                                 ? s.delta_p - traj.samples[i - 1].delta_p
                                 : (n > 1 ? traj.samples[1].delta_p - s.delta_p
                                          : 1.0);
        SpectrumRow r;
        r.t_us = s.t;
        r.delta_p_MHz = units::to_mhz(s.delta_p);
        r.direction = slope >= 0.0 ? ScanDirection::Forward
                                   : ScanDirection::Backward;
        const std::complex<double> s21{s.y[idx::re21], s.y[idx::im21]};
        if (params.omega_p > 0.0) {
            r.transmission = std::min(
                1.0, transmission(s21, params.omega_p, params.gamma2,
                                  params.od0_eff()));
        } else {
            r.transmission = 1.0; // no probe, nothing absorbed
        }
        r.pop1 = s.y[idx::p1];
        r.pop2 = s.y[idx::p2];
        r.pop3 = s.y[idx::p3];
        r.pop4 = s.y[idx::p4];
        r.re_sigma21 = s.y[idx::re21];
        r.im_sigma21 = s.y[idx::im21];
        spec.rows.push_back(r);
    }
    return spec;
}

namespace {

struct Feature {
    int lo;   // left flanking minimum
    int hi;   // right flanking minimum
    int peak; // transparency maximum between them
};

Feature locate_transparency(const std::vector<double>& T) {
    const int n = static_cast<int>(T.size());
    std::vector<int> minima;
    for (int i = 1; i + 1 < n; ++i) {
        if (T[i] <= T[i - 1] && T[i] <= T[i + 1]) minima.push_back(i);
    }
    if (minima.size() < 2) {
        throw FeatureNotFoundError(
            "extract_fwhm: no transparency feature (need two absorption minima)");
    }
    std::sort(minima.begin(), minima.end(),
              [&](int a, int b) { return T[a] < T[b]; });
    Feature f;
    f.lo = std::min(minima[0], minima[1]);
    f.hi = std::max(minima[0], minima[1]);
    if (f.hi - f.lo < 2) {
        throw IllPosedFeatureError(
            "extract_fwhm: absorption minima are adjacent, no peak between");
    }
    f.peak = f.lo + 1;
    for (int i = f.lo + 1; i < f.hi; ++i) {
        if (T[i] > T[f.peak]) f.peak = i;
    }
    if (!(T[f.peak] > T[f.lo] && T[f.peak] > T[f.hi])) {
        throw FeatureNotFoundError("extract_fwhm: no local transmission maximum");
    }
    return f;
}

} // namespace

double extract_fwhm(const Spectrum& spec) {
    std::vector<SpectrumRow> seg = spec.segment(ScanDirection::Forward);
    if (seg.empty()) seg = spec.segment(ScanDirection::Backward);
    if (seg.size() < 5) {
        throw FeatureNotFoundError("extract_fwhm: too few rows");
    }
    std::sort(seg.begin(), seg.end(), [](const SpectrumRow& a, const SpectrumRow& b) {
        return a.delta_p_MHz < b.delta_p_MHz;
    });
    std::vector<double> x(seg.size()), T(seg.size());
    for (std::size_t i = 0; i < seg.size(); ++i) {
        x[i] = seg[i].delta_p_MHz;
        T[i] = seg[i].transmission;
    }

    const Feature f = locate_transparency(T);
    const double t_base = 0.5 * (T[f.lo] + T[f.hi]);
    if (!(T[f.peak] > t_base)) {
        throw IllPosedFeatureError("extract_fwhm: degenerate feature height");
    }
    const double half = 0.5 * (T[f.peak] + t_base);

    // Walk outward from the peak to the half-level crossing on each side.
    int il = f.peak;
    while (il > f.lo && T[il] > half) --il;
    if (T[il] > half) {
        throw IllPosedFeatureError("extract_fwhm: no left half crossing");
    }
    const double xl =
        x[il] + (x[il + 1] - x[il]) * (half - T[il]) / (T[il + 1] - T[il]);

    int ir = f.peak;
    while (ir < f.hi && T[ir] > half) ++ir;
    if (T[ir] > half) {
        throw IllPosedFeatureError("extract_fwhm: no right half crossing");
    }
    const double xr =
        x[ir] - (x[ir] - x[ir - 1]) * (half - T[ir]) / (T[ir - 1] - T[ir]);

    return xr - xl;
}

PeakPopulations extract_peak_populations(const Trajectory& traj) {
    if (traj.samples.empty()) {
        throw InvalidInputError("extract_peak_populations: empty trajectory");
    }
    PeakPopulations out{0.0, traj.samples.back().y[idx::p4]};
    for (const TrajectorySample& s : traj.samples) {
        out.max_pop3 = std::max(out.max_pop3, s.y[idx::p3]);
    }
    return out;
}

} // namespace eitsim
