// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#include "eitsim/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "eitsim/errors.hpp"
#include "eitsim/units.hpp"

namespace eitsim {

const char* const kSpectrumCsvHeader =
    "time_us,detuning_MHz,direction,transmission,pop1,pop2,pop3,pop4,"
    "re_sigma21,im_sigma21";

namespace {

const char* const kTrajectoryCsvHeader =
    "time_us,detuning_MHz,pop1,pop2,pop3,pop4,re_sigma21,im_sigma21,"
    "re_sigma31,im_sigma31,re_sigma32,im_sigma32";

const char* direction_name(ScanDirection d) {
    return d == ScanDirection::Forward ? "forward" : "backward";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double_field(const std::string& s, int line_no, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        std::ostringstream os;
        os << "CSV line " << line_no << ": cannot parse " << what << " '" << s
           << "'";
        throw InvalidInputError(os.str());
    }
    return v;
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream os(path);
    if (!os) {
        throw InvalidInputError("cannot open '" + path + "' for writing");
    }
    return os;
}

} // namespace

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spec) {
    os << kSpectrumCsvHeader << '\n';
    for (const SpectrumRow& r : spec.rows) {
        os << format_g9(r.t_us) << ',' << format_g9(r.delta_p_MHz) << ','
           << direction_name(r.direction) << ',' << format_g9(r.transmission)
           << ',' << format_g9(r.pop1) << ',' << format_g9(r.pop2) << ','
           << format_g9(r.pop3) << ',' << format_g9(r.pop4) << ','
           << format_g9(r.re_sigma21) << ',' << format_g9(r.im_sigma21) << '\n';
    }
}

void write_spectrum_csv_file(const std::string& path, const Spectrum& spec) {
    std::ofstream os = open_for_write(path);
    write_spectrum_csv(os, spec);
    if (!os.good()) {
        throw InvalidInputError("write failed for '" + path + "'");
    }
}

Spectrum read_spectrum_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw InvalidInputError("CSV: empty input");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSpectrumCsvHeader) {
        throw InvalidInputError("CSV line 1: unexpected header '" + line + "'");
    }
    Spectrum spec;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 10) {
            std::ostringstream os;
            os << "CSV line " << line_no << ": expected 10 fields, got "
               << f.size();
            throw InvalidInputError(os.str());
        }
        SpectrumRow r;
        r.t_us = parse_double_field(f[0], line_no, "time_us");
        r.delta_p_MHz = parse_double_field(f[1], line_no, "detuning_MHz");
        if (f[2] == "forward") {
            r.direction = ScanDirection::Forward;
        } else if (f[2] == "backward") {
            r.direction = ScanDirection::Backward;
        } else {
            std::ostringstream os;
            os << "CSV line " << line_no << ": unknown direction '" << f[2]
               << "'";
            throw InvalidInputError(os.str());
        }
        r.transmission = parse_double_field(f[3], line_no, "transmission");
        r.pop1 = parse_double_field(f[4], line_no, "pop1");
        r.pop2 = parse_double_field(f[5], line_no, "pop2");
        r.pop3 = parse_double_field(f[6], line_no, "pop3");
        r.pop4 = parse_double_field(f[7], line_no, "pop4");
        r.re_sigma21 = parse_double_field(f[8], line_no, "re_sigma21");
        r.im_sigma21 = parse_double_field(f[9], line_no, "im_sigma21");
        spec.rows.push_back(r);
    }
    if (spec.rows.empty()) {
        throw InvalidInputError("CSV: no data rows");
    }
    return spec;
}

Spectrum read_spectrum_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw InvalidInputError("cannot open '" + path + "' for reading");
    }
    return read_spectrum_csv(is);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << kTrajectoryCsvHeader << '\n';
    for (const TrajectorySample& s : traj.samples) {
        os << format_g9(s.t) << ',' << format_g9(units::to_mhz(s.delta_p));
        for (double v : s.y) os << ',' << format_g9(v);
        os << '\n';
    }
}

void write_trajectory_csv_file(const std::string& path, const Trajectory& traj) {
    std::ofstream os = open_for_write(path);
    write_trajectory_csv(os, traj);
    if (!os.good()) {
        throw InvalidInputError("write failed for '" + path + "'");
    }
}

} // namespace eitsim
