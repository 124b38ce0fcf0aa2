// Copyright (c) 2026 the eitsim authors.
// SPDX-License-Identifier: Apache-2.0

#include "eitsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "eitsim/errors.hpp"

namespace eitsim {

namespace {

struct RawEntry {
    std::string value;
    int line;
};

using RawMap = std::map<std::string, RawEntry>;

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "command",
        // physics
        "omega_c_MHz", "delta_c_MHz", "probe_power_uW", "omega_p_MHz",
        "beam_radius_mm", "i_sat_mW_per_cm2", "gamma2_MHz", "gamma3_MHz",
        "gamma3p_MHz", "gamma4_MHz", "gamma31_MHz", "branch_b", "od0",
        "density_scale", "gamma31_in_gamma32",
        // sweep
        "sweep_start_MHz", "sweep_end_MHz", "sweep_duration_us", "double_scan",
        // solver
        "rtol", "atol", "max_step_us", "output_points",
        // synth
        "noise_sigma", "seed",
        // fit
        "data_csv", "free", "fit_multistart", "fit_max_iter",
        "fit_use_direction", "fit_rtol", "fit_atol",
        "fit_omega_p", "fit_omega_c", "fit_delta_c", "fit_gamma2", "fit_gamma3",
        "fit_gamma3p", "fit_gamma4", "fit_gamma31", "fit_branch_b", "fit_od0",
        "fit_density_scale", "fit_detuning_offset",
        // io
        "output_prefix",
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& msg, const std::string& key, int line) {
    std::ostringstream os;
    os << "config line " << line << ": " << msg;
    throw ConfigError(os.str(), key, line);
}

double parse_double(const RawMap& raw, const std::string& key, double dflt) {
    const auto it = raw.find(key);
    if (it == raw.end()) return dflt;
    char* end = nullptr;
    const double v = std::strtod(it->second.value.c_str(), &end);
    if (end == it->second.value.c_str() || *end != '\0' || !std::isfinite(v)) {
        fail("unparseable number for key '" + key + "': '" + it->second.value +
                 "'",
             key, it->second.line);
    }
    return v;
}

long parse_long(const RawMap& raw, const std::string& key, long dflt) {
    const auto it = raw.find(key);
    if (it == raw.end()) return dflt;
    char* end = nullptr;
    const long v = std::strtol(it->second.value.c_str(), &end, 10);
    if (end == it->second.value.c_str() || *end != '\0') {
        fail("unparseable integer for key '" + key + "'", key, it->second.line);
    }
    return v;
}

std::uint64_t parse_u64(const RawMap& raw, const std::string& key,
                        std::uint64_t dflt) {
    const auto it = raw.find(key);
    if (it == raw.end()) return dflt;
    char* end = nullptr;
    const unsigned long long v =
        std::strtoull(it->second.value.c_str(), &end, 10);
    if (end == it->second.value.c_str() || *end != '\0') {
        fail("unparseable integer for key '" + key + "'", key, it->second.line);
    }
    return static_cast<std::uint64_t>(v);
}

bool parse_bool(const RawMap& raw, const std::string& key, bool dflt) {
    const auto it = raw.find(key);
    if (it == raw.end()) return dflt;
    if (it->second.value == "true") return true;
    if (it->second.value == "false") return false;
    fail("expected true/false for key '" + key + "'", key, it->second.line);
}

int line_of(const RawMap& raw, const std::string& key) {
    const auto it = raw.find(key);
    return it == raw.end() ? 0 : it->second.line;
}

void require_nonneg(const RawMap& raw, const std::string& key, double v) {
    if (v < 0.0) {
        fail("key '" + key + "' must be >= 0 (unit violation), got " +
                 std::to_string(v),
             key, line_of(raw, key));
    }
}

void require_pos(const RawMap& raw, const std::string& key, double v) {
    if (!(v > 0.0)) {
        fail("key '" + key + "' must be > 0 (unit violation), got " +
                 std::to_string(v),
             key, line_of(raw, key));
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

/// Default initial value and bounds for a free parameter, derived from the
/// configured baseline (lab units).
FreeParameter default_free(const std::string& name, const RunConfig& cfg) {
    FreeParameter fp;
    fp.name = name;
    if (name == "detuning_offset") {
        fp.initial = 0.0;
        fp.lower = -2.0;
        fp.upper = 2.0;
        return fp;
    }
    double base = 0.0;
    if (name == "omega_c") base = cfg.omega_c_MHz;
    else if (name == "omega_p") base = cfg.probe_omega_p() / units::two_pi;
    else if (name == "delta_c") base = cfg.delta_c_MHz;
    else if (name == "gamma2") base = cfg.gamma2_MHz;
    else if (name == "gamma3") base = cfg.gamma3_MHz;
    else if (name == "gamma3p") base = cfg.gamma3p_MHz;
    else if (name == "gamma4") base = cfg.gamma4_MHz;
    else if (name == "gamma31") base = cfg.gamma31_MHz;
    else if (name == "branch_b") base = cfg.branch_b;
    else if (name == "od0") base = cfg.od0;
    else if (name == "density_scale") base = cfg.density_scale;
    fp.initial = base;
    if (name == "branch_b") {
        fp.lower = 0.0;
        fp.upper = 1.0;
    } else if (base > 0.0) {
        fp.lower = base / 4.0;
        fp.upper = base * 4.0;
    } else {
        fp.lower = 0.0;
        fp.upper = std::max(1.0, base * 4.0);
    }
    return fp;
}

} // namespace

SystemParams RunConfig::to_system_params() const {
    SystemParams p;
    p.omega_p = probe_omega_p();
    p.omega_c = units::rad_per_us(omega_c_MHz);
    p.delta_c = units::rad_per_us(delta_c_MHz);
    p.gamma2 = units::rad_per_us(gamma2_MHz);
    p.gamma3 = units::rad_per_us(gamma3_MHz);
    p.gamma3p = units::rad_per_us(gamma3p_MHz);
    p.gamma4 = units::rad_per_us(gamma4_MHz);
    p.gamma31 = units::rad_per_us(gamma31_MHz);
    p.branch_b = branch_b;
    p.od0 = od0;
    p.density_scale = density_scale;
    p.gamma31_in_gamma32 = gamma31_in_gamma32;
    return p;
}

SweepProgram RunConfig::to_sweep() const {
    SweepProgram s;
    s.delta_start = units::rad_per_us(sweep_start_MHz);
    s.delta_end = units::rad_per_us(sweep_end_MHz);
    s.duration_single = sweep_duration_us;
    s.mode = double_scan ? SweepMode::Double : SweepMode::Single;
    return s;
}

SolverOptions RunConfig::to_solver_options() const {
    SolverOptions o;
    o.rtol = rtol;
    o.atol = atol;
    o.max_step = max_step_us;
    o.output_points = output_points;
    return o;
}

double RunConfig::probe_omega_p() const {
    if (omega_p_MHz.has_value()) {
        return units::rad_per_us(*omega_p_MHz);
    }
    const ProbeDrive d =
        probe_rabi_from_power(*probe_power_uW, beam_radius_mm,
                              i_sat_mW_per_cm2, units::rad_per_us(gamma2_MHz));
    return d.omega_p;
}

RunConfig parse_config(const std::string& text) {
    RawMap raw;
    {
        std::istringstream is(text);
        std::string line;
        int line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                fail("expected 'key = value'", "", line_no);
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) fail("empty key", "", line_no);
            if (value.empty()) fail("empty value for key '" + key + "'", key, line_no);
            if (!known_keys().count(key)) {
                fail("unknown key '" + key + "'", key, line_no);
            }
            if (raw.count(key)) {
                fail("duplicate key '" + key + "' (first on line " +
                         std::to_string(raw[key].line) + ")",
                     key, line_no);
            }
            raw[key] = RawEntry{value, line_no};
        }
    }

    RunConfig cfg;

    // command
    {
        const auto it = raw.find("command");
        if (it == raw.end()) {
            throw ConfigError("config: missing required key 'command'",
                              "command", 0);
        }
        const std::string& v = it->second.value;
        if (v == "simulate") cfg.command = Command::Simulate;
        else if (v == "fit") cfg.command = Command::Fit;
        else if (v == "synth") cfg.command = Command::Synth;
        else fail("command must be simulate|fit|synth, got '" + v + "'",
                  "command", it->second.line);
    }

    // physics
    {
        const auto it = raw.find("omega_c_MHz");
        if (it == raw.end()) {
            throw ConfigError("config: missing required key 'omega_c_MHz'",
                              "omega_c_MHz", 0);
        }
    }
    cfg.omega_c_MHz = parse_double(raw, "omega_c_MHz", 0.0);
    require_nonneg(raw, "omega_c_MHz", cfg.omega_c_MHz);
    cfg.delta_c_MHz = parse_double(raw, "delta_c_MHz", cfg.delta_c_MHz);
    const bool has_power = raw.count("probe_power_uW") > 0;
    const bool has_wp = raw.count("omega_p_MHz") > 0;
    if (has_power == has_wp) {
        throw ConfigError(
            "config: exactly one of 'probe_power_uW' or 'omega_p_MHz' is required",
            has_power ? "probe_power_uW" : "omega_p_MHz",
            has_power ? line_of(raw, "probe_power_uW") : 0);
    }
    if (has_power) {
        cfg.probe_power_uW = parse_double(raw, "probe_power_uW", 0.0);
        require_pos(raw, "probe_power_uW", *cfg.probe_power_uW);
    } else {
        cfg.omega_p_MHz = parse_double(raw, "omega_p_MHz", 0.0);
        require_nonneg(raw, "omega_p_MHz", *cfg.omega_p_MHz);
    }
    cfg.beam_radius_mm = parse_double(raw, "beam_radius_mm", cfg.beam_radius_mm);
    require_pos(raw, "beam_radius_mm", cfg.beam_radius_mm);
    cfg.i_sat_mW_per_cm2 =
        parse_double(raw, "i_sat_mW_per_cm2", cfg.i_sat_mW_per_cm2);
    require_pos(raw, "i_sat_mW_per_cm2", cfg.i_sat_mW_per_cm2);
    cfg.gamma2_MHz = parse_double(raw, "gamma2_MHz", cfg.gamma2_MHz);
    require_pos(raw, "gamma2_MHz", cfg.gamma2_MHz);
    cfg.gamma3_MHz = parse_double(raw, "gamma3_MHz", cfg.gamma3_MHz);
    require_nonneg(raw, "gamma3_MHz", cfg.gamma3_MHz);
    cfg.gamma3p_MHz = parse_double(raw, "gamma3p_MHz", cfg.gamma3p_MHz);
    require_nonneg(raw, "gamma3p_MHz", cfg.gamma3p_MHz);
    cfg.gamma4_MHz = parse_double(raw, "gamma4_MHz", cfg.gamma4_MHz);
    require_nonneg(raw, "gamma4_MHz", cfg.gamma4_MHz);
    cfg.gamma31_MHz = parse_double(raw, "gamma31_MHz", cfg.gamma31_MHz);
    require_nonneg(raw, "gamma31_MHz", cfg.gamma31_MHz);
    cfg.branch_b = parse_double(raw, "branch_b", cfg.branch_b);
    if (cfg.branch_b < 0.0 || cfg.branch_b > 1.0) {
        fail("key 'branch_b' must be in [0,1]", "branch_b",
             line_of(raw, "branch_b"));
    }
    cfg.od0 = parse_double(raw, "od0", cfg.od0);
    require_nonneg(raw, "od0", cfg.od0);
    cfg.density_scale = parse_double(raw, "density_scale", cfg.density_scale);
    require_nonneg(raw, "density_scale", cfg.density_scale);
    cfg.gamma31_in_gamma32 =
        parse_bool(raw, "gamma31_in_gamma32", cfg.gamma31_in_gamma32);

    // sweep
    cfg.sweep_start_MHz = parse_double(raw, "sweep_start_MHz", cfg.sweep_start_MHz);
    cfg.sweep_end_MHz = parse_double(raw, "sweep_end_MHz", cfg.sweep_end_MHz);
    if (cfg.sweep_start_MHz == cfg.sweep_end_MHz) {
        fail("sweep_start_MHz must differ from sweep_end_MHz", "sweep_end_MHz",
             line_of(raw, "sweep_end_MHz"));
    }
    cfg.sweep_duration_us =
        parse_double(raw, "sweep_duration_us", cfg.sweep_duration_us);
    require_pos(raw, "sweep_duration_us", cfg.sweep_duration_us);
    cfg.double_scan = parse_bool(raw, "double_scan", cfg.double_scan);

    // solver
    cfg.rtol = parse_double(raw, "rtol", cfg.rtol);
    require_pos(raw, "rtol", cfg.rtol);
    cfg.atol = parse_double(raw, "atol", cfg.atol);
    require_pos(raw, "atol", cfg.atol);
    cfg.max_step_us = parse_double(raw, "max_step_us", cfg.max_step_us);
    require_pos(raw, "max_step_us", cfg.max_step_us);
    cfg.output_points =
        static_cast<int>(parse_long(raw, "output_points", cfg.output_points));
    if (cfg.output_points < 2) {
        fail("output_points must be >= 2", "output_points",
             line_of(raw, "output_points"));
    }

    // synth
    cfg.noise_sigma = parse_double(raw, "noise_sigma", cfg.noise_sigma);
    require_nonneg(raw, "noise_sigma", cfg.noise_sigma);
    cfg.seed = parse_u64(raw, "seed", cfg.seed);

    // fit
    if (raw.count("data_csv")) cfg.data_csv = raw["data_csv"].value;
    if (cfg.command == Command::Fit && cfg.data_csv.empty()) {
        throw ConfigError("config: missing required key 'data_csv' for fit",
                          "data_csv", 0);
    }
    cfg.fit_multistart =
        static_cast<int>(parse_long(raw, "fit_multistart", cfg.fit_multistart));
    cfg.fit_max_iter =
        static_cast<int>(parse_long(raw, "fit_max_iter", cfg.fit_max_iter));
    if (cfg.fit_multistart < 1) {
        fail("fit_multistart must be >= 1", "fit_multistart",
             line_of(raw, "fit_multistart"));
    }
    if (cfg.fit_max_iter < 1) {
        fail("fit_max_iter must be >= 1", "fit_max_iter",
             line_of(raw, "fit_max_iter"));
    }
    if (raw.count("fit_use_direction")) {
        cfg.fit_use_direction = raw["fit_use_direction"].value;
        if (cfg.fit_use_direction != "forward" &&
            cfg.fit_use_direction != "backward" &&
            cfg.fit_use_direction != "both") {
            fail("fit_use_direction must be forward|backward|both",
                 "fit_use_direction", line_of(raw, "fit_use_direction"));
        }
    }
    cfg.fit_rtol = parse_double(raw, "fit_rtol", cfg.fit_rtol);
    require_pos(raw, "fit_rtol", cfg.fit_rtol);
    cfg.fit_atol = parse_double(raw, "fit_atol", cfg.fit_atol);
    require_pos(raw, "fit_atol", cfg.fit_atol);

    if (raw.count("free")) {
        cfg.free_names = split_list(raw["free"].value);
    } else if (cfg.command == Command::Fit) {
        cfg.free_names = {"omega_c", "gamma31", "od0", "detuning_offset"};
    }
    for (const std::string& name : cfg.free_names) {
        if (!is_fittable_parameter(name)) {
            fail("unknown free parameter '" + name + "'", "free",
                 line_of(raw, "free"));
        }
        const std::string key = "fit_" + name;
        FreeParameter fp;
        if (raw.count(key)) {
            const std::vector<std::string> parts = split_list(raw[key].value);
            if (parts.size() != 3) {
                fail("key '" + key + "' must be 'initial,lower,upper'", key,
                     line_of(raw, key));
            }
            fp.name = name;
            char* end = nullptr;
            fp.initial = std::strtod(parts[0].c_str(), &end);
            fp.lower = std::strtod(parts[1].c_str(), &end);
            fp.upper = std::strtod(parts[2].c_str(), &end);
            if (!(fp.lower <= fp.initial && fp.initial <= fp.upper)) {
                fail("key '" + key + "' requires lower <= initial <= upper", key,
                     line_of(raw, key));
            }
        } else {
            fp = default_free(name, cfg);
        }
        cfg.free_params.push_back(fp);
    }

    // io
    if (raw.count("output_prefix")) cfg.output_prefix = raw["output_prefix"].value;

    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw InvalidInputError("cannot open config '" + path + "'");
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

} // namespace eitsim
