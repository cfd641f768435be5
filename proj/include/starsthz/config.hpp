// SPDX-License-Identifier: Apache-2.0
//
// starsthz: joint hybrid/passive beamforming for STARS-aided terahertz links
// Copyright (C) 2026 The starsthz authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "starsthz/types.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace starsthz {

/// Power figures in watts. Quantization level counts feed the PIN diode model.
struct PowerModelConstants {
    double P_BS = 3.0;
    double P_BB = 0.3;
    double P_RF = 0.2;
    double P_PS = 0.03;
    double P_TTD = 0.1;
    double P_UE = 0.1;
    double P_PIN = 0.33e-3;
    double P_circ = 10.0;
    double xi = 0.1; // W per (bit/s/Hz)
    double L_beta = 100.0;
    double L_phi = 180.0;
};

/// Number of quantization levels needed so that the worst-case rounding error
/// of a uniform quantizer over `range` stays within `max_error`.
inline double levels_for_tolerance(double range, double max_error) {
    if (!(max_error > 0.0)) throw std::invalid_argument("quantization tolerance must be positive");
    return std::ceil(range / (2.0 * max_error) - 1e-9);
}

/// Knobs of the penalty dual decomposition double loop and its kernels.
struct PddSettings {
    double rho0 = 1e3;
    // The engine works with a unit power budget and normalized channels
    // (see noise_weight); its penalty factor is rho0 * rho_unit.
    double rho_unit = 1e-3;
    // Channel normalization: 0 scales the strongest cascaded channel to unit
    // gain, 1 scales the noise to unit power, values between blend the two
    // geometrically.
    double noise_weight = 0.25;
    double reduction = 0.6;
    double eps0 = 1.0;
    double violation_tol = 1e-4; // on normalized residuals; see README
    double inner_tol = 1e-4;
    int max_inner = 50;
    int max_outer = 30;
    double element_tol = 1e-4; // fractional reduction stop for the element-wise sweeps
    int element_max_sweeps = 50;
    double golden_tol = 1e-6;
    double rho_floor = 1e-8;
    double solver_gap = 1e-7;
    int solver_max_newton = 200;
    double bfgs_tol = 1e-9;
    int bfgs_max_iter = 200;
};

enum class PulseShape { RaisedCosine, Sinc };

struct ScenarioConfig {
    Band band = Band::Narrow;

    // transmitter
    int N = 128;
    int N_RF = 4;
    // surface
    int M_h = 6;
    int M_v = 6;
    // users; the first K_t sit on the transmission side
    int K = 4;
    int K_t = 2;

    double f_c = 1e11;
    double W = 0.0; // 0 selects the band default (100 MHz narrow, 10 GHz wide)

    // wideband
    int M_c = 10;
    int N_T = 8;
    int L_CP = 4;

    double noise_dbm_hz = -174.0;
    double G_t_dbi = 25.0;
    double G_r_dbi = 20.0;

    // geometry and multipath
    double bs_star_dist = 10.0;
    double user_radius = 3.0;
    int L = 4;
    int L_k = 4;
    double path_excess_max_m = 0.09;
    double nlos_extra_loss_db = 0.0;
    double absorption_per_m = 0.0;
    std::string absorption_table; // CSV path, overrides the constant when set
    PulseShape pulse = PulseShape::RaisedCosine;
    double rolloff = 0.3;

    std::vector<double> weights{0.0};
    PowerModelConstants power;
    PddSettings pdd;

    // experiment
    std::vector<double> pt_dbm{10, 15, 20, 25, 30, 35, 40, 45};
    double pt_fixed_dbm = 20.0;
    std::vector<std::pair<int, int>> element_sweep{{2, 2}, {4, 4}, {6, 6}, {8, 8}};
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> schemes;

    // beam split analysis
    double beamsplit_angle_deg = 45.0;
    int beamsplit_ntt = 16;
    int beamsplit_grid = 721;

    int M() const { return M_h * M_v; }
    int K_r() const { return K - K_t; }
    double bandwidth() const {
        if (W > 0.0) return W;
        return band == Band::Narrow ? 100e6 : 10e9;
    }
    int subcarriers() const { return band == Band::Narrow ? 1 : M_c; }
    /// Noise power per subcarrier (narrowband: the whole bandwidth).
    double noise_power() const {
        return dbm_to_watt(noise_dbm_hz) * bandwidth() / static_cast<double>(subcarriers());
    }
    /// 1/(M_c + L_CP) in wideband, 1 in narrowband.
    double rate_prefactor() const {
        return band == Band::Narrow ? 1.0 : 1.0 / static_cast<double>(M_c + L_CP);
    }
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Throws ConfigError naming the first violated constraint.
inline void validate(const ScenarioConfig& c) {
    auto fail = [](const std::string& field, const std::string& what) {
        throw ConfigError("config field '" + field + "': " + what);
    };
    if (c.N < 1) fail("N", "must be >= 1");
    if (c.N_RF < 1 || c.N_RF > c.N) fail("N_RF", "must satisfy 1 <= N_RF <= N");
    if (c.M_h < 1 || c.M_v < 1) fail("M_h/M_v", "must be >= 1");
    if (c.K < 1) fail("K", "must be >= 1");
    if (c.K_t < 0 || c.K_t > c.K) fail("K_t", "must satisfy 0 <= K_t <= K");
    if (!(c.f_c > 0.0)) fail("f_c", "must be positive");
    if (c.W < 0.0) fail("W", "must be non-negative");
    if (c.L < 1) fail("L", "must be >= 1");
    if (c.L_k < 1) fail("L_k", "must be >= 1");
    if (!(c.bs_star_dist > 0.0)) fail("bs_star_dist", "must be positive");
    if (!(c.user_radius > 0.0)) fail("user_radius", "must be positive");
    if (c.path_excess_max_m < 0.0) fail("path_excess_max_m", "must be non-negative");
    if (c.absorption_per_m < 0.0) fail("absorption_per_m", "must be non-negative");
    if (c.rolloff < 0.0 || c.rolloff > 1.0) fail("rolloff", "must lie in [0, 1]");
    if (c.band == Band::Wide) {
        if (c.M_c < 1) fail("M_c", "must be >= 1");
        if (c.N_T < 1) fail("N_T", "must be >= 1");
        if (c.N % c.N_T != 0) fail("N_T", "N must be divisible by N_T");
        if (c.L_CP < 0) fail("L_CP", "must be >= 0");
    }
    if (c.weights.empty()) fail("weights", "at least one objective weight required");
    for (double w : c.weights)
        if (w < 0.0) fail("weights", "must be non-negative");
    const auto& p = c.power;
    for (double v : {p.P_BS, p.P_BB, p.P_RF, p.P_PS, p.P_TTD, p.P_UE, p.P_PIN, p.P_circ, p.xi})
        if (v < 0.0) fail("power", "all power constants must be non-negative");
    if (p.L_beta < 2.0 || p.L_phi < 2.0) fail("power.levels", "quantization level counts must be >= 2");
    const auto& a = c.pdd;
    if (!(a.rho0 > 0.0)) fail("rho0", "must be positive");
    if (!(a.rho_unit > 0.0)) fail("rho_unit", "must be positive");
    if (!(a.noise_weight >= 0.0 && a.noise_weight <= 1.0)) fail("noise_weight", "must lie in [0, 1]");
    if (!(a.reduction > 0.0 && a.reduction < 1.0)) fail("reduction", "must lie in (0, 1)");
    if (!(a.violation_tol > 0.0)) fail("violation_tol", "must be positive");
    if (a.max_outer < 1 || a.max_inner < 1) fail("max_outer/max_inner", "must be >= 1");
    if (c.pt_dbm.empty()) fail("pt_dbm", "at least one transmit power required");
    if (c.beamsplit_ntt < 1) fail("beamsplit.ttd_per_rf", "must be >= 1");
    if (c.beamsplit_grid < 2) fail("beamsplit.grid_points", "must be >= 2");
}

namespace detail {

inline std::string trim(std::string s) {
    auto issp = [](unsigned char ch) { return std::isspace(ch) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
    return s;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config field '" + key + "': expected a number, got '" + v + "'");
    }
}

inline int parse_int(const std::string& key, const std::string& v) {
    double d = parse_double(key, v);
    if (d != std::floor(d)) throw ConfigError("config field '" + key + "': expected an integer");
    return static_cast<int>(d);
}

/// Accepts "1,2,5" and ranges "1-20" (inclusive), mixed.
inline std::vector<std::uint64_t> parse_seeds(const std::string& key, const std::string& v) {
    std::vector<std::uint64_t> out;
    for (const auto& tok : split_list(v)) {
        auto dash = tok.find('-', 1);
        if (dash != std::string::npos) {
            int lo = parse_int(key, trim(tok.substr(0, dash)));
            int hi = parse_int(key, trim(tok.substr(dash + 1)));
            if (lo < 0 || hi < lo) throw ConfigError("config field '" + key + "': bad range '" + tok + "'");
            for (int s = lo; s <= hi; ++s) out.push_back(static_cast<std::uint64_t>(s));
        } else {
            int s = parse_int(key, tok);
            if (s < 0) throw ConfigError("config field '" + key + "': seeds must be non-negative");
            out.push_back(static_cast<std::uint64_t>(s));
        }
    }
    return out;
}

inline std::vector<std::pair<int, int>> parse_elements(const std::string& key, const std::string& v) {
    std::vector<std::pair<int, int>> out;
    for (const auto& tok : split_list(v)) {
        auto x = tok.find_first_of("xX");
        if (x == std::string::npos)
            throw ConfigError("config field '" + key + "': expected HxV entries, got '" + tok + "'");
        out.emplace_back(parse_int(key, trim(tok.substr(0, x))), parse_int(key, trim(tok.substr(x + 1))));
    }
    return out;
}

} // namespace detail

/// Fills unset fields with their band-specific defaults (schemes, seeds).
inline void apply_band_defaults(ScenarioConfig& c) {
    if (c.schemes.empty()) {
        if (c.band == Band::Narrow)
            c.schemes = {"stars-i", "stars-c", "ris", "fd"};
        else
            c.schemes = {"stars-i", "stars-c", "ris", "conv-hb", "fd"};
    }
    if (c.seeds.empty())
        for (std::uint64_t s = 1; s <= 100; ++s) c.seeds.push_back(s);
}

/// Parses the INI-style configuration text. Keys may appear in any section;
/// an unknown key is a schema violation.
inline ScenarioConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    ScenarioConfig c;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    auto dbl = [](double& target) -> Setter {
        return [&target](const std::string& k, const std::string& v) { target = detail::parse_double(k, v); };
    };
    auto integer = [](int& target) -> Setter {
        return [&target](const std::string& k, const std::string& v) { target = detail::parse_int(k, v); };
    };
    std::optional<double> amp_tol, phase_tol_deg, levels_amp, levels_phase;
    auto opt = [](std::optional<double>& target) -> Setter {
        return [&target](const std::string& k, const std::string& v) { target = detail::parse_double(k, v); };
    };

    const std::map<std::string, Setter> setters{
        {"scenario.band",
         [&](const std::string& k, const std::string& v) {
             if (v == "narrow") c.band = Band::Narrow;
             else if (v == "wide") c.band = Band::Wide;
             else throw ConfigError("config field '" + k + "': expected narrow|wide");
         }},
        {"scenario.antennas", integer(c.N)},
        {"scenario.rf_chains", integer(c.N_RF)},
        {"scenario.stars_h", integer(c.M_h)},
        {"scenario.stars_v", integer(c.M_v)},
        {"scenario.users", integer(c.K)},
        {"scenario.users_transmit", integer(c.K_t)},
        {"scenario.carrier_hz", dbl(c.f_c)},
        {"scenario.bandwidth_hz", dbl(c.W)},
        {"scenario.noise_dbm_hz", dbl(c.noise_dbm_hz)},
        {"scenario.gain_tx_dbi", dbl(c.G_t_dbi)},
        {"scenario.gain_rx_dbi", dbl(c.G_r_dbi)},
        {"scenario.weights",
         [&](const std::string& k, const std::string& v) {
             c.weights.clear();
             for (const auto& t : detail::split_list(v)) c.weights.push_back(detail::parse_double(k, t));
         }},
        {"channel.bs_stars_distance_m", dbl(c.bs_star_dist)},
        {"channel.user_radius_m", dbl(c.user_radius)},
        {"channel.paths_bs", integer(c.L)},
        {"channel.paths_user", integer(c.L_k)},
        {"channel.path_excess_max_m", dbl(c.path_excess_max_m)},
        {"channel.nlos_extra_loss_db", dbl(c.nlos_extra_loss_db)},
        {"channel.absorption_per_m", dbl(c.absorption_per_m)},
        {"channel.absorption_table", [&](const std::string&, const std::string& v) { c.absorption_table = v; }},
        {"channel.pulse",
         [&](const std::string& k, const std::string& v) {
             if (v == "raised-cosine") c.pulse = PulseShape::RaisedCosine;
             else if (v == "sinc") c.pulse = PulseShape::Sinc;
             else throw ConfigError("config field '" + k + "': expected raised-cosine|sinc");
         }},
        {"channel.rolloff", dbl(c.rolloff)},
        {"wideband.subcarriers", integer(c.M_c)},
        {"wideband.ttd_per_rf", integer(c.N_T)},
        {"wideband.cyclic_prefix", integer(c.L_CP)},
        {"power.p_bs", dbl(c.power.P_BS)},
        {"power.p_bb", dbl(c.power.P_BB)},
        {"power.p_rf", dbl(c.power.P_RF)},
        {"power.p_ps", dbl(c.power.P_PS)},
        {"power.p_ttd", dbl(c.power.P_TTD)},
        {"power.p_ue", dbl(c.power.P_UE)},
        {"power.p_pin", dbl(c.power.P_PIN)},
        {"power.p_circ", dbl(c.power.P_circ)},
        {"power.xi", dbl(c.power.xi)},
        {"power.amplitude_tol", opt(amp_tol)},
        {"power.phase_tol_deg", opt(phase_tol_deg)},
        {"power.levels_amplitude", opt(levels_amp)},
        {"power.levels_phase", opt(levels_phase)},
        {"algorithm.rho0", dbl(c.pdd.rho0)},
        {"algorithm.rho_unit", dbl(c.pdd.rho_unit)},
        {"algorithm.noise_weight", dbl(c.pdd.noise_weight)},
        {"algorithm.reduction", dbl(c.pdd.reduction)},
        {"algorithm.eps0", dbl(c.pdd.eps0)},
        {"algorithm.violation_tol", dbl(c.pdd.violation_tol)},
        {"algorithm.inner_tol", dbl(c.pdd.inner_tol)},
        {"algorithm.max_inner", integer(c.pdd.max_inner)},
        {"algorithm.max_outer", integer(c.pdd.max_outer)},
        {"algorithm.element_tol", dbl(c.pdd.element_tol)},
        {"algorithm.golden_tol", dbl(c.pdd.golden_tol)},
        {"experiment.pt_dbm",
         [&](const std::string& k, const std::string& v) {
             c.pt_dbm.clear();
             for (const auto& t : detail::split_list(v)) c.pt_dbm.push_back(detail::parse_double(k, t));
         }},
        {"experiment.pt_fixed_dbm", dbl(c.pt_fixed_dbm)},
        {"experiment.elements",
         [&](const std::string& k, const std::string& v) { c.element_sweep = detail::parse_elements(k, v); }},
        {"experiment.seeds", [&](const std::string& k, const std::string& v) { c.seeds = detail::parse_seeds(k, v); }},
        {"experiment.schemes", [&](const std::string&, const std::string& v) { c.schemes = detail::split_list(v); }},
        {"beamsplit.angle_deg", dbl(c.beamsplit_angle_deg)},
        {"beamsplit.ttd_per_rf", integer(c.beamsplit_ntt)},
        {"beamsplit.grid_points", integer(c.beamsplit_grid)},
    };

    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("config key '" + section + "' must live inside a [section]");
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            auto it = setters.find(full);
            if (it == setters.end()) throw ConfigError("unknown config field '" + full + "'");
            it->second(full, detail::trim(value.data()));
        }
    }

    if (levels_amp) c.power.L_beta = *levels_amp;
    else if (amp_tol) c.power.L_beta = levels_for_tolerance(1.0, *amp_tol);
    if (levels_phase) c.power.L_phi = *levels_phase;
    else if (phase_tol_deg) c.power.L_phi = levels_for_tolerance(360.0, *phase_tol_deg);

    apply_band_defaults(c);
    validate(c);
    return c;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

inline ScenarioConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

} // namespace starsthz
