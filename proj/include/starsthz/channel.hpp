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

#include "starsthz/config.hpp"
#include "starsthz/types.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace starsthz {

// ---------------------------------------------------------------------------
// Array responses and propagation loss
// ---------------------------------------------------------------------------

/// Half-wavelength spacing at the carrier.
inline double half_wavelength(double f_c) { return kSpeedOfLight / (2.0 * f_c); }

/// ULA response, entry i = exp(-j 2 pi f/c i d sin(angle)).
inline CVec ula_response(double f, double angle, int n_elems, double spacing) {
    if (!(f > 0.0)) throw std::invalid_argument("ula_response: frequency must be positive");
    if (n_elems < 1) throw std::invalid_argument("ula_response: element count must be >= 1");
    CVec b(n_elems);
    const double k = -kTwoPi * f / kSpeedOfLight * spacing * std::sin(angle);
    b(0) = 1.0;
    for (int i = 1; i < n_elems; ++i) b(i) = std::polar(1.0, k * i);
    return b;
}

/// UPA response: kron(horizontal, vertical), so index = i_h * m_v + i_v.
inline CVec upa_response(double f, double azimuth, double elevation, int m_h, int m_v, double spacing) {
    if (!(f > 0.0)) throw std::invalid_argument("upa_response: frequency must be positive");
    if (m_h < 1 || m_v < 1) throw std::invalid_argument("upa_response: dimensions must be >= 1");
    const double k = -kTwoPi * f / kSpeedOfLight * spacing;
    const double ph = k * std::sin(azimuth) * std::sin(elevation);
    const double pv = k * std::cos(elevation);
    CVec a(m_h * m_v);
    for (int ih = 0; ih < m_h; ++ih)
        for (int iv = 0; iv < m_v; ++iv)
            a(ih * m_v + iv) = (ih == 0 && iv == 0) ? cplx(1.0, 0.0) : std::polar(1.0, ph * ih + pv * iv);
    return a;
}

/// Spreading plus molecular absorption loss in dB.
inline double pathloss_db(double f, double dist, double k_abs) {
    if (!(f > 0.0)) throw std::invalid_argument("pathloss_db: frequency must be positive");
    if (!(dist > 0.0)) throw std::invalid_argument("pathloss_db: distance must be positive");
    if (k_abs < 0.0) throw std::invalid_argument("pathloss_db: absorption coefficient must be >= 0");
    return 20.0 * std::log10(4.0 * kPi * f * dist / kSpeedOfLight) + k_abs * dist * 10.0 * std::log10(std::exp(1.0));
}

/// Absorption coefficient k(f): constant, or piecewise-linear over a table
/// (clamped to the end values outside the tabulated range).
class AbsorptionModel {
public:
    AbsorptionModel() = default;
    explicit AbsorptionModel(double constant) : constant_(constant) {
        if (constant < 0.0) throw std::invalid_argument("absorption coefficient must be >= 0");
    }
    AbsorptionModel(std::vector<double> freqs, std::vector<double> values)
        : freqs_(std::move(freqs)), values_(std::move(values)) {
        if (freqs_.size() != values_.size() || freqs_.empty())
            throw std::invalid_argument("absorption table: mismatched or empty columns");
        for (std::size_t i = 1; i < freqs_.size(); ++i)
            if (!(freqs_[i] > freqs_[i - 1]))
                throw std::invalid_argument("absorption table: frequencies must be strictly increasing");
        for (double v : values_)
            if (v < 0.0) throw std::invalid_argument("absorption table: coefficients must be >= 0");
    }

    /// Two-column CSV (frequency_hz, k_per_meter) with a header line.
    static AbsorptionModel from_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open absorption table '" + path + "'");
        std::string line;
        if (!std::getline(in, line)) throw std::invalid_argument("absorption table '" + path + "' is empty");
        std::vector<std::pair<double, double>> rows;
        while (std::getline(in, line)) {
            if (detail::trim(line).empty()) continue;
            auto cols = detail::split_list(line);
            if (cols.size() != 2) throw std::invalid_argument("absorption table: expected two columns in '" + line + "'");
            rows.emplace_back(detail::parse_double("absorption_table", cols[0]),
                              detail::parse_double("absorption_table", cols[1]));
        }
        std::sort(rows.begin(), rows.end());
        std::vector<double> f, k;
        for (auto& [a, b] : rows) {
            f.push_back(a);
            k.push_back(b);
        }
        return AbsorptionModel(std::move(f), std::move(k));
    }

    static AbsorptionModel from_config(const ScenarioConfig& cfg) {
        if (!cfg.absorption_table.empty()) return from_csv(cfg.absorption_table);
        return AbsorptionModel(cfg.absorption_per_m);
    }

    double operator()(double f) const {
        if (freqs_.empty()) return constant_;
        if (f <= freqs_.front()) return values_.front();
        if (f >= freqs_.back()) return values_.back();
        auto it = std::upper_bound(freqs_.begin(), freqs_.end(), f);
        std::size_t hi = static_cast<std::size_t>(it - freqs_.begin());
        std::size_t lo = hi - 1;
        double t = (f - freqs_[lo]) / (freqs_[hi] - freqs_[lo]);
        return values_[lo] + t * (values_[hi] - values_[lo]);
    }

private:
    double constant_ = 0.0;
    std::vector<double> freqs_, values_;
};

/// Pulse shaping function sampled at x (in symbol periods).
inline double pulse(PulseShape shape, double x, double rolloff) {
    auto sinc = [](double u) { return std::abs(u) < 1e-12 ? 1.0 : std::sin(kPi * u) / (kPi * u); };
    if (shape == PulseShape::Sinc || rolloff == 0.0) return sinc(x);
    const double den = 1.0 - (2.0 * rolloff * x) * (2.0 * rolloff * x);
    if (std::abs(den) < 1e-10) return (kPi / 4.0) * sinc(1.0 / (2.0 * rolloff));
    return sinc(x) * std::cos(kPi * rolloff * x) / den;
}

// ---------------------------------------------------------------------------
// Path sets
// ---------------------------------------------------------------------------

struct BsStarPath {
    cplx gain;            // linear, antenna gain excluded
    double delay = 0.0;   // seconds
    double aoa_azimuth = 0.0;
    double aoa_elevation = 0.0;
    double aod_bs = 0.0;
};

struct StarUserPath {
    cplx gain;
    double delay = 0.0;
    double aod_azimuth = 0.0;
    double aod_elevation = 0.0;
};

struct PathSet {
    std::vector<BsStarPath> bs_star_paths;
    std::vector<std::vector<StarUserPath>> star_user_paths; // [k][j]
};

/// Random multipath draw. The first path of each segment is the line of
/// sight; the others travel up to `path_excess_max_m` further and lose an
/// extra `nlos_extra_loss_db`. Delays are relative to the first arrival of
/// their segment.
template <typename Rng>
PathSet sample_paths(const ScenarioConfig& cfg, Rng& rng) {
    std::uniform_real_distribution<double> angle(-kPi / 2.0, kPi / 2.0);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    std::uniform_real_distribution<double> excess(0.0, 1.0);
    const AbsorptionModel kabs = AbsorptionModel::from_config(cfg);
    const double k_fc = kabs(cfg.f_c);

    auto draw_segment = [&](double base_len, int n_paths, auto&& emit) {
        std::vector<double> lens(static_cast<std::size_t>(n_paths));
        for (int i = 0; i < n_paths; ++i)
            lens[static_cast<std::size_t>(i)] = base_len + (i == 0 ? 0.0 : excess(rng) * cfg.path_excess_max_m);
        const double min_len = *std::min_element(lens.begin(), lens.end());
        for (int i = 0; i < n_paths; ++i) {
            const double len = lens[static_cast<std::size_t>(i)];
            double loss = pathloss_db(cfg.f_c, len, k_fc) + (i == 0 ? 0.0 : cfg.nlos_extra_loss_db);
            const double mag = std::pow(10.0, -loss / 20.0);
            const cplx g = std::polar(mag, phase(rng));
            emit(g, (len - min_len) / kSpeedOfLight);
        }
    };

    PathSet ps;
    draw_segment(cfg.bs_star_dist, cfg.L, [&](cplx g, double tau) {
        BsStarPath p;
        p.gain = g;
        p.delay = tau;
        p.aoa_azimuth = angle(rng);
        p.aoa_elevation = angle(rng);
        p.aod_bs = angle(rng);
        ps.bs_star_paths.push_back(p);
    });
    ps.star_user_paths.resize(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
        draw_segment(cfg.user_radius, cfg.L_k, [&](cplx g, double tau) {
            StarUserPath p;
            p.gain = g;
            p.delay = tau;
            p.aod_azimuth = angle(rng);
            p.aod_elevation = angle(rng);
            ps.star_user_paths[static_cast<std::size_t>(k)].push_back(p);
        });
    }
    return ps;
}

inline PathSet sample_paths(const ScenarioConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_paths(cfg, rng);
}

// ---------------------------------------------------------------------------
// Assembled channels
// ---------------------------------------------------------------------------

/// Cascaded channel at one frequency. v[k] holds the STARS->user row as a
/// column vector; H[k] = diag(v[k]) G.
struct NarrowChannel {
    double f = 0.0;
    CMat G;
    std::vector<CVec> v;
    std::vector<CMat> H;
    std::vector<double> bs_directions; // BS departure angles, strongest path first

    int N() const { return static_cast<int>(G.cols()); }
    int M() const { return static_cast<int>(G.rows()); }
    int K() const { return static_cast<int>(v.size()); }

    void rebuild_cascade() {
        H.resize(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) H[k] = v[k].asDiagonal() * G;
    }
};

struct WideChannel {
    std::vector<double> freqs;
    std::vector<NarrowChannel> sub; // per subcarrier
    std::vector<double> bs_directions;

    int subcarriers() const { return static_cast<int>(sub.size()); }
};

inline double subcarrier_frequency(double f_c, double W, int M_c, int m) {
    return f_c + W * (2.0 * m - 1.0 - M_c) / (2.0 * M_c);
}

namespace detail {

inline NarrowChannel assemble_at(const PathSet& ps, const ScenarioConfig& cfg, double f,
                                 const std::vector<cplx>& bs_gain,
                                 const std::vector<std::vector<cplx>>& user_gain) {
    const double d = half_wavelength(cfg.f_c);
    NarrowChannel ch;
    ch.f = f;
    ch.G = CMat::Zero(cfg.M(), cfg.N);
    const double sgt = std::sqrt(db_to_linear(cfg.G_t_dbi));
    const double sgr = std::sqrt(db_to_linear(cfg.G_r_dbi));
    for (std::size_t i = 0; i < ps.bs_star_paths.size(); ++i) {
        const auto& p = ps.bs_star_paths[i];
        CVec a = upa_response(f, p.aoa_azimuth, p.aoa_elevation, cfg.M_h, cfg.M_v, d);
        CVec b = ula_response(f, p.aod_bs, cfg.N, d);
        ch.G.noalias() += (sgt * bs_gain[i]) * a * b.adjoint();
    }
    ch.v.assign(ps.star_user_paths.size(), CVec::Zero(cfg.M()));
    for (std::size_t k = 0; k < ps.star_user_paths.size(); ++k) {
        for (std::size_t j = 0; j < ps.star_user_paths[k].size(); ++j) {
            const auto& p = ps.star_user_paths[k][j];
            CVec a = upa_response(f, p.aod_azimuth, p.aod_elevation, cfg.M_h, cfg.M_v, d);
            ch.v[k] += (sgr * user_gain[k][j]) * a.conjugate();
        }
    }
    ch.rebuild_cascade();
    std::vector<std::size_t> order(ps.bs_star_paths.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(ps.bs_star_paths[x].gain) > std::abs(ps.bs_star_paths[y].gain);
    });
    for (std::size_t i : order) ch.bs_directions.push_back(ps.bs_star_paths[i].aod_bs);
    return ch;
}

} // namespace detail

/// Single-tap channel at the carrier.
inline NarrowChannel assemble_narrow(const PathSet& ps, const ScenarioConfig& cfg) {
    std::vector<cplx> bs;
    for (const auto& p : ps.bs_star_paths) bs.push_back(p.gain);
    std::vector<std::vector<cplx>> us(ps.star_user_paths.size());
    for (std::size_t k = 0; k < ps.star_user_paths.size(); ++k)
        for (const auto& p : ps.star_user_paths[k]) us[k].push_back(p.gain);
    return detail::assemble_at(ps, cfg, cfg.f_c, bs, us);
}

/// DFT of the pulse-shaped taps of one path: sum_q p(q - W tau) e^{-j 2 pi m q / M_c}.
inline cplx tap_dft(double W, double tau, int n_taps, int m, int M_c, PulseShape shape, double rolloff) {
    cplx acc = 0.0;
    for (int q = 0; q < n_taps; ++q)
        acc += pulse(shape, q - W * tau, rolloff) * std::polar(1.0, -kTwoPi * m * q / M_c);
    return acc;
}

/// Tap count covering the largest delay of a segment.
template <typename Paths>
int segment_taps(const Paths& paths, double W) {
    double mx = 0.0;
    for (const auto& p : paths) mx = std::max(mx, p.delay);
    return static_cast<int>(std::ceil(W * mx - 1e-12)) + 1;
}

/// Per-subcarrier channels. Each propagation segment (BS->STARS and
/// STARS->user k) carries its own tapped response; the cascade is their
/// product in frequency, so H[m][k] = diag(v[m][k]) G[m] holds exactly.
inline WideChannel assemble_wide(const PathSet& ps, const ScenarioConfig& cfg) {
    const int Mc = cfg.M_c;
    if (Mc < 1) throw std::invalid_argument("assemble_wide: M_c must be >= 1");
    const double W = cfg.bandwidth();
    WideChannel wc;
    const int q_bs = segment_taps(ps.bs_star_paths, W);
    std::vector<int> q_user;
    for (const auto& up : ps.star_user_paths) q_user.push_back(segment_taps(up, W));
    for (int m = 1; m <= Mc; ++m) {
        const double fm = subcarrier_frequency(cfg.f_c, W, Mc, m);
        std::vector<cplx> bs;
        for (const auto& p : ps.bs_star_paths)
            bs.push_back(p.gain * tap_dft(W, p.delay, q_bs, m, Mc, cfg.pulse, cfg.rolloff));
        std::vector<std::vector<cplx>> us(ps.star_user_paths.size());
        for (std::size_t k = 0; k < ps.star_user_paths.size(); ++k)
            for (const auto& p : ps.star_user_paths[k])
                us[k].push_back(p.gain * tap_dft(W, p.delay, q_user[k], m, Mc, cfg.pulse, cfg.rolloff));
        wc.freqs.push_back(fm);
        wc.sub.push_back(detail::assemble_at(ps, cfg, fm, bs, us));
    }
    wc.bs_directions = wc.sub.front().bs_directions;
    return wc;
}

/// Narrowband channel viewed as a one-subcarrier wideband channel.
inline WideChannel as_wide(const NarrowChannel& ch) {
    WideChannel wc;
    wc.freqs.push_back(ch.f);
    wc.sub.push_back(ch);
    wc.bs_directions = ch.bs_directions;
    return wc;
}

/// Channel realization for the configured band.
inline WideChannel make_channel(const PathSet& ps, const ScenarioConfig& cfg) {
    if (cfg.band == Band::Narrow) return as_wide(assemble_narrow(ps, cfg));
    return assemble_wide(ps, cfg);
}

} // namespace starsthz
