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

#include "starsthz/channel.hpp"
#include "starsthz/config.hpp"
#include "starsthz/numopt.hpp"
#include "starsthz/stars.hpp"
#include "starsthz/types.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace starsthz {

// ---------------------------------------------------------------------------
// Power model
// ---------------------------------------------------------------------------

/// Dynamic PIN-diode power of a STARS plus its circuit power, in watts.
inline double stars_power(StarsMode mode, int M, const PowerModelConstants& pc) {
    const double bits = mode == StarsMode::Independent ? std::log2(pc.L_beta) + 2.0 * std::log2(pc.L_phi)
                                                       : std::log2(pc.L_beta) + std::log2(pc.L_phi) + 1.0;
    return 0.5 * std::ceil(bits - 1e-12) * M * pc.P_PIN + pc.P_circ;
}

/// Phase-only surfaces with M elements in total.
inline double ris_power(int M, const PowerModelConstants& pc) {
    return 0.5 * std::ceil(std::log2(pc.L_phi) - 1e-12) * M * pc.P_PIN + pc.P_circ;
}

inline double surface_power(SurfaceKind kind, int M, const PowerModelConstants& pc) {
    switch (kind) {
    case SurfaceKind::StarsIndependent: return stars_power(StarsMode::Independent, M, pc);
    case SurfaceKind::StarsCoupled: return stars_power(StarsMode::Coupled, M, pc);
    case SurfaceKind::Ris: return ris_power(M, pc);
    }
    return 0.0;
}

/// Static power P_c of a transmitter architecture and surface.
inline double static_power(const ScenarioConfig& cfg, Architecture arch, SurfaceKind kind) {
    const auto& p = cfg.power;
    double pc = p.P_BS + p.P_BB + surface_power(kind, cfg.M(), p) + cfg.K * p.P_UE;
    switch (arch) {
    case Architecture::FullDigital: pc += cfg.N * p.P_RF; break;
    case Architecture::Hybrid: pc += cfg.N_RF * p.P_RF + cfg.N_RF * cfg.N * p.P_PS; break;
    case Architecture::TrueTimeDelay:
        pc += cfg.N_RF * p.P_RF + cfg.N_RF * cfg.N * p.P_PS + cfg.N_RF * cfg.N_T * p.P_TTD;
        break;
    }
    return pc;
}

// ---------------------------------------------------------------------------
// Rates
// ---------------------------------------------------------------------------

inline bool serves_transmit_side(int k, int K_t) { return k < K_t; }

/// Effective channels of one band: row k = theta_chi(k)^T H_k.
inline CMat effective_channels(const NarrowChannel& ch, const StarsCoefficients& s, int K_t) {
    CMat G(ch.K(), ch.N());
    for (int k = 0; k < ch.K(); ++k)
        G.row(k) = s.side(serves_transmit_side(k, K_t)).transpose() * ch.H[static_cast<std::size_t>(k)];
    return G;
}

/// Per-user rates (bit/s/Hz) of received rows P (row k = user k's view).
inline RVec rates_from_rows(const CMat& P, double sigma2) {
    RVec r(P.rows());
    for (int k = 0; k < P.rows(); ++k) r(k) = std::log2(1.0 + sinr(P.row(k), k, sigma2));
    return r;
}

struct RateResult {
    RVec rates;
    double se = 0.0;
};

/// Narrowband rates with hybrid beamformer F_RF F_BB.
inline RateResult se_narrow(const StarsCoefficients& s, const NarrowChannel& ch, const CMat& F_RF, const CMat& F_BB,
                            double sigma2, int K_t) {
    RateResult out;
    const CMat P = effective_channels(ch, s, K_t) * (F_RF * F_BB);
    out.rates = rates_from_rows(P, sigma2);
    out.se = out.rates.sum();
    return out;
}

struct PowerBreakdown {
    double transmit = 0.0;       // W
    double rate_dependent = 0.0; // xi * SE, W
    double static_ = 0.0;        // P_c, W
    double total() const { return transmit + rate_dependent + static_; }
};

struct Metrics {
    RMat rates; // subcarriers x users
    double se = 0.0;
    double ee = 0.0;
    PowerBreakdown power;
};

/// EE in (bit/s/Hz)/W.
inline double energy_efficiency(double se, const PowerBreakdown& p) {
    return se > 0.0 ? se / p.total() : 0.0;
}

/// Narrowband EE and power breakdown for a given SE.
inline std::pair<double, PowerBreakdown> ee_narrow(double se, const CMat& F_RF, const CMat& F_BB, double xi,
                                                   double Pc) {
    PowerBreakdown p;
    p.transmit = (F_RF * F_BB).squaredNorm();
    p.rate_dependent = xi * se;
    p.static_ = Pc;
    return {energy_efficiency(se, p), p};
}

/// SE and EE of per-band transmit beamformers F[m] (in sqrt-watts).
inline Metrics evaluate_metrics(const WideChannel& ch, const StarsCoefficients& s, const std::vector<CMat>& F,
                                const ScenarioConfig& cfg, double Pc, double mu) {
    if (F.size() != ch.sub.size()) throw std::invalid_argument("evaluate_metrics: beamformer/band count mismatch");
    const double sigma2 = cfg.noise_power();
    Metrics mt;
    mt.rates.resize(static_cast<Eigen::Index>(F.size()), cfg.K);
    double pw = 0.0;
    for (std::size_t m = 0; m < F.size(); ++m) {
        const CMat P = effective_channels(ch.sub[m], s, cfg.K_t) * F[m];
        mt.rates.row(static_cast<Eigen::Index>(m)) = rates_from_rows(P, sigma2).transpose();
        pw += F[m].squaredNorm();
    }
    mt.se = mu * mt.rates.sum();
    mt.power.transmit = pw / static_cast<double>(F.size());
    mt.power.rate_dependent = cfg.power.xi * mt.se;
    mt.power.static_ = Pc;
    mt.ee = energy_efficiency(mt.se, mt.power);
    return mt;
}

} // namespace starsthz
