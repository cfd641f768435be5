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
#include "starsthz/metrics.hpp"
#include "starsthz/pdd.hpp"
#include "starsthz/ttd.hpp"

#include <string>
#include <vector>

namespace starsthz {

/// TTD-based wideband hybrid beamforming with a STARS.
inline RunResult run_wideband(const WideChannel& ch, const ScenarioConfig& cfg, StarsMode mode, double pt_dbm,
                              double w, std::uint64_t init_seed) {
    const PddProblem prob(ch, cfg, Architecture::TrueTimeDelay,
                          mode == StarsMode::Independent ? SurfaceKind::StarsIndependent : SurfaceKind::StarsCoupled,
                          pt_dbm, w);
    return prob.run(init_seed);
}

/// TTD beamformer held by a wideband state (delays as optimized).
inline TtdBeamformer ttd_beamformer(const PddState& s) {
    TtdBeamformer bf;
    bf.ps = s.analog;
    bf.delays = s.delays;
    bf.F_BB = s.F_BB;
    return bf;
}

/// SE and EE of a TTD beamformer whose digital part is in sqrt(W).
inline Metrics se_ee_wide(const StarsCoefficients& theta, const WideChannel& ch, const TtdBeamformer& bf,
                          const ScenarioConfig& cfg, SurfaceKind surface) {
    std::vector<CMat> F;
    for (int m = 0; m < ch.subcarriers(); ++m)
        F.push_back(ttd_analog(bf.ps, bf.delays, ch.freqs[static_cast<std::size_t>(m)]) * bf.F_BB[static_cast<std::size_t>(m)]);
    return evaluate_metrics(ch, theta, F, cfg, static_power(cfg, Architecture::TrueTimeDelay, surface),
                            cfg.rate_prefactor());
}

struct BeamsplitRow {
    double f_hz = 0.0;
    double angle_rad = 0.0;
    double gain = 0.0;
    std::string scheme;
};

/// Normalized array gain versus angle for a single RF chain steered to
/// `beamsplit_angle_deg`, with phase shifters only and with the TTD
/// initialization. The first frequency is the carrier, then every subcarrier.
inline std::vector<BeamsplitRow> beamsplit_table(const ScenarioConfig& cfg) {
    if (cfg.N % cfg.beamsplit_ntt != 0)
        throw ConfigError("config field 'beamsplit.ttd_per_rf': N must be divisible by it");
    const double phi = cfg.beamsplit_angle_deg * kPi / 180.0;
    const double W = cfg.band == Band::Wide ? cfg.bandwidth() : 10e9;
    const CVec ps_only = ula_response(cfg.f_c, phi, cfg.N, half_wavelength(cfg.f_c));
    const TtdBeamformer ttd = init_ttd_from_angles({phi}, cfg.N, cfg.beamsplit_ntt, cfg.f_c);
    std::vector<double> freqs{cfg.f_c};
    for (int m = 1; m <= cfg.M_c; ++m) freqs.push_back(subcarrier_frequency(cfg.f_c, W, cfg.M_c, m));
    std::vector<BeamsplitRow> rows;
    for (double fm : freqs) {
        const CVec w_ttd = ttd_analog(ttd.ps, ttd.delays, fm).col(0);
        for (int g = 0; g < cfg.beamsplit_grid; ++g) {
            const double ang = -kPi / 2.0 + kPi * g / (cfg.beamsplit_grid - 1);
            rows.push_back({fm, ang, array_gain(ps_only, fm, ang, cfg.f_c), "ps"});
            rows.push_back({fm, ang, array_gain(w_ttd, fm, ang, cfg.f_c), "ttd"});
        }
    }
    return rows;
}

} // namespace starsthz
