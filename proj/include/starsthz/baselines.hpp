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
#include "starsthz/pdd.hpp"

#include <stdexcept>

namespace starsthz {

enum class BaselineKind { FullDigital, ConventionalRis, ConventionalHybridWide };

/// Unconstrained N x K precoder; the F = F_RF F_BB consensus disappears and
/// the static power counts one RF chain per antenna.
inline RunResult run_full_digital(const WideChannel& ch, const ScenarioConfig& cfg, StarsMode mode, double pt_dbm,
                                  double w, std::uint64_t init_seed) {
    const PddProblem prob(ch, cfg, Architecture::FullDigital,
                          mode == StarsMode::Independent ? SurfaceKind::StarsIndependent : SurfaceKind::StarsCoupled,
                          pt_dbm, w);
    return prob.run(init_seed);
}

/// Two co-located half-size phase-only surfaces (transmit-only and
/// reflect-only) with the band's own transmitter architecture.
inline RunResult run_conventional_ris(const WideChannel& ch, const ScenarioConfig& cfg, double pt_dbm, double w,
                                      std::uint64_t init_seed) {
    require_even_ris(cfg.M());
    const Architecture arch = cfg.band == Band::Wide ? Architecture::TrueTimeDelay : Architecture::Hybrid;
    const PddProblem prob(ch, cfg, arch, SurfaceKind::Ris, pt_dbm, w);
    return prob.run(init_seed);
}

/// Phase-shifter-only hybrid beamformer shared by all subcarriers.
inline RunResult run_conventional_hybrid_wide(const WideChannel& ch, const ScenarioConfig& cfg, StarsMode mode,
                                              double pt_dbm, double w, std::uint64_t init_seed) {
    if (cfg.band != Band::Wide) throw std::invalid_argument("conventional wideband hybrid needs a wideband config");
    const PddProblem prob(ch, cfg, Architecture::Hybrid,
                          mode == StarsMode::Independent ? SurfaceKind::StarsIndependent : SurfaceKind::StarsCoupled,
                          pt_dbm, w);
    return prob.run(init_seed);
}

} // namespace starsthz
