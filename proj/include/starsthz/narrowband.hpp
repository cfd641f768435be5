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

namespace starsthz {

/// Narrowband hybrid beamforming with a STARS (independent or coupled
/// phase shifts). The coupled variant warm-starts from the independent one.
inline RunResult run_narrowband(const NarrowChannel& ch, const ScenarioConfig& cfg, StarsMode mode, double pt_dbm,
                                double w, std::uint64_t init_seed) {
    ScenarioConfig c = cfg;
    c.band = Band::Narrow;
    const WideChannel wc = as_wide(ch);
    const PddProblem prob(wc, c, Architecture::Hybrid,
                          mode == StarsMode::Independent ? SurfaceKind::StarsIndependent : SurfaceKind::StarsCoupled,
                          pt_dbm, w);
    return prob.run(init_seed);
}

} // namespace starsthz
