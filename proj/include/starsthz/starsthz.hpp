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
#include "starsthz/config.hpp"
#include "starsthz/channel.hpp"
#include "starsthz/stars.hpp"
#include "starsthz/numopt.hpp"
#include "starsthz/metrics.hpp"
#include "starsthz/ttd.hpp"
#include "starsthz/pdd.hpp"
#include "starsthz/narrowband.hpp"
#include "starsthz/wideband.hpp"
#include "starsthz/baselines.hpp"
#include "starsthz/experiment.hpp"
