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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <string_view>

namespace starsthz {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kJ{0.0, 1.0};

/// Hardware model of the surface.
enum class StarsMode { Independent, Coupled };

/// Surface used by a scheme. `Ris` is the pair of half-size transmit-only and
/// reflect-only surfaces used as a baseline.
enum class SurfaceKind { StarsIndependent, StarsCoupled, Ris };

/// Transmitter architecture at the base station.
enum class Architecture {
    Hybrid,       // F_RF (unit modulus, N x N_RF) shared by all subcarriers
    TrueTimeDelay,// F_PS block pattern + per-TTD delays
    FullDigital   // unconstrained N x K precoder
};

enum class Band { Narrow, Wide };

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline std::string_view to_string(StarsMode m) {
    return m == StarsMode::Independent ? "independent" : "coupled";
}

inline std::string_view to_string(Band b) { return b == Band::Narrow ? "narrow" : "wide"; }

/// Largest entry magnitude of a complex matrix, 0 for empty input.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

} // namespace starsthz
