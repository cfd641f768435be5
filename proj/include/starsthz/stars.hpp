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

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace starsthz {

/// Transmission and reflection coefficients, entries beta * e^{j phi}.
struct StarsCoefficients {
    CVec theta_t;
    CVec theta_r;
    StarsMode mode = StarsMode::Independent;

    int M() const { return static_cast<int>(theta_t.size()); }
    const CVec& side(bool transmit) const { return transmit ? theta_t : theta_r; }
    CVec& side(bool transmit) { return transmit ? theta_t : theta_r; }
};

struct FeasibilityReport {
    bool feasible = true;
    double energy_violation = 0.0;   // max | |t|^2 + |r|^2 - 1 |
    double coupling_violation = 0.0; // max |cos(phi_t - phi_r)|
    double max_violation() const { return std::max(energy_violation, coupling_violation); }
};

/// Amplitude below which a phase is considered undefined.
inline constexpr double kPhaseAmplitudeFloor = 1e-9;

inline FeasibilityReport check_feasible(const StarsCoefficients& s, double tol) {
    if (s.theta_t.size() != s.theta_r.size())
        throw std::invalid_argument("check_feasible: transmission and reflection vectors differ in length");
    FeasibilityReport rep;
    for (Eigen::Index m = 0; m < s.theta_t.size(); ++m) {
        const double bt = std::abs(s.theta_t(m)), br = std::abs(s.theta_r(m));
        rep.energy_violation = std::max(rep.energy_violation, std::abs(bt * bt + br * br - 1.0));
        if (s.mode == StarsMode::Coupled && bt > kPhaseAmplitudeFloor && br > kPhaseAmplitudeFloor) {
            const double c = std::real(s.theta_t(m) * std::conj(s.theta_r(m))) / (bt * br);
            rep.coupling_violation = std::max(rep.coupling_violation, std::abs(c));
        }
    }
    rep.feasible = rep.max_violation() <= tol;
    return rep;
}

/// Squared distance of the coefficients to a pair of targets.
inline double coupled_distance(const StarsCoefficients& s, const CVec& target_t, const CVec& target_r) {
    return (s.theta_t - target_t).squaredNorm() + (s.theta_r - target_r).squaredNorm();
}

/// Closest coupled-feasible coefficients to (target_t, target_r) in the
/// Euclidean sense, solved exactly per element.
///
/// With phi_r = phi_t -/+ pi/2 the distance equals
/// const - 2 |beta_t x_t +/- j beta_r x_r|, so the common phase follows the
/// argument of that sum and the amplitude angle maximizes
/// sin^2 |x_t|^2 + cos^2 |x_r|^2 + sin(2 vt) kappa with
/// kappa = |Im(conj(x_t) x_r)|.
inline StarsCoefficients project_coupled(const CVec& target_t, const CVec& target_r) {
    if (target_t.size() != target_r.size())
        throw std::invalid_argument("project_coupled: target vectors differ in length");
    const Eigen::Index M = target_t.size();
    StarsCoefficients out;
    out.mode = StarsMode::Coupled;
    out.theta_t.resize(M);
    out.theta_r.resize(M);
    for (Eigen::Index m = 0; m < M; ++m) {
        const cplx xt = target_t(m), xr = target_r(m);
        const double cross = std::imag(std::conj(xt) * xr);
        const double kappa = std::abs(cross);
        const double half_angle = 0.5 * std::atan2(kappa, 0.5 * (std::norm(xr) - std::norm(xt)));
        const double bt = std::sin(half_angle), br = std::cos(half_angle);
        // -cross >= 0 favours phi_r = phi_t - pi/2 (ties go there too)
        const bool quarter = -cross >= 0.0;
        const cplx rot = quarter ? cplx(0.0, -1.0) : cplx(0.0, 1.0); // e^{j(phi_r - phi_t)}
        const cplx z = bt * xt + std::conj(rot) * br * xr;
        const cplx u = std::abs(z) > 0.0 ? z / std::abs(z) : cplx(1.0, 0.0);
        out.theta_t(m) = bt * u;
        out.theta_r(m) = br * u * rot;
    }
    return out;
}

/// Uniformly random feasible coefficients (random energy split and phases).
template <typename Rng>
StarsCoefficients random_stars(int M, StarsMode mode, Rng& rng) {
    std::uniform_real_distribution<double> ang(0.0, kTwoPi), split(0.0, kPi / 2.0);
    std::bernoulli_distribution branch(0.5);
    StarsCoefficients s;
    s.mode = mode;
    s.theta_t.resize(M);
    s.theta_r.resize(M);
    for (int m = 0; m < M; ++m) {
        const double v = split(rng);
        const double pt = ang(rng);
        const double pr = mode == StarsMode::Coupled ? pt + (branch(rng) ? -kPi / 2.0 : -3.0 * kPi / 2.0) : ang(rng);
        s.theta_t(m) = std::polar(std::sin(v), pt);
        s.theta_r(m) = std::polar(std::cos(v), pr);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Conventional RIS pair: first half transmit-only, second half reflect-only
// ---------------------------------------------------------------------------

inline bool ris_transmits(int m, int M) { return m < M / 2; }

inline void require_even_ris(int M) {
    if (M % 2 != 0) throw std::invalid_argument("conventional RIS baseline needs an even element count");
}

/// Max deviation from the RIS pattern (unit amplitude on the active side,
/// zero on the other).
inline double ris_pattern_violation(const StarsCoefficients& s) {
    const int M = s.M();
    double v = 0.0;
    for (int m = 0; m < M; ++m) {
        const bool tx = ris_transmits(m, M);
        const cplx on = tx ? s.theta_t(m) : s.theta_r(m);
        const cplx off = tx ? s.theta_r(m) : s.theta_t(m);
        v = std::max({v, std::abs(std::abs(on) - 1.0), std::abs(off)});
    }
    return v;
}

template <typename Rng>
StarsCoefficients random_ris(int M, Rng& rng) {
    require_even_ris(M);
    std::uniform_real_distribution<double> ang(0.0, kTwoPi);
    StarsCoefficients s;
    s.mode = StarsMode::Independent;
    s.theta_t = CVec::Zero(M);
    s.theta_r = CVec::Zero(M);
    for (int m = 0; m < M; ++m) (ris_transmits(m, M) ? s.theta_t : s.theta_r)(m) = std::polar(1.0, ang(rng));
    return s;
}

} // namespace starsthz
