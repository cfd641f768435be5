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

#include "oracles.hpp"
#include "starsthz/stars.hpp"

#include <catch_amalgamated.hpp>

using namespace starsthz;

TEST_CASE("feasibility check examples") {
    StarsCoefficients s;
    s.theta_t = CVec::Ones(3);
    s.theta_r = CVec::Zero(3);
    CHECK(check_feasible(s, 1e-9).feasible);

    const double h = 1.0 / std::sqrt(2.0);
    s.mode = StarsMode::Coupled;
    s.theta_t = CVec::Constant(3, cplx(h, 0.0));
    s.theta_r = CVec::Constant(3, std::polar(h, -kPi / 2.0));
    CHECK(check_feasible(s, 1e-9).feasible);
    s.theta_r = CVec::Constant(3, std::polar(h, 0.3));
    CHECK_FALSE(check_feasible(s, 1e-9).feasible);

    for (StarsMode mode : {StarsMode::Independent, StarsMode::Coupled}) {
        s.mode = mode;
        s.theta_t = CVec::Ones(2);
        s.theta_r = CVec::Ones(2) * cplx(0.0, 1.0);
        const auto rep = check_feasible(s, 1e-9);
        CHECK_FALSE(rep.feasible);
        CHECK(rep.max_violation() == Catch::Approx(1.0));
    }
}

TEST_CASE("coupled projection leaves feasible points unchanged") {
    std::mt19937_64 rng(1);
    const StarsCoefficients s = random_stars(6, StarsMode::Coupled, rng);
    const StarsCoefficients p = project_coupled(s.theta_t, s.theta_r);
    CHECK(coupled_distance(p, s.theta_t, s.theta_r) < 1e-20);
}

TEST_CASE("coupled projection of (1, j)") {
    // |1|^2 + |j|^2 = 2 breaks energy conservation; the projection keeps the
    // phases and splits the energy evenly
    const StarsCoefficients p = project_coupled(CVec::Ones(1), CVec::Constant(1, cplx(0.0, 1.0)));
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(std::abs(p.theta_t(0)) - h) < 1e-12);
    CHECK(std::abs(std::abs(p.theta_r(0)) - h) < 1e-12);
    CHECK(coupled_distance(p, CVec::Ones(1), CVec::Constant(1, cplx(0.0, 1.0))) ==
          Catch::Approx(2.0 * (1.0 - h) * (1.0 - h)));
    const auto grid = oracle::coupled_projection_grid(cplx(1.0, 0.0), cplx(0.0, 1.0));
    CHECK(grid.value >= coupled_distance(p, CVec::Ones(1), CVec::Constant(1, cplx(0.0, 1.0))) - 1e-12);
}

TEST_CASE("coupled projection matches the brute-force oracle") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 60; ++trial) {
        const CVec xt = oracle::random_complex(1, 1, rng).col(0), xr = oracle::random_complex(1, 1, rng).col(0);
        const StarsCoefficients p = project_coupled(xt, xr);
        const double lib = coupled_distance(p, xt, xr);
        const auto grid = oracle::coupled_projection_grid(xt(0), xr(0), 201, 360);
        CHECK(lib <= grid.value + 1e-12);
        CHECK(grid.value - lib <= oracle::coupled_projection_resolution(xt(0), xr(0), 201, 360));
        CHECK(check_feasible(p, 1e-12).feasible);
    }
}

TEST_CASE("random coefficients are feasible") {
    std::mt19937_64 rng(3);
    for (StarsMode mode : {StarsMode::Independent, StarsMode::Coupled}) {
        const StarsCoefficients s = random_stars(50, mode, rng);
        CHECK(check_feasible(s, 1e-12).feasible);
    }
    const StarsCoefficients r = random_ris(8, rng);
    CHECK(ris_pattern_violation(r) < 1e-15);
    CHECK_THROWS(random_ris(7, rng));
}

TEST_CASE("RIS split: first half transmits") {
    CHECK(ris_transmits(0, 8));
    CHECK(ris_transmits(3, 8));
    CHECK_FALSE(ris_transmits(4, 8));
}
