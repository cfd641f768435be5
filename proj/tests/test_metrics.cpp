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
#include "starsthz/metrics.hpp"
#include "starsthz/wideband.hpp"

#include <catch_amalgamated.hpp>

using namespace starsthz;
using Catch::Approx;

namespace {

NarrowChannel random_narrow(int N, int M, int K, std::mt19937_64& rng) {
    NarrowChannel ch;
    ch.f = 1e11;
    ch.G = oracle::random_complex(M, N, rng);
    for (int k = 0; k < K; ++k) ch.v.push_back(oracle::random_complex(M, 1, rng).col(0));
    ch.rebuild_cascade();
    return ch;
}

// Independent SINR evaluation from the definition, one term at a time.
double reference_rate(const StarsCoefficients& s, const NarrowChannel& ch, const CMat& F, double s2, int k, int K_t) {
    const CVec& th = k < K_t ? s.theta_t : s.theta_r;
    auto gain = [&](int i) {
        cplx acc = 0.0;
        for (int m = 0; m < ch.M(); ++m)
            for (int n = 0; n < ch.N(); ++n) acc += th(m) * ch.v[k](m) * ch.G(m, n) * F(n, i);
        return std::norm(acc);
    };
    double interf = 0.0;
    for (int i = 0; i < F.cols(); ++i)
        if (i != k) interf += gain(i);
    return std::log2(1.0 + gain(k) / (interf + s2));
}

} // namespace

TEST_CASE("per-element surface power") {
    PowerModelConstants pc;
    pc.P_circ = 0.0;
    CHECK(stars_power(StarsMode::Independent, 1, pc) * 1e3 == Approx(3.63).margin(1e-9));
    CHECK(stars_power(StarsMode::Coupled, 1, pc) * 1e3 == Approx(2.64).margin(1e-9));
    CHECK(ris_power(1, pc) * 1e3 == Approx(1.32).margin(1e-9));
    CHECK(levels_for_tolerance(1.0, 0.005) == 100.0);
    CHECK(levels_for_tolerance(360.0, 1.0) == 180.0);

    PowerModelConstants two = pc;
    two.L_beta = two.L_phi = 2.0;
    two.P_circ = 0.7;
    CHECK(stars_power(StarsMode::Independent, 10, two) == Approx(0.5 * 3 * 10 * two.P_PIN + 0.7));
}

TEST_CASE("surface power is non-decreasing in elements and levels") {
    PowerModelConstants pc;
    for (StarsMode mode : {StarsMode::Independent, StarsMode::Coupled}) {
        double prev = 0.0;
        for (int M = 0; M <= 64; ++M) {
            const double p = stars_power(mode, M, pc);
            CHECK(p >= prev);
            prev = p;
        }
        prev = 0.0;
        for (double L = 2; L <= 400; L += 7) {
            PowerModelConstants q = pc;
            q.L_beta = L;
            const double p1 = stars_power(mode, 16, q);
            q = pc;
            q.L_phi = L;
            const double p2 = stars_power(mode, 16, q);
            CHECK(p1 >= prev - 1e-15);
            prev = p1;
            CHECK(p2 >= 0.0);
        }
        double prev2 = 0.0;
        for (double L = 2; L <= 400; L += 7) {
            PowerModelConstants q = pc;
            q.L_phi = L;
            const double p = stars_power(mode, 16, q);
            CHECK(p >= prev2);
            prev2 = p;
        }
    }
}

TEST_CASE("static power of each transmitter") {
    const ScenarioConfig c; // N = 128, N_RF = 4, M = 36, K = 4
    const double surf = 36 * 3.63e-3 + c.power.P_circ;
    const double hyb = 3.0 + 0.3 + 4 * 0.2 + 4 * 128 * 0.03 + surf + 4 * 0.1;
    CHECK(static_power(c, Architecture::Hybrid, SurfaceKind::StarsIndependent) == Approx(hyb).epsilon(1e-12));
    const double fd = static_power(c, Architecture::FullDigital, SurfaceKind::StarsIndependent);
    CHECK(fd - hyb == Approx((128 - 4) * 0.2 - 4 * 128 * 0.03).epsilon(1e-12));
    const double ttd = static_power(c, Architecture::TrueTimeDelay, SurfaceKind::StarsIndependent);
    CHECK(ttd - hyb == Approx(3.2).epsilon(1e-12));
    CHECK(static_power(c, Architecture::Hybrid, SurfaceKind::StarsCoupled) ==
          Approx(hyb - 36 * (3.63e-3 - 2.64e-3)).epsilon(1e-12));
    CHECK(static_power(c, Architecture::Hybrid, SurfaceKind::Ris) ==
          Approx(hyb - 36 * (3.63e-3 - 1.32e-3)).epsilon(1e-12));
}

TEST_CASE("narrowband rates: examples") {
    NarrowChannel ch;
    ch.f = 1e11;
    ch.G = CMat::Ones(1, 1);
    ch.v = {CVec::Ones(1)};
    ch.rebuild_cascade();
    StarsCoefficients s;
    s.theta_t = CVec::Ones(1);
    s.theta_r = CVec::Zero(1);
    const CMat one = CMat::Ones(1, 1);
    CHECK(se_narrow(s, ch, one, one * std::sqrt(2.0), 2.0, 1).se == Approx(1.0));
    CHECK(se_narrow(s, ch, one, CMat::Zero(1, 1), 2.0, 1).se == 0.0);
}

TEST_CASE("narrowband rates agree with a direct evaluation") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const NarrowChannel ch = random_narrow(6, 4, 3, rng);
        const StarsCoefficients s = random_stars(4, StarsMode::Independent, rng);
        const CMat FR = oracle::random_unit_modulus(6, 2, rng);
        const CMat FB = oracle::random_complex(2, 3, rng);
        const double s2 = 0.3;
        const RateResult r = se_narrow(s, ch, FR, FB, s2, 2);
        double tot = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double ref = reference_rate(s, ch, FR * FB, s2, k, 2);
            CHECK(r.rates(k) == Approx(ref).epsilon(1e-10));
            CHECK(r.rates(k) >= 0.0);
            CHECK(std::isfinite(r.rates(k)));
            tot += ref;
        }
        CHECK(r.se == Approx(tot).epsilon(1e-10));

        StarsCoefficients rot = s;
        const cplx g = std::polar(1.0, 0.37 + trial);
        rot.theta_t *= g;
        rot.theta_r *= g;
        const RateResult r2 = se_narrow(rot, ch, FR, FB, s2, 2);
        CHECK((r2.rates - r.rates).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("energy efficiency") {
    const CMat FR = CMat::Ones(2, 1);
    const CMat FB = CMat::Ones(1, 1);
    auto [ee0, p0] = ee_narrow(0.0, FR, FB, 0.1, 5.0);
    CHECK(ee0 == 0.0);
    auto [ee1, p1] = ee_narrow(4.0, FR, FB, 0.1, 5.0);
    CHECK(p1.transmit == Approx(2.0));
    CHECK(ee1 == Approx(4.0 / (2.0 + 0.4 + 5.0)));
    auto [ee2, p2] = ee_narrow(4.0, FR, FB * std::sqrt(2.0), 0.1, 5.0);
    CHECK(p2.transmit == Approx(4.0));
    CHECK(ee2 < ee1);
    CHECK(ee1 * p1.total() == Approx(4.0).epsilon(1e-12));
}

TEST_CASE("wideband metrics") {
    std::mt19937_64 rng(4);
    ScenarioConfig c;
    c.band = Band::Wide;
    c.N = 16;
    c.N_RF = 2;
    c.N_T = 4;
    c.M_h = c.M_v = 2;
    c.K = 2;
    c.K_t = 1;
    c.M_c = 3;
    c.L_CP = 1;
    const WideChannel ch = make_channel(sample_paths(c, 7), c);
    const StarsCoefficients s = random_stars(4, StarsMode::Independent, rng);
    TtdBeamformer bf;
    bf.ps = oracle::random_unit_modulus(16, 2, rng);
    bf.delays = RMat::Constant(2, 4, 3e-12);
    for (int m = 0; m < 3; ++m) bf.F_BB.push_back(oracle::random_complex(2, 2, rng, 0.05));
    const Metrics mt = se_ee_wide(s, ch, bf, c, SurfaceKind::StarsIndependent);
    double sum = 0.0, pw = 0.0;
    for (int m = 0; m < 3; ++m) {
        const CMat F = ttd_analog(bf.ps, bf.delays, ch.freqs[m]) * bf.F_BB[m];
        for (int k = 0; k < 2; ++k) sum += reference_rate(s, ch.sub[m], F, c.noise_power(), k, 1);
        pw += F.squaredNorm();
    }
    CHECK(mt.se == Approx(sum / 4.0).epsilon(1e-10));
    CHECK(mt.power.transmit == Approx(pw / 3.0).epsilon(1e-12));
    CHECK(mt.power.static_ == Approx(static_power(c, Architecture::TrueTimeDelay, SurfaceKind::StarsIndependent)));
    CHECK(mt.ee * mt.power.total() == Approx(mt.se).epsilon(1e-9));

    // one subcarrier and no prefix: the narrowband formulas
    ScenarioConfig n = c;
    n.M_c = 1;
    n.L_CP = 0;
    n.N_T = 1;
    const WideChannel ch1 = make_channel(sample_paths(n, 7), n);
    TtdBeamformer b1;
    b1.ps = bf.ps;
    b1.delays = RMat::Zero(2, 1);
    b1.F_BB = {bf.F_BB[0]};
    const Metrics m1 = se_ee_wide(s, ch1, b1, n, SurfaceKind::StarsIndependent);
    CHECK(n.rate_prefactor() == 1.0);
    const RateResult r1 = se_narrow(s, ch1.sub[0], b1.ps, b1.F_BB[0], n.noise_power(), 1);
    CHECK(m1.se == Approx(r1.se).epsilon(1e-12));
}
