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
#include "starsthz/ttd.hpp"
#include "starsthz/wideband.hpp"

#include <catch_amalgamated.hpp>

using namespace starsthz;
using Catch::Approx;

namespace {

// Random delay subproblem; delays are expressed in carrier cycles.
TtdObjectiveData random_problem(int N, int nrf, int nt, int bands, int K, std::mt19937_64& rng) {
    TtdObjectiveData d;
    d.ps = oracle::random_unit_modulus(N, nrf, rng);
    d.N_T = nt;
    for (int m = 0; m < bands; ++m) {
        d.freqs.push_back(1e11 + 1e9 * (m - 0.5 * (bands - 1)));
        d.Z.push_back(oracle::random_complex(N, K, rng));
        d.F_BB.push_back(oracle::random_complex(nrf, K, rng));
    }
    return d;
}

RMat random_delays(int nrf, int nt, double f, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 4.0);
    RMat t(nrf, nt);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng) / f;
    return t;
}

} // namespace

TEST_CASE("delay matrix structure") {
    RMat zero = RMat::Zero(3, 4);
    const CMat T0 = assemble_Tm(zero, 1e11);
    CHECK(T0.rows() == 12);
    CHECK(T0.cols() == 3);
    for (int n = 0; n < 3; ++n)
        for (int r = 0; r < 12; ++r) CHECK(T0(r, n) == (r / 4 == n ? cplx(1.0, 0.0) : cplx(0.0, 0.0)));

    const double f = 1.05e11;
    RMat one = RMat::Constant(1, 1, 1.0 / f);
    CHECK(std::abs(assemble_Tm(one, f)(0, 0) - 1.0) < 1e-12);

    std::mt19937_64 rng(1);
    const RMat t = random_delays(2, 5, f, rng);
    const CMat T = assemble_Tm(t, f);
    for (int n = 0; n < 2; ++n)
        for (int i = 0; i < 5; ++i) {
            CHECK(std::abs(T(n * 5 + i, n) - std::exp(cplx(0.0, -2.0 * kPi * f * t(n, i)))) < 1e-12);
            CHECK(std::abs(std::abs(T(n * 5 + i, n)) - 1.0) < 1e-12);
        }
    CHECK(T.cwiseAbs().sum() == Approx(10.0));
}

TEST_CASE("compact analog form equals the phase-shifter network times the delay matrix") {
    std::mt19937_64 rng(2);
    const CMat ps = oracle::random_unit_modulus(16, 3, rng);
    const RMat t = random_delays(3, 4, 1e11, rng);
    const CMat full = expand_ps(ps, 4) * assemble_Tm(t, 1.02e11);
    CHECK((full - ttd_analog(ps, t, 1.02e11)).norm() < 1e-12);
    CHECK_THROWS_AS(ttd_block_size(10, 4), std::invalid_argument);
}

TEST_CASE("delay objective: zero at an exact fit, periodic in each delay") {
    std::mt19937_64 rng(3);
    TtdObjectiveData d = random_problem(8, 2, 4, 1, 3, rng);
    const RMat t0 = random_delays(2, 4, d.freqs[0], rng);
    d.Z[0] = ttd_analog(d.ps, t0, d.freqs[0]) * d.F_BB[0];
    const ValueGrad vg = ttd_objective(t0, d);
    CHECK(vg.value < 1e-20);
    CHECK(vg.gradient.cwiseAbs().maxCoeff() < 1e-6);

    TtdObjectiveData e = random_problem(8, 2, 4, 1, 3, rng);
    RMat shifted = t0;
    shifted(1, 2) += 1.0 / e.freqs[0];
    CHECK(ttd_objective(shifted, e).value == Approx(ttd_objective(t0, e).value).epsilon(1e-9));
}

TEST_CASE("delay objective gradient matches central finite differences") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const TtdObjectiveData d = random_problem(16, 2, 4, 3, 3, rng);
        const double fr = 1e11;
        const RMat t = random_delays(2, 4, fr, rng);
        auto as_delays = [&](const Eigen::VectorXd& x) {
            RMat m(2, 4);
            for (int i = 0; i < 8; ++i) m(i / 4, i % 4) = x(i) / fr;
            return m;
        };
        Eigen::VectorXd x(8);
        for (int i = 0; i < 8; ++i) x(i) = t(i / 4, i % 4) * fr;
        const auto fd = oracle::fd_gradient([&](const Eigen::VectorXd& y) { return ttd_objective(as_delays(y), d).value; },
                                            x, 1e-5);
        const RMat g = ttd_objective(t, d).gradient / fr;
        Eigen::VectorXd ga(8);
        for (int i = 0; i < 8; ++i) ga(i) = g(i / 4, i % 4);
        CHECK((ga - fd).norm() <= 1e-5 * ga.norm());
    }
}

TEST_CASE("scalar delay update matches a fine grid over one period") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const TtdObjectiveData d = random_problem(4, 1, 1, 1, 2, rng);
        const double f = d.freqs[0];
        const RMat t0 = random_delays(1, 1, f, rng);
        const RMat t = update_delays(t0, d, f, 1e-14, 500);
        auto obj = [&](double tau) { return ttd_objective(RMat::Constant(1, 1, tau), d).value; };
        const int n = 100000;
        const auto grid = oracle::scalar_grid(obj, 0.0, (n - 1.0) / (n * f), n);
        double gmax = 0.0;
        for (int i = 0; i < n; i += 97) gmax = std::max(gmax, obj(i / (n * f)));
        const double lib = obj(t(0, 0));
        CHECK(lib <= grid.value + 1e-9 * (1.0 + grid.value));
        CHECK(grid.value - lib <= 0.5 * (gmax - grid.value) * (1.0 - std::cos(kPi / n)) + 1e-9 * (1.0 + grid.value));
    }
}

TEST_CASE("delay update never raises the objective and keeps an optimum") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        TtdObjectiveData d = random_problem(16, 2, 4, 4, 3, rng);
        const RMat t0 = random_delays(2, 4, 1e11, rng);
        const RMat t1 = update_delays(t0, d, 1e11);
        CHECK(ttd_objective(t1, d).value <= ttd_objective(t0, d).value);

        for (std::size_t m = 0; m < d.freqs.size(); ++m) d.Z[m] = ttd_analog(d.ps, t0, d.freqs[m]) * d.F_BB[m];
        const RMat t2 = update_delays(t0, d, 1e11);
        CHECK(((t2 - t0) * 1e11).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("delay wrapping") {
    RMat t(1, 3);
    t << -0.25e-10, 0.5e-10, 2.25e-10;
    const RMat w = wrap_delays(t, 1e10);
    CHECK(w(0, 0) == Approx(0.75e-10));
    CHECK(w(0, 1) == Approx(0.5e-10));
    CHECK(w(0, 2) == Approx(0.25e-10));
}

TEST_CASE("TTD initialization examples") {
    const double fc = 1e11;
    const TtdBeamformer z = init_ttd_from_angles({0.0}, 32, 4, fc);
    CHECK((z.ps - CMat::Ones(32, 1)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(z.delays.cwiseAbs().maxCoeff() == 0.0);

    const TtdBeamformer neg = init_ttd_from_angles({-0.7, -0.2}, 32, 8, fc);
    for (int n = 0; n < 2; ++n) {
        CHECK(neg.delays.row(n).minCoeff() == Approx(0.0).margin(1e-25));
        CHECK(neg.delays.row(n).minCoeff() >= 0.0);
    }

    const TtdBeamformer q = init_ttd_from_angles({kPi / 4.0}, 128, 8, fc);
    for (int i = 0; i < 8; ++i) CHECK(q.delays(0, i) == Approx(i * 16 * std::sin(kPi / 4.0) / (2.0 * fc)).epsilon(1e-12));
    CHECK((q.ps.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
    // at the carrier the delays only undo the block offsets
    const CVec at_fc = ttd_analog(q.ps, q.delays, fc).col(0);
    const CVec b = ula_response(fc, kPi / 4.0, 128, half_wavelength(fc));
    CHECK(std::abs(std::abs(b.dot(at_fc)) - 128.0) < 1e-9);
}

TEST_CASE("array gain and beam split") {
    const double fc = 1e11, W = 1e10;
    const int N = 128, Mc = 10;
    const double phi = kPi / 4.0;
    const CVec b = ula_response(fc, phi, N, half_wavelength(fc));
    CHECK(array_gain(b, fc, phi, fc) == Approx(1.0).margin(1e-12));

    const double f_edge = subcarrier_frequency(fc, W, Mc, Mc);
    // independent evaluation |b(f_M)^H b(f_c)| / N
    cplx acc = 0.0;
    for (int n = 0; n < N; ++n)
        acc += std::exp(cplx(0.0, kPi * n * std::sin(phi) * (f_edge - fc) / fc));
    const double gain_edge = std::abs(acc) / N;
    CHECK(array_gain(b, f_edge, phi, fc) == Approx(gain_edge).margin(1e-9));
    CHECK(gain_edge < 0.2);

    const TtdBeamformer q = init_ttd_from_angles({phi}, N, 16, fc);
    CHECK(array_gain(ttd_analog(q.ps, q.delays, f_edge).col(0), f_edge, phi, fc) > 0.9);

    // PS-only gain at the steering angle shrinks with the subcarrier offset
    const int Ns = 32;
    const CVec bs = ula_response(fc, phi, Ns, half_wavelength(fc));
    std::vector<std::pair<double, double>> by_offset;
    for (int m = 1; m <= Mc; ++m) {
        const double fm = subcarrier_frequency(fc, W, Mc, m);
        by_offset.emplace_back(std::abs(fm - fc), array_gain(bs, fm, phi, fc));
    }
    std::sort(by_offset.begin(), by_offset.end());
    for (std::size_t i = 1; i < by_offset.size(); ++i) CHECK(by_offset[i].second <= by_offset[i - 1].second + 1e-12);
}

TEST_CASE("beam split table for the reference setup") {
    ScenarioConfig c;
    c.band = Band::Wide;
    c.W = 1e10;
    const auto rows = beamsplit_table(c);
    CHECK(rows.size() == static_cast<std::size_t>(2 * (c.M_c + 1) * c.beamsplit_grid));
    const double phi = kPi / 4.0;
    auto gain_at = [&](double f, const std::string& scheme) {
        double best = -1.0, err = 1e9;
        for (const auto& r : rows)
            if (r.f_hz == f && r.scheme == scheme && std::abs(r.angle_rad - phi) < err) {
                err = std::abs(r.angle_rad - phi);
                best = r.gain;
            }
        CHECK(err < 1e-12);
        return best;
    };
    CHECK(gain_at(c.f_c, "ps") == Approx(1.0).margin(1e-6));
    CHECK(gain_at(c.f_c, "ttd") == Approx(1.0).margin(1e-6));
    const double f_edge = subcarrier_frequency(c.f_c, c.W, c.M_c, c.M_c);
    CHECK(gain_at(f_edge, "ps") < 0.2);
    CHECK(gain_at(f_edge, "ttd") > 0.9);
    for (const auto& r : rows) {
        CHECK(r.gain >= 0.0);
        CHECK(r.gain <= 1.0 + 1e-12);
    }
    c.N = 100;
    CHECK_THROWS_AS(beamsplit_table(c), ConfigError);
}
