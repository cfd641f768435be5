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
#include "starsthz/numopt.hpp"
#include "starsthz/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace starsthz {

/// True-time-delay hybrid beamformer. The phase-shifter network is stored
/// compactly as an N x N_RF unit-modulus matrix `ps`: antenna i of RF chain n
/// sits behind TTD i / (N / N_T) of that chain, so F_PS T_m = ps .* E_m with
/// E_m(i, n) = exp(-j 2 pi f_m t(n, i / delta)).
struct TtdBeamformer {
    CMat ps;                 // N x N_RF
    RMat delays;             // N_RF x N_T, seconds (unconstrained)
    std::vector<CMat> F_BB;  // per subcarrier, N_RF x K

    int N() const { return static_cast<int>(ps.rows()); }
    int N_RF() const { return static_cast<int>(ps.cols()); }
    int N_T() const { return static_cast<int>(delays.cols()); }
};

inline int ttd_block_size(int N, int N_T) {
    if (N_T < 1 || N % N_T != 0) throw std::invalid_argument("N must be divisible by the TTD count");
    return N / N_T;
}

/// Block-diagonal delay matrix of size (N_T N_RF) x N_RF.
inline CMat assemble_Tm(const RMat& delays, double f_m) {
    const Eigen::Index nrf = delays.rows(), nt = delays.cols();
    CMat T = CMat::Zero(nt * nrf, nrf);
    for (Eigen::Index n = 0; n < nrf; ++n)
        for (Eigen::Index i = 0; i < nt; ++i) T(n * nt + i, n) = std::polar(1.0, -kTwoPi * f_m * delays(n, i));
    return T;
}

/// Full N x (N_T N_RF) phase-shifter matrix from the compact pattern.
inline CMat expand_ps(const CMat& ps, int N_T) {
    const int N = static_cast<int>(ps.rows()), nrf = static_cast<int>(ps.cols());
    const int delta = ttd_block_size(N, N_T);
    CMat F = CMat::Zero(N, N_T * nrf);
    for (int n = 0; n < nrf; ++n)
        for (int i = 0; i < N; ++i) F(i, n * N_T + i / delta) = ps(i, n);
    return F;
}

/// Frequency-dependent analog beamformer ps .* E_m.
inline CMat ttd_analog(const CMat& ps, const RMat& delays, double f_m) {
    const int N = static_cast<int>(ps.rows()), nrf = static_cast<int>(ps.cols());
    const int delta = ttd_block_size(N, static_cast<int>(delays.cols()));
    CMat A(N, nrf);
    for (int n = 0; n < nrf; ++n)
        for (int i = 0; i < N; ++i) A(i, n) = ps(i, n) * std::polar(1.0, -kTwoPi * f_m * delays(n, i / delta));
    return A;
}

/// Fixed data of the delay subproblem: minimize
/// sum_m || Z_m - (ps .* E_m(t)) F_BB[m] ||_F^2 with Z_m = F_m + rho Psi_m.
struct TtdObjectiveData {
    CMat ps;
    std::vector<double> freqs;
    std::vector<CMat> Z;
    std::vector<CMat> F_BB;
    int N_T = 1;
};

struct ValueGrad {
    double value = 0.0;
    RMat gradient; // same shape as the delays
};

inline ValueGrad ttd_objective(const RMat& delays, const TtdObjectiveData& d) {
    const int N = static_cast<int>(d.ps.rows()), nrf = static_cast<int>(d.ps.cols());
    const int delta = ttd_block_size(N, d.N_T);
    ValueGrad out;
    out.gradient = RMat::Zero(nrf, d.N_T);
    for (std::size_t m = 0; m < d.freqs.size(); ++m) {
        const CMat A = ttd_analog(d.ps, delays, d.freqs[m]);
        const CMat R = d.Z[m] - A * d.F_BB[m];
        out.value += R.squaredNorm();
        const CMat Wm = R * d.F_BB[m].adjoint();
        const cplx dphase(0.0, -kTwoPi * d.freqs[m]);
        for (int n = 0; n < nrf; ++n)
            for (int i = 0; i < N; ++i)
                out.gradient(n, i / delta) += -2.0 * std::real(std::conj(Wm(i, n)) * dphase * A(i, n));
    }
    return out;
}

/// Quasi-Newton delay update on the unconstrained delays. The search runs
/// in units of carrier cycles; the returned delays never raise the objective.
inline RMat update_delays(const RMat& delays, const TtdObjectiveData& d, double f_ref, double tol = 1e-9,
                          int max_iter = 200) {
    const Eigen::Index nrf = delays.rows(), nt = delays.cols();
    auto to_delays = [&](const RVec& x) {
        RMat t(nrf, nt);
        for (Eigen::Index n = 0; n < nrf; ++n)
            for (Eigen::Index i = 0; i < nt; ++i) t(n, i) = x(n * nt + i) / f_ref;
        return t;
    };
    RVec x0(nrf * nt);
    for (Eigen::Index n = 0; n < nrf; ++n)
        for (Eigen::Index i = 0; i < nt; ++i) x0(n * nt + i) = delays(n, i) * f_ref;
    SmoothProblem p;
    p.dim = static_cast<int>(x0.size());
    p.objective = [&](const RVec& x) { return ttd_objective(to_delays(x), d).value; };
    p.gradient = [&](const RVec& x) {
        RMat g = ttd_objective(to_delays(x), d).gradient / f_ref;
        RVec v(nrf * nt);
        for (Eigen::Index n = 0; n < nrf; ++n)
            for (Eigen::Index i = 0; i < nt; ++i) v(n * nt + i) = g(n, i);
        return v;
    };
    const double f0 = p.objective(x0);
    auto res = quasi_newton(p, x0, tol * std::max(1.0, f0), max_iter);
    if (!(res.f <= f0)) return delays;
    return to_delays(res.x);
}

/// Delays wrapped into [0, 1/f_low) for reporting.
inline RMat wrap_delays(const RMat& delays, double f_low) {
    const double period = 1.0 / f_low;
    RMat w = delays;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        double v = std::fmod(w.data()[i], period);
        if (v < 0.0) v += period;
        w.data()[i] = v;
    }
    return w;
}

/// PS pattern and delays steering RF chain n towards BS angle phi[n].
inline TtdBeamformer init_ttd_from_angles(const std::vector<double>& phi, int N, int N_T, double f_c) {
    const int delta = ttd_block_size(N, N_T);
    const int nrf = static_cast<int>(phi.size());
    TtdBeamformer bf;
    bf.ps.resize(N, nrf);
    bf.delays.resize(nrf, N_T);
    for (int n = 0; n < nrf; ++n) {
        const double s = std::sin(phi[static_cast<std::size_t>(n)]);
        const CVec b = ula_response(f_c, phi[static_cast<std::size_t>(n)], N, half_wavelength(f_c));
        for (int blk = 0; blk < N_T; ++blk) {
            const cplx lead = std::polar(1.0, kPi * blk * delta * s);
            for (int l = 0; l < delta; ++l) bf.ps(blk * delta + l, n) = lead * b(blk * delta + l);
        }
        const double offset = s < 0.0 ? (N_T - 1) * std::abs(delta * s / (2.0 * f_c)) : 0.0;
        for (int blk = 0; blk < N_T; ++blk) bf.delays(n, blk) = blk * delta * s / (2.0 * f_c) + offset;
    }
    return bf;
}

/// Normalized array gain |b^H(f, angle) w| / (sqrt(N) ||w||).
inline double array_gain(const CVec& w, double f, double angle, double f_c) {
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    const CVec b = ula_response(f, angle, static_cast<int>(w.size()), half_wavelength(f_c));
    return std::abs(b.dot(w)) / (std::sqrt(static_cast<double>(w.size())) * nw);
}

} // namespace starsthz
