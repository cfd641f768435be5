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
#include "starsthz/numopt.hpp"
#include "starsthz/stars.hpp"
#include "starsthz/ttd.hpp"
#include "starsthz/types.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace starsthz {

// ---------------------------------------------------------------------------
// Block kernels (free functions, shared by all optimizers)
// ---------------------------------------------------------------------------

/// Quadratic model of the passive-beamforming penalty of one side:
/// g(theta) = theta^H Phi theta - 2 Re{theta^H upsilon} + constant.
struct StarsQuadratic {
    CMat Phi;
    CVec upsilon;
    double constant = 0.0;

    double value(const CVec& theta) const {
        return std::real(theta.dot(Phi * theta)) - 2.0 * std::real(theta.dot(upsilon)) + constant;
    }
};

/// Accumulates sum_k || u_k - V_k^T theta ||^2 with V_k = H_k F and
/// u_k = (p_k + rho lambda_k)^T.
inline void accumulate_stars_quadratic(StarsQuadratic& q, const CMat& H, const CMat& F, const CVec& u) {
    const CMat V = H * F; // M x K
    if (q.Phi.size() == 0) {
        q.Phi = CMat::Zero(V.rows(), V.rows());
        q.upsilon = CVec::Zero(V.rows());
    }
    q.Phi.noalias() += V.conjugate() * V.transpose();
    q.upsilon.noalias() += V.conjugate() * u;
    q.constant += u.squaredNorm();
}

struct ElementCoeffs {
    double c = 0.0;
    cplx d;
};

/// Scalar model c |x|^2 - 2 Re{conj(d) x} of entry m (others fixed);
/// Phi_theta = Phi * theta is passed in to keep sweeps linear in M.
inline ElementCoeffs elementwise_coeffs(const StarsQuadratic& q, const CVec& theta, const CVec& Phi_theta, int m) {
    ElementCoeffs e;
    e.c = std::real(q.Phi(m, m));
    e.d = q.Phi(m, m) * theta(m) - Phi_theta(m) + q.upsilon(m);
    return e;
}

inline double element_objective(const ElementCoeffs& e, cplx x) {
    return e.c * std::norm(x) - 2.0 * std::real(std::conj(e.d) * x);
}

/// Joint energy-splitting update of one element: phases follow d, the
/// split angle v (beta_t = sin v, beta_r = cos v) minimizes
/// c_t sin^2 + c_r cos^2 - 2|d_t| sin - 2|d_r| cos on [0, pi/2].
inline std::pair<cplx, cplx> solve_stars_element(const ElementCoeffs& et, const ElementCoeffs& er, cplx cur_t,
                                                 cplx cur_r, double tol = 1e-6) {
    const double at = std::abs(et.d), ar = std::abs(er.d);
    ScalarProblem sp;
    sp.lo = 0.0;
    sp.hi = kPi / 2.0;
    sp.objective = [&](double v) {
        const double s = std::sin(v), c = std::cos(v);
        return et.c * s * s + er.c * c * c - 2.0 * at * s - 2.0 * ar * c;
    };
    const ScalarResult best = bracketed_minimize(sp, 33, tol);
    const cplx ut = at > 0.0 ? et.d / at : (std::abs(cur_t) > 0.0 ? cur_t / std::abs(cur_t) : cplx(1.0, 0.0));
    const cplx ur = ar > 0.0 ? er.d / ar : (std::abs(cur_r) > 0.0 ? cur_r / std::abs(cur_r) : cplx(1.0, 0.0));
    return {std::sin(best.argmin) * ut, std::cos(best.argmin) * ur};
}

/// Element-wise analog update over several bands:
/// minimize sum_m || Z_m - (X .* E_m) FB_m ||_F^2 over unit-modulus X, where
/// E_m holds optional per-band phase factors (empty = all ones). Returns the
/// number of sweeps.
inline int update_analog_elementwise(CMat& X, const std::vector<CMat>& E, const std::vector<CMat>& Z,
                                     const std::vector<CMat>& FB, double frac_tol, int max_sweeps) {
    const int N = static_cast<int>(X.rows()), nrf = static_cast<int>(X.cols());
    const std::size_t B = Z.size();
    std::vector<CMat> A(B), Bm(B);
    for (std::size_t m = 0; m < B; ++m) {
        A[m] = FB[m] * FB[m].adjoint();
        Bm[m] = Z[m] * FB[m].adjoint();
    }
    auto phase = [&](std::size_t m, int i, int n) { return E.empty() ? cplx(1.0, 0.0) : E[m](i, n); };
    auto objective = [&]() {
        double v = 0.0;
        for (std::size_t m = 0; m < B; ++m) {
            CMat U = E.empty() ? X : CMat(X.cwiseProduct(E[m]));
            v += (Z[m] - U * FB[m]).squaredNorm();
        }
        return v;
    };
    double prev = objective();
    int sweeps = 0;
    std::vector<Eigen::RowVectorXcd> u(B);
    for (; sweeps < max_sweeps;) {
        for (int i = 0; i < N; ++i) {
            for (std::size_t m = 0; m < B; ++m) {
                u[m].resize(nrf);
                for (int n = 0; n < nrf; ++n) u[m](n) = X(i, n) * phase(m, i, n);
            }
            for (int n = 0; n < nrf; ++n) {
                cplx q = 0.0;
                for (std::size_t m = 0; m < B; ++m) {
                    const cplx uA = u[m] * A[m].col(n);
                    q += std::conj(phase(m, i, n)) * (Bm[m](i, n) - uA + u[m](n) * A[m](n, n));
                }
                if (std::abs(q) == 0.0) continue;
                X(i, n) = q / std::abs(q);
                for (std::size_t m = 0; m < B; ++m) u[m](n) = X(i, n) * phase(m, i, n);
            }
        }
        ++sweeps;
        const double cur = objective();
        if (prev - cur <= frac_tol * std::max(prev, 1e-300)) break;
        prev = cur;
    }
    return sweeps;
}

/// Least-squares digital precoder (A^H A)^{-1} A^H Z, ridge 1e-12 when the
/// Gram matrix is ill-conditioned.
inline CMat update_digital_ls(const CMat& A, const CMat& Z) {
    CMat gram = A.adjoint() * A;
    Eigen::SelfAdjointEigenSolver<CMat> es(gram, Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().maxCoeff(), lmin = es.eigenvalues().minCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e12) gram += 1e-12 * CMat::Identity(gram.rows(), gram.cols());
    return gram.ldlt().solve(A.adjoint() * Z);
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

struct OptimizerReport {
    std::vector<double> eta_trace, h_trace, rho_trace; // per outer iteration
    std::vector<double> al_trace;                      // after every block update
    int al_violations = 0;                             // decreases beyond 1e-8 (1 + |v|)
    double al_worst_drop = 0.0;
    int outer_iterations = 0;
    int inner_iterations = 0;
    int solver_fallbacks = 0;
    double wall_time_s = 0.0;
    bool converged = false;
};

/// Variables of the double loop, in normalized units (unit power budget per
/// band, channels scaled by `PddProblem::channel_scale`).
struct PddState {
    std::vector<CMat> F, P;
    std::vector<RVec> r;
    double eta = 0.0, a = 0.0, b = 1.0;
    CMat analog;               // F_RF (hybrid) or compact PS pattern (TTD)
    RMat delays;               // TTD only
    std::vector<CMat> F_BB;    // per band
    StarsCoefficients theta;
    StarsCoefficients vartheta; // coupled auxiliary copy
    CVec mu_t, mu_r;
    std::vector<CMat> Psi, Lambda;
    double rho = 1.0;
    double eps = 1.0;
};

struct RunResult {
    std::vector<CMat> F;        // transmit beamformers per band, sqrt(W)
    StarsCoefficients theta;    // hard-feasible coefficients
    PddState state;
    Metrics metrics;
    OptimizerReport report;
    double eta_state = 0.0;      // auxiliary eta at termination
    double eta_recomputed = 0.0; // SE / (w (P + xi SE) + P_c) of the returned point
    double max_violation = 0.0;  // final h
};

class PddProblem {
public:
    PddProblem(const WideChannel& ch, const ScenarioConfig& cfg, Architecture arch, SurfaceKind surface, double pt_dbm,
               double w)
        : ch_(ch), cfg_(cfg), arch_(arch), surface_(surface), w_(w) {
        validate(cfg);
        if (surface == SurfaceKind::Ris) require_even_ris(cfg.M());
        if (w < 0.0) throw std::invalid_argument("objective weight must be non-negative");
        B_ = ch.subcarriers();
        if (B_ < 1) throw std::invalid_argument("channel has no subcarriers");
        N_ = cfg.N;
        K_ = cfg.K;
        M_ = cfg.M();
        K_t_ = cfg.K_t;
        Pt_ = dbm_to_watt(pt_dbm);
        Pc_ = static_power(cfg, arch, surface);
        mu_ = B_ == 1 && cfg.band == Band::Narrow ? 1.0 : cfg.rate_prefactor();
        if (arch == Architecture::TrueTimeDelay) ttd_block_size(N_, cfg.N_T);
        for (const auto& sub : ch.sub)
            if (sub.N() != N_ || sub.M() != M_ || sub.K() != K_)
                throw std::invalid_argument("channel dimensions disagree with the configuration");
        double hmax = 0.0;
        for (const auto& sub : ch.sub)
            for (const auto& H : sub.H) hmax = std::max(hmax, H.norm());
        // Interference-free rate proxy at transmit power p and its ratio.
        auto se_proxy = [&](double p) {
            double se = 0.0;
            for (const auto& sub : ch.sub)
                for (const auto& H : sub.H) se += std::log2(1.0 + H.squaredNorm() * p / (K_ * cfg.noise_power()));
            return mu_ * se;
        };
        auto eta_proxy = [&](double p) {
            const double se = se_proxy(p);
            return se / (w_ * (p + cfg.power.xi * se) + Pc_);
        };
        // Reference power: the proxy's best power within the budget. With a
        // slack budget the normalized problem no longer depends on P_t.
        Pref_ = Pt_;
        if (w_ > 0.0 && hmax > 0.0) {
            const double hi = std::log10(Pt_);
            const double lp = golden_section({[&](double x) { return -eta_proxy(std::pow(10.0, x)); }, hi - 6.0, hi}, 1e-6).argmin;
            Pref_ = std::min(Pt_, std::pow(10.0, lp));
        }
        scale_ = hmax > 0.0 ? 1.0 / (std::sqrt(static_cast<double>(M_)) * hmax) : 1.0;
        // blend of unit strongest gain and unit noise
        if (hmax > 0.0)
            scale_ = std::pow(scale_, 1.0 - cfg.pdd.noise_weight) *
                     std::pow(std::sqrt(Pref_ / cfg.noise_power()), cfg.pdd.noise_weight);
        Hn_.resize(B_);
        for (int m = 0; m < B_; ++m)
            for (const auto& H : ch.sub[m].H) Hn_[m].push_back(H * scale_);
        sigma2_ = cfg.noise_power() * scale_ * scale_ / Pt_;
        // Residuals scale with 1/sqrt(P_t); penalty and thresholds follow so
        // the iterates match those of a P_ref budget while it stays slack.
        res_unit_ = std::sqrt(Pref_ / Pt_);
        eta_ref_ = std::max(eta_proxy(Pref_), 1e-12);
    }

    // ----- accessors -----
    int bands() const { return B_; }
    double channel_scale() const { return scale_; }
    double sigma2() const { return sigma2_; }
    double static_power_w() const { return Pc_; }
    double transmit_power_w() const { return Pt_; }
    /// Power the normalization is anchored to; below P_t only when w > 0.
    double reference_power_w() const { return Pref_; }
    double rate_prefactor() const { return mu_; }
    double objective_scale() const { return eta_ref_; }
    double weight() const { return w_; }
    Architecture architecture() const { return arch_; }
    SurfaceKind surface() const { return surface_; }
    bool consensus() const { return arch_ != Architecture::FullDigital; }
    bool coupled() const { return surface_ == SurfaceKind::StarsCoupled; }
    const ScenarioConfig& config() const { return cfg_; }
    const std::vector<CMat>& normalized_channels(int m) const { return Hn_[m]; }

    /// Analog beamformer seen at band m.
    CMat analog_at(const PddState& s, int m) const {
        if (arch_ == Architecture::TrueTimeDelay) return ttd_analog(s.analog, s.delays, ch_.freqs[m]);
        return s.analog;
    }

    /// Effective channels at band m, row k = theta_chi^T H_k.
    CMat effective(const StarsCoefficients& th, int m) const {
        CMat G(K_, N_);
        for (int k = 0; k < K_; ++k) G.row(k) = th.side(serves_transmit_side(k, K_t_)).transpose() * Hn_[m][k];
        return G;
    }

    // ----- objective pieces -----
    double al_objective(const PddState& s) const {
        double pen = 0.0;
        for (int m = 0; m < B_; ++m) {
            if (consensus()) pen += (s.F[m] - analog_at(s, m) * s.F_BB[m] + s.rho * s.Psi[m]).squaredNorm();
            pen += (s.P[m] - effective(s.theta, m) * s.F[m] + s.rho * s.Lambda[m]).squaredNorm();
        }
        if (coupled())
            pen += (s.vartheta.theta_t - s.theta.theta_t + s.rho * s.mu_t).squaredNorm() +
                   (s.vartheta.theta_r - s.theta.theta_r + s.rho * s.mu_r).squaredNorm();
        return s.eta - pen / (2.0 * s.rho);
    }

    double violation(const PddState& s) const {
        double h = 0.0;
        for (int m = 0; m < B_; ++m) {
            if (consensus()) h = std::max(h, max_abs(s.F[m] - analog_at(s, m) * s.F_BB[m]));
            h = std::max(h, max_abs(s.P[m] - effective(s.theta, m) * s.F[m]));
        }
        if (coupled()) {
            h = std::max(h, max_abs(s.vartheta.theta_t - s.theta.theta_t));
            h = std::max(h, max_abs(s.vartheta.theta_r - s.theta.theta_r));
        }
        return h;
    }

    /// Exact rates (bits) of the received rows of band m.
    RVec rates(const CMat& P) const { return rates_from_rows(P, sigma2_); }

    // ----- initialization -----
    template <typename Rng>
    PddState init_state(Rng& rng) const {
        PddState s;
        std::normal_distribution<double> nd(0.0, 1.0);
        auto randn = [&](int r, int c) {
            CMat X(r, c);
            for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = cplx(nd(rng), nd(rng));
            return X;
        };
        if (surface_ == SurfaceKind::Ris)
            s.theta = random_ris(M_, rng);
        else
            s.theta = random_stars(M_, coupled() ? StarsMode::Coupled : StarsMode::Independent, rng);
        if (coupled()) {
            s.vartheta = s.theta;
            s.mu_t = CVec::Zero(M_);
            s.mu_r = CVec::Zero(M_);
        }
        const int nrf = cfg_.N_RF;
        std::vector<double> dirs;
        for (int n = 0; n < nrf; ++n)
            dirs.push_back(ch_.bs_directions.empty() ? 0.0
                                                     : ch_.bs_directions[static_cast<std::size_t>(n) % ch_.bs_directions.size()]);
        if (arch_ == Architecture::Hybrid) {
            s.analog.resize(N_, nrf);
            for (int n = 0; n < nrf; ++n)
                s.analog.col(n) = ula_response(cfg_.f_c, dirs[static_cast<std::size_t>(n)], N_, half_wavelength(cfg_.f_c));
        } else if (arch_ == Architecture::TrueTimeDelay) {
            auto bf = init_ttd_from_angles(dirs, N_, cfg_.N_T, cfg_.f_c);
            s.analog = bf.ps;
            s.delays = bf.delays;
        }
        for (int m = 0; m < B_; ++m) {
            CMat F;
            if (consensus()) {
                CMat FB = randn(nrf, K_);
                const CMat A = analog_at(s, m);
                FB /= (A * FB).norm();
                s.F_BB.push_back(FB);
                F = A * FB;
            } else {
                // same steered start as the hybrid design, without keeping the factors
                CMat A(N_, nrf);
                for (int n = 0; n < nrf; ++n)
                    A.col(n) = ula_response(cfg_.f_c, dirs[static_cast<std::size_t>(n)], N_, half_wavelength(cfg_.f_c));
                F = A * randn(nrf, K_);
                F /= F.norm();
            }
            s.F.push_back(F);
            s.P.push_back(effective(s.theta, m) * F);
            s.r.push_back(rates(s.P.back()));
            s.Psi.push_back(CMat::Zero(N_, K_));
            s.Lambda.push_back(CMat::Zero(K_, K_));
        }
        // start at the reference power
        if (res_unit_ < 1.0)
            for (int m = 0; m < B_; ++m) {
                s.F[m] *= res_unit_;
                if (consensus()) s.F_BB[m] *= res_unit_;
                s.P[m] *= res_unit_;
                s.r[m] = rates(s.P[m]);
            }
        refresh_ratio(s);
        s.rho = cfg_.pdd.rho0 * cfg_.pdd.rho_unit / eta_ref_ * res_unit_ * res_unit_;
        s.eps = cfg_.pdd.eps0 * res_unit_;
        return s;
    }

    /// Sets a, b, eta to their tightest values for the current F and r.
    void refresh_ratio(PddState& s) const {
        double sumr = 0.0, pw = 0.0;
        for (int m = 0; m < B_; ++m) {
            sumr += s.r[m].sum();
            pw += s.F[m].squaredNorm();
        }
        s.a = std::sqrt(std::max(0.0, mu_ * sumr));
        s.b = w_ * (Pt_ * pw / B_ + cfg_.power.xi * mu_ * sumr) + Pc_;
        s.eta = s.a * s.a / s.b;
    }

    // ----- block updates -----
    /// Block {F, p, eta, a, b, r}: convexified subproblem around the current
    /// point. Throws SolverError on solver failure.
    void update_block1(PddState& s) const {
        RateSubproblem sp;
        sp.rho = s.rho;
        sp.w = w_;
        sp.Pc = Pc_;
        sp.power_scale = Pt_;
        sp.xi = cfg_.power.xi;
        sp.mu = mu_;
        sp.consensus = consensus();
        sp.a0 = s.a;
        sp.b0 = s.b;
        sp.eta0 = s.eta;
        sp.gap_tol = cfg_.pdd.solver_gap;
        sp.max_newton = cfg_.pdd.solver_max_newton;
        for (int m = 0; m < B_; ++m) {
            RateBand bd;
            bd.G = effective(s.theta, m);
            if (consensus()) bd.C = analog_at(s, m) * s.F_BB[m] - s.rho * s.Psi[m];
            bd.Lambda = s.Lambda[m];
            bd.sigma2 = sigma2_;
            bd.F0 = s.F[m];
            bd.P0 = s.P[m];
            bd.r0 = s.r[m];
            sp.bands.push_back(std::move(bd));
        }
        RateSolution sol = solve_rate_subproblem(sp);
        s.F = std::move(sol.F);
        s.P = std::move(sol.P);
        s.r = std::move(sol.r);
        s.a = sol.a;
        s.b = sol.b;
        s.eta = sol.eta;
    }

    /// Penalty quadratics of both sides for the current F, p, lambda.
    std::pair<StarsQuadratic, StarsQuadratic> stars_quadratics(const PddState& s) const {
        StarsQuadratic qt, qr;
        qt.Phi = CMat::Zero(M_, M_);
        qt.upsilon = CVec::Zero(M_);
        qr = qt;
        for (int m = 0; m < B_; ++m)
            for (int k = 0; k < K_; ++k) {
                const CVec u = (s.P[m].row(k) + s.rho * s.Lambda[m].row(k)).transpose();
                accumulate_stars_quadratic(serves_transmit_side(k, K_t_) ? qt : qr, Hn_[m][k], s.F[m], u);
            }
        return {qt, qr};
    }

    /// Element-wise passive beamforming (independent STARS or RIS pattern).
    int update_stars(PddState& s) const {
        auto [qt, qr] = stars_quadratics(s);
        CVec& tt = s.theta.theta_t;
        CVec& tr = s.theta.theta_r;
        CVec Pt_theta = qt.Phi * tt, Pr_theta = qr.Phi * tr;
        double prev = qt.value(tt) + qr.value(tr);
        int sweeps = 0;
        const bool ris = surface_ == SurfaceKind::Ris;
        for (; sweeps < cfg_.pdd.element_max_sweeps;) {
            for (int m = 0; m < M_; ++m) {
                const ElementCoeffs et = elementwise_coeffs(qt, tt, Pt_theta, m);
                const ElementCoeffs er = elementwise_coeffs(qr, tr, Pr_theta, m);
                cplx nt = tt(m), nr = tr(m);
                if (ris) {
                    if (ris_transmits(m, M_)) {
                        if (std::abs(et.d) > 0.0) nt = et.d / std::abs(et.d);
                    } else {
                        if (std::abs(er.d) > 0.0) nr = er.d / std::abs(er.d);
                    }
                } else {
                    std::tie(nt, nr) = solve_stars_element(et, er, tt(m), tr(m), cfg_.pdd.golden_tol);
                }
                const double before = element_objective(et, tt(m)) + element_objective(er, tr(m));
                const double after = element_objective(et, nt) + element_objective(er, nr);
                if (!(after < before)) continue;
                Pt_theta += qt.Phi.col(m) * (nt - tt(m));
                Pr_theta += qr.Phi.col(m) * (nr - tr(m));
                tt(m) = nt;
                tr(m) = nr;
            }
            ++sweeps;
            const double cur = qt.value(tt) + qr.value(tr);
            if (prev - cur <= cfg_.pdd.element_tol * std::max(std::abs(prev), 1e-300)) break;
            prev = cur;
        }
        return sweeps;
    }

    /// Coupled mode: unconstrained closed-form theta.
    void update_theta_coupled(PddState& s) const {
        auto [qt, qr] = stars_quadratics(s);
        const CMat I = CMat::Identity(M_, M_);
        s.theta.theta_t = (qt.Phi + I).ldlt().solve(qt.upsilon + s.vartheta.theta_t + s.rho * s.mu_t);
        s.theta.theta_r = (qr.Phi + I).ldlt().solve(qr.upsilon + s.vartheta.theta_r + s.rho * s.mu_r);
    }

    /// Coupled mode: projection of theta - rho mu onto the coupled set.
    void update_vartheta(PddState& s) const {
        s.vartheta = project_coupled(s.theta.theta_t - s.rho * s.mu_t, s.theta.theta_r - s.rho * s.mu_r);
    }

    std::vector<CMat> consensus_targets(const PddState& s) const {
        std::vector<CMat> Z;
        for (int m = 0; m < B_; ++m) Z.push_back(s.F[m] + s.rho * s.Psi[m]);
        return Z;
    }

    void update_analog(PddState& s) const {
        std::vector<CMat> E;
        if (arch_ == Architecture::TrueTimeDelay) {
            const CMat ones = CMat::Ones(N_, cfg_.N_RF);
            for (int m = 0; m < B_; ++m) E.push_back(ttd_analog(ones, s.delays, ch_.freqs[m]));
        }
        update_analog_elementwise(s.analog, E, consensus_targets(s), s.F_BB, cfg_.pdd.element_tol,
                                  cfg_.pdd.element_max_sweeps);
    }

    void update_digital(PddState& s) const {
        const auto Z = consensus_targets(s);
        for (int m = 0; m < B_; ++m) s.F_BB[m] = update_digital_ls(analog_at(s, m), Z[m]);
    }

    void update_delays_block(PddState& s) const {
        TtdObjectiveData d;
        d.ps = s.analog;
        d.freqs = ch_.freqs;
        d.Z = consensus_targets(s);
        d.F_BB = s.F_BB;
        d.N_T = cfg_.N_T;
        s.delays = update_delays(s.delays, d, cfg_.f_c, cfg_.pdd.bfgs_tol, cfg_.pdd.bfgs_max_iter);
    }

    /// Dual ascent when the violation dropped enough, penalty decrease
    /// otherwise; the threshold then tracks 0.9 h.
    void outer_update(PddState& s, double h) const {
        if (h <= s.eps) {
            for (int m = 0; m < B_; ++m) {
                if (consensus()) s.Psi[m] += (s.F[m] - analog_at(s, m) * s.F_BB[m]) / s.rho;
                s.Lambda[m] += (s.P[m] - effective(s.theta, m) * s.F[m]) / s.rho;
            }
            if (coupled()) {
                s.mu_t += (s.vartheta.theta_t - s.theta.theta_t) / s.rho;
                s.mu_r += (s.vartheta.theta_r - s.theta.theta_r) / s.rho;
            }
        } else {
            s.rho = std::max(cfg_.pdd.reduction * s.rho, cfg_.pdd.rho_floor);
        }
        s.eps = 0.9 * h;
    }

    // ----- loops -----
    /// One BCD pass over all blocks; appends the AL value after each block.
    void bcd_sweep(PddState& s, OptimizerReport& rep) const {
        auto record = [&]() {
            const double v = al_objective(s);
            if (!rep.al_trace.empty()) {
                const double prev = rep.al_trace.back();
                const double drop = prev - v;
                if (drop > 1e-8 * (1.0 + std::abs(prev))) {
                    ++rep.al_violations;
                    rep.al_worst_drop = std::max(rep.al_worst_drop, drop);
                }
            }
            rep.al_trace.push_back(v);
        };
        if (rep.al_trace.empty()) rep.al_trace.push_back(al_objective(s));
        try {
            update_block1(s);
        } catch (const SolverError&) {
            ++rep.solver_fallbacks; // keep the anchor
        }
        record();
        if (coupled()) {
            update_theta_coupled(s);
            record();
            update_vartheta(s);
            record();
        } else {
            update_stars(s);
            record();
        }
        if (consensus()) {
            update_analog(s);
            record();
            update_digital(s);
            record();
            if (arch_ == Architecture::TrueTimeDelay) {
                update_delays_block(s);
                record();
            }
        }
    }

    /// Double loop from the given state.
    OptimizerReport optimize(PddState& s) const {
        OptimizerReport rep;
        const auto t0 = std::chrono::steady_clock::now();
        for (int outer = 0; outer < cfg_.pdd.max_outer; ++outer) {
            rep.al_trace.push_back(al_objective(s));
            double prev = rep.al_trace.back();
            for (int inner = 0; inner < cfg_.pdd.max_inner; ++inner) {
                bcd_sweep(s, rep);
                ++rep.inner_iterations;
                const double cur = rep.al_trace.back();
                const bool settled = std::abs(cur - prev) <= cfg_.pdd.inner_tol * (std::abs(cur) + 1e-6);
                prev = cur;
                if (settled) break;
            }
            const double h = violation(s);
            rep.h_trace.push_back(h);
            rep.eta_trace.push_back(s.eta);
            rep.rho_trace.push_back(s.rho);
            rep.outer_iterations = outer + 1;
            if (h <= cfg_.pdd.violation_tol * res_unit_) {
                rep.converged = true;
                break;
            }
            outer_update(s, h);
        }
        rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rep;
    }

    /// Warm start of the coupled variant from an independent-mode state.
    PddState coupled_warm_start(const PddState& indep) const {
        if (!coupled()) throw std::logic_error("coupled_warm_start on a non-coupled problem");
        PddState s = indep;
        s.theta.mode = StarsMode::Coupled;
        s.vartheta = project_coupled(s.theta.theta_t, s.theta.theta_r);
        s.mu_t = CVec::Zero(M_);
        s.mu_r = CVec::Zero(M_);
        s.eps = cfg_.pdd.eps0 * res_unit_;
        // P_c may differ from the source problem; keep b tight
        double sumr = 0.0, pw = 0.0;
        for (int m = 0; m < B_; ++m) {
            sumr += s.r[m].sum();
            pw += s.F[m].squaredNorm();
        }
        s.b = w_ * (Pt_ * pw / B_ + cfg_.power.xi * mu_ * sumr) + Pc_;
        s.eta = std::min(s.eta, s.a * s.a / s.b);
        return s;
    }

    // ----- results -----
    /// Hard-feasible transmit beamformers (normalized units).
    std::vector<CMat> feasible_beamformers(const PddState& s) const {
        std::vector<CMat> out;
        for (int m = 0; m < B_; ++m) {
            CMat F = consensus() ? CMat(analog_at(s, m) * s.F_BB[m]) : s.F[m];
            const double n2 = F.squaredNorm();
            if (n2 > 1.0) F /= std::sqrt(n2);
            out.push_back(F);
        }
        return out;
    }

    StarsCoefficients feasible_stars(const PddState& s) const { return coupled() ? s.vartheta : s.theta; }

    RunResult finalize(const PddState& s, OptimizerReport rep) const {
        RunResult res;
        res.state = s;
        res.report = std::move(rep);
        res.theta = feasible_stars(s);
        for (const auto& F : feasible_beamformers(s)) res.F.push_back(F * std::sqrt(Pt_));
        res.metrics = evaluate_metrics(ch_, res.theta, res.F, cfg_, Pc_, mu_);
        res.eta_state = s.eta;
        const double denom = w_ * (res.metrics.power.transmit + cfg_.power.xi * res.metrics.se) + Pc_;
        res.eta_recomputed = res.metrics.se / denom;
        res.max_violation = violation(s);
        return res;
    }

    /// Full run: random initialization, then the double loop. A coupled
    /// problem first solves the independent variant and warm-starts from it.
    RunResult run(std::uint64_t init_seed) const {
        std::mt19937_64 rng(init_seed);
        if (coupled()) {
            PddProblem indep(ch_, cfg_, arch_, SurfaceKind::StarsIndependent, watt_to_dbm(Pt_), w_);
            PddState s0 = indep.init_state(rng);
            OptimizerReport r0 = indep.optimize(s0);
            PddState s = coupled_warm_start(s0);
            OptimizerReport rep = optimize(s);
            rep.wall_time_s += r0.wall_time_s;
            return finalize(s, std::move(rep));
        }
        PddState s = init_state(rng);
        OptimizerReport rep = optimize(s);
        return finalize(s, std::move(rep));
    }

    static double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

private:
    const WideChannel& ch_;
    const ScenarioConfig& cfg_;
    Architecture arch_;
    SurfaceKind surface_;
    double w_;
    int B_ = 1, N_ = 0, K_ = 0, M_ = 0, K_t_ = 0;
    double Pt_ = 1.0, Pref_ = 1.0, Pc_ = 0.0, mu_ = 1.0, scale_ = 1.0, sigma2_ = 1.0, eta_ref_ = 1.0;
    double res_unit_ = 1.0;
    std::vector<std::vector<CMat>> Hn_;
};

} // namespace starsthz
