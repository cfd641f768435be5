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
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace starsthz {

// ---------------------------------------------------------------------------
// Scalar search
// ---------------------------------------------------------------------------

struct ScalarProblem {
    std::function<double(double)> objective;
    double lo = 0.0;
    double hi = 1.0;
};

struct ScalarResult {
    double argmin = 0.0;
    double min = 0.0;
};

/// Golden-section search on [lo, hi]. For a multimodal objective the result
/// is the local minimum the bracket converges to.
inline ScalarResult golden_section(const ScalarProblem& p, double tol = 1e-6) {
    if (!(p.lo < p.hi)) throw std::invalid_argument("golden_section: requires lo < hi");
    if (!(tol > 0.0)) throw std::invalid_argument("golden_section: tolerance must be positive");
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = p.lo, b = p.hi;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = p.objective(x1), f2 = p.objective(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = p.objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = p.objective(x2);
        }
    }
    ScalarResult best{0.5 * (a + b), p.objective(0.5 * (a + b))};
    // endpoints are never probed by the interior bracket
    for (double x : {p.lo, p.hi}) {
        double fx = p.objective(x);
        if (fx < best.min) best = {x, fx};
    }
    return best;
}

/// Coarse uniform scan to pick the basin, then golden-section refinement
/// inside the two neighbouring cells.
inline ScalarResult bracketed_minimize(const ScalarProblem& p, int n_grid = 33, double tol = 1e-6) {
    if (!(p.lo < p.hi)) throw std::invalid_argument("bracketed_minimize: requires lo < hi");
    n_grid = std::max(n_grid, 3);
    const double h = (p.hi - p.lo) / (n_grid - 1);
    int best = 0;
    double fbest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_grid; ++i) {
        double f = p.objective(p.lo + i * h);
        if (f < fbest) {
            fbest = f;
            best = i;
        }
    }
    ScalarProblem sub{p.objective, p.lo + std::max(best - 1, 0) * h, p.lo + std::min(best + 1, n_grid - 1) * h};
    ScalarResult r = golden_section(sub, tol);
    if (fbest < r.min) r = {p.lo + best * h, fbest};
    return r;
}

// ---------------------------------------------------------------------------
// Quasi-Newton (BFGS)
// ---------------------------------------------------------------------------

struct SmoothProblem {
    std::function<double(const RVec&)> objective;
    std::function<RVec(const RVec&)> gradient;
    int dim = 0;
};

struct QuasiNewtonResult {
    RVec x;
    double f = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// BFGS on the inverse Hessian with Armijo backtracking. Accepted iterates
/// never increase the objective.
inline QuasiNewtonResult quasi_newton(const SmoothProblem& p, const RVec& x0, double tol = 1e-9,
                                      int max_iter = 200) {
    if (x0.size() != p.dim) throw std::invalid_argument("quasi_newton: x0 has wrong dimension");
    QuasiNewtonResult res;
    res.x = x0;
    res.f = p.objective(x0);
    RVec g = p.gradient(x0);
    if (!std::isfinite(res.f) || !g.allFinite())
        throw std::invalid_argument("quasi_newton: non-finite objective or gradient at x0");
    const int n = p.dim;
    RMat Hinv = RMat::Identity(n, n);
    bool scaled = false;
    for (int it = 0; it < max_iter; ++it) {
        if (g.size() == 0 || g.cwiseAbs().maxCoeff() <= tol) {
            res.converged = true;
            res.iterations = it;
            return res;
        }
        RVec d = -Hinv * g;
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            Hinv.setIdentity();
            d = -g;
            slope = -g.squaredNorm();
        }
        double alpha = 1.0, f_new = 0.0;
        RVec x_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = res.x + alpha * d;
            f_new = p.objective(x_new);
            if (std::isfinite(f_new) && f_new <= res.f + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            res.iterations = it;
            return res; // no further decrease representable
        }
        RVec g_new = p.gradient(x_new);
        RVec s = x_new - res.x, y = g_new - g;
        res.x = x_new;
        res.f = f_new;
        g = g_new;
        double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                Hinv *= sy / y.squaredNorm();
                scaled = true;
            }
            double rho = 1.0 / sy;
            RVec Hy = Hinv * y;
            Hinv += ((sy + y.dot(Hy)) * rho * rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
        }
        res.iterations = it + 1;
    }
    res.converged = g.size() == 0 || g.cwiseAbs().maxCoeff() <= tol;
    return res;
}

// ---------------------------------------------------------------------------
// SCA minorants
// ---------------------------------------------------------------------------

/// Linear minorant of a^2/b around (a0, b0); tight at the anchor.
inline double sca_ratio_bound(double a, double b, double a0, double b0) {
    const double k = a0 / b0;
    return 2.0 * k * a - k * k * b;
}

/// Interference plus noise seen by user k in its received row p.
template <typename Row>
double interference(const Row& p, int k, double sigma2) {
    double s = sigma2;
    for (int i = 0; i < p.size(); ++i)
        if (i != k) s += std::norm(p(i));
    return s;
}

template <typename Row>
double sinr(const Row& p, int k, double sigma2) {
    return std::norm(p(k)) / interference(p, k, sigma2);
}

/// Concave minorant of the SINR of row p around the anchor row p0.
template <typename Row0, typename Row>
double sca_sinr_bound(const Row& p, int k, const Row0& p0, double sigma2) {
    const double I0 = interference(p0, k, sigma2);
    return 2.0 * std::real(std::conj(p0(k)) * p(k)) / I0 - std::norm(p0(k)) / (I0 * I0) * interference(p, k, sigma2);
}

// ---------------------------------------------------------------------------
// Rate subproblem
// ---------------------------------------------------------------------------

/// Data of one band (subcarrier) of the convexified rate subproblem, in the
/// normalized units used by the optimizers (unit power budget).
struct RateBand {
    CMat G;        // K x N, row k = g_k^T (effective channel of user k)
    CMat C;        // N x K consensus target (X - rho Psi); ignored without consensus
    CMat Lambda;   // K x K duals, row k = lambda_k
    double sigma2 = 1.0;
    CMat F0;       // anchor
    CMat P0;       // anchor, row k = p_k
    RVec r0;       // anchor
};

struct RateSubproblem {
    std::vector<RateBand> bands;
    double rho = 1.0;
    double w = 0.0;
    double Pc = 1.0;          // static power, watts
    double power_scale = 1.0; // watts per unit ||F||^2
    double xi = 0.0;
    double mu = 1.0;          // rate prefactor
    bool consensus = true;    // include the F = X term
    double a0 = 0.0, b0 = 1.0, eta0 = 0.0;
    double gap_tol = 1e-7;
    int max_newton = 200;
};

struct RateSolution {
    std::vector<CMat> F, P;
    std::vector<RVec> r;
    double eta = 0.0, a = 0.0, b = 0.0;
    int newton_steps = 0;
    bool kept_anchor = false;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, RateSolution iterate)
        : std::runtime_error(what), iterate_(std::move(iterate)) {}
    const RateSolution& iterate() const { return iterate_; }

private:
    RateSolution iterate_;
};

/// Augmented-Lagrangian value of a block-1 point.
inline double rate_block_objective(const RateSubproblem& sp, const std::vector<CMat>& F,
                                   const std::vector<CMat>& P, double eta) {
    double pen = 0.0;
    for (std::size_t m = 0; m < sp.bands.size(); ++m) {
        const auto& bd = sp.bands[m];
        if (sp.consensus) pen += (F[m] - bd.C).squaredNorm();
        pen += (P[m] - bd.G * F[m] + sp.rho * bd.Lambda).squaredNorm();
    }
    return eta - pen / (2.0 * sp.rho);
}

/// Smallest slack of all constraints of the convexified problem (negative
/// means violated).
inline double rate_block_slack(const RateSubproblem& sp, const RateSolution& s) {
    double slack = std::numeric_limits<double>::infinity();
    double sumr = 0.0, pw = 0.0;
    const double B = static_cast<double>(sp.bands.size());
    for (std::size_t m = 0; m < sp.bands.size(); ++m) {
        const auto& bd = sp.bands[m];
        slack = std::min(slack, 1.0 - s.F[m].squaredNorm());
        pw += s.F[m].squaredNorm();
        for (int k = 0; k < bd.P0.rows(); ++k) {
            double g = sca_sinr_bound(s.P[m].row(k), k, bd.P0.row(k), bd.sigma2);
            double cap = 1.0 + g > 0.0 ? std::log2(1.0 + g) : -std::numeric_limits<double>::infinity();
            slack = std::min(slack, cap - s.r[m](k));
            sumr += s.r[m](k);
        }
    }
    slack = std::min(slack, sca_ratio_bound(s.a, s.b, sp.a0, sp.b0) - s.eta);
    slack = std::min(slack, sp.mu * sumr - s.a * s.a);
    slack = std::min(slack, s.b - (sp.w * (sp.power_scale * pw / B + sp.xi * sp.mu * sumr) + sp.Pc));
    return slack;
}

namespace detail {

/// Real representation [Re; Im] of a complex linear map.
inline RMat realify(const CMat& A) {
    const Eigen::Index m = A.rows(), n = A.cols();
    RMat R(2 * m, 2 * n);
    R.topLeftCorner(m, n) = A.real();
    R.topRightCorner(m, n) = -A.imag();
    R.bottomLeftCorner(m, n) = A.imag();
    R.bottomRightCorner(m, n) = A.real();
    return R;
}

inline RVec realify(const CVec& v) {
    RVec r(2 * v.size());
    r.head(v.size()) = v.real();
    r.tail(v.size()) = v.imag();
    return r;
}

/// Orthonormal basis of the column span of A (rank-revealing QR).
inline CMat orth_basis(const CMat& A) {
    if (A.cols() == 0 || A.norm() == 0.0) return CMat(A.rows(), 0);
    Eigen::ColPivHouseholderQR<CMat> qr(A);
    qr.setThreshold(1e-12);
    const Eigen::Index rank = qr.rank();
    CMat Q = qr.householderQ() * CMat::Identity(A.rows(), rank);
    return Q;
}

/// Per-band layout of the real variable vector: [Re x; Im x; r] with
/// x = [vec(Y); vec(P)].
struct BandLayout {
    int K = 0, rank = 0;
    int nY = 0, nP = 0, nx = 0, dim = 0, offset = 0;
    int reY(int j) const { return j; }
    int imY(int j) const { return nx + j; }
    int reP(int k, int i) const { return nY + k + i * K; }
    int imP(int k, int i) const { return nx + nY + k + i * K; }
    int rr(int k) const { return 2 * nx + k; }
};

struct BandData {
    BandLayout L;
    CMat Q;          // N x rank
    RMat Hq;         // penalty Hessian (dim x dim, zero on r)
    RVec gq_const;   // penalty gradient = Hq z - gq_const
    double q_const = 0.0;
    RVec alpha_re, alpha_im; // anchor SINR linearisation
    RVec beta, I0;
};

} // namespace detail

/// Solves the convexified block-1 problem by a log-barrier Newton method.
/// The beamformer of each band is restricted to the span of the users'
/// conjugate channels and the consensus target, which contains every
/// optimal solution.
inline RateSolution solve_rate_subproblem(const RateSubproblem& sp) {
    using namespace detail;
    const int B = static_cast<int>(sp.bands.size());
    if (B == 0) throw std::invalid_argument("solve_rate_subproblem: no bands");
    if (!(sp.b0 > 0.0)) throw std::invalid_argument("solve_rate_subproblem: anchor b must be positive");
    if (!(sp.rho > 0.0)) throw std::invalid_argument("solve_rate_subproblem: rho must be positive");
    const int K = static_cast<int>(sp.bands[0].G.rows());
    const int N = static_cast<int>(sp.bands[0].G.cols());
    const double kappa = sp.a0 / sp.b0;
    const double Bd = static_cast<double>(B);

    // anchor check
    {
        RateSolution anchor;
        for (const auto& bd : sp.bands) {
            if (bd.G.rows() != K || bd.G.cols() != N || bd.P0.rows() != K || bd.P0.cols() != K || bd.r0.size() != K ||
                bd.F0.rows() != N || bd.F0.cols() != K)
                throw std::invalid_argument("solve_rate_subproblem: inconsistent band dimensions");
            if (!(bd.sigma2 > 0.0)) throw std::invalid_argument("solve_rate_subproblem: noise power must be positive");
            anchor.F.push_back(bd.F0);
            anchor.P.push_back(bd.P0);
            anchor.r.push_back(bd.r0);
        }
        anchor.a = sp.a0;
        anchor.b = sp.b0;
        anchor.eta = sp.eta0;
        if (rate_block_slack(sp, anchor) < -1e-6)
            throw std::invalid_argument("solve_rate_subproblem: anchor point is infeasible");
    }

    RateSolution anchor_sol;
    for (const auto& bd : sp.bands) {
        anchor_sol.F.push_back(bd.F0);
        anchor_sol.P.push_back(bd.P0);
        anchor_sol.r.push_back(bd.r0);
    }
    anchor_sol.a = sp.a0;
    anchor_sol.b = sp.b0;
    anchor_sol.eta = std::max(sp.eta0, sca_ratio_bound(sp.a0, sp.b0, sp.a0, sp.b0));
    anchor_sol.kept_anchor = true;
    const double anchor_obj = rate_block_objective(sp, anchor_sol.F, anchor_sol.P, anchor_sol.eta);

    // Users with a zero anchor signal have an identically zero minorant.
    std::vector<std::vector<bool>> live(B, std::vector<bool>(K, false));
    bool any_live = false;
    for (int m = 0; m < B; ++m)
        for (int k = 0; k < K; ++k) {
            live[m][k] = std::abs(sp.bands[m].P0(k, k)) > 0.0;
            any_live = any_live || live[m][k];
        }

    auto finish = [&](RateSolution s) {
        // tighten b and a to their best feasible values, then eta
        double sumr = 0.0, pw = 0.0;
        for (int m = 0; m < B; ++m) {
            sumr += s.r[m].sum();
            pw += s.F[m].squaredNorm();
        }
        s.b = sp.w * (sp.power_scale * pw / Bd + sp.xi * sp.mu * sumr) + sp.Pc;
        if (kappa > 0.0 && sumr > 0.0) s.a = std::max(s.a, std::sqrt(sp.mu * sumr));
        if (sp.mu * sumr < s.a * s.a) s.a = sumr > 0.0 ? std::sqrt(sp.mu * sumr) : 0.0;
        s.eta = sca_ratio_bound(s.a, s.b, sp.a0, sp.b0);
        double obj = rate_block_objective(sp, s.F, s.P, s.eta);
        if (!(obj >= anchor_obj) || rate_block_slack(sp, s) < -1e-9) {
            anchor_sol.newton_steps = s.newton_steps;
            return anchor_sol;
        }
        s.kept_anchor = false;
        return s;
    };

    if (!any_live) {
        // Every minorant vanishes: r = 0, a = 0 and the rest is a projection.
        RateSolution s;
        const double shrink = 1.0 + 2.0 * sp.rho * kappa * kappa * sp.w * sp.power_scale / Bd;
        for (int m = 0; m < B; ++m) {
            const auto& bd = sp.bands[m];
            CMat F;
            if (sp.consensus) {
                F = bd.C / shrink;
            } else {
                F = (sp.w > 0.0 && kappa > 0.0) ? CMat::Zero(N, K) : bd.F0;
            }
            if (F.squaredNorm() > 1.0) F /= F.norm();
            s.F.push_back(F);
            s.P.push_back(bd.G * F - sp.rho * bd.Lambda);
            s.r.push_back(RVec::Zero(K));
        }
        s.a = 0.0;
        return finish(s);
    }

    // ----- per-band reduction and constant parts -----
    std::vector<BandData> bdata(B);
    int total = 0;
    for (int m = 0; m < B; ++m) {
        const auto& bd = sp.bands[m];
        auto& D = bdata[m];
        CMat span(N, sp.consensus ? 2 * K : K);
        span.leftCols(K) = bd.G.adjoint();
        if (sp.consensus) span.rightCols(K) = bd.C;
        D.Q = orth_basis(span);
        auto& L = D.L;
        L.K = K;
        L.rank = static_cast<int>(D.Q.cols());
        L.nY = L.rank * K;
        L.nP = K * K;
        L.nx = L.nY + L.nP;
        L.dim = 2 * L.nx + K;
        L.offset = total;
        total += L.dim;

        // penalty residuals: [Y - Q^H C] (consensus) and [P - G Q Y + rho Lambda]
        const CMat GQ = bd.G * D.Q; // K x rank
        const int nres = (sp.consensus ? L.nY : 0) + L.nP;
        CMat Lc = CMat::Zero(nres, L.nx);
        CVec yc = CVec::Zero(nres);
        int row = 0;
        if (sp.consensus) {
            const CMat Ct = D.Q.adjoint() * bd.C;
            for (int j = 0; j < L.nY; ++j) Lc(j, j) = 1.0;
            yc.head(L.nY) = Eigen::Map<const CVec>(Ct.data(), L.nY);
            row = L.nY;
        }
        // vec(P)_(k + iK) - sum_l GQ(k, l) Y(l, i) = -rho Lambda(k, i)
        for (int i = 0; i < K; ++i)
            for (int k = 0; k < K; ++k) {
                const int rr = row + k + i * K;
                Lc(rr, L.nY + k + i * K) = 1.0;
                for (int l = 0; l < L.rank; ++l) Lc(rr, l + i * L.rank) = -GQ(k, l);
                yc(rr) = -sp.rho * bd.Lambda(k, i);
            }
        const RMat Lr = realify(Lc);
        const RVec yr = realify(yc);
        D.Hq = RMat::Zero(L.dim, L.dim);
        D.Hq.topLeftCorner(2 * L.nx, 2 * L.nx) = Lr.transpose() * Lr / sp.rho;
        D.gq_const = RVec::Zero(L.dim);
        D.gq_const.head(2 * L.nx) = Lr.transpose() * yr / sp.rho;
        D.q_const = yr.squaredNorm() / (2.0 * sp.rho);

        D.alpha_re.resize(K);
        D.alpha_im.resize(K);
        D.beta.resize(K);
        D.I0.resize(K);
        for (int k = 0; k < K; ++k) {
            const double I0 = interference(bd.P0.row(k), k, bd.sigma2);
            D.I0(k) = I0;
            D.alpha_re(k) = 2.0 * std::real(bd.P0(k, k)) / I0;
            D.alpha_im(k) = 2.0 * std::imag(bd.P0(k, k)) / I0;
            D.beta(k) = std::norm(bd.P0(k, k)) / (I0 * I0);
        }
    }
    const int ia = total, ib = total + 1, dim = total + 2;

    auto unpack_Y = [&](const RVec& z, int m) {
        const auto& L = bdata[m].L;
        CMat Y(L.rank, K);
        for (int j = 0; j < L.nY; ++j) Y.data()[j] = cplx(z(L.offset + L.reY(j)), z(L.offset + L.imY(j)));
        return Y;
    };
    auto unpack_P = [&](const RVec& z, int m) {
        const auto& L = bdata[m].L;
        CMat P(K, K);
        for (int i = 0; i < K; ++i)
            for (int k = 0; k < K; ++k) P(k, i) = cplx(z(L.offset + L.reP(k, i)), z(L.offset + L.imP(k, i)));
        return P;
    };
    // minorant gamma_k and its gradient over the real coordinates of row k
    auto gamma_of = [&](const RVec& z, int m, int k) {
        const auto& D = bdata[m];
        const auto& L = D.L;
        double g = D.alpha_re(k) * z(L.offset + L.reP(k, k)) + D.alpha_im(k) * z(L.offset + L.imP(k, k));
        double I = sp.bands[m].sigma2;
        for (int i = 0; i < K; ++i)
            if (i != k) I += std::pow(z(L.offset + L.reP(k, i)), 2) + std::pow(z(L.offset + L.imP(k, i)), 2);
        return g - D.beta(k) * I;
    };

    // ----- strictly feasible start -----
    RVec z = RVec::Zero(dim);
    double sum_r0 = 0.0;
    int n_dead = 0;
    for (int m = 0; m < B; ++m) {
        const auto& bd = sp.bands[m];
        const auto& L = bdata[m].L;
        CMat Y = bdata[m].Q.adjoint() * bd.F0;
        const double yn = Y.squaredNorm();
        if (yn > 0.999) Y *= std::sqrt(0.999 / yn);
        for (int j = 0; j < L.nY; ++j) {
            z(L.offset + L.reY(j)) = Y.data()[j].real();
            z(L.offset + L.imY(j)) = Y.data()[j].imag();
        }
        for (int i = 0; i < K; ++i)
            for (int k = 0; k < K; ++k) {
                cplx v = bd.P0(k, i);
                if (i == k && live[m][k]) {
                    // raise a weak anchor signal until the minorant reaches 1
                    const double g0 = std::norm(bd.P0(k, k)) / bdata[m].I0(k);
                    if (g0 < 1.0) v *= 0.5 * (1.0 / g0 + 1.0);
                }
                z(L.offset + L.reP(k, i)) = v.real();
                z(L.offset + L.imP(k, i)) = v.imag();
            }
        for (int k = 0; k < K; ++k) {
            if (!live[m][k]) {
                ++n_dead;
                continue;
            }
            const double cap = std::log2(1.0 + gamma_of(z, m, k));
            z(L.offset + L.rr(k)) = 0.9 * cap;
            sum_r0 += 0.9 * cap;
        }
    }
    if (n_dead > 0) {
        const double dead_r = -std::min(0.01, 0.25 * sum_r0 / n_dead);
        for (int m = 0; m < B; ++m)
            for (int k = 0; k < K; ++k)
                if (!live[m][k]) {
                    z(bdata[m].L.offset + bdata[m].L.rr(k)) = dead_r;
                    sum_r0 += dead_r;
                }
    }
    const double r_lo = -1.0;
    auto power_sum = [&](const RVec& zz) {
        double s = 0.0;
        for (int m = 0; m < B; ++m) {
            const auto& L = bdata[m].L;
            s += zz.segment(L.offset, L.nY).squaredNorm() + zz.segment(L.offset + L.nx, L.nY).squaredNorm();
        }
        return s;
    };
    auto rate_sum = [&](const RVec& zz) {
        double s = 0.0;
        for (int m = 0; m < B; ++m) s += zz.segment(bdata[m].L.offset + 2 * bdata[m].L.nx, K).sum();
        return s;
    };
    z(ia) = 0.5 * std::sqrt(sp.mu * sum_r0);
    const double b_floor0 = sp.w * (sp.power_scale * power_sum(z) / Bd + sp.xi * sp.mu * sum_r0) + sp.Pc;
    z(ib) = b_floor0 + std::max(1e-3, 1e-3 * std::abs(b_floor0));
    const double b_hi = 100.0 * (std::abs(z(ib)) + std::abs(sp.b0) + 1.0);

    // ----- barrier function -----
    // returns +inf outside the domain
    auto barrier = [&](const RVec& zz, double t) {
        double val = 0.0;
        for (int m = 0; m < B; ++m) {
            const auto& D = bdata[m];
            const auto& L = D.L;
            auto seg = zz.segment(L.offset, L.dim);
            val += t * (0.5 * seg.dot(D.Hq * seg) - D.gq_const.dot(seg) + D.q_const);
            double py = zz.segment(L.offset, L.nY).squaredNorm() + zz.segment(L.offset + L.nx, L.nY).squaredNorm();
            if (!(py < 1.0)) return std::numeric_limits<double>::infinity();
            val -= std::log(1.0 - py);
            for (int k = 0; k < K; ++k) {
                const double rk = zz(L.offset + L.rr(k));
                if (!(rk > r_lo)) return std::numeric_limits<double>::infinity();
                val -= std::log(rk - r_lo);
                const double g = gamma_of(zz, m, k);
                if (!(1.0 + g > 0.0)) return std::numeric_limits<double>::infinity();
                const double c = std::log2(1.0 + g) - rk;
                if (!(c > 0.0)) return std::numeric_limits<double>::infinity();
                val -= std::log(c);
            }
        }
        const double a = zz(ia), b = zz(ib);
        const double ca = sp.mu * rate_sum(zz) - a * a;
        const double cb = b - sp.w * (sp.power_scale * power_sum(zz) / Bd + sp.xi * sp.mu * rate_sum(zz)) - sp.Pc;
        if (!(ca > 0.0) || !(cb > 0.0) || !(b < b_hi)) return std::numeric_limits<double>::infinity();
        val += -t * (2.0 * kappa * a - kappa * kappa * b);
        val -= std::log(ca) + std::log(cb) + std::log(b_hi - b);
        return val;
    };

    const int n_constraints = 2 * B * K + B + 3;
    double t = 1.0;
    int steps = 0;
    const double ln2 = std::log(2.0);

    std::vector<Eigen::LLT<RMat>> chol(B);
    std::vector<RMat> Dblk(B);
    RVec grad(dim), dz(dim);
    RMat U(dim, 2);

    while (true) {
        // centering at the current t
        for (int inner = 0;; ++inner) {
            grad.setZero();
            U.setZero();
            double rsum = rate_sum(z), psum = power_sum(z);
            const double a = z(ia), b = z(ib);
            const double ca = sp.mu * rsum - a * a;
            const double cb = b - sp.w * (sp.power_scale * psum / Bd + sp.xi * sp.mu * rsum) - sp.Pc;
            const double cy_coef = 2.0 * sp.w * sp.power_scale / Bd; // -d cb / d y = cy_coef * y

            for (int m = 0; m < B; ++m) {
                const auto& Dm = bdata[m];
                const auto& L = Dm.L;
                RMat& H = Dblk[m];
                H = t * Dm.Hq;
                auto seg = z.segment(L.offset, L.dim);
                RVec g = t * (Dm.Hq * seg - Dm.gq_const);
                // transmit power
                double py = 0.0;
                for (int j = 0; j < L.nY; ++j) py += std::pow(z(L.offset + L.reY(j)), 2) + std::pow(z(L.offset + L.imY(j)), 2);
                const double cp = 1.0 - py;
                std::vector<int> yidx;
                for (int j = 0; j < L.nY; ++j) {
                    yidx.push_back(L.reY(j));
                    yidx.push_back(L.imY(j));
                }
                for (int u : yidx) {
                    const double yu = seg(u);
                    g(u) += 2.0 * yu / cp;
                    H(u, u) += 2.0 / cp + cy_coef / cb;
                    for (int v : yidx) H(u, v) += 4.0 * yu * seg(v) / (cp * cp);
                }
                // rates
                for (int k = 0; k < K; ++k) {
                    const int ir = L.rr(k);
                    const double rk = seg(ir);
                    g(ir) += -1.0 / (rk - r_lo);
                    H(ir, ir) += 1.0 / ((rk - r_lo) * (rk - r_lo));

                    const double gam = gamma_of(z, m, k);
                    const double one_g = 1.0 + gam;
                    const double c = std::log(one_g) / ln2 - rk;
                    // gradient of gamma over the row coordinates
                    std::vector<std::pair<int, double>> dg;
                    dg.emplace_back(L.reP(k, k), Dm.alpha_re(k));
                    dg.emplace_back(L.imP(k, k), Dm.alpha_im(k));
                    for (int i = 0; i < K; ++i)
                        if (i != k) {
                            dg.emplace_back(L.reP(k, i), -2.0 * Dm.beta(k) * seg(L.reP(k, i)));
                            dg.emplace_back(L.imP(k, i), -2.0 * Dm.beta(k) * seg(L.imP(k, i)));
                        }
                    // grad c = dgamma / (ln2 (1+gamma)) on p, -1 on r
                    std::vector<std::pair<int, double>> dc;
                    for (auto [idx, v] : dg) dc.emplace_back(idx, v / (ln2 * one_g));
                    dc.emplace_back(ir, -1.0);
                    for (auto [idx, v] : dc) g(idx) += -v / c;
                    for (auto [i1, v1] : dc)
                        for (auto [i2, v2] : dc) H(i1, i2) += v1 * v2 / (c * c);
                    // -hess(c)/c, hess(c) = (hess gamma/(1+g) - dg dg^T/(1+g)^2)/ln2
                    for (auto [i1, v1] : dg)
                        for (auto [i2, v2] : dg) H(i1, i2) += v1 * v2 / (one_g * one_g * ln2 * c);
                    for (int i = 0; i < K; ++i)
                        if (i != k) {
                            H(L.reP(k, i), L.reP(k, i)) += 2.0 * Dm.beta(k) / (one_g * ln2 * c);
                            H(L.imP(k, i), L.imP(k, i)) += 2.0 * Dm.beta(k) / (one_g * ln2 * c);
                        }
                    // coupling columns
                    U(L.offset + ir, 0) = sp.mu / ca;
                    U(L.offset + ir, 1) = -sp.w * sp.xi * sp.mu / cb;
                    grad(L.offset + ir) += -sp.mu / ca + sp.w * sp.xi * sp.mu / cb;
                }
                for (int u : yidx) {
                    U(L.offset + u, 1) = -cy_coef * seg(u) / cb;
                    grad(L.offset + u) += cy_coef * seg(u) / cb;
                }
                grad.segment(L.offset, L.dim) += g;
            }
            // a and b
            grad(ia) = -t * 2.0 * kappa + 2.0 * a / ca;
            grad(ib) = t * kappa * kappa - 1.0 / cb + 1.0 / (b_hi - b);
            U(ia, 0) = -2.0 * a / ca;
            U(ib, 1) = 1.0 / cb;
            const double d_a = 2.0 / ca;
            const double d_b = 1.0 / ((b_hi - b) * (b_hi - b));

            // Newton direction by block elimination of the rank-2 update
            auto solveD = [&](const RVec& rhs) {
                RVec out(dim);
                for (int m = 0; m < B; ++m) {
                    const auto& L = bdata[m].L;
                    out.segment(L.offset, L.dim) = chol[m].solve(rhs.segment(L.offset, L.dim));
                }
                out(ia) = rhs(ia) / d_a;
                out(ib) = rhs(ib) / d_b;
                return out;
            };
            for (int m = 0; m < B; ++m) {
                chol[m].compute(Dblk[m]);
                if (chol[m].info() != Eigen::Success) {
                    Dblk[m].diagonal().array() += 1e-12 * (1.0 + Dblk[m].diagonal().cwiseAbs().maxCoeff());
                    chol[m].compute(Dblk[m]);
                }
            }
            const RVec Dg = solveD(grad);
            RMat DU(dim, 2);
            DU.col(0) = solveD(U.col(0));
            DU.col(1) = solveD(U.col(1));
            Eigen::Matrix2d S = Eigen::Matrix2d::Identity() + U.transpose() * DU;
            dz = -(Dg - DU * S.ldlt().solve(U.transpose() * Dg));
            const double decrement = -grad.dot(dz);

                        if (decrement / 2.0 <= 1e-10 || inner >= 50) break;
            // backtracking keeps strict feasibility
            const double f0 = barrier(z, t);
            double step = 1.0;
            RVec zn;
            bool ok = false;
            for (int ls = 0; ls < 80; ++ls) {
                zn = z + step * dz;
                const double fn = barrier(zn, t);
                if (std::isfinite(fn) && fn <= f0 - 0.25 * step * decrement) {
                    ok = true;
                    break;
                }
                step *= 0.5;
            }
            ++steps;
            if (!ok) break;
            z = zn;
            if (steps > sp.max_newton) break;
        }
        if (steps > sp.max_newton) {
            RateSolution it;
            for (int m = 0; m < B; ++m) {
                it.F.push_back(bdata[m].Q * unpack_Y(z, m));
                it.P.push_back(unpack_P(z, m));
                it.r.push_back(z.segment(bdata[m].L.offset + 2 * bdata[m].L.nx, K));
            }
            it.a = z(ia);
            it.b = z(ib);
            it.newton_steps = steps;
            throw SolverError("solve_rate_subproblem: Newton step limit reached", it);
        }
        if (n_constraints / t < sp.gap_tol) break;
        t *= 20.0;
    }

    RateSolution s;
    for (int m = 0; m < B; ++m) {
        s.F.push_back(bdata[m].Q * unpack_Y(z, m));
        s.P.push_back(unpack_P(z, m));
        s.r.push_back(z.segment(bdata[m].L.offset + 2 * bdata[m].L.nx, K));
    }
    s.a = z(ia);
    s.b = z(ib);
    s.newton_steps = steps;
    return finish(s);
}

} // namespace starsthz
