// SPDX-License-Identifier: Apache-2.0
//
// Solvers for the two convex surrogate problems of the alternating
// optimization: the covariance update and the RIS-phase update. Both are
// epigraph formulations (maximize the min-weighted rate r) handed to the
// dense barrier method. Proper signaling is handled by optimizing in the
// subspace of symmetric matrices commuting with the complex structure.

#pragma once

#include <armadillo>
#include <memory>
#include <vector>

#include "risbc/barrier.hpp"
#include "risbc/linalg.hpp"
#include "risbc/rates.hpp"
#include "risbc/surrogate.hpp"
#include "risbc/types.hpp"

namespace risbc {

struct SolveReport {
    double objective = 0.0;  // achieved r, bits/s/Hz
    int iterations = 0;
    double feasibility = 0.0;
    double gap = arma::datum::inf;
    enum class Status { converged, max_iter, infeasible } status = Status::infeasible;
};

/// Frobenius-orthonormal basis of the covariance search space: all symmetric
/// matrices for improper signaling, or the J-commuting subspace (the real
/// image of complex Hermitian matrices) for proper signaling.
inline std::vector<arma::mat> covariance_basis(int two_n, Signaling signaling) {
    std::vector<arma::mat> basis;
    if (signaling == Signaling::improper) {
        for (int i = 0; i < two_n; ++i) {
            arma::mat e(two_n, two_n, arma::fill::zeros);
            e(i, i) = 1.0;
            basis.push_back(e);
        }
        for (int i = 0; i < two_n; ++i)
            for (int j = i + 1; j < two_n; ++j) {
                arma::mat e(two_n, two_n, arma::fill::zeros);
                e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
                basis.push_back(e);
            }
        return basis;
    }
    const int n = two_n / 2;
    // blocks [[A, B], [-B, A]] with A symmetric, B skew-symmetric
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            arma::mat a(n, n, arma::fill::zeros);
            a(i, j) = a(j, i) = (i == j) ? 1.0 : 1.0 / std::sqrt(2.0);
            arma::mat e(two_n, two_n, arma::fill::zeros);
            e.submat(0, 0, n - 1, n - 1) = a;
            e.submat(n, n, two_n - 1, two_n - 1) = a;
            basis.push_back(e / std::sqrt(2.0));
        }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            arma::mat b(n, n, arma::fill::zeros);
            b(i, j) = 1.0;
            b(j, i) = -1.0;
            arma::mat e(two_n, two_n, arma::fill::zeros);
            e.submat(0, n, n - 1, two_n - 1) = b;
            e.submat(n, 0, two_n - 1, n - 1) = -b;
            basis.push_back(e / 2.0);
        }
    return basis;
}

namespace detail {

struct CovLayout {
    int n_users = 0;
    bool with_common = false;
    int n_basis = 0;

    int n_msgs() const { return n_users + (with_common ? 1 : 0); }
    int msg_offset(int m) const { return m * n_basis; }
    int rc_offset() const { return n_msgs() * n_basis; }
    int tc_index() const { return rc_offset() + n_users; }
    int r_index() const { return with_common ? tc_index() + 1 : n_msgs() * n_basis; }
    int total() const { return r_index() + 1; }
};

inline arma::vec matrix_coords(const arma::mat& p, const std::vector<arma::mat>& basis) {
    arma::vec x(basis.size());
    for (std::size_t b = 0; b < basis.size(); ++b) x(b) = arma::accu(p % basis[b]);
    return x;
}

inline arma::mat coords_matrix(const arma::vec& x, int offset,
                               const std::vector<arma::mat>& basis) {
    arma::mat p = basis[0] * x(offset);
    for (std::size_t b = 1; b < basis.size(); ++b) p += basis[b] * x(offset + b);
    return symmetrize(p);
}

/// Surrogate rate term as a barrier constraint over the layout coordinates;
/// extra affine pieces (rc, r, t_c) are appended by the caller.
inline std::unique_ptr<ipm::LogDetGe> surrogate_constraint(const CovarianceSurrogate& s,
                                                           const CovLayout& lay,
                                                           const std::vector<arma::mat>& basis) {
    auto c = std::make_unique<ipm::LogDetGe>();
    c->coef = 0.5 / kLn2;  // rate terms are 1/2 log2 det
    c->c0 = s.Cn;
    c->a = arma::vec(lay.total(), arma::fill::zeros);
    c->b = s.constant;
    std::vector<arma::mat> lifts(basis.size());
    for (std::size_t b = 0; b < basis.size(); ++b) lifts[b] = symmetrize(s.H * basis[b] * s.H.t());
    for (int v : s.logdet_vars)
        for (std::size_t b = 0; b < basis.size(); ++b) {
            c->idx.push_back(lay.msg_offset(v) + (int)b);
            c->lift.push_back(lifts[b]);
        }
    for (const auto& [v, coefm] : s.linear)
        for (std::size_t b = 0; b < basis.size(); ++b)
            c->a(lay.msg_offset(v) + (int)b) += arma::accu(coefm % basis[b]);
    return c;
}

}  // namespace detail

/// Covariance update: maximizes r subject to the surrogate rate-profile
/// constraints, the power budget, PSD cones and, when common bounds are
/// given, the common-rate allocation coupling. The expansion covariance set
/// seeds the strictly feasible start.
inline std::pair<CovarianceSet, SolveReport> solve_covariance_surrogate(
    const std::vector<CovarianceSurrogate>& private_bounds,
    const std::vector<CovarianceSurrogate>& common_bounds, const CovarianceSet& expansion,
    double power_budget, Signaling signaling, const arma::vec& alpha,
    const ipm::SolveOptions& opt = {}) {
    const int n_users = (int)private_bounds.size();
    const int two_n = (int)expansion.P[0].n_rows;
    const bool with_common = !common_bounds.empty();

    const auto basis = covariance_basis(two_n, signaling);
    detail::CovLayout lay{n_users, with_common, (int)basis.size()};

    ipm::Problem pb;
    pb.n = lay.total();
    pb.maximize = arma::vec(pb.n, arma::fill::zeros);
    pb.maximize(lay.r_index()) = 1.0;

    for (int m = 0; m < lay.n_msgs(); ++m) pb.cones.push_back({lay.msg_offset(m), &basis});

    {  // power budget
        arma::vec a(pb.n, arma::fill::zeros);
        for (int m = 0; m < lay.n_msgs(); ++m)
            for (std::size_t b = 0; b < basis.size(); ++b)
                a(lay.msg_offset(m) + (int)b) = -arma::trace(basis[b]);
        pb.ineq.push_back(std::make_unique<ipm::AffineGe>(std::move(a), power_budget));
    }
    for (int k = 0; k < n_users; ++k) {
        if (alpha(k) <= 0.0) continue;  // dropped rate-profile constraint
        auto c = detail::surrogate_constraint(private_bounds[k], lay, basis);
        if (with_common) c->a(lay.rc_offset() + k) += 1.0;
        c->a(lay.r_index()) -= alpha(k);
        pb.ineq.push_back(std::move(c));
    }
    if (with_common) {
        for (int k = 0; k < n_users; ++k) {  // decodable by every user
            auto c = detail::surrogate_constraint(common_bounds[k], lay, basis);
            c->a(lay.tc_index()) -= 1.0;
            pb.ineq.push_back(std::move(c));
        }
        arma::vec a(pb.n, arma::fill::zeros);
        a(lay.tc_index()) = 1.0;
        for (int k = 0; k < n_users; ++k) a(lay.rc_offset() + k) = -1.0;
        pb.ineq.push_back(std::make_unique<ipm::AffineGe>(std::move(a), 0.0));
        for (int k = 0; k < n_users; ++k) {
            arma::vec ak(pb.n, arma::fill::zeros);
            ak(lay.rc_offset() + k) = 1.0;
            pb.ineq.push_back(std::make_unique<ipm::AffineGe>(std::move(ak), 0.0));
        }
    }

    // strictly feasible start: blend the expansion point with a white split,
    // increasing the blend until every slack is positive
    arma::vec x0;
    bool have_start = false;
    const arma::mat white =
        (power_budget / (lay.n_msgs() * two_n)) * arma::eye(two_n, two_n);
    for (double gamma : {0.01, 0.05, 0.2, 0.5, 1.0}) {
        arma::vec x(pb.n, arma::fill::zeros);
        std::vector<arma::mat> covs(n_users + 1, arma::mat(two_n, two_n, arma::fill::zeros));
        const double shrink = 1.0 - 1e-6;
        for (int m = 0; m < lay.n_msgs(); ++m) {
            const arma::mat& prev = (m < n_users) ? expansion.P[m] : expansion.P_c;
            const arma::mat mixed = shrink * ((1.0 - gamma) * prev + gamma * white);
            covs[m < n_users ? m : n_users] = mixed;
            x.subvec(lay.msg_offset(m), lay.msg_offset(m) + lay.n_basis - 1) =
                detail::matrix_coords(mixed, basis);
        }
        if (with_common) {
            double min_common = arma::datum::inf;
            for (int k = 0; k < n_users; ++k)
                min_common = std::min(min_common, common_bounds[k].eval(covs));
            if (!(min_common > 1e-12)) continue;
            const double tc = 0.9 * min_common;
            x(lay.tc_index()) = tc;
            for (int k = 0; k < n_users; ++k) x(lay.rc_offset() + k) = 0.5 * tc / n_users;
        }
        double r0 = arma::datum::inf;
        for (int k = 0; k < n_users; ++k) {
            if (alpha(k) <= 0.0) continue;
            const double rc = with_common ? x(lay.rc_offset() + k) : 0.0;
            r0 = std::min(r0, (private_bounds[k].eval(covs) + rc) / alpha(k));
        }
        x(lay.r_index()) = r0 - std::max(1e-6, 1e-6 * std::abs(r0));
        if (std::isfinite(ipm::detail::barrier_value(pb, 1.0, x))) {
            x0 = std::move(x);
            have_start = true;
            break;
        }
    }

    SolveReport rep;
    if (!have_start) return {expansion, rep};  // status infeasible

    const ipm::IpmResult sol = ipm::solve(pb, x0, opt);

    CovarianceSet out;
    out.P.resize(n_users);
    for (int k = 0; k < n_users; ++k)
        out.P[k] = detail::coords_matrix(sol.x, lay.msg_offset(k), basis);
    out.P_c = with_common ? detail::coords_matrix(sol.x, lay.msg_offset(n_users), basis)
                          : arma::mat(two_n, two_n, arma::fill::zeros);
    out.rc_alloc = arma::vec(n_users, arma::fill::zeros);

    double feas = std::max(0.0, out.total_power() - power_budget);
    if (with_common) {
        for (int k = 0; k < n_users; ++k) {
            const double rc = sol.x(lay.rc_offset() + k);
            feas = std::max(feas, -rc);
            out.rc_alloc(k) = std::max(0.0, rc);
        }
    }
    for (int m = 0; m < lay.n_msgs(); ++m) {
        const arma::mat& p = (m < n_users) ? out.P[m] : out.P_c;
        arma::vec ev;
        if (arma::eig_sym(ev, p)) feas = std::max(feas, -ev.min());
    }

    rep.objective = sol.x(lay.r_index());
    rep.iterations = sol.newton_iters;
    rep.gap = sol.gap;
    rep.feasibility = feas;
    rep.status = (sol.converged && feas <= 1e-7) ? SolveReport::Status::converged
                                                 : SolveReport::Status::max_iter;
    return {out, rep};
}

/// RIS-phase update: maximizes r over the relaxed phase polytope using the
/// concave quadratic bounds. Returns the unnormalized solution, which may
/// have per-element magnitudes in [sqrt(1-eps), 1]. When no bound depends on
/// the phases, returns theta_prev unchanged.
inline std::pair<arma::cx_vec, SolveReport> solve_ris_surrogate(
    const std::vector<PhaseSurrogate>& private_bounds,
    const std::vector<PhaseSurrogate>& common_bounds, const std::vector<ModulusCut>& cuts,
    const arma::cx_vec& theta_prev, const arma::vec& alpha, double epsilon,
    const ipm::SolveOptions& opt = {}) {
    const int n_users = (int)private_bounds.size();
    const int nu2 = 2 * (int)theta_prev.n_elem;
    const bool with_common = !common_bounds.empty();

    // tie-break: phases do not affect any bound -> keep the previous ones
    double dependence = 0.0, scale = 1.0;
    auto weigh = [&](const PhaseSurrogate& s) {
        dependence = std::max({dependence, arma::abs(s.lin).max(), arma::abs(s.quad).max()});
        scale = std::max(scale, std::abs(s.constant));
    };
    for (const auto& s : private_bounds) weigh(s);
    for (const auto& s : common_bounds) weigh(s);
    if (dependence <= 1e-12 * scale) {
        arma::vec base(n_users);
        for (int k = 0; k < n_users; ++k) base(k) = private_bounds[k].constant;
        double common = 0.0;
        if (with_common) {
            common = arma::datum::inf;
            for (const auto& s : common_bounds) common = std::min(common, s.constant);
            common = std::max(common, 0.0);
        }
        SolveReport rep;
        rep.objective = best_common_split(base, common, alpha).objective;
        rep.status = SolveReport::Status::converged;
        rep.gap = 0.0;
        return {theta_prev, rep};
    }

    struct Lay {
        int nu2, n_users;
        bool with_common;
        int rc(int k) const { return nu2 + k; }
        int tc() const { return nu2 + n_users; }
        int r() const { return with_common ? nu2 + n_users + 1 : nu2; }
        int total() const { return r() + 1; }
    } L{nu2, n_users, with_common};

    ipm::Problem pb;
    pb.n = L.total();
    pb.maximize = arma::vec(pb.n, arma::fill::zeros);
    pb.maximize(L.r()) = 1.0;

    auto quad_of = [&](const PhaseSurrogate& s) {
        arma::vec g(pb.n, arma::fill::zeros);
        g.head(nu2) = s.lin;
        arma::mat q(pb.n, pb.n, arma::fill::zeros);
        q.submat(0, 0, nu2 - 1, nu2 - 1) = s.quad;
        return std::make_unique<ipm::QuadraticGe>(s.constant, std::move(g), std::move(q));
    };

    for (int k = 0; k < n_users; ++k) {
        if (alpha(k) <= 0.0) continue;
        auto c = quad_of(private_bounds[k]);
        if (with_common) c->g(L.rc(k)) += 1.0;
        c->g(L.r()) -= alpha(k);
        pb.ineq.push_back(std::move(c));
    }
    if (with_common) {
        for (int k = 0; k < n_users; ++k) {
            auto c = quad_of(common_bounds[k]);
            c->g(L.tc()) -= 1.0;
            pb.ineq.push_back(std::move(c));
        }
        arma::vec a(pb.n, arma::fill::zeros);
        a(L.tc()) = 1.0;
        for (int k = 0; k < n_users; ++k) a(L.rc(k)) = -1.0;
        pb.ineq.push_back(std::make_unique<ipm::AffineGe>(std::move(a), 0.0));
        for (int k = 0; k < n_users; ++k) {
            arma::vec ak(pb.n, arma::fill::zeros);
            ak(L.rc(k)) = 1.0;
            pb.ineq.push_back(std::make_unique<ipm::AffineGe>(std::move(ak), 0.0));
        }
    }
    const int n_elem = nu2 / 2;
    for (int m = 0; m < n_elem; ++m) {
        arma::mat q(pb.n, pb.n, arma::fill::zeros);
        q(m, m) = 2.0;
        q(n_elem + m, n_elem + m) = 2.0;
        pb.ineq.push_back(
            std::make_unique<ipm::QuadraticGe>(1.0, arma::vec(pb.n, arma::fill::zeros), std::move(q)));
        arma::vec a(pb.n, arma::fill::zeros);
        a(m) = cuts[m].coef_re;
        a(n_elem + m) = cuts[m].coef_im;
        pb.ineq.push_back(std::make_unique<ipm::AffineGe>(std::move(a), cuts[m].offset));
    }

    // strictly feasible start just inside the unit discs
    arma::vec x0(pb.n, arma::fill::zeros);
    x0.head(nu2) = (1.0 - 0.25 * epsilon) * real_stack(theta_prev);
    const arma::vec u0 = x0.head(nu2);
    if (with_common) {
        double min_common = arma::datum::inf;
        for (const auto& s : common_bounds) min_common = std::min(min_common, s.eval(u0));
        if (!(min_common > 1e-12)) {
            // degenerate common branch (e.g. vanished common power): pin it off
            return solve_ris_surrogate(private_bounds, {}, cuts, theta_prev, alpha, epsilon, opt);
        }
        const double tc = 0.9 * min_common;
        x0(L.tc()) = tc;
        for (int k = 0; k < n_users; ++k) x0(L.rc(k)) = 0.5 * tc / n_users;
    }
    double r0 = arma::datum::inf;
    for (int k = 0; k < n_users; ++k) {
        if (alpha(k) <= 0.0) continue;
        const double rc = with_common ? x0(L.rc(k)) : 0.0;
        r0 = std::min(r0, (private_bounds[k].eval(u0) + rc) / alpha(k));
    }
    x0(L.r()) = r0 - std::max(1e-6, 1e-6 * std::abs(r0));
    if (!std::isfinite(ipm::detail::barrier_value(pb, 1.0, x0)))
        throw conditioning_error("solve_ris_surrogate: could not construct a feasible start");

    const ipm::IpmResult sol = ipm::solve(pb, x0, opt);

    SolveReport rep;
    rep.objective = sol.x(L.r());
    rep.iterations = sol.newton_iters;
    rep.gap = sol.gap;
    double feas = 0.0;
    for (int m = 0; m < n_elem; ++m) {
        const double mag2 = sol.x(m) * sol.x(m) + sol.x(n_elem + m) * sol.x(n_elem + m);
        feas = std::max(feas, mag2 - 1.0);
    }
    rep.feasibility = std::max(feas, 0.0);
    rep.status = (sol.converged && rep.feasibility <= 1e-7) ? SolveReport::Status::converged
                                                            : SolveReport::Status::max_iter;
    return {complex_unstack(sol.x.head(nu2)), rep};
}

/// Projects the relaxed solution back onto the unit-modulus set. Zero
/// components fall back to the previous phase.
inline RisPhases normalize_phases(const arma::cx_vec& theta_hat, const arma::cx_vec& theta_prev) {
    arma::cx_vec out(theta_hat.n_elem);
    for (arma::uword n = 0; n < theta_hat.n_elem; ++n) {
        const double mag = std::abs(theta_hat(n));
        out(n) = (mag > 1e-12) ? theta_hat(n) / mag : theta_prev(n);
    }
    return RisPhases{out};
}

}  // namespace risbc
