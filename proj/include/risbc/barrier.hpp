// SPDX-License-Identifier: Apache-2.0
//
// Dense logarithmic-barrier interior-point solver for the small convex
// programs produced by the surrogate construction: maximize c'x subject to
// concave inequalities f_i(x) >= 0 and PSD cone constraints on matrix
// variable blocks. Problems here have a few dozen variables, so everything
// is dense and Hessians are exact.

#pragma once

#include <armadillo>
#include <cmath>
#include <memory>
#include <vector>

#include "risbc/linalg.hpp"
#include "risbc/types.hpp"

namespace risbc::ipm {

/// One inequality f(x) >= 0 with f concave. eval returns f(x) and, when
/// requested, writes gradient and Hessian of f (not of the barrier term).
struct ConstraintBase {
    virtual ~ConstraintBase() = default;
    virtual double eval(const arma::vec& x, arma::vec* grad, arma::mat* hess) const = 0;
};

/// f = a'x + b
struct AffineGe final : ConstraintBase {
    arma::vec a;
    double b = 0.0;

    AffineGe(arma::vec a_, double b_) : a(std::move(a_)), b(b_) {}

    double eval(const arma::vec& x, arma::vec* grad, arma::mat*) const override {
        if (grad) *grad = a;
        return arma::dot(a, x) + b;
    }
};

/// f = c + g'x - 1/2 x'Q x with Q PSD
struct QuadraticGe final : ConstraintBase {
    double c = 0.0;
    arma::vec g;
    arma::mat q;

    QuadraticGe(double c_, arma::vec g_, arma::mat q_) : c(c_), g(std::move(g_)), q(std::move(q_)) {}

    double eval(const arma::vec& x, arma::vec* grad, arma::mat* hess) const override {
        const arma::vec qx = q * x;
        if (grad) *grad = g - qx;
        if (hess) *hess = -q;
        return c + arma::dot(g, x) - 0.5 * arma::dot(x, qx);
    }
};

/// f = coef * ln det(C0 + sum_j x[idx_j] L_j) + a'x + b, defined where the
/// matrix argument is positive definite (returns -inf outside).
struct LogDetGe final : ConstraintBase {
    double coef = 1.0;
    arma::mat c0;
    std::vector<int> idx;
    std::vector<arma::mat> lift;
    arma::vec a;
    double b = 0.0;

    double eval(const arma::vec& x, arma::vec* grad, arma::mat* hess) const override {
        arma::mat s = c0;
        for (std::size_t j = 0; j < idx.size(); ++j) s += x(idx[j]) * lift[j];
        s = symmetrize(s);

        arma::mat chol_r;
        if (!arma::chol(chol_r, s)) return -arma::datum::inf;
        const double logdet = 2.0 * arma::accu(arma::log(chol_r.diag().eval()));

        if (grad || hess) {
            arma::mat s_inv;
            if (!arma::inv_sympd(s_inv, s)) return -arma::datum::inf;
            if (grad) {
                *grad = a;
                for (std::size_t j = 0; j < idx.size(); ++j)
                    (*grad)(idx[j]) += coef * arma::accu(s_inv % lift[j]);
            }
            if (hess) {
                hess->zeros(x.n_elem, x.n_elem);
                std::vector<arma::mat> t(idx.size());
                for (std::size_t j = 0; j < idx.size(); ++j) t[j] = s_inv * lift[j];
                for (std::size_t j = 0; j < idx.size(); ++j)
                    for (std::size_t l = j; l < idx.size(); ++l) {
                        const double v = -coef * arma::accu(t[j] % t[l].t());
                        (*hess)(idx[j], idx[l]) += v;
                        if (idx[j] != idx[l]) (*hess)(idx[l], idx[j]) += v;
                    }
            }
        }
        return coef * logdet + arma::dot(a, x) + b;
    }
};

/// A PSD matrix variable P(x) = sum_b basis[b] * x[offset + b], constrained
/// to the cone interior via a -log det barrier.
struct ConeBlock {
    int offset = 0;
    const std::vector<arma::mat>* basis = nullptr;

    arma::mat assemble(const arma::vec& x) const {
        arma::mat p = (*basis)[0] * x(offset);
        for (std::size_t b = 1; b < basis->size(); ++b) p += (*basis)[b] * x(offset + b);
        return p;
    }
};

struct Problem {
    int n = 0;
    arma::vec maximize;  // objective coefficients
    std::vector<std::unique_ptr<ConstraintBase>> ineq;
    std::vector<ConeBlock> cones;

    double barrier_parameter() const {
        double nu = (double)ineq.size();
        for (const auto& c : cones) nu += (double)(*c.basis)[0].n_rows;
        return nu;
    }
};

struct SolveOptions {
    double gap_abs = 1e-9;
    double gap_rel = 1e-9;
    double mu = 20.0;
    int max_newton = 200;
    double newton_tol = 1e-11;  // on half the squared Newton decrement
    int max_line_search = 60;
};

struct IpmResult {
    arma::vec x;
    int newton_iters = 0;
    double gap = arma::datum::inf;
    bool converged = false;
};

namespace detail {

/// Value of the t-scaled barrier objective (to minimize); +inf if infeasible.
inline double barrier_value(const Problem& pb, double t, const arma::vec& x) {
    double val = -t * arma::dot(pb.maximize, x);
    for (const auto& c : pb.ineq) {
        const double f = c->eval(x, nullptr, nullptr);
        if (!(f > 0.0)) return arma::datum::inf;
        val -= std::log(f);
    }
    for (const auto& cone : pb.cones) {
        arma::mat r;
        if (!arma::chol(r, symmetrize(cone.assemble(x)))) return arma::datum::inf;
        val -= 2.0 * arma::accu(arma::log(r.diag().eval()));
    }
    return val;
}

inline bool barrier_grad_hess(const Problem& pb, double t, const arma::vec& x, arma::vec& g,
                              arma::mat& h) {
    const int n = pb.n;
    g = -t * pb.maximize;
    h.zeros(n, n);
    arma::vec cg(n);
    arma::mat ch;
    for (const auto& c : pb.ineq) {
        const double f = c->eval(x, &cg, &ch);
        if (!(f > 0.0) || !std::isfinite(f)) return false;
        g -= cg / f;
        h += cg * cg.t() / (f * f);
        if (ch.n_elem) h -= ch / f;  // ch is NSD, so this adds PSD curvature
        ch.reset();
    }
    for (const auto& cone : pb.cones) {
        const arma::mat p = symmetrize(cone.assemble(x));
        arma::mat p_inv;
        if (!arma::inv_sympd(p_inv, p)) return false;
        const auto& basis = *cone.basis;
        const int nb = (int)basis.size();
        std::vector<arma::mat> tj(nb);
        for (int b = 0; b < nb; ++b) {
            tj[b] = p_inv * basis[b];
            g(cone.offset + b) -= arma::trace(tj[b]);
        }
        for (int b = 0; b < nb; ++b)
            for (int d = b; d < nb; ++d) {
                const double v = arma::accu(tj[b] % tj[d].t());
                h(cone.offset + b, cone.offset + d) += v;
                if (d != b) h(cone.offset + d, cone.offset + b) += v;
            }
    }
    return true;
}

}  // namespace detail

/// Path-following barrier method from a strictly feasible start.
inline IpmResult solve(const Problem& pb, arma::vec x, const SolveOptions& opt = {}) {
    IpmResult res;
    const double nu = pb.barrier_parameter();

    if (!std::isfinite(detail::barrier_value(pb, 1.0, x)))
        throw conditioning_error("ipm: start point is not strictly feasible");

    double t = nu / std::max(1.0, std::abs(arma::dot(pb.maximize, x)));
    arma::vec g;
    arma::mat h;

    for (int stage = 0; stage < 64 && res.newton_iters < opt.max_newton; ++stage) {
        // center for the current t
        for (;;) {
            if (!detail::barrier_grad_hess(pb, t, x, g, h)) {
                res.x = x;
                return res;  // should not happen from a feasible path
            }
            arma::vec step;
            double ridge = 1e-12 * (1.0 + arma::abs(h.diag()).max());
            bool solved = false;
            for (int attempt = 0; attempt < 6 && !solved; ++attempt) {
                solved = arma::solve(step, h + ridge * arma::eye(pb.n, pb.n), -g,
                                     arma::solve_opts::likely_sympd + arma::solve_opts::no_approx);
                ridge *= 100.0;
            }
            if (!solved) {
                res.x = x;
                return res;
            }

            const double decrement = -arma::dot(g, step);
            if (decrement * 0.5 < opt.newton_tol) break;

            const double base = detail::barrier_value(pb, t, x);
            double s = 1.0;
            int ls = 0;
            for (; ls < opt.max_line_search; ++ls) {
                const double cand = detail::barrier_value(pb, t, x + s * step);
                if (cand <= base - 0.01 * s * decrement) break;
                s *= 0.5;
            }
            if (ls == opt.max_line_search) break;  // stalled; accept center as-is
            x += s * step;
            if (++res.newton_iters >= opt.max_newton) break;
        }

        res.gap = nu / t;
        const double obj = arma::dot(pb.maximize, x);
        if (res.gap <= opt.gap_abs + opt.gap_rel * std::abs(obj)) {
            res.converged = true;
            break;
        }
        t *= opt.mu;
    }

    res.x = x;
    return res;
}

}  // namespace risbc::ipm
