// SPDX-License-Identifier: Apache-2.0
//
// Small dense symmetric-matrix helpers shared across the library.

#pragma once

#include <armadillo>
#include <cmath>
#include <numbers>

#include "risbc/types.hpp"

namespace risbc {

inline constexpr double kLn2 = std::numbers::ln2;

inline arma::mat symmetrize(const arma::mat& a) { return 0.5 * (a + a.t()); }

/// log2 det of a symmetric positive definite matrix via Cholesky.
inline double log2det_sympd(const arma::mat& s) {
    arma::mat r;
    if (!arma::chol(r, symmetrize(s)))
        throw conditioning_error("log2det_sympd: matrix is not positive definite");
    return 2.0 * arma::accu(arma::log2(r.diag().eval()));
}

inline bool is_psd(const arma::mat& s, double tol = 1e-9) {
    if (s.n_rows != s.n_cols) return false;
    arma::vec ev;
    if (!arma::eig_sym(ev, symmetrize(s))) return false;
    return ev.min() >= -tol;
}

/// Symmetric square root with negative eigenvalues clipped at zero.
inline arma::mat sqrt_psd(const arma::mat& p) {
    arma::vec ev;
    arma::mat v;
    if (!arma::eig_sym(ev, v, symmetrize(p)))
        throw conditioning_error("sqrt_psd: eigendecomposition failed");
    ev.transform([](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
    return v * arma::diagmat(ev) * v.t();
}

/// The real image of multiplication by the imaginary unit:
/// J = [[0, -I], [I, 0]] of size 2n x 2n.
inline arma::mat complex_structure(int n) {
    arma::mat j(2 * n, 2 * n, arma::fill::zeros);
    j.submat(0, n, n - 1, 2 * n - 1) = -arma::eye(n, n);
    j.submat(n, 0, 2 * n - 1, n - 1) = arma::eye(n, n);
    return j;
}

/// Stacks a complex vector as [Re; Im].
inline arma::vec real_stack(const arma::cx_vec& x) {
    return arma::join_cols(arma::real(x).eval(), arma::imag(x).eval());
}

inline arma::cx_vec complex_unstack(const arma::vec& v) {
    const arma::uword n = v.n_elem / 2;
    return arma::cx_vec(v.head(n), v.tail(n));
}

}  // namespace risbc
