// SPDX-License-Identifier: Apache-2.0
//
// Concave minorants used by the alternating optimization. Rates are
// differences of concave log-det terms; each bound keeps the concave part
// and replaces the subtracted part by its tangent plane at the expansion
// point, so the bound is tight there and never exceeds the exact rate.
// The RIS-phase bounds are concave quadratics in the stacked [Re; Im]
// phase vector.

#pragma once

#include <armadillo>
#include <vector>

#include "risbc/linalg.hpp"
#include "risbc/rates.hpp"
#include "risbc/types.hpp"
#include "risbc/wl_model.hpp"

namespace risbc {

/// Covariance-block minorant of one rate term:
///   r~({P}) = 1/(2 ln 2) * ln det(Cn + sum_{v in logdet_vars} H P_v H^T)
///           + sum_(v,C) trace(C P_v) + constant
/// Message indexing: 0..K-1 are the private covariances, K is the common one.
struct CovarianceSurrogate {
    arma::mat H;
    arma::mat Cn;
    std::vector<int> logdet_vars;
    std::vector<std::pair<int, arma::mat>> linear;
    double constant = 0.0;

    double eval(const std::vector<arma::mat>& covs) const {
        arma::mat s = Cn;
        for (int v : logdet_vars) s += H * covs[v] * H.t();
        double r = 0.5 * log2det_sympd(s) + constant;
        for (const auto& [v, c] : linear) r += arma::accu(c % covs[v]);
        return r;
    }
};

/// Covariance list in message order (privates then common) for surrogate eval.
inline std::vector<arma::mat> surrogate_msg_list(const CovarianceSet& cov) {
    std::vector<arma::mat> covs = cov.P;
    covs.push_back(cov.P_c);
    return covs;
}

namespace detail {

/// Inverse of the interference-plus-noise covariance at the expansion point,
/// summing H P_i H^T over the given message indices.
inline arma::mat expansion_inverse(const RealLink& link, const std::vector<arma::mat>& covs_prev,
                                   const std::vector<int>& vars) {
    arma::mat s = link.Cn;
    for (int v : vars) s += link.H * covs_prev[v] * link.H.t();
    arma::mat inv;
    if (!arma::inv_sympd(inv, symmetrize(s)))
        throw conditioning_error("surrogate: singular interference-plus-noise covariance");
    return inv;
}

}  // namespace detail

/// Minorant of the private rate of user k around {P^(t-1)}: the term with
/// user k's own message stays exact, the interference term is linearized.
inline CovarianceSurrogate build_private_cov_bound(const std::vector<RealLink>& links,
                                                   const CovarianceSet& cov_prev, int k) {
    const int n_users = (int)links.size();
    const RealLink& link = links[k];
    const auto covs_prev = surrogate_msg_list(cov_prev);

    CovarianceSurrogate s;
    s.H = link.H;
    s.Cn = link.Cn;
    for (int i = 0; i < n_users; ++i) s.logdet_vars.push_back(i);

    std::vector<int> interf;
    for (int i = 0; i < n_users; ++i)
        if (i != k) interf.push_back(i);

    const arma::mat w = detail::expansion_inverse(link, covs_prev, interf);
    const arma::mat d = symmetrize(link.H.t() * w * link.H / (2.0 * kLn2));

    arma::mat s_prev = link.Cn;
    for (int i : interf) s_prev += link.H * covs_prev[i] * link.H.t();
    s.constant = -0.5 * log2det_sympd(s_prev);
    for (int j : interf) {
        s.linear.emplace_back(j, -d);
        s.constant += arma::accu(d % covs_prev[j]);
    }
    return s;
}

/// Minorant of the common rate as decoded by user k: every private message
/// interferes, the common covariance stays inside the exact log-det.
inline CovarianceSurrogate build_common_cov_bound(const std::vector<RealLink>& links,
                                                  const CovarianceSet& cov_prev, int k) {
    const int n_users = (int)links.size();
    const RealLink& link = links[k];
    const auto covs_prev = surrogate_msg_list(cov_prev);

    CovarianceSurrogate s;
    s.H = link.H;
    s.Cn = link.Cn;
    for (int i = 0; i <= n_users; ++i) s.logdet_vars.push_back(i);  // privates + common

    std::vector<int> interf;
    for (int i = 0; i < n_users; ++i) interf.push_back(i);

    const arma::mat w = detail::expansion_inverse(link, covs_prev, interf);
    const arma::mat d = symmetrize(link.H.t() * w * link.H / (2.0 * kLn2));

    arma::mat s_prev = link.Cn;
    for (int i : interf) s_prev += link.H * covs_prev[i] * link.H.t();
    s.constant = -0.5 * log2det_sympd(s_prev);
    for (int j : interf) {
        s.linear.emplace_back(j, -d);
        s.constant += arma::accu(d % covs_prev[j]);
    }
    return s;
}

/// Real-affine dependence of one user's real-decomposed channel on the
/// stacked [Re theta; Im theta] phase vector. Built by probing the exact
/// model at unit phase vectors; exact because the chain is real-affine.
struct ChannelAffineMap {
    arma::mat base;                // H at theta = 0
    std::vector<arma::mat> basis;  // d/du_m H, m = 0..2M-1

    arma::mat eval(const arma::vec& u) const {
        arma::mat h = base;
        for (arma::uword m = 0; m < u.n_elem; ++m)
            if (u(m) != 0.0) h += u(m) * basis[m];
        return h;
    }
};

inline std::vector<ChannelAffineMap> build_channel_maps(const ComplexScene& scene,
                                                        const IqiMatrices& iqi) {
    const int m = scene.dims.n_ris;
    std::vector<ChannelAffineMap> maps(scene.dims.n_users);
    for (int k = 0; k < scene.dims.n_users; ++k) {
        auto decompose_at = [&](const arma::cx_vec& th) {
            const arma::cx_mat h = scene.G[k] * arma::diagmat(th) * scene.G0 + scene.F[k];
            return real_decompose(h, iqi.tx_direct, iqi.tx_conj, iqi.rx_direct[k], iqi.rx_conj[k],
                                  scene.sigma2)
                .H;
        };
        arma::cx_vec zero(m, arma::fill::zeros);
        maps[k].base = decompose_at(zero);
        maps[k].basis.resize(2 * m);
        for (int i = 0; i < m; ++i) {
            arma::cx_vec e = zero;
            e(i) = 1.0;
            maps[k].basis[i] = decompose_at(e) - maps[k].base;
            e(i) = arma::cx_double(0.0, 1.0);
            maps[k].basis[m + i] = decompose_at(e) - maps[k].base;
        }
    }
    return maps;
}

/// Phase-block minorant: a concave quadratic
///   r^(u) = constant + lin' u - 1/2 u' quad u,   quad PSD,
/// in u = [Re theta; Im theta].
struct PhaseSurrogate {
    double constant = 0.0;
    arma::vec lin;
    arma::mat quad;

    double eval(const arma::vec& u) const {
        return constant + arma::dot(lin, u) - 0.5 * arma::dot(u, quad * u);
    }
};

namespace detail {

/// Accumulates trace(M X(u) X(u)^T) for the affine family X(u) = x0 + sum u_d xd
/// into (constant, linear, quadratic) pieces. M must be symmetric.
struct QuadAccum {
    double c = 0.0;
    arma::vec g;
    arma::mat q;

    explicit QuadAccum(int n) : g(n, arma::fill::zeros), q(n, n, arma::fill::zeros) {}

    void add(const arma::mat& m, const arma::mat& x0, const std::vector<arma::mat>& xd,
             double scale) {
        const int n = (int)xd.size();
        const arma::mat mx0 = m * x0;
        c += scale * arma::accu(mx0 % x0);
        std::vector<arma::mat> mxd(n);
        for (int d = 0; d < n; ++d) {
            mxd[d] = m * xd[d];
            g(d) += 2.0 * scale * arma::accu(mx0 % xd[d]);
        }
        for (int d = 0; d < n; ++d)
            for (int e = d; e < n; ++e) {
                const double v = scale * arma::accu(mxd[d] % xd[e]);
                q(d, e) += v;
                if (e != d) q(e, d) += v;
            }
    }
};

inline PhaseSurrogate build_phase_bound(const ChannelAffineMap& map, const arma::mat& cn,
                                        const arma::mat& own_root,
                                        const std::vector<arma::mat>& interf_roots,
                                        const arma::cx_vec& theta_prev, double exact_prev) {
    const int n = (int)map.basis.size();
    const arma::vec u_prev = real_stack(theta_prev);
    const arma::mat h_prev = map.eval(u_prev);

    const arma::mat v_bar = h_prev * own_root;
    arma::mat y_bar = cn;
    for (const auto& r : interf_roots) {
        const arma::mat w = h_prev * r;
        y_bar += w * w.t();
    }
    y_bar = symmetrize(y_bar);

    arma::mat y_bar_inv;
    if (!arma::inv_sympd(y_bar_inv, y_bar))
        throw conditioning_error("phase bound: singular interference covariance at expansion");
    arma::mat full_inv;
    if (!arma::inv_sympd(full_inv, symmetrize(v_bar * v_bar.t() + y_bar)))
        throw conditioning_error("phase bound: singular signal-plus-interference covariance");
    const arma::mat gap = symmetrize(y_bar_inv - full_inv);  // PSD

    // trace(gap * [V V^T + Y]) collected as a quadratic in u
    QuadAccum acc(n);
    std::vector<arma::mat> vd(n), xd(n);
    for (int d = 0; d < n; ++d) vd[d] = map.basis[d] * own_root;
    acc.add(gap, map.base * own_root, vd, 1.0);
    for (const auto& r : interf_roots) {
        for (int d = 0; d < n; ++d) xd[d] = map.basis[d] * r;
        acc.add(gap, map.base * r, xd, 1.0);
    }
    const double quad_const = acc.c + arma::accu(gap % cn);

    // trace(Vbar^T Ybar^{-1} V(u)) is affine in u
    const arma::mat cross = y_bar_inv * v_bar;  // trace(cross^T V(u))
    const double affine_const = arma::accu(cross % (map.base * own_root));
    arma::vec affine_lin(n);
    for (int d = 0; d < n; ++d) affine_lin(d) = arma::accu(cross % vd[d]);

    const double k2 = 1.0 / (2.0 * kLn2);
    PhaseSurrogate s;
    s.constant = exact_prev - k2 * arma::accu((v_bar * v_bar.t()) % y_bar_inv) - k2 * quad_const +
                 2.0 * k2 * affine_const;
    s.lin = -k2 * acc.g + 2.0 * k2 * affine_lin;
    s.quad = symmetrize(acc.q / kLn2);
    return s;
}

}  // namespace detail

/// Minorant of user k's private rate as a function of the RIS phases, tight
/// at theta_prev. Covariances are held fixed at the current iterate.
inline PhaseSurrogate build_private_phase_bound(const std::vector<ChannelAffineMap>& maps,
                                                const std::vector<RealLink>& links_prev,
                                                const CovarianceSet& cov, int k,
                                                const arma::cx_vec& theta_prev) {
    const int n_users = (int)maps.size();
    std::vector<arma::mat> interf_roots;
    for (int i = 0; i < n_users; ++i)
        if (i != k) interf_roots.push_back(sqrt_psd(cov.P[i]));
    const double exact_prev = private_rate(links_prev[k], cov, k);
    return detail::build_phase_bound(maps[k], links_prev[k].Cn, sqrt_psd(cov.P[k]), interf_roots,
                                     theta_prev, exact_prev);
}

/// Minorant of the common rate decoded at user k as a function of the RIS
/// phases; every private message interferes.
inline PhaseSurrogate build_common_phase_bound(const std::vector<ChannelAffineMap>& maps,
                                               const std::vector<RealLink>& links_prev,
                                               const CovarianceSet& cov, int k,
                                               const arma::cx_vec& theta_prev) {
    const int n_users = (int)maps.size();
    std::vector<arma::mat> interf_roots;
    for (int i = 0; i < n_users; ++i) interf_roots.push_back(sqrt_psd(cov.P[i]));
    const double exact_prev = common_rate_at_user(links_prev[k], cov, k);
    return detail::build_phase_bound(maps[k], links_prev[k].Cn, sqrt_psd(cov.P_c), interf_roots,
                                     theta_prev, exact_prev);
}

/// Tangent-plane relaxation of |theta_n| = 1: the affine condition
///   2 Re(conj(theta_prev_n) theta_n) - |theta_prev_n|^2 >= 1 - epsilon,
/// satisfied with slack epsilon at theta_n = theta_prev_n.
struct ModulusCut {
    double coef_re = 0.0;  // coefficient of Re theta_n
    double coef_im = 0.0;  // coefficient of Im theta_n
    double offset = 0.0;   // constraint: coef_re x + coef_im y + offset >= 0

    double slack(arma::cx_double theta_n) const {
        return coef_re * theta_n.real() + coef_im * theta_n.imag() + offset;
    }
};

inline std::vector<ModulusCut> linearize_unit_modulus(const arma::cx_vec& theta_prev,
                                                      double epsilon) {
    if (epsilon <= 0.0) throw config_error("linearize_unit_modulus: epsilon must be > 0");
    std::vector<ModulusCut> cuts(theta_prev.n_elem);
    for (arma::uword n = 0; n < theta_prev.n_elem; ++n) {
        const double mag = std::abs(theta_prev(n));
        if (std::abs(mag - 1.0) > 1e-6)
            throw config_error("linearize_unit_modulus: expansion phases must be unit modulus");
        cuts[n].coef_re = 2.0 * theta_prev(n).real();
        cuts[n].coef_im = 2.0 * theta_prev(n).imag();
        cuts[n].offset = -(mag * mag) - 1.0 + epsilon;
    }
    return cuts;
}

}  // namespace risbc
