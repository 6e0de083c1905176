// SPDX-License-Identifier: Apache-2.0
//
// Rate engine: common and private decoding rates of the 1-layer rate
// splitting scheme, evaluated on real-decomposed links and real transmit
// covariances. All rates are in bits/s/Hz (log base 2).

#pragma once

#include <armadillo>
#include <vector>

#include "risbc/linalg.hpp"
#include "risbc/types.hpp"

namespace risbc {

enum class Signaling { proper, improper };

/// Transmit covariances of the common message and of each private message,
/// plus the common-rate allocation vector. All matrices are real symmetric
/// 2 n_bs x 2 n_bs, PSD, with trace(P_c) + sum_k trace(P_k) within budget.
struct CovarianceSet {
    arma::mat P_c;
    std::vector<arma::mat> P;  // one per user
    arma::vec rc_alloc;        // bits/s/Hz per user

    int n_users() const { return (int)P.size(); }

    double total_power() const {
        double tr = P_c.n_elem ? arma::trace(P_c) : 0.0;
        for (const auto& p : P) tr += arma::trace(p);
        return tr;
    }

    void validate(double power_budget, double psd_tol = 1e-9) const {
        if (P_c.n_elem && !is_psd(P_c, psd_tol))
            throw constraint_error("covariance set: common covariance not PSD");
        for (const auto& p : P)
            if (!is_psd(p, psd_tol)) throw constraint_error("covariance set: private covariance not PSD");
        if (total_power() > power_budget + 1e-9)
            throw constraint_error("covariance set: power budget exceeded");
        if (rc_alloc.n_elem && rc_alloc.min() < -1e-12)
            throw constraint_error("covariance set: negative common-rate allocation");
    }

    /// Uniform white split of the budget over the given number of messages.
    static CovarianceSet uniform_white(int n_users, int n_bs, double power_budget,
                                       bool with_common) {
        CovarianceSet c;
        const int n_msgs = n_users + (with_common ? 1 : 0);
        const double per_msg = n_msgs > 0 ? power_budget / n_msgs : 0.0;
        const arma::mat white = (per_msg / (2.0 * n_bs)) * arma::eye(2 * n_bs, 2 * n_bs);
        c.P.assign(n_users, white);
        c.P_c = with_common ? white : arma::mat(2 * n_bs, 2 * n_bs, arma::fill::zeros);
        c.rc_alloc = arma::vec(n_users, arma::fill::zeros);
        return c;
    }
};

/// Nearest (Frobenius) symmetric matrix commuting with the complex
/// structure J: the real image of a proper complex covariance.
inline arma::mat project_proper(const arma::mat& p) {
    const arma::mat j = complex_structure((int)p.n_rows / 2);
    return 0.5 * (p + j * p * j.t());
}

inline bool is_proper_structured(const arma::mat& p, double tol = 1e-8) {
    const arma::mat j = complex_structure((int)p.n_rows / 2);
    const double scale = std::max(1.0, arma::norm(p, "fro"));
    return arma::norm(j * p * j.t() - p, "fro") <= tol * scale;
}

namespace detail {

/// Noise-plus-signal covariance C + sum over the given covariances of H P H^T.
inline arma::mat received_cov(const RealLink& link, const std::vector<const arma::mat*>& covs) {
    arma::mat s = link.Cn;
    for (const arma::mat* p : covs) s += link.H * (*p) * link.H.t();
    return symmetrize(s);
}

}  // namespace detail

/// Rate of the common message as decodable by user k: all private messages
/// act as interference.
inline double common_rate_at_user(const RealLink& link, const CovarianceSet& cov, int k) {
    (void)k;
    std::vector<const arma::mat*> interf;
    for (const auto& p : cov.P) interf.push_back(&p);
    const arma::mat denom = detail::received_cov(link, interf);
    interf.push_back(&cov.P_c);
    const arma::mat num = detail::received_cov(link, interf);
    return 0.5 * (log2det_sympd(num) - log2det_sympd(denom));
}

/// The common message must be decodable by everyone.
inline double common_rate(const std::vector<RealLink>& links, const CovarianceSet& cov) {
    double r = arma::datum::inf;
    for (int k = 0; k < (int)links.size(); ++k) r = std::min(r, common_rate_at_user(links[k], cov, k));
    return r;
}

/// Private rate of user k after the common message has been decoded and
/// canceled; other users' private messages remain as interference.
inline double private_rate(const RealLink& link, const CovarianceSet& cov, int k) {
    std::vector<const arma::mat*> interf;
    for (int i = 0; i < cov.n_users(); ++i)
        if (i != k) interf.push_back(&cov.P[i]);
    const arma::mat denom = detail::received_cov(link, interf);
    interf.push_back(&cov.P[k]);
    const arma::mat num = detail::received_cov(link, interf);
    return 0.5 * (log2det_sympd(num) - log2det_sympd(denom));
}

/// Total rate of user k: private rate plus its share of the common rate.
inline double user_total_rate(const std::vector<RealLink>& links, const CovarianceSet& cov, int k) {
    if (cov.rc_alloc.n_elem) {
        if (arma::sum(cov.rc_alloc) > common_rate(links, cov) + 1e-9)
            throw constraint_error("user_total_rate: allocation exceeds the common rate");
    }
    const double rc = cov.rc_alloc.n_elem ? cov.rc_alloc(k) : 0.0;
    return private_rate(links[k], cov, k) + rc;
}

/// Gradient of private_rate(k) in P_j, as the symmetric matrix G with
/// d/dt r(P_j + t D) = trace(G D) for symmetric D.
inline arma::mat private_rate_gradient(const RealLink& link, const CovarianceSet& cov, int k,
                                       int j) {
    std::vector<const arma::mat*> interf;
    for (int i = 0; i < cov.n_users(); ++i)
        if (i != k) interf.push_back(&cov.P[i]);
    const arma::mat denom = detail::received_cov(link, interf);
    interf.push_back(&cov.P[k]);
    const arma::mat num = detail::received_cov(link, interf);

    const arma::mat num_inv = arma::inv_sympd(num);
    if (j == k) return symmetrize(link.H.t() * num_inv * link.H / (2.0 * kLn2));
    const arma::mat denom_inv = arma::inv_sympd(denom);
    return symmetrize(link.H.t() * (num_inv - denom_inv) * link.H / (2.0 * kLn2));
}

/// Exact per-user rates and best min-weighted rate for fixed covariances:
/// spends the common rate budget r_c = min_k rbar_ck to maximize
/// min_k (r_pk + r_ck)/alpha_k. Users with alpha_k = 0 get no allocation
/// and do not constrain the objective.
struct ExactPoint {
    double objective = 0.0;      // min over alpha_k > 0 of r_k / alpha_k
    arma::vec rates;             // r_k = r_pk + r_ck
    arma::vec private_rates;     // r_pk
    arma::vec allocation;        // r_ck
    double common = 0.0;         // r_c
};

/// Spends a common-rate budget to maximize min_k (base_k + rc_k)/alpha_k:
/// maximize t subject to sum_k max(0, alpha_k t - base_k) <= budget over the
/// users with positive weight. Piecewise linear in t, solved exactly at the
/// breakpoints. Users with alpha_k = 0 receive nothing.
struct CommonSplit {
    double objective = 0.0;
    arma::vec allocation;
};

inline CommonSplit best_common_split(const arma::vec& base, double budget,
                                     const arma::vec& alpha) {
    const int n = (int)base.n_elem;
    std::vector<int> active;
    for (int k = 0; k < n; ++k)
        if (alpha(k) > 0.0) active.push_back(k);
    if (active.empty()) throw config_error("best_common_split: all weights are zero");

    // breakpoints where another user starts needing common rate
    std::vector<std::pair<double, double>> brk;  // (t_k, alpha_k)
    for (int k : active) brk.emplace_back(base(k) / alpha(k), alpha(k));
    std::sort(brk.begin(), brk.end());

    double t = brk.front().first;  // budget need is zero up to here
    if (budget > 0.0) {
        double cur = t, slope = 0.0, used = 0.0;
        std::size_t i = 0;
        for (;;) {
            while (i < brk.size() && brk[i].first <= cur + 1e-15) slope += brk[i++].second;
            const double next = (i < brk.size()) ? brk[i].first : arma::datum::inf;
            const double reach = cur + (budget - used) / slope;
            if (reach <= next) {
                t = reach;
                break;
            }
            used += slope * (next - cur);
            cur = next;
        }
    }

    CommonSplit out;
    out.objective = t;
    out.allocation = arma::vec(n, arma::fill::zeros);
    for (int k : active) out.allocation(k) = std::max(0.0, alpha(k) * t - base(k));
    return out;
}

inline ExactPoint evaluate_exact(const std::vector<RealLink>& links, const CovarianceSet& cov,
                                 const arma::vec& alpha, bool with_common) {
    const int n = (int)links.size();
    ExactPoint out;
    out.private_rates.set_size(n);
    for (int k = 0; k < n; ++k) out.private_rates(k) = private_rate(links[k], cov, k);
    out.common = with_common ? common_rate(links, cov) : 0.0;

    const CommonSplit split = best_common_split(out.private_rates, out.common, alpha);
    out.objective = split.objective;
    out.allocation = split.allocation;
    out.rates = out.private_rates + out.allocation;
    return out;
}

}  // namespace risbc
