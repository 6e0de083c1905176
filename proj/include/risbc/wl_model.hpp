// SPDX-License-Identifier: Apache-2.0
//
// Widely-linear transceiver model. Converts the complex scene (channels,
// RIS phases, I/Q imbalance parameters) into real-decomposed effective
// channels and effective noise covariances.
//
// An imbalanced branch distorts a signal z into c1 z + c2 z*, so the whole
// transmit-channel-receive chain is widely linear. On [Re; Im] stacked
// vectors every such map becomes an ordinary real matrix, which is what the
// rate expressions and the optimizer work with.

#pragma once

#include <armadillo>
#include <complex>
#include <vector>

#include "risbc/linalg.hpp"
#include "risbc/types.hpp"

namespace risbc {

/// Coefficient matrices of the transmit and per-user receive widely-linear
/// distortions: the device applies z -> direct * z + conj_part * z*.
/// A perfect device has direct = I and conj_part = 0.
struct IqiMatrices {
    arma::cx_mat tx_direct;   // V1
    arma::cx_mat tx_conj;     // V2
    std::vector<arma::cx_mat> rx_direct;  // Gamma1 per user
    std::vector<arma::cx_mat> rx_conj;    // Gamma2 per user
};

/// Per-antenna widely-linear imbalance model:
///   V1 = 1/2 diag(1 + a_t e^{+j phi_t}),   V2 = 1/2 diag(1 - a_t e^{-j phi_t})
///   G1 = 1/2 diag(1 + a_r e^{-j phi_r}),   G2 = 1/2 diag(1 - a_r e^{+j phi_r})
/// Both reduce to (I, 0) at amplitude 1, phase 0.
inline IqiMatrices build_iqi_matrices(const IqiProfile& profile) {
    profile.validate();
    using cx = std::complex<double>;
    const cx j(0.0, 1.0);

    const int n_bs = (int)profile.tx_amplitude.n_elem;
    arma::cx_vec v1(n_bs), v2(n_bs);
    for (int i = 0; i < n_bs; ++i) {
        const double a = profile.tx_amplitude(i), p = profile.tx_phase(i);
        v1(i) = 0.5 * (1.0 + a * std::exp(j * p));
        v2(i) = 0.5 * (1.0 - a * std::exp(-j * p));
    }

    IqiMatrices m;
    m.tx_direct = arma::diagmat(v1);
    m.tx_conj = arma::diagmat(v2);

    const int n_users = (int)profile.rx_amplitude.size();
    m.rx_direct.reserve(n_users);
    m.rx_conj.reserve(n_users);
    for (int k = 0; k < n_users; ++k) {
        const int n_rx = (int)profile.rx_amplitude[k].n_elem;
        arma::cx_vec g1(n_rx), g2(n_rx);
        for (int i = 0; i < n_rx; ++i) {
            const double a = profile.rx_amplitude[k](i), p = profile.rx_phase[k](i);
            g1(i) = 0.5 * (1.0 + a * std::exp(-j * p));
            g2(i) = 0.5 * (1.0 - a * std::exp(j * p));
        }
        m.rx_direct.push_back(arma::diagmat(g1));
        m.rx_conj.push_back(arma::diagmat(g2));
    }
    return m;
}

/// Effective complex channel of user k: G_k diag(theta) G0 + F_k.
inline arma::cx_mat compose_effective_channel(const ComplexScene& scene, const RisPhases& theta,
                                              int k) {
    scene.validate();
    if (k < 0 || k >= scene.dims.n_users) throw config_error("compose_effective_channel: bad user index");
    if (scene.dims.n_ris == 0) return scene.F[k];
    if ((int)theta.theta.n_elem != scene.dims.n_ris)
        throw config_error("compose_effective_channel: phase vector length mismatch");
    return scene.G[k] * arma::diagmat(theta.theta) * scene.G0 + scene.F[k];
}

/// Real matrix acting on [Re; Im] stacks that represents x -> A x + B x*.
inline arma::mat wl_real_matrix(const arma::cx_mat& a, const arma::cx_mat& b) {
    const arma::cx_mat sum = a + b;   // multiplies Re x
    const arma::cx_mat dif = a - b;   // multiplies j Im x
    return arma::join_cols(arma::join_rows(arma::mat(arma::real(sum)), arma::mat(-arma::imag(dif))),
                           arma::join_rows(arma::mat(arma::imag(sum)), arma::mat(arma::real(dif))));
}

/// Real-decomposes one user's chain: transmit imbalance, complex channel h,
/// receive imbalance, and proper noise with variance sigma2.
inline RealLink real_decompose(const arma::cx_mat& h, const arma::cx_mat& v1, const arma::cx_mat& v2,
                               const arma::cx_mat& g1, const arma::cx_mat& g2, double sigma2) {
    if (h.n_cols != v1.n_rows || v1.n_rows != v2.n_rows || g1.n_cols != h.n_rows ||
        g2.n_cols != h.n_rows)
        throw config_error("real_decompose: dimension mismatch");

    // y = G1 (H (V1 x + V2 x*) + n) + G2 (H (V1 x + V2 x*) + n)*
    //   = (G1 H V1 + G2 H* V2*) x + (G1 H V2 + G2 H* V1*) x* + G1 n + G2 n*
    const arma::cx_mat hc = arma::conj(h);
    const arma::cx_mat a_eff = g1 * h * v1 + g2 * hc * arma::conj(v2);
    const arma::cx_mat b_eff = g1 * h * v2 + g2 * hc * arma::conj(v1);

    RealLink link;
    link.H = wl_real_matrix(a_eff, b_eff);

    // Proper n with E[n n^H] = sigma2 I has real covariance (sigma2/2) I, so
    // the effective noise G1 n + G2 n* has covariance (sigma2/2) M M^T with
    // M the real image of the receive distortion.
    const arma::mat m = wl_real_matrix(g1, g2);
    link.Cn = symmetrize(0.5 * sigma2 * m * m.t());
    return link;
}

/// Real-decomposed links of every user for a given phase configuration.
inline std::vector<RealLink> build_real_links(const ComplexScene& scene, const IqiMatrices& iqi,
                                              const RisPhases& theta) {
    std::vector<RealLink> links;
    links.reserve(scene.dims.n_users);
    for (int k = 0; k < scene.dims.n_users; ++k) {
        const arma::cx_mat h = compose_effective_channel(scene, theta, k);
        links.push_back(real_decompose(h, iqi.tx_direct, iqi.tx_conj, iqi.rx_direct[k],
                                       iqi.rx_conj[k], scene.sigma2));
    }
    return links;
}

/// Applies the widely-linear chain directly in the complex domain; the
/// real-decomposed H must reproduce this exactly.
inline arma::cx_vec apply_wl_chain(const arma::cx_mat& h, const arma::cx_mat& v1,
                                   const arma::cx_mat& v2, const arma::cx_mat& g1,
                                   const arma::cx_mat& g2, const arma::cx_vec& x) {
    const arma::cx_vec tx = v1 * x + v2 * arma::conj(x);
    const arma::cx_vec yr = h * tx;
    return g1 * yr + g2 * arma::conj(yr);
}

}  // namespace risbc
