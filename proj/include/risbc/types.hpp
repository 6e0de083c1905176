// SPDX-License-Identifier: Apache-2.0
//
// risbc -- achievable rate regions of RIS-assisted MIMO broadcast channels
// with 1-layer rate splitting, improper Gaussian signaling and transceiver
// I/Q imbalance.

#pragma once

#include <armadillo>
#include <stdexcept>
#include <string>
#include <vector>

namespace risbc {

/// Invalid scenario data, mismatched dimensions, or bad options.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure (a matrix that must be positive definite is not,
/// a factorization broke down, ...).
struct conditioning_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A quantity violates a model constraint (power budget, rate allocation, ...).
struct constraint_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Problem dimensions. n_ris == 0 means there is no RIS in the scene.
struct Dims {
    int n_users = 0;
    int n_bs = 0;   // BS transmit antennas
    int n_rx = 0;   // receive antennas per user
    int n_ris = 0;  // RIS elements

    bool operator==(const Dims&) const = default;
};

/// Complex channel matrices of one scenario instance.
///
/// F[k]  : n_rx x n_bs   direct BS -> user k channel
/// G[k]  : n_rx x n_ris  RIS -> user k channel
/// G0    : n_ris x n_bs  BS -> RIS channel
struct ComplexScene {
    Dims dims;
    std::vector<arma::cx_mat> F;
    std::vector<arma::cx_mat> G;
    arma::cx_mat G0;
    double sigma2 = 1.0;
    double power_budget = 10.0;

    void validate() const {
        if (dims.n_users <= 0 || dims.n_bs <= 0 || dims.n_rx <= 0 || dims.n_ris < 0)
            throw config_error("scene: non-positive dimensions");
        if (sigma2 <= 0.0) throw config_error("scene: sigma2 must be > 0");
        if (power_budget < 0.0) throw config_error("scene: power budget must be >= 0");
        if ((int)F.size() != dims.n_users) throw config_error("scene: wrong number of direct channels");
        for (const auto& f : F)
            if ((int)f.n_rows != dims.n_rx || (int)f.n_cols != dims.n_bs)
                throw config_error("scene: direct channel dimension mismatch");
        if (dims.n_ris > 0) {
            if ((int)G.size() != dims.n_users) throw config_error("scene: wrong number of RIS-user channels");
            for (const auto& g : G)
                if ((int)g.n_rows != dims.n_rx || (int)g.n_cols != dims.n_ris)
                    throw config_error("scene: RIS-user channel dimension mismatch");
            if ((int)G0.n_rows != dims.n_ris || (int)G0.n_cols != dims.n_bs)
                throw config_error("scene: BS-RIS channel dimension mismatch");
        }
    }
};

/// Unit-modulus RIS reflection coefficients.
struct RisPhases {
    arma::cx_vec theta;

    static RisPhases all_ones(int n) { return RisPhases{arma::cx_vec(n, arma::fill::ones)}; }

    bool feasible(double tol = 1e-12) const {
        for (const auto& t : theta)
            if (std::abs(std::abs(t) - 1.0) > tol) return false;
        return true;
    }
};

/// Per-antenna amplitude/phase imbalance of the transmitter and of each
/// receiver. Amplitudes are dimensionless gains, phases are radians.
/// amplitude = 1, phase = 0 everywhere models a perfect device.
struct IqiProfile {
    arma::vec tx_amplitude;
    arma::vec tx_phase;
    std::vector<arma::vec> rx_amplitude;
    std::vector<arma::vec> rx_phase;

    static IqiProfile perfect(const Dims& d) {
        IqiProfile p;
        p.tx_amplitude = arma::vec(d.n_bs, arma::fill::ones);
        p.tx_phase = arma::vec(d.n_bs, arma::fill::zeros);
        p.rx_amplitude.assign(d.n_users, arma::vec(d.n_rx, arma::fill::ones));
        p.rx_phase.assign(d.n_users, arma::vec(d.n_rx, arma::fill::zeros));
        return p;
    }

    /// Same imbalance on every antenna; same receiver profile for every user.
    static IqiProfile uniform(const Dims& d, double tx_amp, double tx_phase_rad,
                              double rx_amp, double rx_phase_rad) {
        IqiProfile p;
        p.tx_amplitude = arma::vec(d.n_bs, arma::fill::value(tx_amp));
        p.tx_phase = arma::vec(d.n_bs, arma::fill::value(tx_phase_rad));
        p.rx_amplitude.assign(d.n_users, arma::vec(d.n_rx, arma::fill::value(rx_amp)));
        p.rx_phase.assign(d.n_users, arma::vec(d.n_rx, arma::fill::value(rx_phase_rad)));
        return p;
    }

    void validate() const {
        if (tx_amplitude.n_elem != tx_phase.n_elem)
            throw config_error("iqi: tx amplitude/phase length mismatch");
        if (rx_amplitude.size() != rx_phase.size())
            throw config_error("iqi: rx amplitude/phase user count mismatch");
        if (arma::any(tx_amplitude <= 0.0)) throw config_error("iqi: tx amplitude must be > 0");
        for (const auto& a : rx_amplitude)
            if (arma::any(a <= 0.0)) throw config_error("iqi: rx amplitude must be > 0");
    }

    bool is_perfect(double tol = 0.0) const {
        auto near = [tol](const arma::vec& v, double ref) {
            return arma::all(arma::abs(v - ref) <= tol);
        };
        if (!near(tx_amplitude, 1.0) || !near(tx_phase, 0.0)) return false;
        for (const auto& a : rx_amplitude)
            if (!near(a, 1.0)) return false;
        for (const auto& p : rx_phase)
            if (!near(p, 0.0)) return false;
        return true;
    }
};

/// Real-decomposed effective channel of one user: H maps the stacked
/// [Re; Im] transmit vector to the stacked [Re; Im] receive vector, and
/// Cn is the covariance of the real-decomposed effective noise.
struct RealLink {
    arma::mat H;   // 2 n_rx x 2 n_bs
    arma::mat Cn;  // 2 n_rx x 2 n_rx, symmetric positive definite
};

/// One point of an achievable-rate-region boundary.
struct RegionPoint {
    arma::vec alpha;
    arma::vec rates;  // bits/s/Hz per user
    std::string scheme;
    bool converged = false;
    int iterations = 0;
    std::vector<double> trace;  // objective per outer iteration
};

}  // namespace risbc
