// SPDX-License-Identifier: Apache-2.0
//
// Rate-region sweeps: runs the alternating optimization over a grid of
// weight vectors for one scheme, plus the TDMA time-sharing baseline.

#pragma once

#include <armadillo>
#include <atomic>
#include <thread>
#include <vector>

#include "risbc/ao.hpp"
#include "risbc/types.hpp"

namespace risbc {

struct SweepOptions {
    AoOptions ao;
    int n_threads = 1;
    int ts_points = 101;  // tau grid of the time-sharing segment
};

/// Boundary sweep for a two-user scene: alpha_1 in {0, 1/(n-1), ..., 1},
/// each point an independent run. Per-point failures are recorded in the
/// point (converged = false), the sweep continues.
inline std::vector<RegionPoint> sweep_region(const ComplexScene& scene, const IqiProfile& profile,
                                             const SchemeConfig& scheme, int n_alpha,
                                             const SweepOptions& opts = {}) {
    if (scene.dims.n_users != 2)
        throw config_error("sweep_region: weight grid sweeps are defined for two users");
    if (n_alpha < 2) throw config_error("sweep_region: need at least two weight points");

    std::vector<RegionPoint> points(n_alpha);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_alpha) return;
            const double a1 = (double)i / (n_alpha - 1);
            const arma::vec alpha{a1, 1.0 - a1};
            try {
                points[i] = run_ao(scene, profile, scheme, alpha, opts.ao).point;
            } catch (const std::exception&) {
                points[i] = RegionPoint{alpha, arma::vec(2, arma::fill::zeros), scheme.label,
                                        false, 0, {}};
            }
        }
    };

    const int nt = std::max(1, opts.n_threads);
    if (nt == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return points;
}

/// Scene restricted to a single user (for single-user capacity runs).
inline ComplexScene single_user_scene(const ComplexScene& scene, int k) {
    ComplexScene s = scene;
    s.dims.n_users = 1;
    s.F = {scene.F[k]};
    if (scene.dims.n_ris > 0) s.G = {scene.G[k]};
    else s.G.clear();
    return s;
}

inline IqiProfile single_user_profile(const IqiProfile& profile, int k) {
    IqiProfile p = profile;
    p.rx_amplitude = {profile.rx_amplitude[k]};
    p.rx_phase = {profile.rx_phase[k]};
    return p;
}

/// TDMA with time sharing: each user gets the full power budget in its slot
/// (RIS re-optimized per user when enabled); the boundary is the segment
/// between the two single-user maxima.
inline std::vector<RegionPoint> tdma_timesharing(const ComplexScene& scene,
                                                 const IqiProfile& profile,
                                                 const SweepOptions& opts = {},
                                                 bool with_ris = false) {
    if (scene.dims.n_users != 2)
        throw config_error("tdma_timesharing: defined for two users");

    SchemeConfig solo;
    solo.signaling = Signaling::improper;
    solo.access = SchemeConfig::Access::tin;
    solo.ris = with_ris && scene.dims.n_ris > 0;
    solo.label = "TS";

    arma::vec peak(2);
    bool conv = true;
    int iters = 0;
    for (int k = 0; k < 2; ++k) {
        const auto res = run_ao(single_user_scene(scene, k), single_user_profile(profile, k),
                                solo, arma::vec{1.0}, opts.ao);
        peak(k) = res.point.rates(0);
        conv = conv && res.point.converged;
        iters += res.point.iterations;
    }

    std::vector<RegionPoint> points(opts.ts_points);
    for (int i = 0; i < opts.ts_points; ++i) {
        const double tau = (double)i / (opts.ts_points - 1);
        points[i] = RegionPoint{arma::vec{tau, 1.0 - tau},
                                arma::vec{tau * peak(0), (1.0 - tau) * peak(1)},
                                "TS", conv, iters, {}};
    }
    return points;
}

}  // namespace risbc
