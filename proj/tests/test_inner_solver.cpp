// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "risbc/inner_solver.hpp"
#include "risbc/surrogate.hpp"

using namespace risbc;

namespace {

arma::mat random_psd(int n, double trace_target, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    arma::mat a(n, n);
    for (auto& v : a) v = nd(rng);
    arma::mat p = a * a.t();
    return p * (trace_target / arma::trace(p));
}

RealLink scalar_link(arma::cx_double h, double sigma2) {
    const auto eye1 = arma::eye<arma::cx_mat>(1, 1);
    const auto zero1 = arma::cx_mat(1, 1, arma::fill::zeros);
    return real_decompose(arma::cx_mat(1, 1, arma::fill::value(h)), eye1, zero1, eye1, zero1,
                          sigma2);
}

ComplexScene random_ris_scene(int n_users, int n_bs, int n_rx, int n_ris, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    auto cx = [&](int r, int c) {
        arma::cx_mat m(r, c);
        for (auto& v : m) v = {nd(rng), nd(rng)};
        return m;
    };
    ComplexScene s;
    s.dims = {n_users, n_bs, n_rx, n_ris};
    for (int k = 0; k < n_users; ++k) {
        s.F.push_back(cx(n_rx, n_bs));
        s.G.push_back(0.6 * cx(n_rx, n_ris));
    }
    s.G0 = 0.6 * cx(n_ris, n_bs);
    s.sigma2 = 1.0;
    s.power_budget = 10.0;
    return s;
}

}  // namespace

TEST_CASE("covariance solve: single-user capacity") {
    const auto link = scalar_link(1.0, 1.0);
    const std::vector<RealLink> links{link};
    CovarianceSet expansion = CovarianceSet::uniform_white(1, 1, 10.0, false);
    const std::vector<CovarianceSurrogate> priv{build_private_cov_bound(links, expansion, 0)};

    for (Signaling sig : {Signaling::proper, Signaling::improper}) {
        const auto [cov, rep] = solve_covariance_surrogate(priv, {}, expansion, 10.0, sig,
                                                           arma::vec{1.0});
        CHECK(rep.status == SolveReport::Status::converged);
        CHECK(rep.objective == Catch::Approx(std::log2(11.0)).margin(1e-5));
        CHECK(arma::trace(cov.P[0]) == Catch::Approx(10.0).margin(1e-4));  // full power
        CHECK(rep.gap <= 1e-5);
        CHECK(rep.feasibility <= 1e-7);
    }
}

TEST_CASE("covariance solve: degenerate weight reduces to single-user optimum") {
    const std::vector<RealLink> links{scalar_link({0.9, 0.3}, 1.0), scalar_link({0.2, -0.5}, 1.0)};
    CovarianceSet expansion = CovarianceSet::uniform_white(2, 1, 10.0, false);

    std::vector<CovarianceSurrogate> priv;
    for (int k = 0; k < 2; ++k) priv.push_back(build_private_cov_bound(links, expansion, k));
    const auto [cov, rep] = solve_covariance_surrogate(priv, {}, expansion, 10.0,
                                                       Signaling::improper, arma::vec{1.0, 0.0});

    const std::vector<RealLink> solo{links[0]};
    CovarianceSet solo_exp = CovarianceSet::uniform_white(1, 1, 10.0, false);
    const std::vector<CovarianceSurrogate> solo_priv{build_private_cov_bound(solo, solo_exp, 0)};
    const auto [scov, srep] = solve_covariance_surrogate(solo_priv, {}, solo_exp, 10.0,
                                                         Signaling::improper, arma::vec{1.0});
    CHECK(rep.objective == Catch::Approx(srep.objective).margin(2e-5));
}

TEST_CASE("covariance solve: matches exhaustive grid search on a scalar instance") {
    // proper-mode two-user scalar rate splitting; the grid walks power
    // splits at 0.01 resolution and allocates the common rate exactly
    const std::vector<RealLink> links{scalar_link({1.1, -0.2}, 1.0), scalar_link({0.45, 0.35}, 1.0)};
    const double budget = 10.0;
    const arma::vec alpha{0.5, 0.5};
    CovarianceSet expansion = CovarianceSet::uniform_white(2, 1, budget, true);

    std::vector<CovarianceSurrogate> priv, comm;
    for (int k = 0; k < 2; ++k) {
        priv.push_back(build_private_cov_bound(links, expansion, k));
        comm.push_back(build_common_cov_bound(links, expansion, k));
    }
    const auto [cov, rep] = solve_covariance_surrogate(priv, comm, expansion, budget,
                                                       Signaling::proper, alpha);
    REQUIRE(rep.status == SolveReport::Status::converged);

    // proper scalar covariances are (p/2) I, so the surrogate problem has
    // three power variables plus the allocation
    auto surrogate_objective = [&](double pc, double p1, double p2) {
        CovarianceSet c;
        c.P_c = 0.5 * pc * arma::eye(2, 2);
        c.P = {0.5 * p1 * arma::eye(2, 2), 0.5 * p2 * arma::eye(2, 2)};
        const auto list = surrogate_msg_list(c);
        const arma::vec base{priv[0].eval(list), priv[1].eval(list)};
        const double rc = std::max(0.0, std::min(comm[0].eval(list), comm[1].eval(list)));
        return best_common_split(base, rc, alpha).objective;
    };

    double best = -arma::datum::inf;
    const double step = 0.01 * budget;
    for (double p1 = 0.0; p1 <= budget + 1e-9; p1 += step)
        for (double p2 = 0.0; p1 + p2 <= budget + 1e-9; p2 += step)
            best = std::max(best, surrogate_objective(budget - p1 - p2, p1, p2));

    CHECK(rep.objective >= best - 1e-3);
    CHECK(rep.objective <= best + 2e-2);  // grid undershoots the continuum by design
}

TEST_CASE("covariance solve: proper mode returns J-commuting covariances") {
    std::mt19937_64 rng(7);
    auto scene = random_ris_scene(2, 2, 2, 1, rng);
    scene.dims.n_ris = 0;
    scene.G.clear();
    const auto iqi = build_iqi_matrices(IqiProfile::uniform(scene.dims, 1.1, 0.1, 0.95, -0.1));
    const auto links = build_real_links(scene, iqi, RisPhases::all_ones(0));

    CovarianceSet expansion = CovarianceSet::uniform_white(2, 2, 10.0, true);
    std::vector<CovarianceSurrogate> priv, comm;
    for (int k = 0; k < 2; ++k) {
        priv.push_back(build_private_cov_bound(links, expansion, k));
        comm.push_back(build_common_cov_bound(links, expansion, k));
    }
    const auto [cov, rep] = solve_covariance_surrogate(priv, comm, expansion, 10.0,
                                                       Signaling::proper, arma::vec{0.5, 0.5});
    CHECK(rep.status == SolveReport::Status::converged);
    const arma::mat j = complex_structure(2);
    for (const auto& p : surrogate_msg_list(cov)) {
        const double scale = std::max(1e-12, arma::norm(p, "fro"));
        CHECK(arma::norm(j * p * j.t() - p, "fro") <= 1e-8 * scale);
    }
    cov.validate(10.0);
}

TEST_CASE("covariance solve: deterministic across repeated runs") {
    std::mt19937_64 rng(11);
    const std::vector<RealLink> links{scalar_link({0.8, 0.1}, 1.0), scalar_link({0.3, 0.6}, 1.0)};
    CovarianceSet expansion;
    expansion.P_c = random_psd(2, 3.0, rng);
    expansion.P = {random_psd(2, 3.0, rng), random_psd(2, 3.0, rng)};
    expansion.rc_alloc = arma::vec{0.0, 0.0};

    std::vector<CovarianceSurrogate> priv, comm;
    for (int k = 0; k < 2; ++k) {
        priv.push_back(build_private_cov_bound(links, expansion, k));
        comm.push_back(build_common_cov_bound(links, expansion, k));
    }
    const auto [cov1, rep1] = solve_covariance_surrogate(priv, comm, expansion, 10.0,
                                                         Signaling::improper, arma::vec{0.4, 0.6});
    const auto [cov2, rep2] = solve_covariance_surrogate(priv, comm, expansion, 10.0,
                                                         Signaling::improper, arma::vec{0.4, 0.6});
    CHECK(rep1.objective == rep2.objective);
    for (int k = 0; k < 2; ++k) CHECK(arma::norm(cov1.P[k] - cov2.P[k], "fro") == 0.0);
    CHECK(arma::norm(cov1.P_c - cov2.P_c, "fro") == 0.0);
}

TEST_CASE("covariance solve: MM ascent from the expansion point") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        auto scene = random_ris_scene(2, 1, 1, 1, rng);
        scene.dims.n_ris = 0;
        scene.G.clear();
        const auto iqi = build_iqi_matrices(IqiProfile::perfect(scene.dims));
        const auto links = build_real_links(scene, iqi, RisPhases::all_ones(0));

        CovarianceSet expansion;
        expansion.P_c = random_psd(2, 2.0, rng);
        expansion.P = {random_psd(2, 4.0, rng), random_psd(2, 4.0, rng)};
        expansion.rc_alloc = arma::vec{0.0, 0.0};
        const arma::vec alpha{0.5, 0.5};
        const ExactPoint before = evaluate_exact(links, expansion, alpha, true);

        std::vector<CovarianceSurrogate> priv, comm;
        for (int k = 0; k < 2; ++k) {
            priv.push_back(build_private_cov_bound(links, expansion, k));
            comm.push_back(build_common_cov_bound(links, expansion, k));
        }
        const auto [cov, rep] = solve_covariance_surrogate(priv, comm, expansion, 10.0,
                                                           Signaling::improper, alpha);
        REQUIRE(rep.status == SolveReport::Status::converged);
        CHECK(rep.objective >= before.objective - 1e-7);

        const ExactPoint after = evaluate_exact(links, cov, alpha, true);
        CHECK(after.objective >= before.objective - 1e-7);
    }
}

TEST_CASE("phase solve: zero-power covariances are a no-op") {
    std::mt19937_64 rng(17);
    const auto scene = random_ris_scene(2, 1, 1, 2, rng);
    const auto iqi = build_iqi_matrices(IqiProfile::perfect(scene.dims));
    const auto maps = build_channel_maps(scene, iqi);
    CovarianceSet cov = CovarianceSet::uniform_white(2, 1, 0.0, false);
    const arma::cx_vec theta = arma::cx_vec(2, arma::fill::ones);
    const auto links = build_real_links(scene, iqi, RisPhases{theta});

    std::vector<PhaseSurrogate> priv;
    for (int k = 0; k < 2; ++k) priv.push_back(build_private_phase_bound(maps, links, cov, k, theta));
    const auto cuts = linearize_unit_modulus(theta, 0.01);
    const auto [theta_hat, rep] =
        solve_ris_surrogate(priv, {}, cuts, theta, arma::vec{0.5, 0.5}, 0.01);
    CHECK(arma::norm(theta_hat - theta) == 0.0);
    CHECK(rep.objective == Catch::Approx(0.0).margin(1e-12));
    CHECK(rep.status == SolveReport::Status::converged);
}

TEST_CASE("phase solve: RIS-independent objective keeps the previous phases") {
    std::mt19937_64 rng(19);
    auto scene = random_ris_scene(2, 1, 1, 2, rng);
    for (auto& g : scene.G) g.zeros();  // RIS reaches nobody
    const auto iqi = build_iqi_matrices(IqiProfile::perfect(scene.dims));
    const auto maps = build_channel_maps(scene, iqi);
    const auto cov = CovarianceSet::uniform_white(2, 1, 10.0, false);
    std::uniform_real_distribution<double> ph(0.0, 2 * arma::datum::pi);
    arma::cx_vec theta(2);
    for (auto& t : theta) t = std::polar(1.0, ph(rng));
    const auto links = build_real_links(scene, iqi, RisPhases{theta});

    std::vector<PhaseSurrogate> priv;
    for (int k = 0; k < 2; ++k) priv.push_back(build_private_phase_bound(maps, links, cov, k, theta));
    const auto cuts = linearize_unit_modulus(theta, 0.01);
    const auto [theta_hat, rep] =
        solve_ris_surrogate(priv, {}, cuts, theta, arma::vec{0.5, 0.5}, 0.01);
    CHECK(arma::norm(theta_hat - theta) == 0.0);
    CHECK(rep.status == SolveReport::Status::converged);
}

TEST_CASE("phase solve: single-element alignment matches a fine phase grid") {
    // one RIS element, one user: iterated accepted updates must land on the
    // best phase of a 3600-point sweep
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 3; ++trial) {
        const auto scene = random_ris_scene(1, 1, 1, 1, rng);
        const auto iqi = build_iqi_matrices(IqiProfile::perfect(scene.dims));
        const auto maps = build_channel_maps(scene, iqi);
        CovarianceSet cov = CovarianceSet::uniform_white(1, 1, 10.0, false);
        const arma::vec alpha{1.0};

        arma::cx_vec theta(1, arma::fill::ones);
        double current = -1.0;
        for (int it = 0; it < 60; ++it) {
            const auto links = build_real_links(scene, iqi, RisPhases{theta});
            current = private_rate(links[0], cov, 0);
            std::vector<PhaseSurrogate> priv{build_private_phase_bound(maps, links, cov, 0, theta)};
            const auto cuts = linearize_unit_modulus(theta, 0.01);
            const auto [theta_hat, rep] = solve_ris_surrogate(priv, {}, cuts, theta, alpha, 0.01);
            const RisPhases cand = normalize_phases(theta_hat, theta);
            const auto links_cand = build_real_links(scene, iqi, cand);
            const double cand_rate = private_rate(links_cand[0], cov, 0);
            if (cand_rate <= current + 1e-12) break;
            theta = cand.theta;
            current = cand_rate;
        }

        double best = -1.0, best_phase = 0.0;
        for (int i = 0; i < 3600; ++i) {
            const double phase = 2.0 * arma::datum::pi * i / 3600.0;
            const arma::cx_vec th{std::polar(1.0, phase)};
            const auto l = build_real_links(scene, iqi, RisPhases{th});
            const double r = private_rate(l[0], cov, 0);
            if (r > best) {
                best = r;
                best_phase = phase;
            }
        }
        const double got = std::arg(theta(0));
        const double diff = std::abs(std::remainder(got - best_phase, 2.0 * arma::datum::pi));
        CHECK(diff <= 2.0 * arma::datum::pi / 3600.0 + 1e-9);
        CHECK(current >= best - 1e-6);
    }
}

TEST_CASE("phase solve: respects the relaxed modulus constraints") {
    std::mt19937_64 rng(29);
    const auto scene = random_ris_scene(2, 1, 1, 4, rng);
    const auto iqi = build_iqi_matrices(IqiProfile::perfect(scene.dims));
    const auto maps = build_channel_maps(scene, iqi);
    auto cov = CovarianceSet::uniform_white(2, 1, 10.0, true);
    const arma::cx_vec theta = arma::cx_vec(4, arma::fill::ones);
    const auto links = build_real_links(scene, iqi, RisPhases{theta});

    std::vector<PhaseSurrogate> priv, comm;
    for (int k = 0; k < 2; ++k) {
        priv.push_back(build_private_phase_bound(maps, links, cov, k, theta));
        comm.push_back(build_common_phase_bound(maps, links, cov, k, theta));
    }
    const double eps = 0.01;
    const auto cuts = linearize_unit_modulus(theta, eps);
    const auto [theta_hat, rep] =
        solve_ris_surrogate(priv, comm, cuts, theta, arma::vec{0.5, 0.5}, eps);
    REQUIRE(rep.status == SolveReport::Status::converged);
    for (arma::uword n = 0; n < 4; ++n) {
        const double mag = std::abs(theta_hat(n));
        CHECK(mag <= 1.0 + 1e-7);
        CHECK(mag >= std::sqrt(1.0 - eps) - 1e-6);
    }

    const RisPhases norm = normalize_phases(theta_hat, theta);
    CHECK(norm.feasible());
}

TEST_CASE("normalize phases") {
    const arma::cx_vec prev{std::polar(1.0, 0.3), std::polar(1.0, -1.2)};
    SECTION("inside the disc") {
        const arma::cx_vec hat{0.9 * std::polar(1.0, arma::datum::pi / 4), std::polar(1.0, -1.2)};
        const auto out = normalize_phases(hat, prev);
        CHECK(std::abs(out.theta(0) - std::polar(1.0, arma::datum::pi / 4)) < 1e-15);
        CHECK(std::abs(out.theta(1) - prev(1)) < 1e-15);
    }
    SECTION("zero magnitude falls back to the previous phase") {
        const arma::cx_vec hat{arma::cx_double(0.0, 0.0), std::polar(0.5, 2.0)};
        const auto out = normalize_phases(hat, prev);
        CHECK(out.theta(0) == prev(0));
        CHECK(std::abs(out.theta(1) - std::polar(1.0, 2.0)) < 1e-15);
    }
}
