// SPDX-License-Identifier: Apache-2.0
//
// Alternating optimization driver for one weight vector: covariance block,
// then RIS-phase block with an exact-rate accept/reject rule. The objective
// min_k r_k / alpha_k is evaluated on exact rates with the best common-rate
// split, so the trace is non-decreasing by construction.

#pragma once

#include <armadillo>
#include <string>
#include <vector>

#include "risbc/inner_solver.hpp"
#include "risbc/rates.hpp"
#include "risbc/surrogate.hpp"
#include "risbc/types.hpp"
#include "risbc/wl_model.hpp"

namespace risbc {

struct SchemeConfig {
    enum class Access { tin, rs, tdma_ts };

    Signaling signaling = Signaling::proper;
    Access access = Access::rs;
    bool ris = false;
    std::string label;

    bool rate_splitting() const { return access == Access::rs; }

    /// Scheme labels: PT/IT (TIN), PR/IR (rate splitting), an _IR suffix for
    /// a RIS-assisted variant (PR_IR, IR_IR, ...), and TS for TDMA time
    /// sharing.
    static SchemeConfig from_label(const std::string& name) {
        SchemeConfig s;
        s.label = name;
        if (name == "TS" || name == "TS_IR") {
            s.access = Access::tdma_ts;
            s.signaling = Signaling::improper;
            s.ris = name == "TS_IR";
            return s;
        }
        std::string base = name;
        if (base.size() > 3 && base.substr(base.size() - 3) == "_IR") {
            s.ris = true;
            base = base.substr(0, base.size() - 3);
        }
        if (base == "PT") s = {Signaling::proper, Access::tin, s.ris, name};
        else if (base == "IT") s = {Signaling::improper, Access::tin, s.ris, name};
        else if (base == "PR") s = {Signaling::proper, Access::rs, s.ris, name};
        else if (base == "IR") s = {Signaling::improper, Access::rs, s.ris, name};
        else throw config_error("unknown scheme label: " + name);
        return s;
    }
};

struct AoOptions {
    int max_outer = 100;
    double rel_tol = 1e-5;
    int streak = 3;          // consecutive small-improvement iterations
    double epsilon = 0.01;   // unit-modulus relaxation
    ipm::SolveOptions ipm;
};

struct AoState {
    int iteration = 0;
    CovarianceSet covs;
    RisPhases theta;
    double objective = 0.0;  // min_k r_k / alpha_k, exact rates
    std::vector<double> trace;
    bool phase_accepted = true;
    SolveReport cov_report;
    SolveReport phase_report;
};

/// Precomputed per-run context: IQI matrices and (for RIS schemes) the
/// affine phase-to-channel maps, which do not change across iterations.
struct AoContext {
    const ComplexScene* scene = nullptr;
    IqiMatrices iqi;
    SchemeConfig scheme;
    arma::vec alpha;
    AoOptions opts;
    std::vector<ChannelAffineMap> maps;  // only for RIS schemes

    AoContext(const ComplexScene& sc, const IqiProfile& profile, const SchemeConfig& sch,
              const arma::vec& a, const AoOptions& o = {})
        : scene(&sc), iqi(build_iqi_matrices(profile)), scheme(sch), alpha(a), opts(o) {
        sc.validate();
        if ((int)a.n_elem != sc.dims.n_users) throw config_error("ao: weight vector length mismatch");
        if (a.min() < 0.0 || std::abs(arma::sum(a) - 1.0) > 1e-9)
            throw config_error("ao: weights must be nonnegative and sum to 1");
        if (sch.ris) {
            if (sc.dims.n_ris <= 0) throw config_error("ao: RIS scheme requires RIS elements");
            maps = build_channel_maps(sc, iqi);
        }
    }
};

inline AoState ao_init(const AoContext& ctx) {
    AoState st;
    const Dims& d = ctx.scene->dims;
    st.covs = CovarianceSet::uniform_white(d.n_users, d.n_bs, ctx.scene->power_budget,
                                           ctx.scheme.rate_splitting());
    st.theta = RisPhases::all_ones(d.n_ris);
    const auto links = build_real_links(*ctx.scene, ctx.iqi, st.theta);
    const ExactPoint ex = evaluate_exact(links, st.covs, ctx.alpha, ctx.scheme.rate_splitting());
    st.objective = ex.objective;
    st.covs.rc_alloc = ex.allocation;
    return st;
}

/// One outer iteration: covariance update, then (for RIS schemes) a phase
/// candidate that is kept only if it does not lower the exact objective.
inline AoState ao_iterate(AoState state, const AoContext& ctx) {
    const bool rs = ctx.scheme.rate_splitting();
    const int n_users = ctx.scene->dims.n_users;

    auto links = build_real_links(*ctx.scene, ctx.iqi, state.theta);

    // covariance block
    std::vector<CovarianceSurrogate> priv, comm;
    for (int k = 0; k < n_users; ++k) priv.push_back(build_private_cov_bound(links, state.covs, k));
    if (rs)
        for (int k = 0; k < n_users; ++k) comm.push_back(build_common_cov_bound(links, state.covs, k));

    auto [covs_new, cov_rep] = solve_covariance_surrogate(
        priv, comm, state.covs, ctx.scene->power_budget, ctx.scheme.signaling, ctx.alpha,
        ctx.opts.ipm);
    state.cov_report = cov_rep;

    if (cov_rep.status != SolveReport::Status::infeasible) {
        ExactPoint ex = evaluate_exact(links, covs_new, ctx.alpha, rs);
        if (ex.objective >= state.objective - 1e-12 * (1.0 + std::abs(state.objective))) {
            covs_new.rc_alloc = ex.allocation;
            state.covs = covs_new;
            state.objective = std::max(state.objective, ex.objective);
        }
    }

    // phase block
    if (ctx.scheme.ris) {
        const bool with_common = rs && arma::trace(state.covs.P_c) > 1e-10;
        std::vector<PhaseSurrogate> pp, pc;
        for (int k = 0; k < n_users; ++k)
            pp.push_back(build_private_phase_bound(ctx.maps, links, state.covs, k, state.theta.theta));
        if (with_common)
            for (int k = 0; k < n_users; ++k)
                pc.push_back(build_common_phase_bound(ctx.maps, links, state.covs, k, state.theta.theta));
        const auto cuts = linearize_unit_modulus(state.theta.theta, ctx.opts.epsilon);

        auto [theta_hat, phase_rep] =
            solve_ris_surrogate(pp, pc, cuts, state.theta.theta, ctx.alpha, ctx.opts.epsilon,
                                ctx.opts.ipm);
        state.phase_report = phase_rep;

        const RisPhases cand = normalize_phases(theta_hat, state.theta.theta);
        const auto links_cand = build_real_links(*ctx.scene, ctx.iqi, cand);
        const ExactPoint ex_cand = evaluate_exact(links_cand, state.covs, ctx.alpha, rs);
        state.phase_accepted = ex_cand.objective >= state.objective;
        if (state.phase_accepted) {
            state.theta = cand;
            state.objective = ex_cand.objective;
            state.covs.rc_alloc = ex_cand.allocation;
        }
    }

    ++state.iteration;
    state.trace.push_back(state.objective);
    return state;
}

struct AoResult {
    AoState state;
    RegionPoint point;
};

/// Runs the alternating optimization to convergence for one weight vector.
inline AoResult run_ao(const ComplexScene& scene, const IqiProfile& profile,
                       const SchemeConfig& scheme, const arma::vec& alpha,
                       const AoOptions& opts = {}) {
    AoContext ctx(scene, profile, scheme, alpha, opts);
    AoResult out;

    if (scene.power_budget <= 0.0) {  // nothing to transmit
        out.state = AoState{};
        out.state.covs = CovarianceSet::uniform_white(scene.dims.n_users, scene.dims.n_bs, 0.0,
                                                      scheme.rate_splitting());
        out.state.theta = RisPhases::all_ones(scene.dims.n_ris);
        out.point = RegionPoint{alpha, arma::vec(scene.dims.n_users, arma::fill::zeros),
                                scheme.label, true, 0, {}};
        return out;
    }

    AoState st = ao_init(ctx);
    bool converged = false;
    int small_steps = 0;
    while (st.iteration < opts.max_outer) {
        const double prev = st.objective;
        st = ao_iterate(std::move(st), ctx);
        const double impr = (st.objective - prev) / std::max(1e-12, std::abs(st.objective));
        small_steps = (impr < opts.rel_tol) ? small_steps + 1 : 0;
        if (small_steps >= opts.streak) {
            converged = true;
            break;
        }
    }

    const auto links = build_real_links(*ctx.scene, ctx.iqi, st.theta);
    const ExactPoint ex = evaluate_exact(links, st.covs, ctx.alpha, ctx.scheme.rate_splitting());
    st.covs.rc_alloc = ex.allocation;

    out.point = RegionPoint{alpha, ex.rates, scheme.label, converged, st.iteration, st.trace};
    out.state = std::move(st);
    return out;
}

}  // namespace risbc
