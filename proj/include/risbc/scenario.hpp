// SPDX-License-Identifier: Apache-2.0
//
// Scenario construction: fixed channel realizations loaded from versioned
// data files, and generated scenes with Rician fading on the RIS segments,
// Rayleigh fading on the direct links, and distance-based path loss.
//
// The paper-style normalization is used throughout: noise variance 1 and
// direct channels given as plain (already normalized) coefficients, so the
// RIS-segment reference gain absorbs element gains and aperture effects.

#pragma once

#include <armadillo>
#include <cmath>
#include <complex>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "risbc/config.hpp"
#include "risbc/types.hpp"

namespace risbc {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct Position {
    double x = 0.0, y = 0.0;
};

inline double distance(const Position& a, const Position& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Everything needed to build one experiment: either a named fixed
/// realization (optionally augmented with a generated RIS) or a fully
/// generated scene.
struct ScenarioConfig {
    std::string fixture;  // C1..C5; empty means generative mode
    Dims dims{2, 1, 1, 0};
    double power_db = 10.0;
    double sigma2 = 1.0;

    // transceiver imbalance (uniform across antennas and users)
    double tx_amplitude = 1.0, tx_phase_deg = 0.0;
    double rx_amplitude = 1.0, rx_phase_deg = 0.0;

    // fading and geometry
    double alpha_ris = 3.2;          // path-loss exponent of each RIS segment
    double alpha_direct = 3.5;       // path-loss exponent of direct links
    double ris_ref_gain_db = 30.0;   // per-segment reference gain at 1 m
    double direct_ref_gain_db = 0.0;
    double rician_k = 3.0;
    Position bs{0.0, 0.0}, ris{45.0, 5.0};
    std::vector<Position> users{{40.0, 0.0}, {50.0, 0.0}};

    unsigned long seed = 1;

    // sweep controls
    std::vector<std::string> schemes{"PR", "IR"};
    int alpha_points = 21;
    int ts_points = 101;
    double epsilon = 0.01;
    int max_outer = 100;

    IqiProfile iqi_profile() const {
        const double d2r = arma::datum::pi / 180.0;
        return IqiProfile::uniform(dims, tx_amplitude, tx_phase_deg * d2r, rx_amplitude,
                                   rx_phase_deg * d2r);
    }

    bool perfect_devices() const {
        return tx_amplitude == 1.0 && tx_phase_deg == 0.0 && rx_amplitude == 1.0 &&
               rx_phase_deg == 0.0;
    }

    static ScenarioConfig from_config(const Config& c) {
        ScenarioConfig s;
        s.fixture = c.str("fixture", "");
        s.dims.n_users = (int)c.integer("users", 2);
        s.dims.n_bs = (int)c.integer("bs_antennas", 1);
        s.dims.n_rx = (int)c.integer("rx_antennas", 1);
        s.dims.n_ris = (int)c.integer("ris_elements", 0);
        s.power_db = c.num("power_db", 10.0);
        s.sigma2 = c.num("sigma2", 1.0);
        s.tx_amplitude = c.num("tx_amplitude", 1.0);
        s.tx_phase_deg = c.num("tx_phase_deg", 0.0);
        s.rx_amplitude = c.num("rx_amplitude", 1.0);
        s.rx_phase_deg = c.num("rx_phase_deg", 0.0);
        s.alpha_ris = c.num("alpha_ris", 3.2);
        s.alpha_direct = c.num("alpha_direct", 3.5);
        s.ris_ref_gain_db = c.num("ris_ref_gain_db", 30.0);
        s.direct_ref_gain_db = c.num("direct_ref_gain_db", 0.0);
        s.rician_k = c.num("rician_k", 3.0);
        s.bs = {c.num("bs_x", 0.0), c.num("bs_y", 0.0)};
        s.ris = {c.num("ris_x", 45.0), c.num("ris_y", 5.0)};
        s.users.clear();
        for (int k = 0; k < s.dims.n_users; ++k) {
            const std::string key = "user" + std::to_string(k + 1);
            const double defx = 40.0 + 10.0 * k, defy = 0.0;
            s.users.push_back({c.num(key + "_x", defx), c.num(key + "_y", defy)});
        }
        s.seed = (unsigned long)c.integer("seed", 1);
        if (c.has("schemes")) {
            s.schemes.clear();
            std::istringstream in(c.str("schemes"));
            std::string tok;
            while (std::getline(in, tok, ','))
                if (!tok.empty()) s.schemes.push_back(tok);
        }
        s.alpha_points = (int)c.integer("alpha_points", 21);
        s.ts_points = (int)c.integer("ts_points", 101);
        s.epsilon = c.num("epsilon", 0.01);
        s.max_outer = (int)c.integer("max_outer", 100);
        return s;
    }

    Config to_config() const {
        Config c;
        if (!fixture.empty()) c.set("fixture", fixture);
        c.set_num("users", dims.n_users);
        c.set_num("bs_antennas", dims.n_bs);
        c.set_num("rx_antennas", dims.n_rx);
        c.set_num("ris_elements", dims.n_ris);
        c.set_num("power_db", power_db);
        c.set_num("sigma2", sigma2);
        c.set_num("tx_amplitude", tx_amplitude);
        c.set_num("tx_phase_deg", tx_phase_deg);
        c.set_num("rx_amplitude", rx_amplitude);
        c.set_num("rx_phase_deg", rx_phase_deg);
        c.set_num("alpha_ris", alpha_ris);
        c.set_num("alpha_direct", alpha_direct);
        c.set_num("ris_ref_gain_db", ris_ref_gain_db);
        c.set_num("direct_ref_gain_db", direct_ref_gain_db);
        c.set_num("rician_k", rician_k);
        c.set_num("bs_x", bs.x);
        c.set_num("bs_y", bs.y);
        c.set_num("ris_x", ris.x);
        c.set_num("ris_y", ris.y);
        for (std::size_t k = 0; k < users.size(); ++k) {
            c.set_num("user" + std::to_string(k + 1) + "_x", users[k].x);
            c.set_num("user" + std::to_string(k + 1) + "_y", users[k].y);
        }
        c.set_num("seed", (double)seed);
        std::string sl;
        for (std::size_t i = 0; i < schemes.size(); ++i) sl += (i ? "," : "") + schemes[i];
        c.set("schemes", sl);
        c.set_num("alpha_points", alpha_points);
        c.set_num("ts_points", ts_points);
        c.set_num("epsilon", epsilon);
        c.set_num("max_outer", max_outer);
        return c;
    }
};

inline const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names{"C1", "C2", "C3", "C4", "C5"};
    return names;
}

/// Loads one of the fixed channel realizations (direct links only) shipped
/// as data files. Power budget and noise variance are runtime settings and
/// default to the paper's operating point (10 dB, unit noise).
inline ComplexScene load_fixed_realization(const std::string& name, const std::string& data_dir) {
    bool known = false;
    for (const auto& n : fixture_names()) known = known || n == name;
    if (!known) {
        std::string msg = "unknown fixture '" + name + "'; available:";
        for (const auto& n : fixture_names()) msg += " " + n;
        throw config_error(msg);
    }
    const std::string path = data_dir + "/" + name + ".dat";
    std::ifstream in(path);
    if (!in) throw config_error("cannot open fixture file: " + path);

    ComplexScene scene;
    scene.sigma2 = 1.0;
    scene.power_budget = db_to_linear(10.0);
    int version = 0;
    std::string tok;
    while (in >> tok) {
        if (tok == "#") {
            std::string skip;
            std::getline(in, skip);
        } else if (tok == "version") {
            in >> version;
        } else if (tok == "users") {
            in >> scene.dims.n_users;
        } else if (tok == "bs_antennas") {
            in >> scene.dims.n_bs;
        } else if (tok == "rx_antennas") {
            in >> scene.dims.n_rx;
        } else if (tok == "F") {
            int k = 0;
            in >> k;
            arma::cx_mat f(scene.dims.n_rx, scene.dims.n_bs);
            for (int r = 0; r < scene.dims.n_rx; ++r)
                for (int c = 0; c < scene.dims.n_bs; ++c) {
                    double re = 0, im = 0;
                    in >> re >> im;
                    f(r, c) = {re, im};
                }
            if ((int)scene.F.size() != k - 1) throw config_error("fixture: out-of-order channel block");
            scene.F.push_back(f);
        } else {
            throw config_error("fixture: unknown token '" + tok + "' in " + path);
        }
    }
    if (version != 1) throw config_error("fixture: unsupported version in " + path);
    scene.dims.n_ris = 0;
    scene.validate();
    return scene;
}

namespace detail {

inline arma::cx_mat cn01(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    arma::cx_mat m(rows, cols);
    const double s = 1.0 / std::sqrt(2.0);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) {
            const double re = n(rng), im = n(rng);
            m(r, c) = std::complex<double>(s * re, s * im);
        }
    return m;
}

/// Rank-1 line-of-sight matrix from uniform linear array steering vectors.
inline arma::cx_mat los_component(int rows, int cols, double aoa, double aod) {
    auto steer = [](int n, double angle) {
        arma::cx_vec v(n);
        for (int i = 0; i < n; ++i)
            v(i) = std::exp(std::complex<double>(0.0, arma::datum::pi * i * std::sin(angle)));
        return v;
    };
    return steer(rows, aoa) * steer(cols, aod).st();
}

inline arma::cx_mat rician(int rows, int cols, double k_factor, double aoa, double aod,
                           std::mt19937_64& rng) {
    const arma::cx_mat los = los_component(rows, cols, aoa, aod);
    if (std::isinf(k_factor)) return los;
    const double w_los = std::sqrt(k_factor / (1.0 + k_factor));
    const double w_nlos = std::sqrt(1.0 / (1.0 + k_factor));
    return w_los * los + w_nlos * cn01(rows, cols, rng);
}

inline double angle_between(const Position& from, const Position& to) {
    return std::atan2(to.y - from.y, to.x - from.x);
}

}  // namespace detail

/// Adds generated RIS-segment channels (Rician small-scale fading, path loss
/// with the RIS exponent) to an existing scene.
inline void augment_with_ris(ComplexScene& scene, const ScenarioConfig& cfg, int n_ris) {
    if (n_ris <= 0) throw config_error("augment_with_ris: need at least one element");
    if ((int)cfg.users.size() < scene.dims.n_users)
        throw config_error("augment_with_ris: missing user positions");
    const double d_br = distance(cfg.bs, cfg.ris);
    if (d_br <= 0.0) throw config_error("augment_with_ris: BS and RIS positions coincide");

    std::mt19937_64 rng(cfg.seed);
    const double gain = db_to_linear(cfg.ris_ref_gain_db);

    scene.dims.n_ris = n_ris;
    const double aod_bs = detail::angle_between(cfg.bs, cfg.ris);
    scene.G0 = std::sqrt(gain * std::pow(d_br, -cfg.alpha_ris)) *
               detail::rician(n_ris, scene.dims.n_bs, cfg.rician_k, aod_bs, aod_bs, rng);
    scene.G.clear();
    for (int k = 0; k < scene.dims.n_users; ++k) {
        const double d_ru = distance(cfg.ris, cfg.users[k]);
        if (d_ru <= 0.0) throw config_error("augment_with_ris: user sits on the RIS");
        const double aoa = detail::angle_between(cfg.ris, cfg.users[k]);
        scene.G.push_back(std::sqrt(gain * std::pow(d_ru, -cfg.alpha_ris)) *
                          detail::rician(scene.dims.n_rx, n_ris, cfg.rician_k, aoa, aoa, rng));
    }
    scene.validate();
}

/// Fully generated scene: Rayleigh direct links with the direct path-loss
/// exponent, plus RIS segments when ris_elements > 0. Deterministic for a
/// fixed seed.
inline ComplexScene generate_scene(const ScenarioConfig& cfg) {
    if ((int)cfg.users.size() < cfg.dims.n_users)
        throw config_error("generate_scene: missing user positions");

    ComplexScene scene;
    scene.dims = cfg.dims;
    scene.dims.n_ris = 0;
    scene.sigma2 = cfg.sigma2;
    scene.power_budget = db_to_linear(cfg.power_db);

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    const double gain = db_to_linear(cfg.direct_ref_gain_db);
    for (int k = 0; k < cfg.dims.n_users; ++k) {
        const double d = distance(cfg.bs, cfg.users[k]);
        if (d <= 0.0) throw config_error("generate_scene: user sits on the BS");
        scene.F.push_back(std::sqrt(gain * std::pow(d, -cfg.alpha_direct)) *
                          detail::cn01(cfg.dims.n_rx, cfg.dims.n_bs, rng));
    }
    if (cfg.dims.n_ris > 0) augment_with_ris(scene, cfg, cfg.dims.n_ris);
    scene.validate();
    return scene;
}

/// Builds the scene a ScenarioConfig describes (fixture or generative).
inline ComplexScene build_scene(const ScenarioConfig& cfg, const std::string& data_dir) {
    ComplexScene scene;
    if (!cfg.fixture.empty()) {
        scene = load_fixed_realization(cfg.fixture, data_dir);
        scene.power_budget = db_to_linear(cfg.power_db);
        scene.sigma2 = cfg.sigma2;
        if (cfg.dims.n_ris > 0) {
            ScenarioConfig geom = cfg;
            geom.dims = scene.dims;
            geom.users.resize(scene.dims.n_users,
                              cfg.users.empty() ? Position{40.0, 0.0} : cfg.users.back());
            augment_with_ris(scene, geom, cfg.dims.n_ris);
        }
    } else {
        scene = generate_scene(cfg);
    }
    return scene;
}

}  // namespace risbc
