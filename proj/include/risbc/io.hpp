// SPDX-License-Identifier: Apache-2.0
//
// Result persistence: region CSV, convergence traces, run manifest.

#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "risbc/config.hpp"
#include "risbc/types.hpp"

namespace risbc {

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// CSV schema: scheme,alpha1,...,alphaK,r1,...,rK,converged,iters
inline std::string region_csv(const std::vector<RegionPoint>& points, int n_users) {
    std::string out = "scheme";
    for (int k = 1; k <= n_users; ++k) out += ",alpha" + std::to_string(k);
    for (int k = 1; k <= n_users; ++k) out += ",r" + std::to_string(k);
    out += ",converged,iters\n";
    for (const auto& p : points) {
        out += p.scheme;
        for (int k = 0; k < n_users; ++k) out += "," + format_number(p.alpha(k));
        for (int k = 0; k < n_users; ++k) out += "," + format_number(p.rates(k));
        out += ",";
        out += (p.converged ? "1" : "0");
        out += "," + std::to_string(p.iterations) + "\n";
    }
    return out;
}

inline std::string trace_text(const RegionPoint& p) {
    std::string out;
    for (double v : p.trace) out += format_number(v) + "\n";
    return out;
}

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write file: " + path);
    out << body;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read file: " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace risbc
