// SPDX-License-Identifier: Apache-2.0
//
// Minimal key-value experiment configuration: one "key = value" pair per
// line, '#' starts a comment. Values are kept as strings so that
// parse/serialize round-trips are exact; serialization is canonical
// (sorted keys).

#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "risbc/types.hpp"

namespace risbc {

struct Config {
    std::map<std::string, std::string> kv;

    static Config parse(const std::string& text) {
        Config c;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
            };
            if (trim(line).empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            if (key.empty())
                throw config_error("config line " + std::to_string(lineno) + ": empty key");
            c.kv[key] = trim(line.substr(eq + 1));
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open config file: " + path);
        std::ostringstream body;
        body << in.rdbuf();
        return parse(body.str());
    }

    std::string serialize() const {
        std::string out;
        for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
        return out;
    }

    bool has(const std::string& key) const { return kv.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback = {}) const {
        const auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    }

    double num(const std::string& key, double fallback) const {
        const auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw config_error("");
            return v;
        } catch (...) {
            throw config_error("config key '" + key + "': not a number: " + it->second);
        }
    }

    long integer(const std::string& key, long fallback) const {
        const double v = num(key, (double)fallback);
        const long i = (long)v;
        if ((double)i != v) throw config_error("config key '" + key + "': not an integer");
        return i;
    }

    bool boolean(const std::string& key, bool fallback) const {
        const auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw config_error("config key '" + key + "': expected true/false");
    }

    void set(const std::string& key, const std::string& value) { kv[key] = value; }

    void set_num(const std::string& key, double value) {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof(buf), value);
        kv[key] = std::string(buf, res.ptr);
    }
};

}  // namespace risbc
