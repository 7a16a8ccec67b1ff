#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace levylab {

// Flat key-value experiment configuration.
//
//   # comment
//   experiment = median        <- top-level keys keep their bare name
//   [ensemble]
//   alpha = 1.5                <- stored as "ensemble.alpha"
//   n = 1000
//
// Sections only prefix key names; there is no nesting.  Lookups for missing
// keys fail loudly with the fully qualified key name.
struct ExperimentConfig {
    std::map<std::string, std::string> kv;

    static ExperimentConfig from_text(const std::string& text) {
        ExperimentConfig cfg;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto strip = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                if (a == std::string::npos) return std::string{};
                const auto b = s.find_last_not_of(" \t\r");
                return s.substr(a, b - a + 1);
            };
            line = strip(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw std::invalid_argument("config: bad section header at line " +
                                                std::to_string(lineno));
                section = strip(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config: expected 'key = value' at line " +
                                            std::to_string(lineno));
            const std::string key = strip(line.substr(0, eq));
            const std::string val = strip(line.substr(eq + 1));
            if (key.empty())
                throw std::invalid_argument("config: empty key at line " + std::to_string(lineno));
            const std::string full = section.empty() ? key : section + "." + key;
            if (!cfg.kv.emplace(full, val).second)
                throw std::invalid_argument("config: duplicate key '" + full + "'");
        }
        return cfg;
    }

    static ExperimentConfig from_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("config: cannot open " + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        return from_text(ss.str());
    }

    bool has(const std::string& key) const { return kv.count(key) != 0; }

    const std::string& str(const std::string& key) const {
        const auto it = kv.find(key);
        if (it == kv.end()) throw std::invalid_argument("config: missing key '" + key + "'");
        return it->second;
    }
    std::string str_or(const std::string& key, const std::string& fallback) const {
        const auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    }

    double num(const std::string& key) const { return parse_num(key, str(key)); }
    double num_or(const std::string& key, double fallback) const {
        return has(key) ? num(key) : fallback;
    }

    long long integer(const std::string& key) const {
        const std::string& v = str(key);
        std::size_t used = 0;
        long long out = 0;
        try {
            out = std::stoll(v, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: key '" + key + "' is not an integer: " + v);
        }
        if (used != v.size())
            throw std::invalid_argument("config: key '" + key + "' is not an integer: " + v);
        return out;
    }
    long long integer_or(const std::string& key, long long fallback) const {
        return has(key) ? integer(key) : fallback;
    }

    // canonical accessors shared by the experiment drivers
    const std::string& experiment() const { return str("experiment"); }
    double alpha() const { return num("ensemble.alpha"); }
    int n() const { return checked_int("ensemble.n", 2, 100000); }
    int replicas() const { return checked_int("ensemble.replicas", 1, 10000000); }
    std::uint64_t seed() const { return static_cast<std::uint64_t>(integer_or("run.seed", 1)); }
    int workers() const { return static_cast<int>(integer_or("run.workers", 1)); }
    std::string out_dir() const { return str_or("run.out_dir", "out"); }

    // "center" resolves to N/2; anything else must be an explicit index
    int site_index() const {
        const std::string rule = str_or("observable.k", "center");
        if (rule == "center") return n() / 2;
        std::size_t used = 0;
        const int k = std::stoi(rule, &used);
        if (used != rule.size() || k < 1 || k > n())
            throw std::invalid_argument("config: key 'observable.k' must be 'center' or an index");
        return k;
    }

private:
    int checked_int(const std::string& key, long long lo, long long hi) const {
        const long long v = integer(key);
        if (v < lo || v > hi)
            throw std::invalid_argument("config: key '" + key + "' out of range");
        return static_cast<int>(v);
    }
    static double parse_num(const std::string& key, const std::string& v) {
        std::size_t used = 0;
        double out = 0.0;
        try {
            out = std::stod(v, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: key '" + key + "' is not a number: " + v);
        }
        if (used != v.size())
            throw std::invalid_argument("config: key '" + key + "' is not a number: " + v);
        return out;
    }
};

}  // namespace levylab
