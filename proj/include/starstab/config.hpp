#pragma once

// INI-like run configuration: [eos] and [numerics] sections, key = value
// lines, '#'/';' comments. Parsing is fail-closed: unknown sections or keys
// are errors, so a typo can never silently fall back to a default.

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eos.hpp"

namespace starstab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    EquationOfState eos = EquationOfState::polytrope(1.0, 5.0 / 3.0);
    double tol = 1e-10;
    std::size_t N_grid = 2000;
    std::size_t N_mu = 33;
    double R_out_factor = 3.0;
    unsigned seed = 12345;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) ++a;
    while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
    return s.substr(a, b - a);
}

inline double to_num(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + v);
    }
}

}  // namespace detail

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::map<std::string, std::string> eos_kv, num_kv;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config: bad section at line " +
                                                      std::to_string(lineno));
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "eos" && section != "numerics")
                throw ConfigError("config: unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " +
                              std::to_string(lineno));
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (section == "eos") eos_kv[key] = val;
        else if (section == "numerics") num_kv[key] = val;
        else throw ConfigError("config: key outside a section at line " +
                               std::to_string(lineno));
    }

    RunConfig cfg;
    for (const auto& [k, v] : num_kv) {
        if (k == "tol") cfg.tol = detail::to_num(k, v);
        else if (k == "N_grid") cfg.N_grid = std::size_t(detail::to_num(k, v));
        else if (k == "N_mu") cfg.N_mu = std::size_t(detail::to_num(k, v));
        else if (k == "R_out_factor") cfg.R_out_factor = detail::to_num(k, v);
        else if (k == "seed") cfg.seed = unsigned(detail::to_num(k, v));
        else throw ConfigError("config: unknown [numerics] key '" + k + "'");
    }

    auto take = [&](const char* k) {
        auto it = eos_kv.find(k);
        if (it == eos_kv.end()) throw ConfigError("config: [eos] missing key '" +
                                                  std::string(k) + "'");
        const double x = detail::to_num(k, it->second);
        eos_kv.erase(it);
        return x;
    };
    auto fam_it = eos_kv.find("family");
    if (fam_it == eos_kv.end()) throw ConfigError("config: [eos] missing 'family'");
    const std::string family = fam_it->second;
    eos_kv.erase(fam_it);
    try {
        if (family == "polytrope") {
            cfg.eos = EquationOfState::polytrope(take("K"), take("gamma"));
        } else if (family == "white_dwarf") {
            cfg.eos = EquationOfState::white_dwarf(take("A"), take("B"));
        } else if (family == "composite") {
            cfg.eos = EquationOfState::composite(take("c_minus"), take("gamma0"),
                                                 take("gamma_inf"), take("rho_blend"));
        } else if (family == "tabulated") {
            auto it = eos_kv.find("table_path");
            if (it == eos_kv.end()) throw ConfigError("config: tabulated needs table_path");
            const std::string tp = it->second;
            eos_kv.erase(it);
            std::ifstream tf(tp);
            if (!tf) throw IoError("cannot open EOS table: " + tp);
            std::vector<double> rho, P;
            std::string row;
            while (std::getline(tf, row)) {
                row = detail::trim(row);
                if (row.empty() || row[0] == '#') continue;
                for (auto& ch : row)
                    if (ch == ',') ch = ' ';
                std::istringstream ss(row);
                double a, b;
                if (!(ss >> a >> b)) throw ConfigError("bad EOS table row: " + row);
                rho.push_back(a);
                P.push_back(b);
            }
            cfg.eos = EquationOfState::tabulated(std::move(rho), std::move(P));
        } else {
            throw ConfigError("config: unknown EOS family '" + family + "'");
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!eos_kv.empty())
        throw ConfigError("config: unknown [eos] key '" + eos_kv.begin()->first + "'");
    return cfg;
}

}  // namespace starstab
