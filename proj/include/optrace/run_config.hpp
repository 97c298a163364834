#pragma once

#include "optrace/errors.hpp"
#include "optrace/galerkin.hpp"
#include "optrace/resolvent.hpp"
#include "optrace/trig_potential.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

// Run configuration: a single JSON document describing the potential, the
// verification mode, and every numerical knob. Matrices arrive as row-major
// number lists with an explicit dim so fixtures are unambiguous across
// languages. Parsing is strict — unknown fields and malformed values fail
// with the offending field path in the message.

namespace optrace {

struct RunConfig {
    std::string command = "verify";  // check | spectrum | theorem21 | identities | remainder | verify
    int dim = 1;
    int k = 2;
    std::map<int, std::vector<double>> cos_terms;
    std::map<int, std::vector<double>> sin_terms;
    std::vector<int> p_list;

    // Truncation overrides; -1 means "derive from potential".
    int m_max = -1;
    int buffer = -1;

    // Contour geometry.
    double small_radius = 0.25;
    int small_nodes = 128;
    int big_min_nodes = 256;
    int big_nodes_per_p = 64;

    // Mode-specific knobs.
    int ibp_m_max = 10;      // identities: check the cascade for m = 1..ibp_m_max
    int fourier_terms = 1000;  // identities: partial-sum length
    int remainder_n = -1;    // remainder: N, -1 means 2k+2

    std::string out;           // empty: "<command>_report.<format>"
    std::string format = "csv";
    bool allow_large_k = false;

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
}

inline int get_int(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number_integer()) config_fail(path, "expected an integer");
    return j.get<int>();
}

inline double get_double(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) config_fail(path, "expected a number");
    return j.get<double>();
}

inline std::map<int, std::vector<double>> get_terms(const nlohmann::json& j,
                                                    const std::string& path, int dim,
                                                    int min_harmonic) {
    if (!j.is_object()) config_fail(path, "expected an object of harmonic -> row-major matrix");
    std::map<int, std::vector<double>> terms;
    for (const auto& [key, value] : j.items()) {
        const std::string entry = path + "[" + key + "]";
        int harmonic = 0;
        try {
            size_t pos = 0;
            harmonic = std::stoi(key, &pos);
            if (pos != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            config_fail(entry, "harmonic index must be an integer");
        }
        if (harmonic < min_harmonic)
            config_fail(entry, "harmonic must be >= " + std::to_string(min_harmonic));
        if (!value.is_array()) config_fail(entry, "expected a row-major number list");
        std::vector<double> vals;
        for (const auto& v : value) {
            if (!v.is_number()) config_fail(entry, "matrix entries must be numbers");
            vals.push_back(v.get<double>());
        }
        try {
            (void)SymMatrix::from_row_major(dim, vals);  // validates size and exact symmetry
        } catch (const std::invalid_argument& e) {
            config_fail(entry, e.what());
        }
        terms.emplace(harmonic, std::move(vals));
    }
    return terms;
}

} // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) detail::config_fail("$", "expected a JSON object");
    static const std::set<std::string> known = {
        "command",     "dim",        "k",          "cos_terms",     "sin_terms",
        "p_list",      "m_max",      "buffer",     "small_radius",  "small_nodes",
        "big_min_nodes", "big_nodes_per_p", "ibp_m_max", "fourier_terms", "remainder_n",
        "out",         "format",     "allow_large_k"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) detail::config_fail(key, "unknown field");

    RunConfig c;
    if (j.contains("command")) {
        if (!j["command"].is_string()) detail::config_fail("command", "expected a string");
        c.command = j["command"].get<std::string>();
    }
    static const std::set<std::string> commands = {"check",      "spectrum",  "theorem21",
                                                   "identities", "remainder", "verify"};
    if (!commands.count(c.command))
        detail::config_fail("command", "must be one of check, spectrum, theorem21, identities, "
                                       "remainder, verify");

    if (j.contains("dim")) c.dim = detail::get_int(j["dim"], "dim");
    if (c.dim < 1) detail::config_fail("dim", "must be >= 1");
    if (j.contains("k")) c.k = detail::get_int(j["k"], "k");
    if (c.k < 2) detail::config_fail("k", "must be >= 2");
    if (j.contains("allow_large_k")) {
        if (!j["allow_large_k"].is_boolean()) detail::config_fail("allow_large_k", "expected a boolean");
        c.allow_large_k = j["allow_large_k"].get<bool>();
    }
    // Desk-scale guard: residue orders grow as 2k+2 and contour magnitudes as
    // λ^k; beyond k=4 accuracy claims need re-analysis, so make it explicit.
    if (c.k > 4 && !c.allow_large_k)
        detail::config_fail("k", "k > 4 requires allow_large_k (desk-scale guard)");

    if (j.contains("cos_terms")) c.cos_terms = detail::get_terms(j["cos_terms"], "cos_terms", c.dim, 0);
    if (j.contains("sin_terms")) c.sin_terms = detail::get_terms(j["sin_terms"], "sin_terms", c.dim, 1);

    if (j.contains("p_list")) {
        if (!j["p_list"].is_array()) detail::config_fail("p_list", "expected a list of integers");
        for (const auto& v : j["p_list"]) c.p_list.push_back(detail::get_int(v, "p_list"));
    }
    // check and identities never touch the truncated operator, so p_list is
    // optional for them; every other command sizes its work from it.
    const bool needs_p = c.command != "check" && c.command != "identities";
    if (needs_p && c.p_list.empty()) detail::config_fail("p_list", "must be nonempty");
    for (size_t i = 0; i < c.p_list.size(); ++i) {
        if (c.p_list[i] < 0) detail::config_fail("p_list", "entries must be >= 0");
        if (i > 0 && c.p_list[i] <= c.p_list[i - 1])
            detail::config_fail("p_list", "must be strictly ascending");
    }

    if (j.contains("m_max")) c.m_max = detail::get_int(j["m_max"], "m_max");
    if (j.contains("buffer")) c.buffer = detail::get_int(j["buffer"], "buffer");

    if (j.contains("small_radius")) c.small_radius = detail::get_double(j["small_radius"], "small_radius");
    if (!(c.small_radius > 0.0 && c.small_radius <= 0.45))
        detail::config_fail("small_radius", "must lie in (0, 0.45] (poles are 1 apart)");
    if (j.contains("small_nodes")) c.small_nodes = detail::get_int(j["small_nodes"], "small_nodes");
    if (c.small_nodes < 16) detail::config_fail("small_nodes", "must be >= 16");
    if (j.contains("big_min_nodes")) c.big_min_nodes = detail::get_int(j["big_min_nodes"], "big_min_nodes");
    if (c.big_min_nodes < 16) detail::config_fail("big_min_nodes", "must be >= 16");
    if (j.contains("big_nodes_per_p")) c.big_nodes_per_p = detail::get_int(j["big_nodes_per_p"], "big_nodes_per_p");
    if (c.big_nodes_per_p < 1) detail::config_fail("big_nodes_per_p", "must be >= 1");

    if (j.contains("ibp_m_max")) c.ibp_m_max = detail::get_int(j["ibp_m_max"], "ibp_m_max");
    if (c.ibp_m_max < 1) detail::config_fail("ibp_m_max", "must be >= 1");
    if (j.contains("fourier_terms")) c.fourier_terms = detail::get_int(j["fourier_terms"], "fourier_terms");
    if (c.fourier_terms < 1) detail::config_fail("fourier_terms", "must be >= 1");
    if (j.contains("remainder_n")) c.remainder_n = detail::get_int(j["remainder_n"], "remainder_n");
    if (c.remainder_n != -1 && c.remainder_n < 1)
        detail::config_fail("remainder_n", "must be >= 1 (or omitted for 2k+2)");

    if (j.contains("out")) {
        if (!j["out"].is_string()) detail::config_fail("out", "expected a string");
        c.out = j["out"].get<std::string>();
    }
    if (j.contains("format")) {
        if (!j["format"].is_string()) detail::config_fail("format", "expected a string");
        c.format = j["format"].get<std::string>();
    }
    if (c.format != "csv" && c.format != "json")
        detail::config_fail("format", "must be csv or json");

    if (c.command == "theorem21")
        for (int p : c.p_list)
            if (p < 1) detail::config_fail("p_list", "theorem21 requires p >= 1 (big circle p^2 + p)");

    return c;
}

inline RunConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// Canonical JSON form: every field, fixed order. parse(to_json(c)) == c.
inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["command"] = c.command;
    j["dim"] = c.dim;
    j["k"] = c.k;
    nlohmann::json cos_obj = nlohmann::json::object(), sin_obj = nlohmann::json::object();
    for (const auto& [r, vals] : c.cos_terms) cos_obj[std::to_string(r)] = vals;
    for (const auto& [s, vals] : c.sin_terms) sin_obj[std::to_string(s)] = vals;
    j["cos_terms"] = cos_obj;
    j["sin_terms"] = sin_obj;
    j["p_list"] = c.p_list;
    j["m_max"] = c.m_max;
    j["buffer"] = c.buffer;
    j["small_radius"] = c.small_radius;
    j["small_nodes"] = c.small_nodes;
    j["big_min_nodes"] = c.big_min_nodes;
    j["big_nodes_per_p"] = c.big_nodes_per_p;
    j["ibp_m_max"] = c.ibp_m_max;
    j["fourier_terms"] = c.fourier_terms;
    j["remainder_n"] = c.remainder_n;
    j["out"] = c.out;
    j["format"] = c.format;
    j["allow_large_k"] = c.allow_large_k;
    return j;
}

// -- Derived objects ---------------------------------------------------------

inline TrigPotential build_potential(const RunConfig& c) {
    TrigPotential q(c.dim);
    for (const auto& [r, vals] : c.cos_terms) q.add_cos(r, SymMatrix::from_row_major(c.dim, vals));
    for (const auto& [s, vals] : c.sin_terms) q.add_sin(s, SymMatrix::from_row_major(c.dim, vals));
    return q;
}

inline TruncationSpec truncation_for(const RunConfig& c, const TrigPotential& q) {
    const int usable_p = c.p_list.back();
    return TruncationSpec::for_potential(q, usable_p, c.buffer, c.m_max);
}

inline ContourOptions contour_for(const RunConfig& c) {
    ContourOptions opt;
    opt.small_radius = c.small_radius;
    opt.small_nodes = c.small_nodes;
    opt.big_min_nodes = c.big_min_nodes;
    opt.big_nodes_per_p = c.big_nodes_per_p;
    return opt;
}

} // namespace optrace
