#pragma once

#include "optrace/errors.hpp"
#include "optrace/trace_formula.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

// Report rendering and file emission. Every floating value is rendered with
// %.17g (round-trip exact), key order is fixed, and nothing time- or
// host-dependent is written, so identical runs produce byte-identical files.
// The JSON writer is hand-rolled for exactly that reason: generic emitters
// print shortest-round-trip doubles, not a fixed 17 significant digits.

namespace optrace {

inline constexpr const char* kQ2NormConvention =
    "sup over a uniform x-grid of the coefficient-matrix spectral norm (lower estimate); "
    "the sum of coefficient spectral norms is the certified upper bound";

namespace detail {

inline std::string jstr(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out + "\"";
}

inline std::string jbool(bool b) { return b ? "true" : "false"; }

template <typename T, typename F>
std::string jlist(const std::vector<T>& v, F&& render) {
    std::string out = "[";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += render(v[i]);
    }
    return out + "]";
}

inline std::string conditions_json(const ConditionReport& c, const std::string& indent) {
    std::vector<bool> q5(c.q5_pass.begin(), c.q5_pass.end());
    std::string s = "{\n";
    s += indent + "  \"q2_sup_norm\": " + fmt17(c.q2_sup_norm) + ",\n";
    s += indent + "  \"q2_coeff_norm_sum\": " + fmt17(c.q2_coeff_norm_sum) + ",\n";
    s += indent + "  \"q2_pass\": " + jbool(c.q2_pass) + ",\n";
    s += indent + "  \"q5_orders\": " +
         jlist(c.q5_orders, [](int v) { return std::to_string(v); }) + ",\n";
    s += indent + "  \"q5_max_residual\": " +
         jlist(c.q5_max_residual, [](double v) { return fmt17(v); }) + ",\n";
    s += indent + "  \"q5_pass\": " + jlist(q5, [](bool v) { return std::string(jbool(v)); }) +
         ",\n";
    s += indent + "  \"q6_mean_trace\": " + fmt17(c.q6_mean_trace) + ",\n";
    s += indent + "  \"q6_pass\": " + jbool(c.q6_pass) + ",\n";
    s += indent + "  \"symmetric\": " + jbool(c.symmetric) + "\n";
    s += indent + "}";
    return s;
}

inline std::string conditions_csv_line(const ConditionReport& c) {
    return "# conditions: q2_sup_norm=" + fmt17(c.q2_sup_norm) +
           " q2_coeff_norm_sum=" + fmt17(c.q2_coeff_norm_sum) +
           " q2_pass=" + jbool(c.q2_pass) + " q5_pass=" + jbool(c.q5_all_pass()) +
           " q6_mean_trace=" + fmt17(c.q6_mean_trace) + " q6_pass=" + jbool(c.q6_pass) +
           " symmetric=" + jbool(c.symmetric);
}

inline std::string settings_csv_line(const VerificationSettings& s) {
    return "# settings: m_max=" + std::to_string(s.m_max) + " d=" + std::to_string(s.d) +
           " usable_p=" + std::to_string(s.usable_p) + " small_radius=" + fmt17(s.small_radius) +
           " small_nodes=" + std::to_string(s.small_nodes) +
           " big_min_nodes=" + std::to_string(s.big_min_nodes) +
           " big_nodes_per_p=" + std::to_string(s.big_nodes_per_p) +
           " sup_norm_bound=" + fmt17(s.sup_norm_bound) +
           " clusters_validated=" + jbool(s.clusters_validated);
}

inline std::string common_csv_header(const std::string& command, int k, int dim,
                                     const std::string& potential) {
    return "# command: " + command + "\n# k: " + std::to_string(k) +
           "\n# dim: " + std::to_string(dim) + "\n# potential: " + potential + "\n";
}

inline std::string warnings_csv_block(const std::vector<std::string>& warnings) {
    std::string s = "# warnings: " + std::to_string(warnings.size()) + "\n";
    for (const std::string& w : warnings) s += "# warning: " + w + "\n";
    return s;
}

} // namespace detail

// -- Verification report -----------------------------------------------------

inline std::string render_verify_csv(const VerificationReport& r) {
    std::string s = detail::common_csv_header("verify", r.k, r.dim, r.potential);
    s += "# rhs: " + detail::fmt17(r.rhs) + "\n";
    s += "# rhs_alt: " + detail::fmt17(r.rhs_alt) + "\n";
    s += detail::conditions_csv_line(r.conditions) + "\n";
    s += "# q2_norm_convention: " + std::string(kQ2NormConvention) + "\n";
    s += detail::settings_csv_line(r.settings) + "\n";
    s += detail::warnings_csv_block(r.warnings);
    s += "p,lhs_partial,rhs,deviation,remainder_N\n";
    for (const VerificationRow& row : r.rows)
        s += std::to_string(row.p) + "," + detail::fmt17(row.lhs_partial) + "," +
             detail::fmt17(row.rhs) + "," + detail::fmt17(row.deviation) + "," +
             detail::fmt17(row.remainder) + "\n";
    return s;
}

inline std::string render_verify_json(const VerificationReport& r) {
    std::string s = "{\n";
    s += "  \"command\": \"verify\",\n";
    s += "  \"k\": " + std::to_string(r.k) + ",\n";
    s += "  \"dim\": " + std::to_string(r.dim) + ",\n";
    s += "  \"potential\": " + detail::jstr(r.potential) + ",\n";
    s += "  \"rhs\": " + detail::fmt17(r.rhs) + ",\n";
    s += "  \"rhs_alt\": " + detail::fmt17(r.rhs_alt) + ",\n";
    s += "  \"conditions\": " + detail::conditions_json(r.conditions, "  ") + ",\n";
    s += "  \"q2_norm_convention\": " + detail::jstr(kQ2NormConvention) + ",\n";
    s += "  \"settings\": {\n";
    s += "    \"m_max\": " + std::to_string(r.settings.m_max) + ",\n";
    s += "    \"d\": " + std::to_string(r.settings.d) + ",\n";
    s += "    \"usable_p\": " + std::to_string(r.settings.usable_p) + ",\n";
    s += "    \"small_radius\": " + detail::fmt17(r.settings.small_radius) + ",\n";
    s += "    \"small_nodes\": " + std::to_string(r.settings.small_nodes) + ",\n";
    s += "    \"big_min_nodes\": " + std::to_string(r.settings.big_min_nodes) + ",\n";
    s += "    \"big_nodes_per_p\": " + std::to_string(r.settings.big_nodes_per_p) + ",\n";
    s += "    \"sup_norm_bound\": " + detail::fmt17(r.settings.sup_norm_bound) + ",\n";
    s += "    \"clusters_validated\": " + detail::jbool(r.settings.clusters_validated) + "\n";
    s += "  },\n";
    s += "  \"warnings\": " +
         detail::jlist(r.warnings, [](const std::string& w) { return detail::jstr(w); }) + ",\n";
    s += "  \"rows\": [\n";
    for (size_t i = 0; i < r.rows.size(); ++i) {
        const VerificationRow& row = r.rows[i];
        s += "    {\"p\": " + std::to_string(row.p) +
             ", \"lhs_partial\": " + detail::fmt17(row.lhs_partial) +
             ", \"rhs\": " + detail::fmt17(row.rhs) +
             ", \"deviation\": " + detail::fmt17(row.deviation) +
             ", \"remainder_N\": " + detail::fmt17(row.remainder) + "}";
        s += (i + 1 < r.rows.size()) ? ",\n" : "\n";
    }
    s += "  ]\n}\n";
    return s;
}

// Reads a JSON verification report back into memory; inverse of
// render_verify_json for well-formed documents.
inline VerificationReport parse_verify_report(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("report: invalid JSON: ") + e.what());
    }
    VerificationReport r;
    r.k = j.at("k").get<int>();
    r.dim = j.at("dim").get<int>();
    r.potential = j.at("potential").get<std::string>();
    r.rhs = j.at("rhs").get<double>();
    r.rhs_alt = j.at("rhs_alt").get<double>();
    const nlohmann::json& c = j.at("conditions");
    r.conditions.q2_sup_norm = c.at("q2_sup_norm").get<double>();
    r.conditions.q2_coeff_norm_sum = c.at("q2_coeff_norm_sum").get<double>();
    r.conditions.q2_pass = c.at("q2_pass").get<bool>();
    r.conditions.q5_orders = c.at("q5_orders").get<std::vector<int>>();
    r.conditions.q5_max_residual = c.at("q5_max_residual").get<std::vector<double>>();
    r.conditions.q5_pass = c.at("q5_pass").get<std::vector<bool>>();
    r.conditions.q6_mean_trace = c.at("q6_mean_trace").get<double>();
    r.conditions.q6_pass = c.at("q6_pass").get<bool>();
    r.conditions.symmetric = c.at("symmetric").get<bool>();
    const nlohmann::json& s = j.at("settings");
    r.settings.m_max = s.at("m_max").get<int>();
    r.settings.d = s.at("d").get<int>();
    r.settings.usable_p = s.at("usable_p").get<int>();
    r.settings.small_radius = s.at("small_radius").get<double>();
    r.settings.small_nodes = s.at("small_nodes").get<int>();
    r.settings.big_min_nodes = s.at("big_min_nodes").get<int>();
    r.settings.big_nodes_per_p = s.at("big_nodes_per_p").get<int>();
    r.settings.sup_norm_bound = s.at("sup_norm_bound").get<double>();
    r.settings.clusters_validated = s.at("clusters_validated").get<bool>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const nlohmann::json& jr : j.at("rows")) {
        VerificationRow row;
        row.p = jr.at("p").get<int>();
        row.lhs_partial = jr.at("lhs_partial").get<double>();
        row.rhs = jr.at("rhs").get<double>();
        row.deviation = jr.at("deviation").get<double>();
        row.remainder = jr.at("remainder_N").get<double>();
        r.rows.push_back(row);
    }
    return r;
}

// -- Atomic emission ---------------------------------------------------------

inline void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("report: cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("report: write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        std::error_code ignore;
        fs::remove(tmp, ignore);
        throw std::runtime_error("report: cannot move " + tmp.string() + " to " + target.string() +
                                 ": " + ec.message());
    }
}

inline void emit_report(const VerificationReport& report, const std::string& format,
                        const std::string& path) {
    if (format == "csv")
        atomic_write(path, render_verify_csv(report));
    else if (format == "json")
        atomic_write(path, render_verify_json(report));
    else
        throw ConfigError("report: format must be csv or json");
}

// -- Other command reports ---------------------------------------------------

struct CheckReport {
    int k = 2;
    int dim = 1;
    std::string potential;
    ConditionReport conditions;
};

inline std::string render_check_csv(const CheckReport& r) {
    std::string s = detail::common_csv_header("check", r.k, r.dim, r.potential);
    s += "# q2_norm_convention: " + std::string(kQ2NormConvention) + "\n";
    s += "key,value\n";
    s += "q2_sup_norm," + detail::fmt17(r.conditions.q2_sup_norm) + "\n";
    s += "q2_coeff_norm_sum," + detail::fmt17(r.conditions.q2_coeff_norm_sum) + "\n";
    s += "q2_pass," + std::string(detail::jbool(r.conditions.q2_pass)) + "\n";
    for (size_t i = 0; i < r.conditions.q5_orders.size(); ++i) {
        const std::string ord = std::to_string(r.conditions.q5_orders[i]);
        s += "q5_order_" + ord + "_residual," + detail::fmt17(r.conditions.q5_max_residual[i]) + "\n";
        s += "q5_order_" + ord + "_pass," + detail::jbool(r.conditions.q5_pass[i]) + "\n";
    }
    s += "q6_mean_trace," + detail::fmt17(r.conditions.q6_mean_trace) + "\n";
    s += "q6_pass," + std::string(detail::jbool(r.conditions.q6_pass)) + "\n";
    s += "symmetric," + std::string(detail::jbool(r.conditions.symmetric)) + "\n";
    const bool all = r.conditions.q2_pass && r.conditions.q5_all_pass() && r.conditions.q6_pass &&
                     r.conditions.symmetric;
    s += "all_pass," + std::string(detail::jbool(all)) + "\n";
    return s;
}

inline std::string render_check_json(const CheckReport& r) {
    std::string s = "{\n";
    s += "  \"command\": \"check\",\n";
    s += "  \"k\": " + std::to_string(r.k) + ",\n";
    s += "  \"dim\": " + std::to_string(r.dim) + ",\n";
    s += "  \"potential\": " + detail::jstr(r.potential) + ",\n";
    s += "  \"conditions\": " + detail::conditions_json(r.conditions, "  ") + ",\n";
    s += "  \"q2_norm_convention\": " + detail::jstr(kQ2NormConvention) + "\n";
    s += "}\n";
    return s;
}

struct SpectrumReport {
    int k = 2;
    int dim = 1;
    std::string potential;
    double sup_norm_bound = 0.0;
    bool clusters_validated = true;
    std::vector<std::string> warnings;
    std::vector<std::vector<double>> eigenvalues;  // index m = 0..usable_p
};

inline std::string render_spectrum_csv(const SpectrumReport& r) {
    std::string s = detail::common_csv_header("spectrum", r.k, r.dim, r.potential);
    s += "# sup_norm_bound: " + detail::fmt17(r.sup_norm_bound) + "\n";
    s += "# clusters_validated: " + std::string(detail::jbool(r.clusters_validated)) + "\n";
    s += detail::warnings_csv_block(r.warnings);
    s += "m,n,lambda\n";
    for (size_t m = 0; m < r.eigenvalues.size(); ++m)
        for (size_t n = 0; n < r.eigenvalues[m].size(); ++n)
            s += std::to_string(m) + "," + std::to_string(n) + "," +
                 detail::fmt17(r.eigenvalues[m][n]) + "\n";
    return s;
}

inline std::string render_spectrum_json(const SpectrumReport& r) {
    std::string s = "{\n";
    s += "  \"command\": \"spectrum\",\n";
    s += "  \"k\": " + std::to_string(r.k) + ",\n";
    s += "  \"dim\": " + std::to_string(r.dim) + ",\n";
    s += "  \"potential\": " + detail::jstr(r.potential) + ",\n";
    s += "  \"sup_norm_bound\": " + detail::fmt17(r.sup_norm_bound) + ",\n";
    s += "  \"clusters_validated\": " + detail::jbool(r.clusters_validated) + ",\n";
    s += "  \"warnings\": " +
         detail::jlist(r.warnings, [](const std::string& w) { return detail::jstr(w); }) + ",\n";
    s += "  \"clusters\": [\n";
    for (size_t m = 0; m < r.eigenvalues.size(); ++m) {
        s += "    {\"m\": " + std::to_string(m) + ", \"lambda\": " +
             detail::jlist(r.eigenvalues[m], [](double v) { return detail::fmt17(v); }) + "}";
        s += (m + 1 < r.eigenvalues.size()) ? ",\n" : "\n";
    }
    s += "  ]\n}\n";
    return s;
}

struct Theorem21Row {
    int p = 0;
    int j = 0;
    double eq24 = 0.0;
    double eq26 = 0.0;
    double residue_sum = 0.0;
    double spread = 0.0;
};

struct Theorem21Report {
    int k = 2;
    int dim = 1;
    std::string potential;
    double max_spread = 0.0;
    std::vector<Theorem21Row> rows;
};

inline std::string render_theorem21_csv(const Theorem21Report& r) {
    std::string s = detail::common_csv_header("theorem21", r.k, r.dim, r.potential);
    s += "# max_spread: " + detail::fmt17(r.max_spread) + "\n";
    s += "p,j,eq24,eq26,residue_sum,spread\n";
    for (const Theorem21Row& row : r.rows)
        s += std::to_string(row.p) + "," + std::to_string(row.j) + "," + detail::fmt17(row.eq24) +
             "," + detail::fmt17(row.eq26) + "," + detail::fmt17(row.residue_sum) + "," +
             detail::fmt17(row.spread) + "\n";
    return s;
}

inline std::string render_theorem21_json(const Theorem21Report& r) {
    std::string s = "{\n";
    s += "  \"command\": \"theorem21\",\n";
    s += "  \"k\": " + std::to_string(r.k) + ",\n";
    s += "  \"dim\": " + std::to_string(r.dim) + ",\n";
    s += "  \"potential\": " + detail::jstr(r.potential) + ",\n";
    s += "  \"max_spread\": " + detail::fmt17(r.max_spread) + ",\n";
    s += "  \"rows\": [\n";
    for (size_t i = 0; i < r.rows.size(); ++i) {
        const Theorem21Row& row = r.rows[i];
        s += "    {\"p\": " + std::to_string(row.p) + ", \"j\": " + std::to_string(row.j) +
             ", \"eq24\": " + detail::fmt17(row.eq24) + ", \"eq26\": " + detail::fmt17(row.eq26) +
             ", \"residue_sum\": " + detail::fmt17(row.residue_sum) +
             ", \"spread\": " + detail::fmt17(row.spread) + "}";
        s += (i + 1 < r.rows.size()) ? ",\n" : "\n";
    }
    s += "  ]\n}\n";
    return s;
}

struct IdentityRow {
    std::string identity;  // "ibp" or "fourier"
    int index = 0;         // m for ibp; m_terms for fourier
    double lhs = 0.0;
    double rhs = 0.0;
};

struct IdentitiesReport {
    int k = 2;
    int dim = 1;
    std::string potential;
    std::vector<IdentityRow> rows;
};

inline std::string render_identities_csv(const IdentitiesReport& r) {
    std::string s = detail::common_csv_header("identities", r.k, r.dim, r.potential);
    s += "identity,index,lhs,rhs,abs_diff\n";
    for (const IdentityRow& row : r.rows)
        s += row.identity + "," + std::to_string(row.index) + "," + detail::fmt17(row.lhs) + "," +
             detail::fmt17(row.rhs) + "," + detail::fmt17(std::abs(row.lhs - row.rhs)) + "\n";
    return s;
}

inline std::string render_identities_json(const IdentitiesReport& r) {
    std::string s = "{\n";
    s += "  \"command\": \"identities\",\n";
    s += "  \"k\": " + std::to_string(r.k) + ",\n";
    s += "  \"dim\": " + std::to_string(r.dim) + ",\n";
    s += "  \"potential\": " + detail::jstr(r.potential) + ",\n";
    s += "  \"rows\": [\n";
    for (size_t i = 0; i < r.rows.size(); ++i) {
        const IdentityRow& row = r.rows[i];
        s += "    {\"identity\": " + detail::jstr(row.identity) +
             ", \"index\": " + std::to_string(row.index) + ", \"lhs\": " + detail::fmt17(row.lhs) +
             ", \"rhs\": " + detail::fmt17(row.rhs) +
             ", \"abs_diff\": " + detail::fmt17(std::abs(row.lhs - row.rhs)) + "}";
        s += (i + 1 < r.rows.size()) ? ",\n" : "\n";
    }
    s += "  ]\n}\n";
    return s;
}

struct RemainderReport {
    int k = 2;
    int dim = 1;
    std::string potential;
    int n = 6;
    std::vector<std::string> warnings;
    std::vector<std::pair<int, double>> rows;  // (p, M_p^{(N)})
};

inline std::string render_remainder_csv(const RemainderReport& r) {
    std::string s = detail::common_csv_header("remainder", r.k, r.dim, r.potential);
    s += "# N: " + std::to_string(r.n) + "\n";
    s += detail::warnings_csv_block(r.warnings);
    s += "p,remainder_N\n";
    for (const auto& [p, value] : r.rows)
        s += std::to_string(p) + "," + detail::fmt17(value) + "\n";
    return s;
}

inline std::string render_remainder_json(const RemainderReport& r) {
    std::string s = "{\n";
    s += "  \"command\": \"remainder\",\n";
    s += "  \"k\": " + std::to_string(r.k) + ",\n";
    s += "  \"dim\": " + std::to_string(r.dim) + ",\n";
    s += "  \"potential\": " + detail::jstr(r.potential) + ",\n";
    s += "  \"N\": " + std::to_string(r.n) + ",\n";
    s += "  \"warnings\": " +
         detail::jlist(r.warnings, [](const std::string& w) { return detail::jstr(w); }) + ",\n";
    s += "  \"rows\": [\n";
    for (size_t i = 0; i < r.rows.size(); ++i) {
        s += "    {\"p\": " + std::to_string(r.rows[i].first) +
             ", \"remainder_N\": " + detail::fmt17(r.rows[i].second) + "}";
        s += (i + 1 < r.rows.size()) ? ",\n" : "\n";
    }
    s += "  ]\n}\n";
    return s;
}

} // namespace optrace
