#pragma once

#include "optrace/report_io.hpp"
#include "optrace/run_config.hpp"

#include <iostream>
#include <string>

// Command dispatch: turns a parsed RunConfig into a report file plus a
// one-line summary. All numeric work happens in the module headers; this
// layer only sequences it and routes the result to the right renderer.

namespace optrace {

struct RunResult {
    std::string report_path;
    std::string summary;
};

namespace detail {

// Shared cluster policy: certify the localization intervals when the
// smallness condition holds; otherwise fall back to sort-order grouping and
// say so in the warnings rather than refusing to produce a report.
struct ClusterBundle {
    SpectralClusters clusters;
    bool validated = false;
    std::vector<std::string> warnings;
};

inline ClusterBundle make_clusters(const TrigPotential& q, const TruncationSpec& spec,
                                   const ConditionReport& cond) {
    const Eigen::MatrixXd a = assemble_matrix(q, spec);
    if (cond.q2_pass) return {eigen_clusters(a, spec, cond.q2_sup_norm), true, {}};
    return {cluster_unchecked(a, spec),
            false,
            {"q2_violated: sup norm " + fmt17(cond.q2_sup_norm) +
             " >= 0.5; clusters taken in sort order without interval certification"}};
}

} // namespace detail

inline RunResult run(const RunConfig& config, std::ostream& log = std::cout) {
    const TrigPotential q = build_potential(config);
    const std::string path =
        config.out.empty() ? config.command + "_report." + config.format : config.out;
    const bool csv = config.format == "csv";
    std::string content;
    std::string summary;

    if (config.command == "check") {
        CheckReport rep;
        rep.k = config.k;
        rep.dim = config.dim;
        rep.potential = q.describe();
        rep.conditions = check_conditions(q, config.k);
        const bool all = rep.conditions.q2_pass && rep.conditions.q5_all_pass() &&
                         rep.conditions.q6_pass && rep.conditions.symmetric;
        content = csv ? render_check_csv(rep) : render_check_json(rep);
        summary = "check: d=" + std::to_string(config.dim) + " k=" + std::to_string(config.k) +
                  " sup_norm=" + detail::fmt17(rep.conditions.q2_sup_norm) +
                  " all_pass=" + detail::jbool(all);
    } else if (config.command == "spectrum") {
        const TruncationSpec spec = truncation_for(config, q);
        const ConditionReport cond = check_conditions(q, config.k);
        const detail::ClusterBundle bundle = detail::make_clusters(q, spec, cond);
        SpectrumReport rep;
        rep.k = config.k;
        rep.dim = config.dim;
        rep.potential = q.describe();
        rep.sup_norm_bound = cond.q2_sup_norm;
        rep.clusters_validated = bundle.validated;
        rep.warnings = bundle.warnings;
        for (int m = 0; m <= spec.usable_p; ++m)
            rep.eigenvalues.push_back(bundle.clusters.eigenvalues(m));
        content = csv ? render_spectrum_csv(rep) : render_spectrum_json(rep);
        summary = "spectrum: d=" + std::to_string(config.dim) +
                  " clusters=" + std::to_string(spec.usable_p + 1) +
                  " validated=" + detail::jbool(bundle.validated);
    } else if (config.command == "theorem21") {
        const TruncationSpec spec = truncation_for(config, q);
        const ContourOptions opt = contour_for(config);
        const ResolventTraces engine(q, spec);
        const int jmax = 2 * config.k + 2;
        const ResidueTable table =
            residue_table(q, spec, config.p_list.back(), config.k, jmax, opt);
        Theorem21Report rep;
        rep.k = config.k;
        rep.dim = config.dim;
        rep.potential = q.describe();
        for (int p : config.p_list) {
            const MpjTables mpj = mpj_big_circle(engine, p, config.k, jmax, opt);
            for (int j = 1; j <= jmax; ++j) {
                detail::KahanSum acc;
                for (int m = 0; m <= p; ++m) acc.add(table.at(m, j));
                const double sign = (j % 2 == 0) ? 1.0 : -1.0;
                Theorem21Row row;
                row.p = p;
                row.j = j;
                row.eq24 = mpj.eq24[static_cast<size_t>(j) - 1];
                row.eq26 = mpj.eq26[static_cast<size_t>(j) - 1];
                row.residue_sum = sign * (static_cast<double>(config.k) / j) * acc.value();
                const double lo = std::min({row.eq24, row.eq26, row.residue_sum});
                const double hi = std::max({row.eq24, row.eq26, row.residue_sum});
                row.spread = hi - lo;
                rep.max_spread = std::max(rep.max_spread, row.spread);
                rep.rows.push_back(row);
            }
        }
        content = csv ? render_theorem21_csv(rep) : render_theorem21_json(rep);
        summary = "theorem21: k=" + std::to_string(config.k) +
                  " rows=" + std::to_string(rep.rows.size()) +
                  " max_spread=" + detail::fmt17(rep.max_spread);
    } else if (config.command == "identities") {
        IdentitiesReport rep;
        rep.k = config.k;
        rep.dim = config.dim;
        rep.potential = q.describe();
        double max_diff = 0.0;
        for (int m = 1; m <= config.ibp_m_max; ++m) {
            const IbpSides sides = ibp_check(q, m, config.k);
            rep.rows.push_back({"ibp", m, sides.lhs, sides.rhs});
            max_diff = std::max(max_diff, std::abs(sides.lhs - sides.rhs));
        }
        const FourierSides fourier = fourier_boundary_sum(q, config.k, config.fourier_terms);
        rep.rows.push_back({"fourier", config.fourier_terms, fourier.partial_sum, fourier.rhs});
        content = csv ? render_identities_csv(rep) : render_identities_json(rep);
        summary = "identities: k=" + std::to_string(config.k) +
                  " ibp_max_diff=" + detail::fmt17(max_diff) +
                  " fourier_gap=" + detail::fmt17(std::abs(fourier.partial_sum - fourier.rhs));
    } else if (config.command == "remainder") {
        const TruncationSpec spec = truncation_for(config, q);
        const ContourOptions opt = contour_for(config);
        const ConditionReport cond = check_conditions(q, config.k);
        const detail::ClusterBundle bundle = detail::make_clusters(q, spec, cond);
        const int n = config.remainder_n == -1 ? 2 * config.k + 2 : config.remainder_n;
        const ResidueTable table =
            residue_table(q, spec, config.p_list.back(), config.k, n, opt);
        RemainderReport rep;
        rep.k = config.k;
        rep.dim = config.dim;
        rep.potential = q.describe();
        rep.n = n;
        rep.warnings = bundle.warnings;
        for (int p : config.p_list)
            rep.rows.push_back(
                {p, detail::remainder_from_table(table, bundle.clusters, p, config.k, n)});
        content = csv ? render_remainder_csv(rep) : render_remainder_json(rep);
        summary = "remainder: k=" + std::to_string(config.k) + " N=" + std::to_string(n) +
                  " last=" + detail::fmt17(rep.rows.back().second);
    } else if (config.command == "verify") {
        const TruncationSpec spec = truncation_for(config, q);
        const ContourOptions opt = contour_for(config);
        const VerificationReport rep = verify_convergence(q, config.k, config.p_list, spec, opt);
        content = csv ? render_verify_csv(rep) : render_verify_json(rep);
        const VerificationRow& last = rep.rows.back();
        summary = "verify: d=" + std::to_string(config.dim) + " k=" + std::to_string(config.k) +
                  " p=" + std::to_string(last.p) + " rhs=" + detail::fmt17(rep.rhs) +
                  " deviation=" + detail::fmt17(last.deviation) +
                  " warnings=" + std::to_string(rep.warnings.size());
    } else {
        throw ConfigError("config: command: unknown command " + config.command);
    }

    atomic_write(path, content);
    summary += " -> " + path;
    log << summary << "\n";
    return {path, summary};
}

} // namespace optrace
