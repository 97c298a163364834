#pragma once

#include "optrace/galerkin.hpp"
#include "optrace/resolvent.hpp"
#include "optrace/trig_potential.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

// Assembly of the k-th order regularized trace identity. Per cluster m the
// braced summand is
//
//     bracket_m = Σ_n(λ_mn^k − m^{2k})
//               − k Σ_{j=2}^{2k+2} (−1)^j j^{−1} Res_{λ=m²}[λ^{k−1} tr(QR⁰_λ)^j]
//               − (k/π) m^{2k−2} ∫ tr Q dx                     (m >= 1)
//               − (4k/π) Σ_{i=2}^k m^{2k−2i} a_i               (m >= 1)
//
// with boundary coefficients a_i = (−1)^i 2^{−2i}[tr Q^{(2i−3)}(π) − tr Q^{(2i−3)}(0)],
// and the partial sums Σ_{m<=p} bracket_m converge to
//
//     RHS = (−1)^{k−1} k 2^{−2k} [tr Q^{(2k−2)}(0) + tr Q^{(2k−2)}(π)] + (2k/π) a_k.
//
// Two side identities are verified independently: the integration-by-parts
// cascade that turns ∫ tr Q cos(2mx) dx into boundary data plus a damped
// 2k−2 derivative moment, and the Fourier boundary sum
// Σ_m (1/π)∫ tr Q^{(2k−2)} cos(2mx) dx whose value is pure endpoint data.

namespace optrace {

// -- Side identities ---------------------------------------------------------

struct IbpSides {
    double lhs;
    double rhs;
};

// Integration-by-parts cascade for ∫₀^π tr Q(x) cos(2mx) dx, m >= 1:
// lhs is the direct moment; rhs rebuilds it from boundary data of odd
// derivatives plus the (2m)^{2−2k}-damped moment of Q^{(2k−2)}.
inline IbpSides ibp_check(const TrigPotential& q, int m, int k) {
    if (m < 1) throw std::domain_error("ibp_check: m must be >= 1");
    if (k < 2) throw std::domain_error("ibp_check: k must be >= 2");
    IbpSides sides{q.cos_moment(0, m), 0.0};
    for (int i = 2; i <= k; ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        sides.rhs += sign / detail::ipow(2.0 * m, 2 * i - 2) *
                     (q.endpoint_trace(2 * i - 3, Endpoint::pi) -
                      q.endpoint_trace(2 * i - 3, Endpoint::zero));
    }
    const double sign_k = ((k - 1) % 2 == 0) ? 1.0 : -1.0;
    sides.rhs += sign_k / detail::ipow(2.0 * m, 2 * k - 2) * q.cos_moment(2 * k - 2, m);
    return sides;
}

// Boundary coefficient a_i = (−1)^i 2^{−2i} [tr Q^{(2i−3)}(π) − tr Q^{(2i−3)}(0)].
inline double a_coefficient(const TrigPotential& q, int i) {
    if (i < 2) throw std::domain_error("a_coefficient: i must be >= 2");
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    return sign / detail::ipow(2.0, 2 * i) *
           (q.endpoint_trace(2 * i - 3, Endpoint::pi) - q.endpoint_trace(2 * i - 3, Endpoint::zero));
}

struct FourierSides {
    double partial_sum;
    double rhs;
};

// Partial sums of Σ_{m>=1} (1/π) ∫ tr Q^{(2k−2)} cos(2mx) dx against their
// closed form ¼[tr Q^{(2k−2)}(0) + tr Q^{(2k−2)}(π)] − (1/2π)[tr Q^{(2k−3)}(π) − tr Q^{(2k−3)}(0)].
inline FourierSides fourier_boundary_sum(const TrigPotential& q, int k, int m_terms) {
    if (k < 2) throw std::domain_error("fourier_boundary_sum: k must be >= 2");
    if (m_terms < 1) throw std::domain_error("fourier_boundary_sum: m_terms must be >= 1");
    detail::KahanSum acc;
    for (int m = 1; m <= m_terms; ++m) acc.add(q.cos_moment(2 * k - 2, m) / std::numbers::pi);
    const double rhs =
        0.25 * (q.endpoint_trace(2 * k - 2, Endpoint::zero) +
                q.endpoint_trace(2 * k - 2, Endpoint::pi)) -
        (q.endpoint_trace(2 * k - 3, Endpoint::pi) - q.endpoint_trace(2 * k - 3, Endpoint::zero)) /
            (2.0 * std::numbers::pi);
    return {acc.value(), rhs};
}

// -- Right-hand side ---------------------------------------------------------

// Closing value of the trace identity. simplified=true drops the a_k term,
// valid when the odd-derivative boundary data vanishes.
inline double rhs_value(const TrigPotential& q, int k, bool simplified = false) {
    if (k < 2) throw std::domain_error("rhs_value: k must be >= 2");
    const double sign = ((k - 1) % 2 == 0) ? 1.0 : -1.0;
    const double endpoint_term =
        sign * k / detail::ipow(2.0, 2 * k) *
        (q.endpoint_trace(2 * k - 2, Endpoint::zero) + q.endpoint_trace(2 * k - 2, Endpoint::pi));
    if (simplified) return endpoint_term;
    return endpoint_term + (2.0 / std::numbers::pi) * k * a_coefficient(q, k);
}

// Variant with unit weight on the endpoint-trace term. Both candidates are
// reported side by side so any numerical discrepancy between them is visible;
// they coincide whenever the 2k−2 endpoint traces vanish.
inline double rhs_value_alt(const TrigPotential& q, int k) {
    if (k < 2) throw std::domain_error("rhs_value_alt: k must be >= 2");
    const double sign = ((k - 1) % 2 == 0) ? 1.0 : -1.0;
    const double endpoint_term =
        sign / detail::ipow(2.0, 2 * k) *
        (q.endpoint_trace(2 * k - 2, Endpoint::zero) + q.endpoint_trace(2 * k - 2, Endpoint::pi));
    return endpoint_term + (2.0 / std::numbers::pi) * k * a_coefficient(q, k);
}

// -- Left-hand side ----------------------------------------------------------

struct TraceTermBreakdown {
    int m = 0;
    double eigensum = 0.0;
    double residue_correction = 0.0;
    double first_order_correction = 0.0;
    double boundary_correction = 0.0;
    double bracket = 0.0;  // eigensum − residue − first_order − boundary, exactly

    bool operator==(const TraceTermBreakdown&) const = default;
};

namespace detail {

inline std::vector<TraceTermBreakdown> cluster_breakdowns(const TrigPotential& q,
                                                          const SpectralClusters& clusters,
                                                          const ResidueTable& table, int k, int p) {
    const double mean_trace = q.cos_moment(0, 0);
    std::vector<double> a(static_cast<size_t>(k) + 1, 0.0);
    for (int i = 2; i <= k; ++i) a[i] = a_coefficient(q, i);

    std::vector<TraceTermBreakdown> terms;
    terms.reserve(static_cast<size_t>(p) + 1);
    for (int m = 0; m <= p; ++m) {
        TraceTermBreakdown t;
        t.m = m;
        t.eigensum = power_sum(clusters, m, k);
        double rc = 0.0;
        for (int j = 2; j <= table.jmax; ++j) {
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            rc += sign / j * table.at(m, j);
        }
        t.residue_correction = k * rc;
        if (m >= 1) {
            // The m = 0 basis function is constant: no m² scale, no secular
            // or boundary compensation is subtracted for that cluster.
            t.first_order_correction =
                k / std::numbers::pi * ipow(static_cast<double>(m), 2 * k - 2) * mean_trace;
            double bc = 0.0;
            for (int i = 2; i <= k; ++i) bc += ipow(static_cast<double>(m), 2 * k - 2 * i) * a[i];
            t.boundary_correction = 4.0 * k / std::numbers::pi * bc;
        }
        t.bracket = t.eigensum - t.residue_correction - t.first_order_correction -
                    t.boundary_correction;
        terms.push_back(t);
    }
    return terms;
}

// M_p^{(N)} from a residue table that already covers levels <= p, orders <= N.
inline double remainder_from_table(const ResidueTable& table, const SpectralClusters& clusters,
                                   int p, int k, int N) {
    if (table.p < p || table.jmax < N)
        throw std::invalid_argument("remainder_from_table: table does not cover (p, N)");
    long double acc = 0.0L;
    for (int m = 0; m <= p; ++m) acc += static_cast<long double>(power_sum(clusters, m, k));
    for (int j = 1; j <= N; ++j) {
        KahanSum sum;
        for (int m = 0; m <= p; ++m) sum.add(table.at(m, j));
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        acc -= static_cast<long double>(sign * (double(k) / j) * sum.value());
    }
    return static_cast<double>(acc);
}

} // namespace detail

struct LhsPartial {
    double value = 0.0;
    std::vector<TraceTermBreakdown> terms;
};

// Partial sum Σ_{m<=p} bracket_m with its per-cluster breakdown. The value is
// the plain left-to-right sum of the brackets — composition is exact, so the
// report's cumulative column can be reproduced from the terms bit for bit.
inline LhsPartial lhs_partial(const TrigPotential& q, const TruncationSpec& spec,
                              const SpectralClusters& clusters, int k, int p,
                              const ContourOptions& opt = {}) {
    if (k < 2) throw std::domain_error("lhs_partial: k must be >= 2");
    if (p < 0 || p > spec.usable_p || p > clusters.usable_p())
        throw std::out_of_range("lhs_partial: p must lie in [0, usable_p]");
    const ResidueTable table = residue_table(q, spec, p, k, 2 * k + 2, opt);
    LhsPartial out;
    out.terms = detail::cluster_breakdowns(q, clusters, table, k, p);
    for (const TraceTermBreakdown& t : out.terms) out.value += t.bracket;
    return out;
}

// -- Convergence report ------------------------------------------------------

struct VerificationRow {
    int p = 0;
    double lhs_partial = 0.0;
    double rhs = 0.0;
    double deviation = 0.0;
    double remainder = 0.0;  // M_p^{(2k+2)}

    bool operator==(const VerificationRow&) const = default;
};

struct VerificationSettings {
    int m_max = 0;
    int d = 1;
    int usable_p = 0;
    double small_radius = 0.25;
    int small_nodes = 128;
    int big_min_nodes = 256;
    int big_nodes_per_p = 64;
    double sup_norm_bound = 0.0;
    bool clusters_validated = true;

    bool operator==(const VerificationSettings&) const = default;
};

struct VerificationReport {
    int k = 2;
    int dim = 1;
    std::string potential;
    double rhs = 0.0;
    double rhs_alt = 0.0;
    ConditionReport conditions;
    VerificationSettings settings;
    std::vector<std::string> warnings;
    std::vector<VerificationRow> rows;

    bool operator==(const VerificationReport&) const = default;
};

// Full pipeline: hypothesis checks, one assembly + eigensolve, one residue
// sweep, then a row per requested p. Condition violations become warnings —
// the run still completes; for a potential breaking the smallness hypothesis
// the clusters are taken in sort order without interval certification (and
// flagged), since the disjointness argument is off the table.
inline VerificationReport verify_convergence(const TrigPotential& q, int k,
                                             const std::vector<int>& p_list,
                                             const TruncationSpec& spec,
                                             const ContourOptions& opt = {}) {
    if (k < 2) throw std::domain_error("verify_convergence: k must be >= 2");
    if (p_list.empty()) throw std::invalid_argument("verify_convergence: p_list must be nonempty");
    for (size_t i = 0; i < p_list.size(); ++i) {
        if (p_list[i] < 0) throw std::invalid_argument("verify_convergence: p must be >= 0");
        if (i > 0 && p_list[i] <= p_list[i - 1])
            throw std::invalid_argument("verify_convergence: p_list must be strictly ascending");
    }
    if (p_list.back() > spec.usable_p)
        throw std::out_of_range("verify_convergence: max(p_list) exceeds usable_p");

    VerificationReport rep;
    rep.k = k;
    rep.dim = q.dim();
    rep.potential = q.describe();
    rep.conditions = check_conditions(q, k);

    const double sup = rep.conditions.q2_sup_norm;
    const Eigen::MatrixXd a = assemble_matrix(q, spec);
    const bool certify = rep.conditions.q2_pass;
    const SpectralClusters clusters =
        certify ? eigen_clusters(a, spec, sup) : detail::cluster_unchecked(a, spec);

    if (!rep.conditions.q2_pass)
        rep.warnings.push_back("q2_violated: sup norm " + detail::fmt17(sup) +
                               " >= 0.5; clusters taken in sort order without interval "
                               "certification");
    for (size_t i = 0; i < rep.conditions.q5_orders.size(); ++i)
        if (!rep.conditions.q5_pass[i])
            rep.warnings.push_back("q5_violated: odd derivative order " +
                                   std::to_string(rep.conditions.q5_orders[i]) +
                                   " endpoint residual " +
                                   detail::fmt17(rep.conditions.q5_max_residual[i]));
    if (!rep.conditions.q6_pass)
        rep.warnings.push_back("q6_violated: mean trace " +
                               detail::fmt17(rep.conditions.q6_mean_trace));

    rep.rhs = rhs_value(q, k, false);
    rep.rhs_alt = rhs_value_alt(q, k);

    const int pmax = p_list.back();
    const ResidueTable table = residue_table(q, spec, pmax, k, 2 * k + 2, opt);
    const std::vector<TraceTermBreakdown> terms =
        detail::cluster_breakdowns(q, clusters, table, k, pmax);

    for (int p : p_list) {
        VerificationRow row;
        row.p = p;
        for (int m = 0; m <= p; ++m) row.lhs_partial += terms[m].bracket;
        row.rhs = rep.rhs;
        row.deviation = std::abs(row.lhs_partial - rep.rhs);
        row.remainder = detail::remainder_from_table(table, clusters, p, k, 2 * k + 2);
        rep.rows.push_back(row);
    }

    rep.settings = VerificationSettings{spec.m_max,        spec.d,
                                        spec.usable_p,     opt.small_radius,
                                        opt.small_nodes,   opt.big_min_nodes,
                                        opt.big_nodes_per_p, sup,
                                        clusters.validated()};
    return rep;
}

} // namespace optrace
