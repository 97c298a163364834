#pragma once

#include "optrace/contour.hpp"
#include "optrace/errors.hpp"
#include "optrace/galerkin.hpp"

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

// Resolvent-trace engine on the truncated basis. With D(λ) = (diag(m²) − λ)^{−1}
// the free resolvent and C the coupling matrix, the matrix of Q·R⁰_λ is
// G(λ) = C·D(λ), and the three trace families everything else is built from are
//
//     plain(j):             tr G(λ)^j
//     resolvent_weighted(j): tr D(λ) G(λ)^j          (= tr R⁰(QR⁰)^j)
//     full_difference:      tr[(A − λ)^{−1} − (diag − λ)^{−1}]
//
// The cluster moment sums M_pj admit three equivalent evaluations whose
// agreement is a sharp end-to-end check of the machinery:
//
//     eq24:        (−1)^{j+1} (1/2πi) ∮_{|λ|=p²+p} λ^k tr[D G^j] dλ
//     eq26:        (−1)^j (k/j) (1/2πi) ∮_{|λ|=p²+p} λ^{k−1} tr G^j dλ
//     residue_sum: (−1)^j (k/j) Σ_{m<=p} Res_{λ=m²} λ^{k−1} tr G^j
//
// (integration by parts on the circle links the first two; the residue
// theorem collapses the second to the third). The big circle |λ| = p² + p
// passes at distance p and p+1 from the poles p² and (p+1)², so it encloses
// exactly the clusters 0..p.

namespace optrace {

struct ContourOptions {
    double small_radius = 0.25;  // poles m² are >= 1 apart; 1/4 clears them all
    int small_nodes = 128;
    int big_min_nodes = 256;
    int big_nodes_per_p = 64;
};

enum class TraceKind { plain, resolvent_weighted, full_difference };

struct TraceVariant {
    TraceKind kind;
    int j;  // power of G; meaningful for plain and resolvent_weighted

    static TraceVariant plain(int j) { return make(TraceKind::plain, j); }
    static TraceVariant resolvent_weighted(int j) { return make(TraceKind::resolvent_weighted, j); }
    static TraceVariant full_difference() { return {TraceKind::full_difference, 0}; }

private:
    static TraceVariant make(TraceKind kind, int j) {
        if (j < 1) throw std::invalid_argument("TraceVariant: j must be >= 1");
        return {kind, j};
    }
};

class ResolventTraces {
public:
    ResolventTraces(const TrigPotential& q, const TruncationSpec& spec)
        : spec_(spec), coupling_c_(coupling_matrix(q, spec).cast<std::complex<double>>()) {
        const int n = spec.basis_size();
        diag_.resize(n);
        for (int m = 0; m <= spec.m_max; ++m)
            for (int i = 0; i < spec.d; ++i) diag_[m * spec.d + i] = double(m) * m;

        Eigen::MatrixXd a = coupling_c_.real();
        for (int i = 0; i < n; ++i) a(i, i) += diag_[i];
        const std::vector<long double> pert = detail::solve_sorted(a);
        perturbed_.assign(pert.begin(), pert.end());
    }

    const TruncationSpec& spec() const { return spec_; }

    // The unperturbed pole set {m² : m <= m_max}.
    std::vector<double> poles() const {
        std::vector<double> p(spec_.m_max + 1);
        for (int m = 0; m <= spec_.m_max; ++m) p[m] = double(m) * m;
        return p;
    }

    // tr G^j and optionally tr D G^j for all j = 1..jmax in one sweep; out
    // buffers hold jmax entries. One matrix product per extra order, so a
    // whole j-family costs barely more than its highest member.
    void power_traces(std::complex<double> lambda, int jmax, std::complex<double>* plain,
                      std::complex<double>* weighted) const {
        require_clear(lambda, diag_, "free resolvent pole");
        const int n = static_cast<int>(diag_.size());
        Eigen::MatrixXcd g(n, n);
        for (int b = 0; b < n; ++b) g.col(b) = coupling_c_.col(b) * (1.0 / (diag_[b] - lambda));
        Eigen::MatrixXcd p = g;
        Eigen::MatrixXcd next(n, n);
        for (int j = 1; j <= jmax; ++j) {
            if (j > 1) {
                next.noalias() = p * g;
                p.swap(next);
            }
            detail::KahanSumC tp, tw;
            for (int i = 0; i < n; ++i) {
                tp.add(p(i, i));
                if (weighted) tw.add(p(i, i) / (diag_[i] - lambda));
            }
            plain[j - 1] = tp.value();
            if (weighted) weighted[j - 1] = tw.value();
        }
    }

    std::complex<double> trace(std::complex<double> lambda, TraceVariant variant) const {
        switch (variant.kind) {
            case TraceKind::plain: {
                std::vector<std::complex<double>> buf(variant.j);
                power_traces(lambda, variant.j, buf.data(), nullptr);
                return buf[variant.j - 1];
            }
            case TraceKind::resolvent_weighted: {
                std::vector<std::complex<double>> buf(variant.j), wbuf(variant.j);
                power_traces(lambda, variant.j, buf.data(), wbuf.data());
                return wbuf[variant.j - 1];
            }
            case TraceKind::full_difference: {
                require_clear(lambda, diag_, "free resolvent pole");
                require_clear(lambda, perturbed_, "perturbed eigenvalue");
                detail::KahanSumC acc;
                for (double lam : perturbed_) acc.add(1.0 / (lam - lambda));
                for (double d : diag_) acc.add(-1.0 / (d - lambda));
                return acc.value();
            }
        }
        throw std::logic_error("TraceVariant: unknown kind");
    }

private:
    static void require_clear(std::complex<double> lambda, const std::vector<double>& points,
                              const char* what) {
        for (double q : points)
            if (std::abs(lambda - q) <= 1e-8)
                throw PoleProximityError(std::string("trace: evaluation point within 1e-8 of ") +
                                         what + " at " + detail::fmt17(q));
    }

    TruncationSpec spec_;
    Eigen::MatrixXcd coupling_c_;
    std::vector<double> diag_;
    std::vector<double> perturbed_;
};

// Trace of the requested variant at a single point (one-shot engine).
inline std::complex<double> weighted_trace(const TrigPotential& q, const TruncationSpec& spec,
                                           std::complex<double> lambda, TraceVariant variant) {
    return ResolventTraces(q, spec).trace(lambda, variant);
}

namespace detail {

// Res_{λ=m²}[λ^{k−1} tr G^j] for j = 1..jmax, by quadrature on the small
// circle around m². The residues of a real-symmetric problem are real; a
// material imaginary part indicates a broken contour and is fatal.
inline std::vector<double> residues_at_level(const ResolventTraces& engine, int m, int k, int jmax,
                                             const ContourOptions& opt) {
    const ContourSpec circle(std::complex<double>(double(m) * m, 0.0), opt.small_radius,
                             opt.small_nodes);
    circle.require_clear_of_poles(engine.poles());
    std::vector<KahanSumC> acc(jmax);
    std::vector<std::complex<double>> buf(jmax);
    for (int t = 0; t < circle.nodes; ++t) {
        const double theta = 2.0 * std::numbers::pi * t / circle.nodes;
        const std::complex<double> w = std::polar(1.0, theta);
        const std::complex<double> lambda = circle.center + circle.radius * w;
        engine.power_traces(lambda, jmax, buf.data(), nullptr);
        const std::complex<double> lk = ipow(lambda, k - 1);
        for (int j = 1; j <= jmax; ++j) acc[j - 1].add(lk * buf[j - 1] * w);
    }
    std::vector<double> res(jmax);
    for (int j = 1; j <= jmax; ++j) {
        const std::complex<double> val = acc[j - 1].value() * (circle.radius / circle.nodes);
        if (std::abs(val.imag()) > 1e-9)
            throw SymmetryError("residue at m=" + std::to_string(m) + ", j=" + std::to_string(j) +
                                ": imaginary part " + fmt17(val.imag()) + " exceeds 1e-9");
        res[j - 1] = val.real();
    }
    return res;
}

} // namespace detail

inline double residue_at(const TrigPotential& q, const TruncationSpec& spec, int m, int k, int j,
                         const ContourOptions& opt = {}) {
    if (m < 0 || m > spec.m_max)
        throw std::out_of_range("residue_at: level " + std::to_string(m) +
                                " not represented (m_max " + std::to_string(spec.m_max) + ")");
    if (k < 1) throw std::domain_error("residue_at: k must be >= 1");
    if (j < 1) throw std::domain_error("residue_at: j must be >= 1");
    const ResolventTraces engine(q, spec);
    return detail::residues_at_level(engine, m, k, j, opt)[j - 1];
}

// Residues for every level m <= p and order j <= jmax, computed off a single
// engine so sweeps over p and j share all setup.
struct ResidueTable {
    int p;
    int k;
    int jmax;
    std::vector<double> values;  // (p+1) × jmax, level-major

    double at(int m, int j) const { return values[static_cast<size_t>(m) * jmax + (j - 1)]; }
};

inline ResidueTable residue_table(const TrigPotential& q, const TruncationSpec& spec, int p, int k,
                                  int jmax, const ContourOptions& opt = {}) {
    if (p < 0 || p > spec.m_max)
        throw std::out_of_range("residue_table: p must lie in [0, m_max]");
    if (k < 1 || jmax < 1) throw std::domain_error("residue_table: need k >= 1 and jmax >= 1");
    const ResolventTraces engine(q, spec);
    ResidueTable table{p, k, jmax, {}};
    table.values.reserve(static_cast<size_t>(p + 1) * jmax);
    for (int m = 0; m <= p; ++m) {
        const std::vector<double> res = detail::residues_at_level(engine, m, k, jmax, opt);
        table.values.insert(table.values.end(), res.begin(), res.end());
    }
    return table;
}

enum class MpjVia { eq24, eq26, residue_sum };

// Both big-circle routes for every j = 1..jmax in a single contour sweep.
struct MpjTables {
    std::vector<double> eq24;  // index j−1
    std::vector<double> eq26;
};

inline MpjTables mpj_big_circle(const ResolventTraces& engine, int p, int k, int jmax,
                               const ContourOptions& opt = {}) {
    if (p < 1) throw std::domain_error("m_pj big circle: p must be >= 1 (radius p^2 + p)");
    if (p > engine.spec().m_max)
        throw std::out_of_range("m_pj: p exceeds m_max of the truncation");
    const double radius = double(p) * p + p;
    const int nodes = std::max(opt.big_min_nodes, opt.big_nodes_per_p * p);
    const ContourSpec big(std::complex<double>(0.0, 0.0), radius, nodes);
    big.require_clear_of_poles(engine.poles());

    std::vector<detail::KahanSumC> acc24(jmax), acc26(jmax);
    std::vector<std::complex<double>> pbuf(jmax), wbuf(jmax);
    for (int t = 0; t < nodes; ++t) {
        const double theta = 2.0 * std::numbers::pi * t / nodes;
        const std::complex<double> w = std::polar(1.0, theta);
        const std::complex<double> lambda = big.center + radius * w;
        engine.power_traces(lambda, jmax, pbuf.data(), wbuf.data());
        const std::complex<double> lk1 = detail::ipow(lambda, k - 1);
        const std::complex<double> lk = lk1 * lambda;
        for (int j = 1; j <= jmax; ++j) {
            acc24[j - 1].add(lk * wbuf[j - 1] * w);
            acc26[j - 1].add(lk1 * pbuf[j - 1] * w);
        }
    }
    MpjTables tables{std::vector<double>(jmax), std::vector<double>(jmax)};
    for (int j = 1; j <= jmax; ++j) {
        const std::complex<double> i24 = acc24[j - 1].value() * (radius / nodes);
        const std::complex<double> i26 = acc26[j - 1].value() * (radius / nodes);
        if (std::abs(i24.imag()) > 1e-9 || std::abs(i26.imag()) > 1e-9)
            throw SymmetryError("m_pj: big-circle integral at j=" + std::to_string(j) +
                                " has imaginary part exceeding 1e-9");
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        tables.eq24[j - 1] = -sign * i24.real();          // (−1)^{j+1}
        tables.eq26[j - 1] = sign * (double(k) / j) * i26.real();
    }
    return tables;
}

// Cluster moment sum M_pj by the requested route.
inline double m_pj(const TrigPotential& q, const TruncationSpec& spec, int p, int k, int j,
                   MpjVia via, const ContourOptions& opt = {}) {
    if (p < 0 || p > spec.m_max) throw std::out_of_range("m_pj: p must lie in [0, m_max]");
    if (k < 1) throw std::domain_error("m_pj: k must be >= 1");
    if (j < 1) throw std::domain_error("m_pj: j must be >= 1");
    switch (via) {
        case MpjVia::residue_sum: {
            const ResidueTable table = residue_table(q, spec, p, k, j, opt);
            detail::KahanSum sum;
            for (int m = 0; m <= p; ++m) sum.add(table.at(m, j));
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            return sign * (double(k) / j) * sum.value();
        }
        case MpjVia::eq24: {
            const ResolventTraces engine(q, spec);
            return mpj_big_circle(engine, p, k, j, opt).eq24[j - 1];
        }
        case MpjVia::eq26: {
            const ResolventTraces engine(q, spec);
            return mpj_big_circle(engine, p, k, j, opt).eq26[j - 1];
        }
    }
    throw std::logic_error("m_pj: unknown route");
}

// Remainder diagnostic M_p^{(N)} = Σ_{m<=p} power_sum(m, k) − Σ_{j<=N} M_pj.
// A difference of near-equal ~Σλ^k quantities: the eigensum side comes from
// the extended-precision clusters, the residue side from compensated contour
// sums, leaving the true tail (often ~1e−13 and below) resolvable.
inline double remainder_estimate(const TrigPotential& q, const TruncationSpec& spec, int p, int k,
                                 int N, const SpectralClusters& clusters,
                                 const ContourOptions& opt = {}) {
    if (p > spec.usable_p)
        throw std::out_of_range("remainder_estimate: p exceeds usable_p");
    if (N < 1) throw std::domain_error("remainder_estimate: N must be >= 1");
    const ResidueTable table = residue_table(q, spec, p, k, N, opt);
    long double acc = 0.0L;
    for (int m = 0; m <= p; ++m) acc += static_cast<long double>(power_sum(clusters, m, k));
    for (int j = 1; j <= N; ++j) {
        detail::KahanSum sum;
        for (int m = 0; m <= p; ++m) sum.add(table.at(m, j));
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        acc -= static_cast<long double>(sign * (double(k) / j) * sum.value());
    }
    return static_cast<double>(acc);
}

} // namespace optrace
