#pragma once

#include "optrace/errors.hpp"
#include "optrace/numeric.hpp"
#include "optrace/trig_potential.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

// Galerkin discretization of −y″ + Q(x)y with Neumann conditions y′(0) =
// y′(π) = 0 in the basis ψ_{mn} = K_m φ_n cos(mx): the operator truncates to
//
//     A = diag(0², 1², …, m_max²) ⊗ I_d + C,    C[m,m′] = coupling_block(m, m′).
//
// When sup‖Q‖ < 1/2 the spectrum splits into clusters of d eigenvalues, the
// m-th confined to [m² − ‖Q‖, m² + ‖Q‖]; these intervals are pairwise
// disjoint, so sorting the spectrum and cutting it into consecutive groups of
// d recovers the clusters exactly.
//
// Eigensolves run in 80-bit extended precision: the remainder diagnostics
// downstream live at or below the double roundoff floor (|M_p| down to
// ~1e−14 on benchmark potentials), and double-precision eigenvalues would
// bury them in solver noise ~‖A‖·ε.

namespace optrace {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

struct TruncationSpec {
    int m_max;     // highest basis level kept
    int d;         // matrix dimension of the potential
    int usable_p;  // highest cluster index trusted for reporting

    TruncationSpec(int m_max_, int d_, int usable_p_)
        : m_max(m_max_), d(d_), usable_p(usable_p_) {
        if (m_max < 0) throw std::invalid_argument("TruncationSpec: m_max must be >= 0");
        if (d < 1) throw std::invalid_argument("TruncationSpec: d must be >= 1");
        if (usable_p < 0 || usable_p > m_max)
            throw std::invalid_argument("TruncationSpec: need 0 <= usable_p <= m_max");
    }

    int basis_size() const { return (m_max + 1) * d; }

    // Standard construction: keep a buffer of discarded levels above usable_p
    // so edge-of-truncation effects stay out of the reported clusters.
    // Defaults to max(8, 4·bandwidth); an explicit smaller buffer is rejected.
    static TruncationSpec for_potential(const TrigPotential& q, int usable_p, int buffer = -1,
                                        int m_max_override = -1) {
        if (usable_p < 0) throw ConfigError("truncation: usable_p must be >= 0");
        const int min_buffer = std::max(8, 4 * q.bandwidth());
        if (buffer < 0)
            buffer = min_buffer;
        else if (buffer < min_buffer)
            throw ConfigError("truncation: buffer " + std::to_string(buffer) +
                              " below required " + std::to_string(min_buffer) +
                              " (= max(8, 4*bandwidth))");
        int m_max = usable_p + buffer;
        if (m_max_override >= 0) {
            if (m_max_override < usable_p + buffer)
                throw ConfigError("truncation: m_max " + std::to_string(m_max_override) +
                                  " below usable_p + buffer = " + std::to_string(usable_p + buffer));
            m_max = m_max_override;
        }
        TruncationSpec spec(m_max, q.dim(), usable_p);
        if (spec.basis_size() > 10000)
            throw ConfigError("truncation: basis size " + std::to_string(spec.basis_size()) +
                              " exceeds the desk-scale limit 10000");
        return spec;
    }
};

// The coupling part C alone (no m² diagonal); this is the matrix of the
// multiplication-by-Q operator and the building block of the resolvent trace
// engine. Every block is computed — sine terms couple arbitrarily distant
// levels, so there is no band to skip.
inline Eigen::MatrixXd coupling_matrix(const TrigPotential& q, const TruncationSpec& spec) {
    if (q.dim() != spec.d) throw std::invalid_argument("coupling_matrix: potential/spec dim mismatch");
    const int d = spec.d;
    Eigen::MatrixXd c(spec.basis_size(), spec.basis_size());
    for (int m = 0; m <= spec.m_max; ++m)
        for (int mp = m; mp <= spec.m_max; ++mp) {
            const SymMatrix blk = q.coupling_block(m, mp);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    c(m * d + a, mp * d + b) = blk(a, b);
                    c(mp * d + b, m * d + a) = blk(a, b);
                }
        }
    return c;
}

inline Eigen::MatrixXd assemble_matrix(const TrigPotential& q, const TruncationSpec& spec) {
    Eigen::MatrixXd a = coupling_matrix(q, spec);
    for (int m = 0; m <= spec.m_max; ++m)
        for (int i = 0; i < spec.d; ++i) a(m * spec.d + i, m * spec.d + i) += double(m) * m;
    return a;
}

// Eigenvalues grouped by cluster index m; cluster m holds d values.
class SpectralClusters {
public:
    SpectralClusters(std::vector<long double> sorted, int d, int usable_p, bool validated)
        : values_(std::move(sorted)), d_(d), usable_p_(usable_p), validated_(validated) {}

    int d() const { return d_; }
    int usable_p() const { return usable_p_; }
    int cluster_count() const { return static_cast<int>(values_.size()) / d_; }
    // True when every eigenvalue was checked against its localization interval.
    bool validated() const { return validated_; }

    std::vector<double> eigenvalues(int m) const {
        require_level(m);
        std::vector<double> v(d_);
        for (int i = 0; i < d_; ++i) v[i] = static_cast<double>(values_[m * d_ + i]);
        return v;
    }

    long double eigenvalue_l(int m, int n) const {
        require_level(m);
        return values_[m * d_ + n];
    }

private:
    void require_level(int m) const {
        if (m < 0 || m >= cluster_count())
            throw std::out_of_range("SpectralClusters: cluster index " + std::to_string(m) +
                                    " out of range");
    }

    std::vector<long double> values_;
    int d_;
    int usable_p_;
    bool validated_;
};

namespace detail {

inline std::vector<long double> solve_sorted(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != matrix.cols()) throw std::invalid_argument("eigen_clusters: matrix not square");
    const MatrixXld a = matrix.cast<long double>();
    Eigen::SelfAdjointEigenSolver<MatrixXld> es(a, Eigen::EigenvaluesOnly);
    std::vector<long double> v(es.eigenvalues().data(), es.eigenvalues().data() + matrix.rows());
    std::sort(v.begin(), v.end());
    return v;
}

// Sorted grouping with no interval certification; for condition-violating
// potentials where the disjointness argument is unavailable.
inline SpectralClusters cluster_unchecked(const Eigen::MatrixXd& matrix, const TruncationSpec& spec) {
    if (matrix.rows() != spec.basis_size())
        throw std::invalid_argument("eigen_clusters: matrix size does not match spec");
    return SpectralClusters(solve_sorted(matrix), spec.d, spec.usable_p, false);
}

} // namespace detail

// Solves the truncated problem and groups the sorted spectrum into clusters,
// certifying |λ − m²| <= sup_norm_bound + 1e−9 for every eigenvalue. The
// bound must conform to the smallness hypothesis (< 1/2) for the disjoint-
// intervals argument to apply.
inline SpectralClusters eigen_clusters(const Eigen::MatrixXd& matrix, const TruncationSpec& spec,
                                       double sup_norm_bound) {
    if (!(sup_norm_bound >= 0.0 && sup_norm_bound < 0.5))
        throw std::invalid_argument("eigen_clusters: sup_norm_bound must lie in [0, 1/2) "
                                    "for cluster separation");
    if (matrix.rows() != spec.basis_size())
        throw std::invalid_argument("eigen_clusters: matrix size does not match spec");
    std::vector<long double> v = detail::solve_sorted(matrix);
    const long double slack = static_cast<long double>(sup_norm_bound) + 1e-9L;
    for (int m = 0; m <= spec.m_max; ++m)
        for (int i = 0; i < spec.d; ++i) {
            const long double lam = v[m * spec.d + i];
            const long double center = static_cast<long double>(m) * m;
            if (std::abs(lam - center) > slack)
                throw ClusteringError("eigen_clusters: eigenvalue " +
                                      detail::fmt17(static_cast<double>(lam)) + " outside [" +
                                      std::to_string(m) + "^2 - bound, " + std::to_string(m) +
                                      "^2 + bound]");
        }
    return SpectralClusters(std::move(v), spec.d, spec.usable_p, true);
}

// Σ_n (λ_mn^k − m^{2k}) over cluster m, the eigensum entering the trace
// formula; accumulated in extended precision because it is a difference of
// numbers ~m^{2k} agreeing to many digits.
inline double power_sum(const SpectralClusters& clusters, int m, int k) {
    if (m > clusters.usable_p())
        throw std::out_of_range("power_sum: cluster " + std::to_string(m) +
                                " beyond usable_p " + std::to_string(clusters.usable_p()));
    if (k < 1) throw std::domain_error("power_sum: k must be >= 1");
    const long double center_pow = detail::ipow(static_cast<long double>(m) * m, k);
    long double acc = 0.0L;
    for (int n = 0; n < clusters.d(); ++n)
        acc += detail::ipow(clusters.eigenvalue_l(m, n), k) - center_pow;
    return static_cast<double>(acc);
}

} // namespace optrace
