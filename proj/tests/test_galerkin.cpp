#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>

using namespace optrace;
using support::sym2;

namespace {

TrigPotential scalar_cos(double amp, int r) {
    TrigPotential q(1);
    q.add_cos(r, SymMatrix::scalar(amp));
    return q;
}

TrigPotential mixed_d2() {
    TrigPotential q(2);
    q.add_cos(1, sym2(0.1, 0.05, -0.1));
    q.add_cos(2, sym2(0.15, 0.0, 0.15));
    q.add_sin(2, sym2(0.0, 0.1, 0.0));
    return q;
}

} // namespace

TEST_CASE("truncation specs validate their inputs", "[galerkin]") {
    SECTION("direct construction") {
        const TruncationSpec spec(12, 2, 4);
        CHECK(spec.basis_size() == 26);
        CHECK_THROWS_AS(TruncationSpec(-1, 1, 0), std::invalid_argument);
        CHECK_THROWS_AS(TruncationSpec(4, 0, 2), std::invalid_argument);
        CHECK_THROWS_AS(TruncationSpec(4, 1, 5), std::invalid_argument);
    }

    SECTION("derived from a potential with a safety buffer") {
        const TrigPotential q = scalar_cos(0.3, 2);
        const TruncationSpec spec = TruncationSpec::for_potential(q, 4);
        CHECK(spec.usable_p == 4);
        CHECK(spec.m_max == 12); // buffer defaults to max(8, 4*bandwidth)
        CHECK(TruncationSpec::for_potential(q, 4, 10).m_max == 14);
        CHECK(TruncationSpec::for_potential(q, 4, -1, 20).m_max == 20);
    }

    SECTION("buffers below the resolution floor are refused") {
        const TrigPotential q = scalar_cos(0.3, 2);
        CHECK_THROWS_AS(TruncationSpec::for_potential(q, 4, 4), ConfigError);
        CHECK_THROWS_AS(TruncationSpec::for_potential(q, 4, -1, 11), ConfigError);
        CHECK_THROWS_AS(TruncationSpec::for_potential(q, -1), ConfigError);
    }

    SECTION("basis sizes beyond the dense-solver budget are refused") {
        CHECK_THROWS_AS(TruncationSpec::for_potential(TrigPotential(1), 9993), ConfigError);
        CHECK_NOTHROW(TruncationSpec::for_potential(TrigPotential(1), 9991));
    }
}

TEST_CASE("assembled matrices match hand computations", "[galerkin]") {
    SECTION("scalar cosine potential on a three-level basis") {
        const TrigPotential q = scalar_cos(0.2, 2);
        const TruncationSpec spec(2, 1, 2);
        const Eigen::MatrixXd a = assemble_matrix(q, spec);
        const double c = 0.2 / std::sqrt(2.0);
        REQUIRE(a.rows() == 3);
        CHECK(std::abs(a(0, 0) - 0.0) < 1e-15);
        CHECK(std::abs(a(1, 1) - 1.1) < 1e-15);
        CHECK(std::abs(a(2, 2) - 4.0) < 1e-15);
        CHECK(std::abs(a(0, 2) - c) < 1e-15);
        CHECK(std::abs(a(2, 0) - c) < 1e-15);
        CHECK(std::abs(a(0, 1)) < 1e-15);
        CHECK(std::abs(a(1, 2)) < 1e-15);
    }

    SECTION("zero potential leaves the free diagonal") {
        const Eigen::MatrixXd a0 = assemble_matrix(TrigPotential(1), TruncationSpec(0, 1, 0));
        REQUIRE(a0.rows() == 1);
        CHECK(a0(0, 0) == 0.0);

        const Eigen::MatrixXd a1 = assemble_matrix(TrigPotential(2), TruncationSpec(1, 2, 1));
        REQUIRE(a1.rows() == 4);
        CHECK(a1.isApprox(Eigen::Vector4d(0, 0, 1, 1).asDiagonal().toDenseMatrix(), 1e-15));
    }

    SECTION("coupling matrix collects the per-level blocks") {
        const TrigPotential q = mixed_d2();
        const TruncationSpec spec = TruncationSpec::for_potential(q, 3);
        const Eigen::MatrixXd c = coupling_matrix(q, spec);
        REQUIRE(c.rows() == spec.basis_size());
        CHECK(c.isApprox(c.transpose(), 1e-14));
        for (int m = 0; m <= spec.m_max; ++m) {
            const SymMatrix b = q.coupling_block(m, 0);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) CHECK(std::abs(c(2 * m + i, j) - b(i, j)) < 1e-14);
        }
    }

    SECTION("dimension mismatches are rejected") {
        CHECK_THROWS_AS(coupling_matrix(mixed_d2(), TruncationSpec(8, 1, 2)),
                        std::invalid_argument);
    }
}

TEST_CASE("eigenvalue clusters", "[galerkin]") {
    SECTION("frozen three-level example") {
        const TrigPotential q = scalar_cos(0.2, 2);
        const TruncationSpec spec(2, 1, 2);
        const SpectralClusters cl = eigen_clusters(assemble_matrix(q, spec), spec, 0.2);
        const double split = std::sqrt(4.02);
        CHECK(cl.validated());
        CHECK(cl.cluster_count() == 3);
        CHECK(std::abs(cl.eigenvalues(0)[0] - (2.0 - split)) < 2e-13);
        CHECK(std::abs(cl.eigenvalues(1)[0] - 1.1) < 2e-13);
        CHECK(std::abs(cl.eigenvalues(2)[0] - (2.0 + split)) < 2e-13);
    }

    SECTION("zero potential clusters are exactly the free eigenvalues") {
        const TruncationSpec spec(3, 2, 3);
        const SpectralClusters cl = eigen_clusters(assemble_matrix(TrigPotential(2), spec), spec, 0.0);
        for (int m = 0; m <= 3; ++m)
            for (double v : cl.eigenvalues(m)) CHECK(std::abs(v - m * m) < 1e-12);
    }

    SECTION("certification rejects eigenvalues outside the localization interval") {
        const TrigPotential q = scalar_cos(1.0, 2); // sup-norm 1: clusters may overlap
        const TruncationSpec spec = TruncationSpec::for_potential(q, 2);
        CHECK_THROWS_AS(eigen_clusters(assemble_matrix(q, spec), spec, 0.45), ClusteringError);
        const SpectralClusters cl = detail::cluster_unchecked(assemble_matrix(q, spec), spec);
        CHECK(!cl.validated());
        CHECK(cl.cluster_count() == spec.m_max + 1);
    }

    SECTION("interval half-widths of 1/2 or more are refused") {
        const TruncationSpec spec(2, 1, 2);
        const Eigen::MatrixXd a = assemble_matrix(TrigPotential(1), spec);
        CHECK_THROWS_AS(eigen_clusters(a, spec, 0.6), std::invalid_argument);
        CHECK_THROWS_AS(eigen_clusters(a, spec, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(eigen_clusters(a, spec, -0.1), std::invalid_argument);
        CHECK_THROWS_AS(eigen_clusters(a, TruncationSpec(3, 1, 2), 0.2), std::invalid_argument);
    }

    SECTION("cluster index range") {
        const TruncationSpec spec(2, 1, 2);
        const SpectralClusters cl = eigen_clusters(assemble_matrix(TrigPotential(1), spec), spec, 0.0);
        CHECK_THROWS_AS(cl.eigenvalues(3), std::out_of_range);
        CHECK_THROWS_AS(cl.eigenvalues(-1), std::out_of_range);
    }
}

TEST_CASE("cluster power sums", "[galerkin]") {
    const TrigPotential q = scalar_cos(0.2, 2);
    const TruncationSpec spec(2, 1, 2);
    const SpectralClusters cl = eigen_clusters(assemble_matrix(q, spec), spec, 0.2);

    SECTION("frozen values") {
        const TruncationSpec z(4, 1, 4);
        const SpectralClusters zero = eigen_clusters(assemble_matrix(TrigPotential(1), z), z, 0.0);
        CHECK(std::abs(power_sum(zero, 3, 2)) < 1e-15);

        CHECK(std::abs(power_sum(cl, 1, 2) - 0.21) < 1e-13);
        const double lam0 = 2.0 - std::sqrt(4.02);
        CHECK(std::abs(power_sum(cl, 0, 2) - lam0 * lam0) < 1e-12);
    }

    SECTION("input validation") {
        CHECK_THROWS_AS(power_sum(cl, 3, 2), std::out_of_range);
        CHECK_THROWS_AS(power_sum(cl, 0, 0), std::domain_error);
    }
}

TEST_CASE("eigenvalue localization for certified random potentials", "[galerkin]") {
    support::Rng rng(20240822);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 1 + (trial % 2);
        const TrigPotential q = support::random_potential(rng, d, 1 + trial % 3, 0.35);
        const TruncationSpec spec = TruncationSpec::for_potential(q, 5);
        const SpectralClusters cl = eigen_clusters(assemble_matrix(q, spec), spec, 0.35);
        CHECK(cl.validated());
        for (int m = 0; m <= spec.m_max; ++m)
            for (double v : cl.eigenvalues(m)) CHECK(std::abs(v - m * m) <= 0.35 + 1e-9);
    }
}

TEST_CASE("truncation preserves the total trace", "[galerkin]") {
    const TrigPotential q = mixed_d2();
    const TruncationSpec spec = TruncationSpec::for_potential(q, 4);
    const Eigen::MatrixXd a = assemble_matrix(q, spec);
    const SpectralClusters cl = detail::cluster_unchecked(a, spec);

    long double shift = 0.0L;
    for (int m = 0; m <= spec.m_max; ++m) {
        for (int n = 0; n < 2; ++n) shift += cl.eigenvalue_l(m, n);
        shift -= 2.0L * m * m;
    }
    const double coupling_trace = coupling_matrix(q, spec).trace();
    CHECK(std::abs(static_cast<double>(shift) - coupling_trace) <=
          1e-9 * std::max(1.0, std::abs(coupling_trace)));
    // The mixed potential has mean trace 0.15*pi concentrated at level one.
    CHECK(std::abs(coupling_trace - 0.15) < 1e-13);
}

TEST_CASE("finite-section resolvents satisfy the second-kind identity", "[galerkin]") {
    const TrigPotential q = mixed_d2();
    const TruncationSpec spec = TruncationSpec::for_potential(q, 2);
    const int n = spec.basis_size();

    const Eigen::MatrixXd a = assemble_matrix(q, spec);
    const Eigen::MatrixXd c = coupling_matrix(q, spec);
    const Eigen::MatrixXd d = a - c;

    const std::complex<double> lambda(0.0, 1.0);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd r = (a.cast<std::complex<double>>() - lambda * id).inverse();
    const Eigen::MatrixXcd r0 = (d.cast<std::complex<double>>() - lambda * id).inverse();

    // R_λ − R⁰_λ = −R_λ C R⁰_λ for the finite sections, entry by entry.
    const Eigen::MatrixXcd lhs = r - r0;
    const Eigen::MatrixXcd rhs = -r * c.cast<std::complex<double>>() * r0;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("retained eigenvalues are stable under wider truncation", "[galerkin]") {
    SECTION("scalar cosine potential") {
        const TrigPotential q = scalar_cos(0.3, 2);
        const TruncationSpec base = TruncationSpec::for_potential(q, 4);
        const TruncationSpec wide =
            TruncationSpec::for_potential(q, 4, -1, base.m_max + 2 * q.bandwidth());
        const SpectralClusters cb = eigen_clusters(assemble_matrix(q, base), base, 0.3);
        const SpectralClusters cw = eigen_clusters(assemble_matrix(q, wide), wide, 0.3);
        for (int m = 0; m <= 4; ++m)
            CHECK(std::abs(cb.eigenvalues(m)[0] - cw.eigenvalues(m)[0]) < 1e-8);
    }

    SECTION("pure-cosine matrix potential") {
        support::Rng rng(7);
        TrigPotential q(2);
        for (int r = 0; r <= 2; ++r) {
            SymMatrix m(2);
            for (int i = 0; i < 2; ++i)
                for (int j = i; j < 2; ++j) m.set(i, j, rng.uniform(-0.1, 0.1));
            q.add_cos(r, m);
        }
        const TruncationSpec base = TruncationSpec::for_potential(q, 4);
        const TruncationSpec wide =
            TruncationSpec::for_potential(q, 4, -1, base.m_max + 2 * q.bandwidth());
        const SpectralClusters cb = eigen_clusters(assemble_matrix(q, base), base, 0.45);
        const SpectralClusters cw = eigen_clusters(assemble_matrix(q, wide), wide, 0.45);
        for (int m = 0; m <= 4; ++m)
            for (int n = 0; n < 2; ++n)
                CHECK(std::abs(cb.eigenvalues(m)[n] - cw.eigenvalues(m)[n]) < 1e-8);
    }
}
