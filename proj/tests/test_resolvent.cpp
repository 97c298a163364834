#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

using namespace optrace;
using support::sym2;

namespace {

using C = std::complex<double>;

TrigPotential scalar_cos(double amp, int r) {
    TrigPotential q(1);
    q.add_cos(r, SymMatrix::scalar(amp));
    return q;
}

TrigPotential scalar_sin(double amp, int s) {
    TrigPotential q(1);
    q.add_sin(s, SymMatrix::scalar(amp));
    return q;
}

TrigPotential mixed_d2() {
    TrigPotential q(2);
    q.add_cos(1, sym2(0.1, 0.05, -0.1));
    q.add_cos(2, sym2(0.15, 0.0, 0.15));
    q.add_sin(2, sym2(0.0, 0.1, 0.0));
    return q;
}

bool rel_close(double a, double b, double rel, double floor_abs) {
    return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), floor_abs);
}

} // namespace

TEST_CASE("contour circles validate and keep clear of poles", "[contour]") {
    CHECK_THROWS_AS(ContourSpec(C(1.0, 0.0), 0.0, 64), std::invalid_argument);
    CHECK_THROWS_AS(ContourSpec(C(1.0, 0.0), -1.0, 64), std::invalid_argument);
    CHECK_THROWS_AS(ContourSpec(C(1.0, 0.0), 0.25, 8), std::invalid_argument);

    // A pole at the center is fine (that is the residue being extracted);
    // a pole on or near the circle itself is fatal.
    const ContourSpec small(C(1.0, 0.0), 0.25, 64);
    CHECK_NOTHROW(small.require_clear_of_poles({0.0, 1.0, 4.0}));
    CHECK_THROWS_AS(small.require_clear_of_poles({1.25}), PoleProximityError);
    CHECK_THROWS_AS(small.require_clear_of_poles({1.2}), PoleProximityError);

    // Big circle for p = 1: |λ| = 2 passes between the poles 1 and 4 with
    // clearances 1 and 2, both above the absolute threshold 1/2.
    const ContourSpec big(C(0.0, 0.0), 2.0, 256);
    CHECK_NOTHROW(big.require_clear_of_poles({0.0, 1.0, 4.0, 9.0}));
    CHECK_THROWS_AS(big.require_clear_of_poles({2.3}), PoleProximityError);
}

TEST_CASE("contour quadrature extracts residues of rational functions", "[contour]") {
    const ContourSpec circle(C(1.0, 0.0), 0.25, 64);

    SECTION("simple pole") {
        const C v = contour_integral([](C z) { return 1.0 / (z - 1.0); }, circle);
        CHECK(std::abs(v - C(1.0, 0.0)) < 1e-12);
    }

    SECTION("holomorphic integrand vanishes") {
        const C v = contour_integral([](C z) { return z * z; }, circle);
        CHECK(std::abs(v) < 1e-12);
    }

    SECTION("double pole picks out the derivative") {
        const C v = contour_integral([](C z) { return z / ((1.0 - z) * (1.0 - z)); }, circle);
        CHECK(std::abs(v - C(1.0, 0.0)) < 1e-12);
    }

    SECTION("node count does not move a converged value") {
        const auto f = [](C z) { return 1.0 / (z - 1.0) + z * z * z; };
        const C a = contour_integral(f, ContourSpec(C(1.0, 0.0), 0.25, 128));
        const C b = contour_integral(f, ContourSpec(C(1.0, 0.0), 0.25, 256));
        CHECK(std::abs(a - b) < 1e-13);
    }
}

TEST_CASE("weighted resolvent traces", "[resolvent]") {
    const TrigPotential q = scalar_cos(1.0, 2);
    const TruncationSpec spec = TruncationSpec::for_potential(q, 2);

    SECTION("frozen values for the unit cos 2x potential") {
        // Only level m = 1 carries a diagonal coupling block (value 1/2), so
        // tr G(λ) = (1/2)/(1 − λ) exactly at any truncation.
        CHECK(std::abs(weighted_trace(q, spec, C(0.5, 0.0), TraceVariant::plain(1)) - 1.0) <
              1e-12);
        CHECK(std::abs(weighted_trace(q, spec, C(0.0, 1.0), TraceVariant::plain(1)) -
                       C(0.25, 0.25)) < 1e-12);
        CHECK(std::abs(weighted_trace(q, spec, C(0.5, 0.0), TraceVariant::resolvent_weighted(1)) -
                       2.0) < 1e-12);
    }

    SECTION("zero potential has identically zero power traces") {
        const TruncationSpec z(6, 1, 2);
        CHECK(weighted_trace(TrigPotential(1), z, C(0.5, 0.0), TraceVariant::plain(2)) == 0.0);
        CHECK(weighted_trace(TrigPotential(1), z, C(2.5, 0.0), TraceVariant::full_difference()) ==
              0.0);
    }

    SECTION("evaluation next to a pole is refused") {
        CHECK_THROWS_AS(weighted_trace(q, spec, C(1.0 + 5e-9, 0.0), TraceVariant::plain(1)),
                        PoleProximityError);
        const TruncationSpec z(6, 1, 2);
        CHECK_THROWS_AS(
            weighted_trace(TrigPotential(1), z, C(4.0 + 5e-9, 0.0), TraceVariant::full_difference()),
            PoleProximityError);
    }

    SECTION("variant construction rejects j < 1") {
        CHECK_THROWS_AS(TraceVariant::plain(0), std::invalid_argument);
        CHECK_THROWS_AS(TraceVariant::resolvent_weighted(-2), std::invalid_argument);
    }

    SECTION("real-axis symmetry: conjugating the argument conjugates the trace") {
        const TrigPotential p = mixed_d2();
        const TruncationSpec ps = TruncationSpec::for_potential(p, 2);
        const ResolventTraces engine(p, ps);
        const std::vector<TraceVariant> variants = {
            TraceVariant::plain(1),    TraceVariant::plain(2),
            TraceVariant::plain(3),    TraceVariant::resolvent_weighted(1),
            TraceVariant::resolvent_weighted(2), TraceVariant::full_difference()};
        for (C lambda : {C(0.3, 0.7), C(-2.0, 1.3), C(2.5, 0.1)}) {
            for (const TraceVariant& v : variants) {
                const C a = engine.trace(std::conj(lambda), v);
                const C b = std::conj(engine.trace(lambda, v));
                CHECK(std::abs(a - b) < 1e-12);
            }
        }
    }
}

TEST_CASE("small-circle residues", "[resolvent]") {
    const TrigPotential q = scalar_cos(1.0, 2);
    const TruncationSpec spec = TruncationSpec::for_potential(q, 4);

    SECTION("frozen values for the unit cos 2x potential") {
        CHECK(std::abs(residue_at(q, spec, 1, 2, 1) + 0.5) < 1e-10);
        CHECK(std::abs(residue_at(q, spec, 0, 2, 2)) < 1e-12);
        // Second-order residue at m = 1: 1/4 from the double pole of the
        // (1,1) chain minus 1/16 through the (1,3) coupling.
        CHECK(std::abs(residue_at(q, spec, 1, 2, 2) - 3.0 / 16.0) < 1e-10);
    }

    SECTION("zero potential residues vanish identically") {
        const TruncationSpec z(8, 1, 2);
        for (int j = 1; j <= 4; ++j) CHECK(residue_at(TrigPotential(1), z, 1, 2, j) == 0.0);
    }

    SECTION("input validation") {
        CHECK_THROWS_AS(residue_at(q, spec, spec.m_max + 1, 2, 1), std::out_of_range);
        CHECK_THROWS_AS(residue_at(q, spec, -1, 2, 1), std::out_of_range);
        CHECK_THROWS_AS(residue_at(q, spec, 1, 0, 1), std::domain_error);
        CHECK_THROWS_AS(residue_at(q, spec, 1, 2, 0), std::domain_error);
    }

    SECTION("tables agree with single-entry evaluation bit for bit") {
        const ResidueTable table = residue_table(q, spec, 2, 2, 4);
        REQUIRE(table.values.size() == 12);
        for (int m = 0; m <= 2; ++m)
            for (int j = 1; j <= 4; ++j) CHECK(table.at(m, j) == residue_at(q, spec, m, 2, j));
    }

    SECTION("doubling the circle nodes does not move converged residues") {
        ContourOptions doubled;
        doubled.small_nodes = 256;
        for (int m = 0; m <= 2; ++m)
            for (int j = 1; j <= 3; ++j)
                CHECK(std::abs(residue_at(q, spec, m, 2, j, doubled) -
                               residue_at(q, spec, m, 2, j)) < 1e-10);
    }

    SECTION("residues are stable under wider truncation") {
        const TrigPotential p = scalar_cos(0.3, 2);
        const TruncationSpec base = TruncationSpec::for_potential(p, 2);
        const TruncationSpec wide =
            TruncationSpec::for_potential(p, 2, -1, base.m_max + 2 * p.bandwidth());
        for (int m = 0; m <= 2; ++m)
            for (int j = 1; j <= 3; ++j)
                CHECK(std::abs(residue_at(p, base, m, 2, j) - residue_at(p, wide, m, 2, j)) <
                      1e-9);
    }
}

TEST_CASE("cluster moments by three routes", "[resolvent]") {
    const TrigPotential q = scalar_cos(1.0, 2);
    const TruncationSpec spec = TruncationSpec::for_potential(q, 4);

    SECTION("frozen value p=1, k=2, j=2") {
        const double direct = m_pj(q, spec, 1, 2, 2, MpjVia::residue_sum);
        CHECK(std::abs(direct - 3.0 / 16.0) < 1e-9);
        CHECK(rel_close(m_pj(q, spec, 1, 2, 2, MpjVia::eq26), direct, 1e-8, 1e-12));
        CHECK(rel_close(m_pj(q, spec, 1, 2, 2, MpjVia::eq24), direct, 1e-8, 1e-12));
    }

    SECTION("zero potential vanishes by every route") {
        const TruncationSpec z(9, 1, 2);
        for (MpjVia via : {MpjVia::eq24, MpjVia::eq26, MpjVia::residue_sum})
            CHECK(std::abs(m_pj(TrigPotential(1), z, 2, 2, 3, via)) < 1e-13);
    }

    SECTION("the big-circle routes require p >= 1") {
        CHECK_NOTHROW(m_pj(q, spec, 0, 2, 1, MpjVia::residue_sum));
        CHECK_THROWS_AS(m_pj(q, spec, 0, 2, 1, MpjVia::eq24), std::domain_error);
        CHECK_THROWS_AS(m_pj(q, spec, 0, 2, 1, MpjVia::eq26), std::domain_error);
        CHECK_THROWS_AS(m_pj(q, spec, spec.m_max + 1, 2, 1, MpjVia::residue_sum),
                        std::out_of_range);
    }

    SECTION("mutual agreement across p, j, k for a scalar potential") {
        const TrigPotential p02 = scalar_cos(0.2, 2);
        const TruncationSpec ps = TruncationSpec::for_potential(p02, 2);
        for (int k : {2, 3}) {
            const ResolventTraces engine(p02, ps);
            const ResidueTable table = residue_table(p02, ps, 2, k, 6);
            for (int p = 1; p <= 2; ++p) {
                const MpjTables big = mpj_big_circle(engine, p, k, 6);
                for (int j = 1; j <= 6; ++j) {
                    detail::KahanSum sum;
                    for (int m = 0; m <= p; ++m) sum.add(table.at(m, j));
                    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
                    const double via_residues = sign * (double(k) / j) * sum.value();
                    CHECK(rel_close(big.eq24[j - 1], via_residues, 1e-8, 1e-12));
                    CHECK(rel_close(big.eq26[j - 1], via_residues, 1e-8, 1e-12));
                    CHECK(rel_close(big.eq24[j - 1], big.eq26[j - 1], 1e-8, 1e-12));
                }
            }
        }
    }

    SECTION("doubling the big-circle nodes does not move the moments") {
        const TrigPotential p03 = scalar_cos(0.3, 2);
        const TruncationSpec ps = TruncationSpec::for_potential(p03, 2);
        const ResolventTraces engine(p03, ps);
        ContourOptions doubled;
        doubled.big_min_nodes = 512;
        doubled.big_nodes_per_p = 128;
        for (int p = 1; p <= 2; ++p) {
            const MpjTables a = mpj_big_circle(engine, p, 2, 6);
            const MpjTables b = mpj_big_circle(engine, p, 2, 6, doubled);
            for (int j = 1; j <= 6; ++j) {
                CHECK(std::abs(a.eq24[j - 1] - b.eq24[j - 1]) < 1e-10);
                CHECK(std::abs(a.eq26[j - 1] - b.eq26[j - 1]) < 1e-10);
            }
        }
    }
}

TEST_CASE("big-circle eigensum identity", "[resolvent]") {
    // (1/2πi) ∮ λ^k tr(R − R⁰) dλ over |λ| = p² + p equals the enclosed
    // cluster sums Σ (m^{2k} − λ_mn^k): each perturbed eigenvalue contributes
    // −λ^k, each free one +m^{2k}.
    const TrigPotential q = scalar_cos(0.3, 2);
    const TruncationSpec spec = TruncationSpec::for_potential(q, 2);
    const ResolventTraces engine(q, spec);
    const SpectralClusters clusters = eigen_clusters(assemble_matrix(q, spec), spec, 0.3);

    for (int k : {2, 3}) {
        for (int p = 1; p <= 2; ++p) {
            const ContourSpec big(C(0.0, 0.0), double(p) * p + p, 256 + 64 * p);
            const C integral = contour_integral(
                [&](C z) {
                    return detail::ipow(z, k) * engine.trace(z, TraceVariant::full_difference());
                },
                big);
            long double expect = 0.0L;
            for (int m = 0; m <= p; ++m) expect -= power_sum(clusters, m, k);
            CHECK(std::abs(integral.imag()) < 1e-9);
            CHECK(std::abs(integral.real() - static_cast<double>(expect)) <=
                  1e-7 * std::max(1.0, std::abs(static_cast<double>(expect))));
        }
    }
}

TEST_CASE("remainder diagnostics", "[resolvent]") {
    SECTION("zero potential") {
        const TruncationSpec z(10, 1, 2);
        const SpectralClusters cl = eigen_clusters(assemble_matrix(TrigPotential(1), z), z, 0.0);
        CHECK(std::abs(remainder_estimate(TrigPotential(1), z, 2, 2, 3, cl)) < 1e-15);
    }

    SECTION("first order is a pure rearrangement of the eigensums") {
        const TrigPotential q = scalar_cos(0.3, 2);
        const TruncationSpec spec = TruncationSpec::for_potential(q, 2);
        const SpectralClusters cl = eigen_clusters(assemble_matrix(q, spec), spec, 0.3);
        const double rem = remainder_estimate(q, spec, 2, 2, 1, cl);
        long double direct = 0.0L;
        for (int m = 0; m <= 2; ++m) direct += power_sum(cl, m, 2);
        direct -= m_pj(q, spec, 2, 2, 1, MpjVia::residue_sum);
        CHECK(std::abs(rem - static_cast<double>(direct)) < 1e-13);
    }

    SECTION("the tail shrinks as more clusters are kept") {
        const TrigPotential q = scalar_cos(0.3, 2);
        const TruncationSpec spec = TruncationSpec::for_potential(q, 8);
        const SpectralClusters cl = eigen_clusters(assemble_matrix(q, spec), spec, 0.3);
        const double m4 = remainder_estimate(q, spec, 4, 2, 6, cl);
        const double m8 = remainder_estimate(q, spec, 8, 2, 6, cl);
        CHECK(std::abs(m8) < std::abs(m4));
    }

    SECTION("input validation") {
        const TrigPotential q = scalar_cos(0.3, 2);
        const TruncationSpec spec = TruncationSpec::for_potential(q, 2);
        const SpectralClusters cl = eigen_clusters(assemble_matrix(q, spec), spec, 0.3);
        CHECK_THROWS_AS(remainder_estimate(q, spec, 3, 2, 1, cl), std::out_of_range);
        CHECK_THROWS_AS(remainder_estimate(q, spec, 2, 2, 0, cl), std::domain_error);
    }
}

TEST_CASE("route agreement for a non-commuting matrix potential", "[resolvent]") {
    // Two-term d=2 potential whose coefficient matrices do not commute, so
    // the trace powers genuinely mix the blocks.
    TrigPotential q(2);
    q.add_cos(1, sym2(0.1, 0.05, -0.1));
    q.add_cos(2, sym2(0.15, 0.0, 0.05));
    const TruncationSpec spec = TruncationSpec::for_potential(q, 2);

    for (int k : {2, 3}) {
        const ResolventTraces engine(q, spec);
        const ResidueTable table = residue_table(q, spec, 2, k, 6);
        for (int p = 1; p <= 2; ++p) {
            const MpjTables big = mpj_big_circle(engine, p, k, 6);
            for (int j = 1; j <= 6; ++j) {
                detail::KahanSum sum;
                for (int m = 0; m <= p; ++m) sum.add(table.at(m, j));
                const double sign = (j % 2 == 0) ? 1.0 : -1.0;
                const double via_residues = sign * (double(k) / j) * sum.value();
                CHECK(rel_close(big.eq24[j - 1], via_residues, 1e-8, 1e-12));
                CHECK(rel_close(big.eq26[j - 1], via_residues, 1e-8, 1e-12));
            }
        }
    }
}
