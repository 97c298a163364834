#pragma once

#include "optrace/optrace.hpp"

#include <numbers>
#include <random>
#include <vector>

// Shared helpers for the test suites: small symmetric-matrix builders, a
// seed-stable RNG, and a brute-force quadrature oracle.

namespace support {

using optrace::SymMatrix;

// [[a, b], [b, c]]
inline SymMatrix sym2(double a, double b, double c) {
    SymMatrix m(2);
    m.set(0, 0, a);
    m.set(0, 1, b);
    m.set(1, 1, c);
    return m;
}

// Deterministic across platforms: mt19937_64 output is pinned by the
// standard, while the distribution adapters are not, so map bits by hand.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) {
        const double u = static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
        return lo + (hi - lo) * u;
    }

    // Inclusive on both ends.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

  private:
    std::mt19937_64 gen_;
};

// Composite Simpson on [0, π], 2^14 panels: resolves every trigonometric
// integrand used in the tests to well below 1e-12.
template <typename F>
double simpson_pi(F&& f) {
    const int n = 1 << 14;
    const double h = std::numbers::pi / n;
    double acc = f(0.0) + f(std::numbers::pi);
    for (int i = 1; i < n; ++i) acc += f(i * h) * ((i % 2) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Random trigonometric potential with every harmonic up to the requested
// bandwidth present and the coefficient spectral-norm sum scaled to exactly
// `norm_sum` — a certified upper bound for sup‖Q‖, which keeps localization
// arguments applicable by construction.
inline optrace::TrigPotential random_potential(Rng& rng, int dim, int bandwidth, double norm_sum) {
    std::vector<optrace::SymMatrix> cos_coeffs, sin_coeffs;
    double total = 0.0;
    do {
        cos_coeffs.clear();
        sin_coeffs.clear();
        total = 0.0;
        for (int r = 0; r <= bandwidth; ++r) {
            optrace::SymMatrix a(dim);
            for (int i = 0; i < dim; ++i)
                for (int j = i; j < dim; ++j) a.set(i, j, rng.uniform(-1.0, 1.0));
            total += a.spectral_norm();
            cos_coeffs.push_back(a);
        }
        for (int s = 1; s <= bandwidth; ++s) {
            optrace::SymMatrix b(dim);
            for (int i = 0; i < dim; ++i)
                for (int j = i; j < dim; ++j) b.set(i, j, rng.uniform(-1.0, 1.0));
            total += b.spectral_norm();
            sin_coeffs.push_back(b);
        }
    } while (total < 0.05);

    const double scale = norm_sum / total;
    optrace::TrigPotential q(dim);
    for (int r = 0; r <= bandwidth; ++r) q.add_cos(r, scale * cos_coeffs[r]);
    for (int s = 1; s <= bandwidth; ++s) q.add_sin(s, scale * sin_coeffs[s - 1]);
    return q;
}

} // namespace support
