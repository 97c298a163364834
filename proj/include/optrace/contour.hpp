#pragma once

#include "optrace/errors.hpp"
#include "optrace/numeric.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

// Circular contours and the trapezoidal contour integral
//
//     (1/2πi) ∮ f(λ) dλ  =  (R/n) Σ_t f(c + R e^{iθ_t}) e^{iθ_t},  θ_t = 2πt/n.
//
// For f analytic in an annulus around the circle the equispaced trapezoid
// rule converges geometrically in n, and it integrates the c₋₁/(λ−c) Laurent
// term exactly — which is why node counts in the hundreds deliver residues
// near machine precision.

namespace optrace {

struct ContourSpec {
    std::complex<double> center;
    double radius;
    int nodes;

    ContourSpec(std::complex<double> center_, double radius_, int nodes_)
        : center(center_), radius(radius_), nodes(nodes_) {
        if (!(radius > 0.0)) throw std::invalid_argument("ContourSpec: radius must be > 0");
        if (nodes < 16) throw std::invalid_argument("ContourSpec: need at least 16 nodes");
    }

    // Rejects circles passing too close to a known pole: within
    // min(radius/2, 1/2) of the circle itself. The absolute 1/2 branch covers
    // the big circles |λ| = p² + p, whose clearance from the neighbouring
    // poles p² and (p+1)² is p and p+1 — proportional clearance cannot hold
    // there, while poles m² are always >= 1 apart so 1/2 is unambiguous.
    void require_clear_of_poles(const std::vector<double>& poles) const {
        const double threshold = std::min(0.5 * radius, 0.5);
        for (double q : poles) {
            const double gap = std::abs(std::abs(std::complex<double>(q, 0.0) - center) - radius);
            if (gap < threshold)
                throw PoleProximityError("contour: pole " + detail::fmt17(q) + " within " +
                                         detail::fmt17(gap) + " of the circle (threshold " +
                                         detail::fmt17(threshold) + ")");
        }
    }
};

// (1/2πi) ∮ f dλ over the circle; f is evaluated at equispaced nodes and the
// reduction is compensated and in fixed order, so results are reproducible.
template <typename F>
std::complex<double> contour_integral(F&& f, const ContourSpec& spec) {
    detail::KahanSumC acc;
    for (int t = 0; t < spec.nodes; ++t) {
        const double theta = 2.0 * std::numbers::pi * t / spec.nodes;
        const std::complex<double> w = std::polar(1.0, theta);
        acc.add(f(spec.center + spec.radius * w) * w);
    }
    return acc.value() * (spec.radius / spec.nodes);
}

} // namespace optrace
