#pragma once

#include "optrace/numeric.hpp"
#include "optrace/sym_matrix.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

// Operator-valued trigonometric potential on [0, π]:
//
//     Q(x) = Σ_r A_r cos(rx) + Σ_s B_s sin(sx),   A_r, B_s real symmetric d×d.
//
// Everything downstream (coupling blocks, endpoint data, Fourier moments)
// reduces to the elementary integrals
//
//     ∫₀^π cos(fx) dx = π·[f = 0]
//     ∫₀^π sin(fx) dx = 2/f for odd f, 0 otherwise,
//
// applied after product-to-sum expansion, so all these quantities are closed
// form — no quadrature anywhere in the production path.

namespace optrace {

enum class Endpoint { zero, pi };

namespace detail {

// ∫₀^π cos(fx) dx, integer f (any sign).
inline double int_cos(int f) { return f == 0 ? std::numbers::pi : 0.0; }

// ∫₀^π sin(fx) dx, integer f (any sign): (1 − (−1)^f)/f.
inline double int_sin(int f) {
    if (f == 0) return 0.0;
    return (f % 2 != 0) ? 2.0 / f : 0.0;
}

// ∫₀^π cos(ax)cos(bx) dx.
inline double int_cos_cos(int a, int b) { return 0.5 * (int_cos(a + b) + int_cos(a - b)); }

// ∫₀^π sin(ax)cos(bx) dx.
inline double int_sin_cos(int a, int b) { return 0.5 * (int_sin(a + b) + int_sin(a - b)); }

// ∫₀^π cos(rx)cos(mx)cos(m′x) dx.
inline double int_ccc(int r, int m, int mp) {
    return 0.25 * (int_cos(r + m + mp) + int_cos(r + m - mp) + int_cos(r - m + mp) +
                   int_cos(r - m - mp));
}

// ∫₀^π sin(sx)cos(mx)cos(m′x) dx.
inline double int_scc(int s, int m, int mp) {
    return 0.25 * (int_sin(s + m + mp) + int_sin(s + m - mp) + int_sin(s - m + mp) +
                   int_sin(s - m - mp));
}

// Normalization of the Neumann cosine basis K_m cos(mx) on [0, π].
inline double basis_norm(int m) {
    return m == 0 ? 1.0 / std::sqrt(std::numbers::pi) : std::sqrt(2.0 / std::numbers::pi);
}

} // namespace detail

class TrigPotential {
public:
    explicit TrigPotential(int dim) : dim_(dim) {
        if (dim < 1) throw std::invalid_argument("TrigPotential: dim must be >= 1");
    }

    int dim() const { return dim_; }

    // Accumulates A·cos(rx); r = 0 is the constant term.
    void add_cos(int r, const SymMatrix& a) {
        if (r < 0) throw std::domain_error("TrigPotential: cosine harmonic must be >= 0");
        insert(cos_terms_, r, a);
    }

    // Accumulates B·sin(sx); s >= 1 (sin 0 vanishes identically).
    void add_sin(int s, const SymMatrix& b) {
        if (s < 1) throw std::domain_error("TrigPotential: sine harmonic must be >= 1");
        insert(sin_terms_, s, b);
    }

    const std::map<int, SymMatrix>& cos_terms() const { return cos_terms_; }
    const std::map<int, SymMatrix>& sin_terms() const { return sin_terms_; }

    // Largest harmonic index present; 0 for the zero potential.
    int bandwidth() const {
        int b = 0;
        if (!cos_terms_.empty()) b = std::max(b, cos_terms_.rbegin()->first);
        if (!sin_terms_.empty()) b = std::max(b, sin_terms_.rbegin()->first);
        return b;
    }

    // Q(x) for x in [0, π]; outside the interval the potential is undefined.
    SymMatrix evaluate(double x) const {
        if (!(x >= 0.0 && x <= std::numbers::pi))
            throw std::domain_error("TrigPotential: x outside [0, pi]");
        SymMatrix v(dim_);
        for (const auto& [r, a] : cos_terms_) v.axpy(std::cos(r * x), a);
        for (const auto& [s, b] : sin_terms_) v.axpy(std::sin(s * x), b);
        return v;
    }

    // Termwise derivative of the series; order >= 0 (0 returns a copy).
    // cos(rx) cycles through {cos, −sin, −cos, sin}·r^t, sin(sx) through
    // {sin, cos, −sin, −cos}·s^t; the r = 0 constant dies at order >= 1.
    TrigPotential derivative(int order) const {
        if (order < 0) throw std::domain_error("TrigPotential: derivative order must be >= 0");
        if (order == 0) return *this;
        TrigPotential d(dim_);
        for (const auto& [r, a] : cos_terms_) {
            if (r == 0) continue;
            const double amp = detail::ipow(static_cast<double>(r), order);
            switch (order % 4) {
                case 0: d.add_cos(r, amp * a); break;
                case 1: d.add_sin(r, -amp * a); break;
                case 2: d.add_cos(r, -amp * a); break;
                case 3: d.add_sin(r, amp * a); break;
            }
        }
        for (const auto& [s, b] : sin_terms_) {
            const double amp = detail::ipow(static_cast<double>(s), order);
            switch (order % 4) {
                case 0: d.add_sin(s, amp * b); break;
                case 1: d.add_cos(s, amp * b); break;
                case 2: d.add_sin(s, -amp * b); break;
                case 3: d.add_cos(s, -amp * b); break;
            }
        }
        return d;
    }

    // tr Q^{(order)} at an endpoint. Sine terms vanish at both endpoints, so
    // only the cosine part of the differentiated series contributes:
    // cos(r·0) = 1, cos(rπ) = (−1)^r. Exact zero when that part is empty.
    double endpoint_trace(int order, Endpoint at) const {
        const TrigPotential d = derivative(order);
        double t = 0.0;
        for (const auto& [r, a] : d.cos_terms_)
            t += (at == Endpoint::zero ? 1.0 : (r % 2 == 0 ? 1.0 : -1.0)) * a.trace();
        return t;
    }

    // ∫₀^π tr Q^{(order)}(x) cos(2mx) dx in closed form; m >= 0.
    // m = 0 with order 0 is the mean-trace integral ∫ tr Q dx.
    double cos_moment(int order, int m) const {
        if (m < 0) throw std::domain_error("TrigPotential: cos_moment needs m >= 0");
        const TrigPotential d = derivative(order);
        double v = 0.0;
        for (const auto& [r, a] : d.cos_terms_) v += a.trace() * detail::int_cos_cos(r, 2 * m);
        for (const auto& [s, b] : d.sin_terms_) v += b.trace() * detail::int_sin_cos(s, 2 * m);
        return v;
    }

    // Galerkin coupling block between basis levels m and m′:
    //     B(m, m′) = K_m K_{m′} ∫₀^π Q(x) cos(mx) cos(m′x) dx,
    // symmetric in (m, m′). Cosine terms couple only |m − m′| = r or
    // m + m′ = r (banded); sine terms couple every pair with s + m + m′ odd
    // and decay like the inverse square of the index distance.
    SymMatrix coupling_block(int m, int mp) const {
        if (m < 0 || mp < 0) throw std::domain_error("TrigPotential: coupling level must be >= 0");
        SymMatrix blk(dim_);
        for (const auto& [r, a] : cos_terms_) blk.axpy(detail::int_ccc(r, m, mp), a);
        for (const auto& [s, b] : sin_terms_) blk.axpy(detail::int_scc(s, m, mp), b);
        return detail::basis_norm(m) * detail::basis_norm(mp) * blk;
    }

    // Deterministic one-line description used in report metadata.
    std::string describe() const {
        std::string s = "d=" + std::to_string(dim_);
        if (cos_terms_.empty() && sin_terms_.empty()) return s + " zero";
        for (const auto& [r, a] : cos_terms_) s += " cos[" + std::to_string(r) + "]=" + render(a);
        for (const auto& [q, b] : sin_terms_) s += " sin[" + std::to_string(q) + "]=" + render(b);
        return s;
    }

private:
    static std::string render(const SymMatrix& a) {
        std::string s = "[";
        for (int i = 0; i < a.dim(); ++i)
            for (int j = 0; j < a.dim(); ++j) {
                if (i != 0 || j != 0) s += ",";
                s += detail::fmt17(a(i, j));
            }
        return s + "]";
    }

    void insert(std::map<int, SymMatrix>& terms, int idx, const SymMatrix& coeff) {
        if (coeff.dim() != dim_)
            throw std::invalid_argument("TrigPotential: coefficient dim mismatch");
        auto it = terms.find(idx);
        if (it == terms.end())
            terms.emplace(idx, coeff);
        else
            it->second += coeff;
    }

    int dim_;
    std::map<int, SymMatrix> cos_terms_;
    std::map<int, SymMatrix> sin_terms_;
};

// -- Hypothesis checks -------------------------------------------------------

// Diagnostic record for the smallness / boundary / mean conditions the trace
// formula assumes. Violations are reported, never fatal: exploring potentials
// outside the hypotheses is part of this tool's purpose.
struct ConditionReport {
    // Smallness: sup_x ‖Q(x)‖ < 1/2 keeps the localization intervals
    // [m² − ‖Q‖, m² + ‖Q‖] pairwise disjoint.
    double q2_sup_norm = 0.0;        // grid sup of the spectral norm (lower estimate)
    double q2_coeff_norm_sum = 0.0;  // Σ ‖coefficient‖₂, a certified upper bound
    bool q2_pass = false;

    // Boundary flatness: odd derivatives through order 2k−3 vanish at 0 and π
    // (trace and full matrix).
    std::vector<int> q5_orders;
    std::vector<double> q5_max_residual;
    std::vector<bool> q5_pass;

    // Zero mean: ∫₀^π tr Q dx = 0.
    double q6_mean_trace = 0.0;
    bool q6_pass = false;

    bool symmetric = true;

    bool q5_all_pass() const {
        for (bool b : q5_pass)
            if (!b) return false;
        return true;
    }

    bool operator==(const ConditionReport&) const = default;
};

// Evaluates the hypothesis diagnostics for order-k verification.
// The sup norm is sampled on a uniform grid of max(1024, 64·bandwidth)
// panels including both endpoints; the coefficient-norm sum bounds it above.
inline ConditionReport check_conditions(const TrigPotential& q, int k, double tol = 1e-10) {
    if (k < 2) throw std::domain_error("check_conditions: k must be >= 2");
    ConditionReport rep;

    const int panels = std::max(1024, 64 * q.bandwidth());
    for (int i = 0; i <= panels; ++i) {
        const double x = std::numbers::pi * i / panels;
        const SymMatrix v = q.evaluate(x);
        rep.q2_sup_norm = std::max(rep.q2_sup_norm, v.spectral_norm());
        if (i % (panels / 4) == 0)
            for (int a = 0; a < v.dim(); ++a)
                for (int b = 0; b < a; ++b)
                    if (v(a, b) != v(b, a)) rep.symmetric = false;
    }
    for (const auto& [r, a] : q.cos_terms()) rep.q2_coeff_norm_sum += a.spectral_norm();
    for (const auto& [s, b] : q.sin_terms()) rep.q2_coeff_norm_sum += b.spectral_norm();
    rep.q2_pass = rep.q2_sup_norm < 0.5;

    for (int order = 1; order <= 2 * k - 3; order += 2) {
        const TrigPotential d = q.derivative(order);
        double residual = std::max(std::abs(q.endpoint_trace(order, Endpoint::zero)),
                                   std::abs(q.endpoint_trace(order, Endpoint::pi)));
        residual = std::max(residual, d.evaluate(0.0).max_abs());
        residual = std::max(residual, d.evaluate(std::numbers::pi).max_abs());
        rep.q5_orders.push_back(order);
        rep.q5_max_residual.push_back(residual);
        rep.q5_pass.push_back(residual <= tol);
    }

    rep.q6_mean_trace = q.cos_moment(0, 0);
    rep.q6_pass = std::abs(rep.q6_mean_trace) <= tol;
    return rep;
}

} // namespace optrace
