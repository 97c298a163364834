#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <string>

// Small numerical utilities shared across the library: compensated summation
// (used for every trace/contour reduction so results are reproducible and
// immune to benign reordering-by-length effects) and integer powers.

namespace optrace::detail {

// Neumaier's variant of Kahan summation. Additions happen in a fixed index
// order everywhere in this library, so reductions are bit-reproducible.
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class KahanSumC {
public:
    void add(std::complex<double> z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    std::complex<double> value() const { return {re_.value(), im_.value()}; }

private:
    KahanSum re_, im_;
};

// base^e for e >= 0 by repeated multiplication; exact for the small integer
// bases and exponents that appear in the trace formula (m^{2k}, r^order, ...).
inline double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

inline long double ipow(long double base, int e) {
    long double r = 1.0L;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

inline std::complex<double> ipow(std::complex<double> base, int e) {
    std::complex<double> r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

// Render a double with 17 significant digits (round-trip exact); the single
// formatting used in every report and description so outputs stay byte-stable.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace optrace::detail
