#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

// Real symmetric d×d matrix, the coefficient type of an operator-valued
// trigonometric potential. Symmetry is exact by construction: every mutation
// writes both (i,j) and (j,i), and bulk construction rejects any input whose
// transpose differs bitwise.

namespace optrace {

class SymMatrix {
public:
    explicit SymMatrix(int dim) : m_(Eigen::MatrixXd::Zero(check_dim(dim), dim)) {}

    // Row-major values; throws std::invalid_argument on a size mismatch or if
    // vals[i*dim + j] != vals[j*dim + i] exactly.
    static SymMatrix from_row_major(int dim, const std::vector<double>& vals) {
        check_dim(dim);
        if (static_cast<int>(vals.size()) != dim * dim)
            throw std::invalid_argument("SymMatrix: expected " + std::to_string(dim * dim) +
                                        " values, got " + std::to_string(vals.size()));
        SymMatrix s(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                const double v = vals[static_cast<size_t>(i) * dim + j];
                if (v != vals[static_cast<size_t>(j) * dim + i])
                    throw std::invalid_argument("SymMatrix: not symmetric at (" + std::to_string(i) +
                                                "," + std::to_string(j) + ")");
                s.m_(i, j) = v;
            }
        return s;
    }

    // 1×1 convenience for scalar potentials.
    static SymMatrix scalar(double v) {
        SymMatrix s(1);
        s.m_(0, 0) = v;
        return s;
    }

    int dim() const { return static_cast<int>(m_.rows()); }

    double operator()(int i, int j) const { return m_(i, j); }

    // Sets (i,j) and (j,i) together so symmetry cannot be broken.
    void set(int i, int j, double v) {
        m_(i, j) = v;
        m_(j, i) = v;
    }

    double trace() const { return m_.trace(); }

    double max_abs() const { return m_.cwiseAbs().maxCoeff(); }

    // Largest |eigenvalue|; for symmetric matrices this is the operator norm.
    double spectral_norm() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    }

    SymMatrix& operator+=(const SymMatrix& o) {
        require_same_dim(o);
        m_ += o.m_;
        return *this;
    }

    // this += c * o; the workhorse of series evaluation/differentiation.
    void axpy(double c, const SymMatrix& o) {
        require_same_dim(o);
        m_ += c * o.m_;
    }

    friend SymMatrix operator*(double c, const SymMatrix& a) {
        SymMatrix r(a.dim());
        r.m_ = c * a.m_;
        return r;
    }

    bool operator==(const SymMatrix& o) const {
        if (dim() != o.dim()) return false;
        for (int i = 0; i < dim(); ++i)
            for (int j = 0; j < dim(); ++j)
                if (m_(i, j) != o.m_(i, j)) return false;
        return true;
    }

    const Eigen::MatrixXd& mat() const { return m_; }

private:
    static int check_dim(int dim) {
        if (dim < 1) throw std::invalid_argument("SymMatrix: dim must be >= 1");
        return dim;
    }
    void require_same_dim(const SymMatrix& o) const {
        if (o.dim() != dim()) throw std::invalid_argument("SymMatrix: dimension mismatch");
    }

    Eigen::MatrixXd m_;
};

} // namespace optrace
