#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hdlpboot/errors.hpp"

namespace hdlpboot {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Rows are contiguous, so row(i)
// can be handed to dot-product kernels directly.
class Matrix {
  public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diag(const Vector& d) {
        Matrix m(d.size(), d.size(), 0.0);
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return a_.size(); }
    bool empty() const { return a_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    double* row(std::size_t i) { return a_.data() + i * cols_; }
    const double* row(std::size_t i) const { return a_.data() + i * cols_; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

// y = M x
inline Vector matvec(const Matrix& m, const Vector& x) {
    if (x.size() != m.cols()) throw DimensionError("matvec: size mismatch");
    Vector y(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) y[i] = dot(m.row(i), x.data(), m.cols());
    return y;
}

// y = M' x
inline Vector matvec_t(const Matrix& m, const Vector& x) {
    if (x.size() != m.rows()) throw DimensionError("matvec_t: size mismatch");
    Vector y(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* r = m.row(i);
        const double xi = x[i];
        for (std::size_t j = 0; j < m.cols(); ++j) y[j] += r[j] * xi;
    }
    return y;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: size mismatch");
    Matrix c(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            double* crow = c.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

// M M' without forming the transpose.
inline Matrix gram(const Matrix& m) {
    Matrix g(m.rows(), m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = dot(m.row(i), m.row(j), m.cols());
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

inline double max_abs(const Matrix& m) {
    double v = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) v = std::max(v, std::fabs(m.data()[i]));
    return v;
}

inline double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m.data()[i] * m.data()[i];
    return std::sqrt(s);
}

inline double frobenius_dist(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionError("frobenius_dist: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline bool is_square(const Matrix& m) { return m.rows() == m.cols() && m.rows() > 0; }

// Symmetry within an absolute tolerance scaled by the largest entry.
inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-12) {
    if (!is_square(m)) return false;
    const double scale = std::max(max_abs(m), 1.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (std::fabs(m(i, j) - m(j, i)) > rel_tol * scale) return false;
    return true;
}

inline bool all_finite(const Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!std::isfinite(m.data()[i])) return false;
    return true;
}

inline bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double trace(const Matrix& m) {
    if (!is_square(m)) throw ShapeError("trace: matrix must be square");
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, i);
    return s;
}

}  // namespace hdlpboot
