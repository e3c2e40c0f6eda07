#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "hdlpboot/errors.hpp"
#include "hdlpboot/matrix.hpp"

namespace hdlpboot {

// Eigendecomposition of a symmetric matrix. values are sorted
// descending; column j of vectors is the unit eigenvector for values[j].
struct EigenDecomp {
    Vector values;
    Matrix vectors;
};

namespace detail {

// Householder reduction of a symmetric matrix to tridiagonal form,
// accumulating the orthogonal transformation in z. Classic tred2.
inline void tridiagonalize(Matrix& z, Vector& d, Vector& e) {
    const int n = static_cast<int>(z.rows());
    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0;
        double scale = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scale += std::fabs(z(i, k));
            if (scale == 0.0) {
                e[i] = z(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    z(i, k) /= scale;
                    h += z(i, k) * z(i, k);
                }
                double f = z(i, l);
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                z(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    z(j, i) = z(i, j) / h;
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
                    for (int k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
                    e[j] = g / h;
                    f += e[j] * z(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = z(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k) z(j, k) -= f * e[k] + g * z(i, k);
                }
            }
        } else {
            e[i] = z(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const int l = i - 1;
        if (d[i] != 0.0) {
            for (int j = 0; j <= l; ++j) {
                double g = 0.0;
                for (int k = 0; k <= l; ++k) g += z(i, k) * z(k, j);
                for (int k = 0; k <= l; ++k) z(k, j) -= g * z(k, i);
            }
        }
        d[i] = z(i, i);
        z(i, i) = 1.0;
        for (int j = 0; j <= l; ++j) z(j, i) = z(i, j) = 0.0;
    }
}

// Implicit QL with Wilkinson shifts on the tridiagonal (d, e),
// rotations accumulated into the columns of z. Classic tql2.
inline void tridiag_ql(Vector& d, Vector& e, Matrix& z) {
    const int n = static_cast<int>(d.size());
    if (n == 1) return;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) throw NumericalError("sym_eigen: QL iteration did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z(k, i + 1);
                        z(k, i + 1) = s * z(k, i) + c * f;
                        z(k, i) = c * z(k, i) - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace detail

inline EigenDecomp sym_eigen(const Matrix& m) {
    if (!is_square(m)) throw ShapeError("sym_eigen: matrix must be square");
    if (!all_finite(m)) throw NumericalError("sym_eigen: non-finite entry");
    if (!is_symmetric(m, 1e-12)) throw ShapeError("sym_eigen: matrix must be symmetric");

    const std::size_t n = m.rows();
    EigenDecomp out;
    out.vectors = m;
    // Symmetrize exactly so roundoff asymmetry cannot leak into the kernel.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (out.vectors(i, j) + out.vectors(j, i));
            out.vectors(i, j) = v;
            out.vectors(j, i) = v;
        }
    out.values.assign(n, 0.0);
    Vector e(n, 0.0);
    if (n == 1) {
        out.values[0] = m(0, 0);
        out.vectors(0, 0) = 1.0;
        return out;
    }
    detail::tridiagonalize(out.vectors, out.values, e);
    detail::tridiag_ql(out.values, e, out.vectors);

    // Sort eigenpairs by descending eigenvalue.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out.values[a] > out.values[b]; });
    Vector sorted_vals(n);
    Matrix sorted_vecs(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted_vals[j] = out.values[order[j]];
        for (std::size_t i = 0; i < n; ++i) sorted_vecs(i, j) = out.vectors(i, order[j]);
    }
    out.values = std::move(sorted_vals);
    out.vectors = std::move(sorted_vecs);
    return out;
}

// Lower-triangular L with L L' = M. Fails (nullopt) unless M is
// strictly positive definite to working precision.
inline std::optional<Matrix> cholesky(const Matrix& m) {
    if (!is_square(m) || !is_symmetric(m, 1e-12) || !all_finite(m)) return std::nullopt;
    const std::size_t n = m.rows();
    Matrix l(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = m(j, j) - dot(l.row(j), l.row(j), j);
        if (!(diag > 0.0) || !std::isfinite(diag)) return std::nullopt;
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            const double v = (m(i, j) - dot(l.row(i), l.row(j), j)) / ljj;
            if (!std::isfinite(v)) return std::nullopt;
            l(i, j) = v;
        }
    }
    return l;
}

// Factor Gamma (t x s) with Gamma Gamma' = clip(M, PSD). Cholesky is
// tried first; otherwise eigenpairs with lambda > tol*max(|lambda|, 1)
// are kept, scaled by sqrt(lambda). Eigenvalues below -tol*max|lambda|
// mean M is materially indefinite.
inline Matrix psd_factor(const Matrix& m, double tol = 1e-10) {
    if (!is_square(m)) throw ShapeError("psd_factor: matrix must be square");
    if (!is_symmetric(m, 1e-12)) throw ShapeError("psd_factor: matrix must be symmetric");
    if (auto l = cholesky(m)) return *l;

    const EigenDecomp ed = sym_eigen(m);
    const std::size_t n = m.rows();
    double abs_max = 0.0;
    for (double v : ed.values) abs_max = std::max(abs_max, std::fabs(v));
    if (!ed.values.empty() && ed.values.back() < -tol * abs_max)
        throw NotPsdError("psd_factor: matrix has a materially negative eigenvalue");

    const double keep_above = tol * std::max(abs_max, 1.0);
    std::size_t s = 0;
    while (s < n && ed.values[s] > keep_above) ++s;
    Matrix factor(n, s);
    for (std::size_t j = 0; j < s; ++j) {
        const double w = std::sqrt(ed.values[j]);
        for (std::size_t i = 0; i < n; ++i) factor(i, j) = ed.vectors(i, j) * w;
    }
    return factor;
}

}  // namespace hdlpboot
