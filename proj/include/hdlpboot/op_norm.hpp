#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "hdlpboot/eigen.hpp"
#include "hdlpboot/errors.hpp"
#include "hdlpboot/lp_norm.hpp"
#include "hdlpboot/matrix.hpp"

namespace hdlpboot {

inline bool is_diagonal(const Matrix& m) {
    if (!is_square(m)) return false;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (i != j && m(i, j) != 0.0) return false;
    return true;
}

// Largest singular value. Symmetric matrices use max |eigenvalue|;
// general matrices go through M'M.
inline double op_norm_two_two(const Matrix& m) {
    if (m.empty()) throw DimensionError("op_norm: empty matrix");
    if (is_symmetric(m, 1e-12)) {
        const EigenDecomp ed = sym_eigen(m);
        return std::max(std::fabs(ed.values.front()), std::fabs(ed.values.back()));
    }
    const Matrix mtm = matmul(transpose(m), m);
    const EigenDecomp ed = sym_eigen(mtm);
    return std::sqrt(std::max(ed.values.front(), 0.0));
}

// ||M||_{1->inf} = max_{j,k} |M_jk|.
inline double op_norm_one_inf(const Matrix& m) {
    if (m.empty()) throw DimensionError("op_norm: empty matrix");
    return max_abs(m);
}

// ||M||_{2->p}. Closed forms exist for p=2 (largest singular value)
// and p=inf (max row l2 norm). Other p are supported for diagonal M
// only: p >= 2 gives max|d_i|, p < 2 gives the dual-sum formula.
inline double op_norm_two_p(const Matrix& m, LpExponent p) {
    if (m.empty()) throw DimensionError("op_norm: empty matrix");
    const double pe = p.resolve(m.rows());
    if (pe == 2.0) return op_norm_two_two(m);
    if (p.is_infinity()) {
        double best = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i)
            best = std::max(best, lp_norm(m.row(i), m.cols(), LpExponent::finite(2.0)));
        return best;
    }
    if (!is_diagonal(m))
        throw UnsupportedNorm("op_norm: 2->p with p not in {2,inf} needs a diagonal matrix");
    if (pe >= 2.0) {
        double best = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) best = std::max(best, std::fabs(m(i, i)));
        return best;
    }
    // p in [1,2): norm attained on the sphere, exponent 2p/(2-p).
    const double expo = 2.0 * pe / (2.0 - pe);
    double m0 = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) m0 = std::max(m0, std::fabs(m(i, i)));
    if (m0 == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double r = std::fabs(m(i, i)) / m0;
        if (r > 0.0) s += std::pow(r, expo);
    }
    return m0 * std::pow(s, (2.0 - pe) / (2.0 * pe));
}

// ||Sigma^{1/2}||_{2->p} without forming the square root:
// p=2 -> sqrt(lambda_max), p=inf -> sqrt(max diagonal), diagonal
// Sigma -> closed form on the sqrt diagonal.
inline double op_norm_sqrt_two_p(const Matrix& sigma, LpExponent p) {
    if (!is_square(sigma)) throw ShapeError("op_norm_sqrt_two_p: matrix must be square");
    const double pe = p.resolve(sigma.rows());
    if (pe == 2.0) {
        const EigenDecomp ed = sym_eigen(sigma);
        return std::sqrt(std::max(ed.values.front(), 0.0));
    }
    if (p.is_infinity()) {
        double best = 0.0;
        for (std::size_t i = 0; i < sigma.rows(); ++i) best = std::max(best, sigma(i, i));
        return std::sqrt(std::max(best, 0.0));
    }
    if (!is_diagonal(sigma))
        throw UnsupportedNorm("op_norm_sqrt_two_p: p not in {2,inf} needs diagonal Sigma");
    Matrix root(sigma.rows(), sigma.cols(), 0.0);
    for (std::size_t i = 0; i < sigma.rows(); ++i) {
        if (sigma(i, i) < 0.0) throw NotPsdError("op_norm_sqrt_two_p: negative diagonal");
        root(i, i) = std::sqrt(sigma(i, i));
    }
    return op_norm_two_p(root, p);
}

// tr(M) / ||M||_{2->2} for PSD M. Lies in [1, rank(M)].
inline double effective_rank(const Matrix& m) {
    if (!is_square(m)) throw ShapeError("effective_rank: matrix must be square");
    const EigenDecomp ed = sym_eigen(m);
    const double top = ed.values.front();
    if (ed.values.back() < -1e-10 * std::max(std::fabs(top), 1.0))
        throw NotPsdError("effective_rank: matrix is not PSD");
    if (!(top > 0.0)) throw DegenerateError("effective_rank: zero matrix");
    double tr = 0.0;
    for (double v : ed.values) tr += std::max(v, 0.0);
    return tr / top;
}

}  // namespace hdlpboot
