#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>

#include "hdlpboot/eigen.hpp"
#include "hdlpboot/errors.hpp"
#include "hdlpboot/lp_norm.hpp"
#include "hdlpboot/matrix.hpp"

namespace hdlpboot {

// Null hypothesis R mu = r. R absent means the identity map, so the
// transformed dimension t equals d without paying for a d x d matrix.
struct Hypothesis {
    std::optional<Matrix> R;
    Vector r;

    static Hypothesis identity_zero(std::size_t d) { return Hypothesis{std::nullopt, Vector(d, 0.0)}; }

    std::size_t t(std::size_t d) const { return R ? R->rows() : d; }

    void validate(std::size_t d) const {
        if (R) {
            if (R->cols() != d) throw ShapeError("Hypothesis: R columns must match data dimension");
            if (R->rows() != r.size()) throw ShapeError("Hypothesis: R rows must match r length");
            if (!all_finite(*R)) throw NumericalError("Hypothesis: R has non-finite entries");
        } else if (r.size() != d) {
            throw ShapeError("Hypothesis: r length must match data dimension");
        }
        if (!all_finite(r)) throw NumericalError("Hypothesis: r has non-finite entries");
    }

    // y = R x into out (length t). x has length d.
    void apply(const double* x, std::size_t d, double* out) const {
        if (R) {
            for (std::size_t i = 0; i < R->rows(); ++i) out[i] = dot(R->row(i), x, d);
        } else {
            for (std::size_t i = 0; i < d; ++i) out[i] = x[i];
        }
    }
};

enum class CovMethod { naive, thresholded, banded, self_normalized };

// Covariance estimate held in factored form: omega_hat = factor * factor'.
// The factor is the object proxies consume, so omega_hat is materialized
// only on request (or kept when an estimator built it explicitly).
struct CovModel {
    Matrix factor;
    CovMethod method = CovMethod::naive;
    double lambda = 0.0;
    std::size_t band_k = 0;
    std::size_t zero_rows = 0;
    bool degenerate = false;
    std::optional<Matrix> omega;

    std::size_t t() const { return factor.rows(); }
    std::size_t s() const { return factor.cols(); }
    Matrix omega_hat() const { return omega ? *omega : gram(factor); }
};

namespace detail {

// Rows v_i = R x_i / sqrt(n) of the transformed, scaled data.
inline Matrix transformed_scaled_rows(const Matrix& x, const Hypothesis& h) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    h.validate(d);
    const std::size_t t = h.t(d);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    Matrix v(n, t);
    for (std::size_t i = 0; i < n; ++i) {
        h.apply(x.row(i), d, v.row(i));
        for (std::size_t j = 0; j < t; ++j) v(i, j) *= inv_sqrt_n;
    }
    return v;
}

}  // namespace detail

// Naive sample covariance of the transformed data, 1/n divisor,
// returned through its rank n-1 factor. Column k of the factor is the
// Helmert contrast (P_k - k v_{k+1}) / sqrt(k(k+1)) of the scaled rows
// v_i = R x_i / sqrt(n); the Gram identity
// sum_k h_k h_k' = (1/n) sum_i R(x_i - xbar)(x_i - xbar)' R' is exact,
// so no t x t matrix is ever formed.
inline CovModel sample_cov_transformed(const Matrix& x, const Hypothesis& h) {
    const std::size_t n = x.rows();
    if (n < 2) throw SampleSizeError("sample_cov_transformed: need n >= 2");
    const Matrix v = detail::transformed_scaled_rows(x, h);
    const std::size_t t = v.cols();

    Matrix factor(t, n - 1);
    Vector prefix(t, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        const double* vk = v.row(k - 1);
        const double* vnext = v.row(k);
        for (std::size_t j = 0; j < t; ++j) prefix[j] += vk[j];
        const double kd = static_cast<double>(k);
        const double inv = 1.0 / std::sqrt(kd * (kd + 1.0));
        for (std::size_t j = 0; j < t; ++j) factor(j, k - 1) = (prefix[j] - kd * vnext[j]) * inv;
    }

    CovModel out;
    out.method = CovMethod::naive;
    // Constant rows cancel exactly up to summation roundoff, which is
    // bounded by n * eps * max|v|; anything below that is degenerate.
    const double fmax = max_abs(factor);
    const double vmax = max_abs(v);
    if (fmax <= 1e-12 * static_cast<double>(n) * vmax) {
        out.factor = Matrix(t, 0);
        out.degenerate = true;
    } else {
        out.factor = std::move(factor);
    }
    return out;
}

// Entrywise hard threshold: entries with |w| <= lambda become zero,
// the diagonal included unless preserve_diagonal is set.
inline Matrix hard_threshold(const Matrix& omega, double lambda, bool preserve_diagonal = false) {
    if (!is_symmetric(omega, 1e-12)) throw ShapeError("hard_threshold: matrix must be symmetric");
    if (lambda < 0.0) throw DomainError("hard_threshold: lambda must be nonnegative");
    Matrix out = omega;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) {
            if (preserve_diagonal && i == j) continue;
            if (std::fabs(out(i, j)) <= lambda) out(i, j) = 0.0;
        }
    return out;
}

// Frobenius-nearest PSD matrix: eigen-clip V max(L,0) V'.
inline Matrix psd_project(const Matrix& omega) {
    if (!is_symmetric(omega, 1e-12)) throw ShapeError("psd_project: matrix must be symmetric");
    const EigenDecomp ed = sym_eigen(omega);
    const std::size_t n = omega.rows();
    Matrix out(n, n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = ed.values[k];
        if (lam <= 0.0) break;
        for (std::size_t i = 0; i < n; ++i) {
            const double vi = ed.vectors(i, k) * lam;
            for (std::size_t j = 0; j <= i; ++j) out(i, j) += vi * ed.vectors(j, k);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) out(i, j) = out(j, i);
    return out;
}

enum class TailRegime { sub_gaussian, heavy_tail };

// Rate-driven default threshold level.
inline double default_lambda(std::size_t t, std::size_t n, TailRegime regime, double c = 1.0) {
    const double ratio = std::log(static_cast<double>(t)) / static_cast<double>(n);
    if (regime == TailRegime::sub_gaussian) return c * std::max(std::sqrt(ratio), ratio);
    return c * std::max(std::pow(ratio, 0.25), std::sqrt(ratio));
}

// Zero entries beyond the k-th off-diagonal, then project onto the
// PSD cone (plain banding need not stay PSD).
inline Matrix band(const Matrix& omega, std::size_t k) {
    if (!is_symmetric(omega, 1e-12)) throw ShapeError("band: matrix must be symmetric");
    Matrix out = omega;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) {
            const std::size_t gap = i > j ? i - j : j - i;
            if (gap > k) out(i, j) = 0.0;
        }
    return psd_project(out);
}

struct StudentizedData {
    Matrix data;
    Matrix r_hat;
};

// Divide each column by its sample sd (1/n divisor). r_hat is the
// diagonal matrix of reciprocal sds.
inline StudentizedData studentize(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 1 || d < 1) throw DimensionError("studentize: empty data");
    Vector mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    Vector var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = x(i, j) - mean[j];
            var[j] += c * c;
        }
    StudentizedData out;
    out.data = Matrix(n, d);
    out.r_hat = Matrix(d, d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        var[j] /= static_cast<double>(n);
        if (!(var[j] > 0.0)) throw DegenerateColumnError("studentize: zero-variance column");
        const double inv_sd = 1.0 / std::sqrt(var[j]);
        out.r_hat(j, j) = inv_sd;
        for (std::size_t i = 0; i < n; ++i) out.data(i, j) = x(i, j) * inv_sd;
    }
    return out;
}

namespace detail {

// Normalized rows X~_i = (R x_i - target_i) / ||.||_2, zero rows kept
// as zero. target is r (hypothesis) or R(x_i - mu) when mu is given.
struct SelfNormRows {
    Matrix rows;  // n x t
    std::size_t zero_rows = 0;
};

inline SelfNormRows selfnorm_rows(const Matrix& x, const Hypothesis& h,
                                  const std::optional<Vector>& center) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    h.validate(d);
    if (center && center->size() != d)
        throw ShapeError("selfnorm_rows: center length must match data dimension");
    const std::size_t t = h.t(d);
    SelfNormRows out;
    out.rows = Matrix(n, t);
    Vector shifted(d);
    Vector target(t);
    if (!center) {
        for (std::size_t j = 0; j < t; ++j) target[j] = h.r[j];
    }
    for (std::size_t i = 0; i < n; ++i) {
        double* row = out.rows.row(i);
        if (center) {
            for (std::size_t j = 0; j < d; ++j) shifted[j] = x(i, j) - (*center)[j];
            h.apply(shifted.data(), d, row);
        } else {
            h.apply(x.row(i), d, row);
            for (std::size_t j = 0; j < t; ++j) row[j] -= target[j];
        }
        const double norm = lp_norm(row, t, LpExponent::finite(2.0));
        if (norm > 0.0) {
            for (std::size_t j = 0; j < t; ++j) row[j] /= norm;
        } else {
            ++out.zero_rows;
            for (std::size_t j = 0; j < t; ++j) row[j] = 0.0;
        }
    }
    return out;
}

}  // namespace detail

// Self-normalized covariance Omega~ = (1/n) sum X~_i X~_i' held via
// the factor with columns X~_i / sqrt(n), so s = n and
// tr(Omega~) = (n - zero_rows) / n exactly.
inline CovModel selfnorm_cov(const Matrix& x, const Hypothesis& h,
                             const std::optional<Vector>& center = std::nullopt) {
    const std::size_t n = x.rows();
    if (n < 1) throw SampleSizeError("selfnorm_cov: need n >= 1");
    detail::SelfNormRows sn = detail::selfnorm_rows(x, h, center);
    const std::size_t t = sn.rows.cols();
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    CovModel out;
    out.method = CovMethod::self_normalized;
    out.zero_rows = sn.zero_rows;
    out.factor = Matrix(t, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < t; ++j) out.factor(j, i) = sn.rows(i, j) * inv_sqrt_n;
    if (sn.zero_rows == n) out.degenerate = true;
    return out;
}

namespace detail {

// Naive covariance as an explicit t x t matrix (for estimators that
// modify entries). Same 1/n divisor as sample_cov_transformed.
inline Matrix sample_cov_matrix(const Matrix& x, const Hypothesis& h) {
    const std::size_t n = x.rows();
    if (n < 2) throw SampleSizeError("sample_cov_matrix: need n >= 2");
    const Matrix v = transformed_scaled_rows(x, h);  // rows R x_i / sqrt(n)
    const std::size_t t = v.cols();
    Vector mean(t, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < t; ++j) mean[j] += v(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    Matrix omega(t, t, 0.0);
    Vector c(t);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < t; ++j) c[j] = v(i, j) - mean[j];
        for (std::size_t a = 0; a < t; ++a) {
            const double ca = c[a];
            double* row = omega.row(a);
            for (std::size_t b = 0; b <= a; ++b) row[b] += ca * c[b];
        }
    }
    // rows were pre-scaled by 1/sqrt(n), so the sum is already the
    // 1/n-divisor covariance
    for (std::size_t a = 0; a < t; ++a)
        for (std::size_t b = a + 1; b < t; ++b) omega(a, b) = omega(b, a);
    return omega;
}

// Eigen-clip factor of a symmetric estimate: columns sqrt(max(l,0)) v
// for eigenvalues above tol * max(|l|, 1). One decomposition serves
// both the projected matrix and its factor.
inline std::pair<Matrix, Matrix> project_and_factor(const Matrix& est, double tol = 1e-10) {
    const EigenDecomp ed = sym_eigen(est);
    const std::size_t t = est.rows();
    double abs_max = 0.0;
    for (double v : ed.values) abs_max = std::max(abs_max, std::fabs(v));
    const double keep_above = tol * std::max(abs_max, 1.0);
    std::size_t s = 0;
    while (s < t && ed.values[s] > keep_above) ++s;
    Matrix factor(t, s);
    Matrix projected(t, t, 0.0);
    for (std::size_t k = 0; k < s; ++k) {
        const double lam = ed.values[k];
        const double w = std::sqrt(lam);
        for (std::size_t i = 0; i < t; ++i) {
            factor(i, k) = ed.vectors(i, k) * w;
            const double vi = ed.vectors(i, k) * lam;
            for (std::size_t j = 0; j <= i; ++j) projected(i, j) += vi * ed.vectors(j, k);
        }
    }
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = i + 1; j < t; ++j) projected(i, j) = projected(j, i);
    return {std::move(projected), std::move(factor)};
}

}  // namespace detail

// Threshold-then-project estimate of the transformed covariance.
// lambda defaults to default_lambda(t, n, regime).
inline CovModel thresholded_cov(const Matrix& x, const Hypothesis& h,
                                std::optional<double> lambda = std::nullopt,
                                TailRegime regime = TailRegime::sub_gaussian, double c = 1.0) {
    const Matrix omega = detail::sample_cov_matrix(x, h);
    const double lam = lambda ? *lambda : default_lambda(omega.rows(), x.rows(), regime, c);
    const Matrix thr = hard_threshold(omega, lam);
    auto [projected, factor] = detail::project_and_factor(thr);
    CovModel out;
    out.method = CovMethod::thresholded;
    out.lambda = lam;
    out.factor = std::move(factor);
    out.omega = std::move(projected);
    if (out.factor.cols() == 0) out.degenerate = true;
    return out;
}

// Band-then-project estimate with half-width k.
inline CovModel banded_cov(const Matrix& x, const Hypothesis& h, std::size_t k) {
    Matrix omega = detail::sample_cov_matrix(x, h);
    for (std::size_t i = 0; i < omega.rows(); ++i)
        for (std::size_t j = 0; j < omega.cols(); ++j) {
            const std::size_t gap = i > j ? i - j : j - i;
            if (gap > k) omega(i, j) = 0.0;
        }
    auto [projected, factor] = detail::project_and_factor(omega);
    CovModel out;
    out.method = CovMethod::banded;
    out.band_k = k;
    out.factor = std::move(factor);
    out.omega = std::move(projected);
    if (out.factor.cols() == 0) out.degenerate = true;
    return out;
}

}  // namespace hdlpboot
