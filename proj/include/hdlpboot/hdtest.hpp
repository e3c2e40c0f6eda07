#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "hdlpboot/distributions.hpp"
#include "hdlpboot/errors.hpp"
#include "hdlpboot/estimators.hpp"
#include "hdlpboot/lp_norm.hpp"
#include "hdlpboot/matrix.hpp"
#include "hdlpboot/rng.hpp"

namespace hdlpboot {

// Scalar functional applied to a proxy vector: a plain lp norm, or
// the two-norm sum ||v||_2 + ||v||_{log t} used by the W statistic
// (both norms on the same draw).
class StatFunc {
  public:
    enum class Kind { lp, w_sum };

    static StatFunc lp(LpExponent p) { return StatFunc(Kind::lp, p); }
    static StatFunc w_sum() { return StatFunc(Kind::w_sum, LpExponent::finite(2.0)); }

    Kind kind() const { return kind_; }
    LpExponent p() const { return p_; }

    double operator()(const double* v, std::size_t len) const {
        if (kind_ == Kind::lp) return lp_norm(v, len, p_);
        return lp_norm(v, len, LpExponent::finite(2.0)) + lp_norm(v, len, LpExponent::log_dim());
    }
    double operator()(const Vector& v) const { return (*this)(v.data(), v.size()); }

  private:
    StatFunc(Kind k, LpExponent p) : kind_(k), p_(p) {}
    Kind kind_;
    LpExponent p_;
};

enum class ProxyMethod { gaussian, spherical, multiplier };

// Sorted Monte Carlo sample of a proxy statistic.
struct ProxyDraws {
    std::vector<double> values;  // ascending
    ProxyMethod method = ProxyMethod::gaussian;
    StatFunc stat = StatFunc::lp(LpExponent::finite(2.0));
    std::size_t sphere_s = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    std::size_t B() const { return values.size(); }
};

struct TestResult {
    double statistic = 0.0;
    double critical_value = 0.0;
    double alpha = 0.0;
    double p_value = 0.0;
    bool reject = false;
    std::size_t B = 0;
    ProxyMethod method = ProxyMethod::gaussian;
};

// 1-indexed order statistic position k = floor((1-alpha) B). The 1e-9
// nudge keeps exact products like 0.95 * 2000 from flooring one short
// when the binary value lands just below the integer.
inline std::size_t quantile_index(std::size_t B, double alpha) {
    const double kf = std::floor((1.0 - alpha) * static_cast<double>(B) + 1e-9);
    if (!(kf >= 1.0) || kf > static_cast<double>(B))
        throw AlphaGridError("quantile_index: floor((1-alpha)B) outside [1, B]");
    return static_cast<std::size_t>(kf);
}

inline double mc_quantile(const ProxyDraws& draws, double alpha) {
    const std::size_t k = quantile_index(draws.B(), alpha);
    return draws.values[k - 1];
}

inline TestResult run_test(double statistic, const ProxyDraws& draws, double alpha) {
    TestResult res;
    res.statistic = statistic;
    res.alpha = alpha;
    res.B = draws.B();
    res.method = draws.method;
    res.critical_value = mc_quantile(draws, alpha);
    res.reject = statistic >= res.critical_value;
    const auto it = std::lower_bound(draws.values.begin(), draws.values.end(), statistic);
    res.p_value = static_cast<double>(draws.values.end() - it) / static_cast<double>(draws.B());
    return res;
}

namespace detail {

// sqrt(n) (R xbar - r), the centered scaled mean every statistic is
// built from.
inline Vector scaled_deviation(const Matrix& x, const Hypothesis& h) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 1) throw SampleSizeError("t_stat: need n >= 1");
    h.validate(d);
    Vector mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    const std::size_t t = h.t(d);
    Vector y(t);
    h.apply(mean.data(), d, y.data());
    const double root_n = std::sqrt(static_cast<double>(n));
    for (std::size_t j = 0; j < t; ++j) y[j] = root_n * (y[j] - h.r[j]);
    return y;
}

}  // namespace detail

// T_{n,p} = ||R S_n - sqrt(n) r||_p = sqrt(n) ||R xbar - r||_p.
inline double t_stat(const Matrix& x, const Hypothesis& h, LpExponent p) {
    return lp_norm(detail::scaled_deviation(x, h), p);
}

// W_n = T_{n,2} + T_{n,log t}.
inline double w_stat(const Matrix& x, const Hypothesis& h) {
    const Vector y = detail::scaled_deviation(x, h);
    if (y.size() < 2) throw ShapeError("w_stat: transformed dimension must be at least 2");
    return lp_norm(y, LpExponent::finite(2.0)) + lp_norm(y, LpExponent::log_dim());
}

// V_n = sqrt(n) || mean of self-normalized rows ||_2.
inline double v_stat(const Matrix& x, const Hypothesis& h) {
    const std::size_t n = x.rows();
    if (n < 1) throw SampleSizeError("v_stat: need n >= 1");
    const detail::SelfNormRows sn = detail::selfnorm_rows(x, h, std::nullopt);
    const std::size_t t = sn.rows.cols();
    Vector mean(t, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < t; ++j) mean[j] += sn.rows(i, j);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (double& m : mean) m *= scale;
    return lp_norm(mean, LpExponent::finite(2.0));
}

namespace detail {

// Indices of the bsel largest |s| entries, ties broken toward the
// smaller index, returned in selection order.
inline std::vector<std::size_t> top_abs_indices(const Vector& s, std::size_t bsel) {
    if (bsel < 1 || bsel > s.size())
        throw DomainError("post_selection_stat: Bsel must lie in [1, d]");
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + bsel, idx.end(), [&](std::size_t a, std::size_t b) {
        const double fa = std::fabs(s[a]);
        const double fb = std::fabs(s[b]);
        if (fa != fb) return fa > fb;
        return a < b;
    });
    idx.resize(bsel);
    return idx;
}

}  // namespace detail

// ||S_{n,J}||_p where J holds the Bsel largest |S_n| entries
// (identity hypothesis, r = 0). Compared against the full-vector
// critical value downstream, which is conservative by construction.
inline double post_selection_stat(const Matrix& x, LpExponent p, std::size_t bsel) {
    const std::size_t d = x.cols();
    if (bsel < 1 || bsel > d) throw DomainError("post_selection_stat: Bsel must lie in [1, d]");
    const Vector s = detail::scaled_deviation(x, Hypothesis::identity_zero(d));
    const std::vector<std::size_t> idx = detail::top_abs_indices(s, bsel);
    Vector top(bsel);
    for (std::size_t i = 0; i < bsel; ++i) top[i] = s[idx[i]];
    return lp_norm(top, p);
}

// For pipelines that linearize a smooth functional themselves: the
// caller passes the centered vector and testing proceeds as for T.
inline double linearized_stat(const Vector& g, LpExponent p) { return lp_norm(g, p); }

namespace detail {

inline void sort_draws(std::vector<double>& values) {
    for (double v : values)
        if (!std::isfinite(v)) throw NumericalError("proxy draws contain a non-finite value");
    std::sort(values.begin(), values.end());
}

}  // namespace detail

// B draws of stat(Gamma G), G ~ N(0, I_s). Draw b consumes substream
// b of the base stream, so results do not depend on scheduling.
inline ProxyDraws gaussian_proxy(const CovModel& cov, StatFunc stat, std::size_t B,
                                 RngStream base) {
    if (B < 1) throw DomainError("gaussian_proxy: B must be positive");
    const std::size_t t = cov.t();
    const std::size_t s = cov.s();
    ProxyDraws out;
    out.method = ProxyMethod::gaussian;
    out.stat = stat;
    out.seed = base.seed();
    out.stream_id = base.stream_id();
    out.values.resize(B);
    Vector g(s);
    Vector v(t);
    for (std::size_t b = 0; b < B; ++b) {
        RngStream stream = base.substream(b);
        std_normal_fill(stream, g.data(), s);
        for (std::size_t i = 0; i < t; ++i) v[i] = dot(cov.factor.row(i), g.data(), s);
        out.values[b] = stat(v);
    }
    detail::sort_draws(out.values);
    return out;
}

inline ProxyDraws gaussian_proxy(const CovModel& cov, LpExponent p, std::size_t B,
                                 RngStream base) {
    return gaussian_proxy(cov, StatFunc::lp(p), B, base);
}

// B draws of sqrt(s) stat(Gamma U), U ~ Unif(S^{s-1}). s defaults to
// the factor's column count. An override s' < s restricts to the
// leading s' factor columns (rank truncation); s' > s draws U in s'
// dimensions and applies the first s coordinates (zero-padded factor),
// which preserves the draw covariance exactly.
inline ProxyDraws spherical_proxy(const CovModel& cov, StatFunc stat, std::size_t B,
                                  RngStream base,
                                  std::optional<std::size_t> s_override = std::nullopt) {
    if (B < 1) throw DomainError("spherical_proxy: B must be positive");
    const std::size_t s = s_override ? *s_override : cov.s();
    if (s < 2) throw DimensionError("spherical_proxy: sphere dimension must be at least 2");
    const std::size_t t = cov.t();
    const std::size_t cols = std::min(s, cov.s());
    const double root_s = std::sqrt(static_cast<double>(s));
    ProxyDraws out;
    out.method = ProxyMethod::spherical;
    out.stat = stat;
    out.sphere_s = s;
    out.seed = base.seed();
    out.stream_id = base.stream_id();
    out.values.resize(B);
    Vector v(t);
    for (std::size_t b = 0; b < B; ++b) {
        RngStream stream = base.substream(b);
        const Vector u = sphere_sample(s, stream);
        for (std::size_t i = 0; i < t; ++i) v[i] = dot(cov.factor.row(i), u.data(), cols);
        out.values[b] = root_s * stat(v);
    }
    detail::sort_draws(out.values);
    return out;
}

inline ProxyDraws spherical_proxy(const CovModel& cov, LpExponent p, std::size_t B,
                                  RngStream base,
                                  std::optional<std::size_t> s_override = std::nullopt) {
    return spherical_proxy(cov, StatFunc::lp(p), B, base, s_override);
}

namespace detail {

// Core multiplier loop over prescaled columns c_i (t x n matrix):
// draw b evaluates stat(sum_i xi_i c_i) with fresh normal multipliers.
inline ProxyDraws multiplier_over_columns(const Matrix& cols, StatFunc stat, std::size_t B,
                                          RngStream base) {
    if (B < 1) throw DomainError("multiplier_proxy: B must be positive");
    const std::size_t t = cols.rows();
    const std::size_t n = cols.cols();
    ProxyDraws out;
    out.method = ProxyMethod::multiplier;
    out.stat = stat;
    out.seed = base.seed();
    out.stream_id = base.stream_id();
    out.values.resize(B);
    Vector xi(n);
    Vector v(t);
    for (std::size_t b = 0; b < B; ++b) {
        RngStream stream = base.substream(b);
        std_normal_fill(stream, xi.data(), n);
        for (std::size_t i = 0; i < t; ++i) v[i] = dot(cols.row(i), xi.data(), n);
        out.values[b] = stat(v);
    }
    sort_draws(out.values);
    return out;
}

}  // namespace detail

// B draws of stat(n^{-1/2} sum_i xi_i R(x_i - xbar)), xi i.i.d. N(0,1).
inline ProxyDraws multiplier_proxy(const Matrix& x, const Hypothesis& h, StatFunc stat,
                                   std::size_t B, RngStream base) {
    const std::size_t n = x.rows();
    if (n < 2) throw SampleSizeError("multiplier_proxy: need n >= 2");
    const std::size_t d = x.cols();
    h.validate(d);
    const std::size_t t = h.t(d);
    Matrix cols(t, n);
    Vector mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(n));
    Vector row(d);
    Vector tx(t);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) row[j] = x(i, j) - mean[j];
        h.apply(row.data(), d, tx.data());
        for (std::size_t j = 0; j < t; ++j) cols(j, i) = tx[j] * inv_root_n;
    }
    return detail::multiplier_over_columns(cols, stat, B, base);
}

inline ProxyDraws multiplier_proxy(const Matrix& x, const Hypothesis& h, LpExponent p,
                                   std::size_t B, RngStream base) {
    return multiplier_proxy(x, h, StatFunc::lp(p), B, base);
}

// Multiplier proxy over already-normalized rows (no centering): used
// with self-normalized data, whose covariance is uncentered.
inline ProxyDraws multiplier_proxy_rows(const Matrix& rows, StatFunc stat, std::size_t B,
                                        RngStream base) {
    const std::size_t n = rows.rows();
    if (n < 1) throw SampleSizeError("multiplier_proxy_rows: need n >= 1");
    const std::size_t t = rows.cols();
    Matrix cols(t, n);
    const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < t; ++j) cols(j, i) = rows(i, j) * inv_root_n;
    return detail::multiplier_over_columns(cols, stat, B, base);
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// sqrt(n) ||R(xbar - mu)||_p <= c.
inline bool conf_ellipsoid_contains(const Vector& mu, const Matrix& x, const Hypothesis& h,
                                    LpExponent p, double c) {
    const std::size_t d = x.cols();
    if (mu.size() != d) throw ShapeError("conf_ellipsoid_contains: mu length must match d");
    Matrix shifted(x.rows(), d);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j) shifted(i, j) = x(i, j) - mu[j];
    Hypothesis h0{h.R, Vector(h.t(d), 0.0)};
    return t_stat(shifted, h0, p) <= c;
}

// h' R xbar +- ||h||_q c / sqrt(n), q the conjugate exponent.
inline Interval simultaneous_ci(const Vector& h_vec, const Matrix& x, const Hypothesis& h,
                                LpExponent p, double c) {
    const std::size_t d = x.cols();
    h.validate(d);
    const std::size_t t = h.t(d);
    if (h_vec.size() != t) throw ShapeError("simultaneous_ci: h length must match t");
    const std::size_t n = x.rows();
    if (n < 1) throw SampleSizeError("simultaneous_ci: need n >= 1");
    Vector mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    Vector rmean(t);
    h.apply(mean.data(), d, rmean.data());
    const double center = dot(h_vec.data(), rmean.data(), t);
    const double half =
        lp_norm(h_vec, conjugate_exponent(p, t)) * c / std::sqrt(static_cast<double>(n));
    return Interval{center - half, center + half};
}

// Two-sided interval for ||mu||_p via the Gaussian proxy quantile,
// clipped below at zero.
inline Interval norm_ci(const Matrix& x, LpExponent p, const CovModel& cov, double alpha,
                        std::size_t B, RngStream stream) {
    const std::size_t n = x.rows();
    if (n < 1) throw SampleSizeError("norm_ci: need n >= 1");
    const std::size_t d = x.cols();
    Vector mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    const double mhat = lp_norm(mean, p);
    const ProxyDraws draws = gaussian_proxy(cov, p, B, stream);
    const double half = mc_quantile(draws, alpha) / std::sqrt(static_cast<double>(n));
    return Interval{std::max(0.0, mhat - half), mhat + half};
}

}  // namespace hdlpboot
