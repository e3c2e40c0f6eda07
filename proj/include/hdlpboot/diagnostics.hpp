#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "hdlpboot/eigen.hpp"
#include "hdlpboot/errors.hpp"
#include "hdlpboot/estimators.hpp"
#include "hdlpboot/hdtest.hpp"
#include "hdlpboot/lp_norm.hpp"
#include "hdlpboot/matrix.hpp"
#include "hdlpboot/op_norm.hpp"
#include "hdlpboot/rng.hpp"

namespace hdlpboot {

// ---------------------------------------------------------------------------
// Variance lower bounds for ||Z||_p, Z ~ N(0, Sigma).
//
// These are order-of-magnitude diagnostics: the formulas carry absolute
// constants from the underlying concentration arguments and are not
// certified finite-sample inequalities. The refined p=1 and p=2
// formulas are additionally flagged: evaluated verbatim they exceed the
// true variance already for Sigma = I (per coordinate Var|N(0,1)| =
// 1 - 2/pi < pi/2, and Var(chi_d) -> 1/2 < tr(Sigma^2)/tr(Sigma) = 1;
// the source constant drops a factor 16).
// ---------------------------------------------------------------------------

enum class VarBoundRegime { p12, p2logd, pgeq2logd, pinf, refined1, refined2, refinedinf };

struct VarBoundReport {
    LpExponent p = LpExponent::finite(2.0);
    VarBoundRegime regime = VarBoundRegime::p12;
    double bound = 0.0;
    std::optional<VarBoundRegime> refined_regime;
    std::optional<double> refined;
    bool refined_certified = false;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double rho = 0.0;
    std::size_t d = 0;
};

namespace detail {

inline double max_abs_correlation(const Matrix& sigma) {
    double rho = 0.0;
    for (std::size_t j = 0; j < sigma.rows(); ++j)
        for (std::size_t k = j + 1; k < sigma.cols(); ++k) {
            const double denom = std::sqrt(sigma(j, j) * sigma(k, k));
            if (denom > 0.0) rho = std::max(rho, std::fabs(sigma(j, k)) / denom);
        }
    return std::min(rho, 1.0);
}

}  // namespace detail

inline VarBoundReport var_lower_bound(const Matrix& sigma, LpExponent p,
                                      std::optional<double> rho_opt = std::nullopt) {
    if (!is_square(sigma) || !is_symmetric(sigma, 1e-12))
        throw ShapeError("var_lower_bound: Sigma must be symmetric");
    const std::size_t d = sigma.rows();
    Vector sd(d);
    double total_var = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        if (sigma(i, i) < 0.0) throw NotPsdError("var_lower_bound: negative diagonal");
        sd[i] = std::sqrt(sigma(i, i));
        total_var += sigma(i, i);
    }
    if (total_var == 0.0) throw DegenerateError("var_lower_bound: zero Sigma");

    VarBoundReport rep;
    rep.p = p;
    rep.d = d;
    rep.rho = rho_opt ? *rho_opt : detail::max_abs_correlation(sigma);
    Vector ordered = sd;
    std::sort(ordered.begin(), ordered.end());
    rep.sigma_min = ordered.front();
    rep.sigma_max = ordered.back();

    const double dd = static_cast<double>(d);
    const double log_d = std::log(dd);
    const double pi = 3.14159265358979323846;

    // Extreme-regime bound shared by p >= 2 log d and p = inf.
    const double s1 = rep.sigma_min;
    const double sdd = rep.sigma_max;
    const double tail_core = (s1 + sdd * std::sqrt(log_d)) > 0.0
                                 ? std::pow(s1 * s1 / (s1 + sdd * std::sqrt(log_d)), 2.0)
                                 : 0.0;

    if (p.is_infinity()) {
        rep.regime = VarBoundRegime::pinf;
        rep.bound = tail_core / 225.0;
    } else {
        const double pe = p.resolve(d);
        if (pe <= 2.0) {
            rep.regime = VarBoundRegime::p12;
            double mean_pow = 0.0;
            for (double s : sd) mean_pow += std::pow(s, pe);
            mean_pow /= dd;
            rep.bound = (pi / 9.0) * std::pow(mean_pow, 2.0 / pe) * std::pow(dd, 2.0 / pe - 1.0);
        } else if (pe < 2.0 * log_d) {
            rep.regime = VarBoundRegime::p2logd;
            double mean_pow = 0.0;
            for (double s : sd) mean_pow += std::pow(s, 2.0 * pe);
            mean_pow /= dd;
            // p^2 / 2^{3p} through exp keeps huge p from overflowing.
            const double shrink = std::exp(2.0 * std::log(pe) - 3.0 * pe * std::log(2.0));
            rep.bound = (pi / 6.0) * shrink * std::pow(mean_pow, 1.0 / pe) *
                        std::pow(dd, 2.0 / pe - 1.0);
        } else {
            rep.regime = VarBoundRegime::pgeq2logd;
            const double corr_term = 1.0 / std::pow(1.0 + rep.rho * std::sqrt(log_d), 2.0);
            rep.bound = tail_core / 225.0 * corr_term / std::pow(11.0, 6.0);
        }
    }

    // Refinements exist for p in {1, 2, inf}.
    if (p.is_infinity()) {
        // sigma_bar_d = (1 + sqrt(log d)) / (1/s_(1) + max_k (1 + sqrt(log k)) / s_(k)),
        // ordered ascending, k 1-indexed.
        if (rep.sigma_min > 0.0) {
            double max_term = 0.0;
            for (std::size_t k = 1; k <= d; ++k)
                max_term = std::max(
                    max_term, (1.0 + std::sqrt(std::log(static_cast<double>(k)))) / ordered[k - 1]);
            const double sigma_bar = (1.0 + std::sqrt(log_d)) / (1.0 / ordered[0] + max_term);
            rep.refined_regime = VarBoundRegime::refinedinf;
            rep.refined = std::pow(sigma_bar / (1.0 + std::sqrt(log_d)), 2.0) / 12.0;
            rep.refined_certified = true;
        }
    } else {
        const double pe = p.resolve(d);
        if (pe == 1.0) {
            rep.refined_regime = VarBoundRegime::refined1;
            rep.refined = (pi / 2.0) * total_var;
            rep.refined_certified = false;  // formula as printed overshoots
        } else if (pe == 2.0) {
            double tr2 = 0.0;
            double sum_sd4 = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < d; ++j) tr2 += sigma(i, j) * sigma(i, j);
                sum_sd4 += sigma(i, i) * sigma(i, i);
            }
            rep.refined_regime = VarBoundRegime::refined2;
            rep.refined = std::max(tr2 / total_var, sum_sd4 / total_var);
            rep.refined_certified = false;  // Var(chi_d) -> 1/2 < 1 for Sigma = I
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Moment and quantile brackets for ||Z||_p.
// ---------------------------------------------------------------------------

struct NormMomentReport {
    std::optional<double> closed;  // (E||Z||_p^p)^{1/p}, finite p only
    double lower = 0.0;            // bracket for E||Z||_p
    double upper = 0.0;
    bool certified = true;
};

// Closed form for independent coordinates:
// (E||Z||_p^p)^{1/p} = (sum sigma_k^p)^{1/p} * 2^{1/2} pi^{-1/(2p)} Gamma((p+1)/2)^{1/p},
// bracketing E||Z||_p within [closed / sqrt(8 pi p), closed]. For p = inf
// a heuristic Sudakov/Dudley band in sqrt(log d) is reported instead.
inline NormMomentReport gaussian_norm_moment(const Vector& sigma_diag, LpExponent p) {
    if (sigma_diag.empty()) throw DimensionError("gaussian_norm_moment: empty sigma");
    for (double s : sigma_diag)
        if (!(s >= 0.0)) throw DomainError("gaussian_norm_moment: sigma_k must be >= 0");
    const double pi = 3.14159265358979323846;
    NormMomentReport rep;
    if (p.is_infinity()) {
        const double d = static_cast<double>(sigma_diag.size());
        const double root_log_d = std::sqrt(std::log(d));
        const double smin = *std::min_element(sigma_diag.begin(), sigma_diag.end());
        const double smax = *std::max_element(sigma_diag.begin(), sigma_diag.end());
        rep.lower = 0.23 * smin * root_log_d;
        rep.upper = std::sqrt(2.0) * std::exp(1.0) * smax * root_log_d;
        rep.certified = false;
        return rep;
    }
    const double pe = p.resolve(sigma_diag.size());
    const double base = lp_norm(sigma_diag, LpExponent::finite(pe));
    const double closed =
        base * std::exp(0.5 * std::log(2.0) - std::log(pi) / (2.0 * pe) +
                        std::lgamma((pe + 1.0) / 2.0) / pe);
    rep.closed = closed;
    rep.lower = closed / std::sqrt(8.0 * pi * pe);
    rep.upper = closed;
    return rep;
}

// Bracket for the (1-alpha) quantile of ||Z||_p around its MC mean:
// lower side uses min(||Sigma^{1/2}||_{2->p}, sqrt(var)), upper side
// min(sqrt(2 log(1/alpha)) ||Sigma^{1/2}||_{2->p}, sqrt(var/alpha)).
inline Interval quantile_bracket(const Matrix& sigma, LpExponent p, double alpha, double mc_var,
                                 double mc_mean) {
    if (!(alpha > 0.0) || alpha > 0.5)
        throw DomainError("quantile_bracket: alpha must lie in (0, 1/2]");
    if (!(mc_var >= 0.0)) throw DomainError("quantile_bracket: mc_var must be >= 0");
    const double norm = op_norm_sqrt_two_p(sigma, p);
    const double lo = mc_mean - std::min(norm, std::sqrt(mc_var));
    const double hi = mc_mean +
                      std::min(std::sqrt(2.0 * std::log(1.0 / alpha)) * norm,
                               std::sqrt(mc_var / alpha));
    return Interval{lo, hi};
}

// ---------------------------------------------------------------------------
// Bahadur slope and alternative classification.
// ---------------------------------------------------------------------------

// ||R mu - r||_p / ||Omega^{1/2}||_{2->p}. Computable for p in {2, inf}
// or diagonal Omega.
inline double bahadur_slope_lb(const Vector& mu, const Hypothesis& h, const Matrix& omega,
                               LpExponent p) {
    const std::size_t d = mu.size();
    h.validate(d);
    const std::size_t t = h.t(d);
    if (omega.rows() != t) throw ShapeError("bahadur_slope_lb: Omega must be t x t");
    Vector y(t);
    h.apply(mu.data(), d, y.data());
    for (std::size_t j = 0; j < t; ++j) y[j] -= h.r[j];
    const double denom = op_norm_sqrt_two_p(omega, p);
    if (!(denom > 0.0)) throw DegenerateError("bahadur_slope_lb: zero operator norm");
    return lp_norm(y, p) / denom;
}

enum class AltLabel { undetectable, intermediate, consistent, indeterminate };

struct AlternativeClass {
    AltLabel label = AltLabel::indeterminate;
    double signal = 0.0;
    double sd_est = 0.0;
    double mean_est = 0.0;
    double signal_to_sd = 0.0;
    double signal_to_mean = 0.0;
};

struct ClassifyThresholds {
    double c_lo = 0.3;
    double c_hi = 3.0;
};

// Places sqrt(n) ||R mu - r||_p against MC estimates of sd and mean of
// the proxy norm: below c_lo * sd the signal drowns in noise, above
// c_hi * mean the test is consistent, below c_lo * mean it is an
// intermediate alternative, anything else is indeterminate.
inline AlternativeClass classify_alternative(const Vector& mu, const Hypothesis& h,
                                             const CovModel& cov, LpExponent p, std::size_t n,
                                             std::size_t B_mc, RngStream stream,
                                             ClassifyThresholds th = {}) {
    if (B_mc < 1000) throw DomainError("classify_alternative: B_mc must be at least 1000");
    const std::size_t d = mu.size();
    h.validate(d);
    const std::size_t t = h.t(d);
    if (cov.t() != t) throw ShapeError("classify_alternative: cov dimension mismatch");

    const ProxyDraws draws = gaussian_proxy(cov, p, B_mc, stream);
    double mean = 0.0;
    for (double v : draws.values) mean += v;
    mean /= static_cast<double>(B_mc);
    double var = 0.0;
    for (double v : draws.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(B_mc);

    Vector y(t);
    h.apply(mu.data(), d, y.data());
    for (std::size_t j = 0; j < t; ++j) y[j] -= h.r[j];

    AlternativeClass out;
    out.signal = std::sqrt(static_cast<double>(n)) * lp_norm(y, p);
    out.sd_est = std::sqrt(var);
    out.mean_est = mean;
    out.signal_to_sd = out.sd_est > 0.0 ? out.signal / out.sd_est : INFINITY;
    out.signal_to_mean = out.mean_est > 0.0 ? out.signal / out.mean_est : INFINITY;
    if (out.signal <= th.c_lo * out.sd_est) {
        out.label = AltLabel::undetectable;
    } else if (out.signal >= th.c_hi * out.mean_est) {
        out.label = AltLabel::consistent;
    } else if (out.signal <= th.c_lo * out.mean_est) {
        out.label = AltLabel::intermediate;
    } else {
        out.label = AltLabel::indeterminate;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Alternative generation.
// ---------------------------------------------------------------------------

struct AltSpec {
    std::size_t s = 1;
    double delta = 0.0;
    std::optional<std::vector<std::size_t>> support;  // absent: sampled from the stream
};

// mu_k = r_k + delta * omega_k * sign_k on an s-point support, mu = r
// elsewhere. Signs alternate +,-,+,... along the support in index
// order. Requires the identity transform so mu lives in the data
// coordinates.
inline Vector make_alternative(const AltSpec& spec, const Vector& omega_diag, const Hypothesis& h,
                               RngStream stream) {
    const std::size_t t = omega_diag.size();
    if (h.R) throw DomainError("make_alternative: hypothesis transform must be the identity");
    if (h.r.size() != t) throw ShapeError("make_alternative: r length must match omega_diag");
    if (spec.s < 1 || spec.s > t) throw DomainError("make_alternative: s must lie in [1, t]");

    std::vector<std::size_t> support;
    if (spec.support) {
        support = *spec.support;
        if (support.size() != spec.s)
            throw DomainError("make_alternative: support size must equal s");
        for (std::size_t idx : support)
            if (idx >= t) throw DomainError("make_alternative: support index out of range");
    } else {
        // Partial Fisher-Yates: first s entries of a shuffled index list.
        std::vector<std::size_t> idx(t);
        for (std::size_t i = 0; i < t; ++i) idx[i] = i;
        for (std::size_t i = 0; i < spec.s; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(stream.next_below(t - i));
            std::swap(idx[i], idx[j]);
        }
        support.assign(idx.begin(), idx.begin() + spec.s);
        std::sort(support.begin(), support.end());
    }

    Vector mu = h.r;
    double sign = 1.0;
    for (std::size_t idx : support) {
        mu[idx] += spec.delta * omega_diag[idx] * sign;
        sign = -sign;
    }
    return mu;
}

// ---------------------------------------------------------------------------
// Assumption rate checks and B recommendation.
// ---------------------------------------------------------------------------

struct RateReport {
    bool p_is_infinity = false;
    std::size_t n = 0;
    // p = 2 pieces
    double eff_rank = 0.0;     // r(Omega)
    double eff_rank_sq = 0.0;  // r(Omega^2)
    // p = inf pieces
    double sd_ratio = 0.0;  // omega_(t) / omega_(1)
    // normalized expressions that the theory requires to vanish
    double primary = 0.0;
    double secondary = 0.0;
};

// Evaluates the sub-Gaussian sufficient-condition expressions at the
// given (Omega, n). Values are reported as-is: the conditions are
// asymptotic, so there is no finite-sample pass/fail line.
inline RateReport check_rates_subgaussian(const Matrix& omega, std::size_t n, LpExponent p) {
    if (!is_square(omega) || !is_symmetric(omega, 1e-12))
        throw ShapeError("check_rates_subgaussian: Omega must be symmetric");
    if (n < 1) throw DomainError("check_rates_subgaussian: n must be positive");
    RateReport rep;
    rep.n = n;
    const double nd = static_cast<double>(n);
    const double n16 = std::pow(nd, 1.0 / 6.0);

    if (p.is_infinity()) {
        rep.p_is_infinity = true;
        const std::size_t t = omega.rows();
        double lo = INFINITY;
        double hi = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
            const double v = omega(i, i);
            if (v < 0.0) throw NotPsdError("check_rates_subgaussian: negative diagonal");
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(lo > 0.0)) throw DegenerateError("check_rates_subgaussian: zero diagonal entry");
        const double ratio = std::sqrt(hi / lo);  // omega_(t) / omega_(1)
        rep.sd_ratio = ratio;
        const double log_t = std::log(static_cast<double>(t));
        rep.primary = std::max(ratio * std::sqrt(log_t) / n16, ratio * ratio * log_t / n16);
        rep.secondary = std::max(ratio * ratio * std::sqrt(log_t / nd),
                                 std::pow(ratio, 4.0) * std::sqrt(log_t * log_t * log_t / nd));
        return rep;
    }
    if (p.resolve(omega.rows()) != 2.0)
        throw DomainError("check_rates_subgaussian: p must be 2 or infinity");

    const EigenDecomp ed = sym_eigen(omega);
    const double lmax = ed.values.front();
    if (!(lmax > 0.0)) throw DegenerateError("check_rates_subgaussian: zero matrix");
    double tr = 0.0;
    double tr2 = 0.0;
    for (double lam : ed.values) {
        const double l = std::max(lam, 0.0);
        tr += l;
        tr2 += l * l;
    }
    rep.eff_rank = tr / lmax;
    rep.eff_rank_sq = tr2 / (lmax * lmax);
    rep.primary = rep.eff_rank / std::sqrt(rep.eff_rank_sq) / n16;
    rep.secondary = rep.eff_rank / rep.eff_rank_sq *
                    std::max(std::sqrt(rep.eff_rank / nd), rep.eff_rank / nd);
    return rep;
}

struct GaussianBTarget {
    double var_proxy_est = 0.0;
    double mode_est = 1.0;
};

struct SphericalBTarget {
    std::size_t s = 2;
    double gamma_norm_est = 0.0;  // ||Gamma_hat||_{2->p} estimate
    double mode_est = 1.0;
};

using BTarget = std::variant<GaussianBTarget, SphericalBTarget>;

// B >= n or (mode^2 * var_term)^{1+gamma}, floored at 1000. The
// spherical var_term (gamma_norm / s)^2 reflects the proxy's smaller
// conditional variance, so it recommends fewer draws than the
// Gaussian target whenever var_proxy_est exceeds it.
inline std::size_t recommend_B(std::size_t n, const BTarget& target, double gamma = 0.1) {
    double var_term = 0.0;
    double mode = 1.0;
    if (const auto* g = std::get_if<GaussianBTarget>(&target)) {
        if (g->var_proxy_est < 0.0 || g->mode_est < 0.0)
            throw DomainError("recommend_B: estimates must be >= 0");
        var_term = g->var_proxy_est;
        mode = g->mode_est;
    } else {
        const auto& sp = std::get<SphericalBTarget>(target);
        if (sp.gamma_norm_est < 0.0 || sp.mode_est < 0.0)
            throw DomainError("recommend_B: estimates must be >= 0");
        const double s = static_cast<double>(sp.s);
        var_term = (sp.gamma_norm_est / s) * (sp.gamma_norm_est / s);
        mode = sp.mode_est;
    }
    const double raw = std::pow(mode * mode * var_term, 1.0 + gamma);
    std::size_t b = n;
    if (std::isfinite(raw) && raw > static_cast<double>(b))
        b = static_cast<std::size_t>(std::ceil(raw));
    return std::max<std::size_t>(b, 1000);
}

}  // namespace hdlpboot
