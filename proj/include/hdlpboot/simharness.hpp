#pragma once

// Simulation harness: size and power experiments for the bootstrap
// tests. A replication generates one dataset, builds the covariance
// estimate, computes the statistic, draws B proxies, and evaluates the
// rejection decision across the whole alpha grid from that single draw
// set. Replications are tied to counter-based streams keyed by the
// replication index, so results are bit-identical for any worker count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hdlpboot/diagnostics.hpp"
#include "hdlpboot/distributions.hpp"
#include "hdlpboot/eigen.hpp"
#include "hdlpboot/errors.hpp"
#include "hdlpboot/estimators.hpp"
#include "hdlpboot/hdtest.hpp"
#include "hdlpboot/lp_norm.hpp"
#include "hdlpboot/matrix.hpp"
#include "hdlpboot/rng.hpp"

namespace hdlpboot {

// True covariance shapes for the data-generating processes.
enum class CovKind { identity, equicorrelated, toeplitz, banded };

// Marginal families driving the rows.
enum class DgpFamily { gaussian, copula, student_t4 };

struct DgpSpec {
    DgpFamily family = DgpFamily::copula;
    CovKind cov = CovKind::toeplitz;
};

// Half-width w = ceil(d^{1/3} / 2) of the triangular-decay covariance;
// entries vanish once |j - k| >= w, so the widest nonzero off-diagonal
// sits at k = w - 1.
inline std::size_t banded_halfwidth(std::size_t d) {
    return static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(d)) / 2.0));
}

inline std::size_t banded_true_k(std::size_t d) {
    const std::size_t w = banded_halfwidth(d);
    return w > 0 ? w - 1 : 0;
}

inline Matrix build_sigma(CovKind kind, std::size_t d) {
    if (d < 1) throw DimensionError("build_sigma: d must be positive");
    Matrix s(d, d, 0.0);
    switch (kind) {
        case CovKind::identity:
            return Matrix::identity(d);
        case CovKind::equicorrelated:
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) s(i, j) = i == j ? 1.0 : 0.8;
            return s;
        case CovKind::toeplitz:
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    s(i, j) = std::pow(0.8, static_cast<double>(i > j ? i - j : j - i));
            return s;
        case CovKind::banded: {
            const double w = static_cast<double>(banded_halfwidth(d));
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    const double gap = static_cast<double>(i > j ? i - j : j - i);
                    s(i, j) = std::max(1.0 - gap / w, 0.0);
                }
            return s;
        }
    }
    throw DomainError("build_sigma: unknown covariance kind");
}

enum class StatKind { lp, w, v, studentized, post_sel };

struct StatSpec {
    StatKind kind = StatKind::lp;
    LpExponent p = LpExponent::finite(2.0);  // lp, studentized, post_sel
    std::size_t bsel = 1;                    // post_sel block size
};

struct MethodSpec {
    ProxyMethod method = ProxyMethod::gaussian;
    std::optional<std::size_t> sphere_s;  // spherical only
};

enum class CovEstimator { naive, thresholded, banded };

struct CovSpec {
    CovEstimator kind = CovEstimator::naive;
    std::optional<double> lambda;       // thresholded; absent: rate default
    std::optional<std::size_t> band_k;  // banded; absent: true bandwidth
};

struct AltConfig {
    std::size_t s = 1;
    double delta = 0.0;
    // Absent: support is the first s coordinates. Present: support is
    // sampled once from RngStream(support_seed, 0) and reused by every
    // replication.
    std::optional<std::uint64_t> support_seed;
};

struct SimConfig {
    DgpSpec dgp;
    std::size_t d = 100;
    std::size_t n = 100;
    std::size_t B = 2000;
    std::size_t reps = 1000;
    StatSpec stat;
    MethodSpec method;
    CovSpec cov;
    std::vector<double> alpha{0.05};
    std::optional<AltConfig> alt;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    bool collect_pvalues = false;
};

struct SizeRow {
    double alpha_nominal = 0.0;
    double alpha_actual = 0.0;
    double mc_se = 0.0;
    std::size_t reps = 0;
    std::size_t reject_count = 0;
};

struct SizeCurve {
    SimConfig config;
    std::vector<SizeRow> rows;     // sorted by alpha_nominal
    std::vector<double> p_values;  // one per replication when collected
    double wall_seconds = 0.0;
};

// Stream layout: replication rep owns stream ids rep * 8 + role.
inline constexpr std::uint64_t kStreamsPerRep = 8;
inline constexpr std::uint64_t kDataRole = 0;
inline constexpr std::uint64_t kProxyRole = 1;

// Validates and normalizes (sorts the alpha grid). Throws ConfigError
// before any experiment work starts.
inline SimConfig validated_config(SimConfig cfg) {
    if (cfg.d < 1) throw ConfigError("config: d must be at least 1");
    if (cfg.n < 2) throw ConfigError("config: n must be at least 2");
    if (cfg.B < 1) throw ConfigError("config: B must be at least 1");
    if (cfg.reps < 1) throw ConfigError("config: reps must be at least 1");
    if (cfg.workers < 1) throw ConfigError("config: workers must be at least 1");
    if (cfg.alpha.empty()) throw ConfigError("config: alpha grid is empty");
    for (double a : cfg.alpha) {
        try {
            quantile_index(cfg.B, a);
        } catch (const AlphaGridError& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }
    std::sort(cfg.alpha.begin(), cfg.alpha.end());

    switch (cfg.stat.kind) {
        case StatKind::w:
            if (cfg.d < 2) throw ConfigError("config: the w statistic needs d >= 2");
            break;
        case StatKind::v:
            if (cfg.cov.kind != CovEstimator::naive)
                throw ConfigError(
                    "config: the v statistic fixes the self-normalized covariance; cov must stay "
                    "naive");
            break;
        case StatKind::post_sel:
            if (cfg.stat.bsel < 1 || cfg.stat.bsel > cfg.d)
                throw ConfigError("config: post-selection block size must lie in [1, d]");
            break;
        default:
            break;
    }
    if (cfg.method.method != ProxyMethod::spherical && cfg.method.sphere_s)
        throw ConfigError("config: sphere dimension applies to the spherical method only");
    if (cfg.method.method == ProxyMethod::multiplier && cfg.cov.kind != CovEstimator::naive)
        throw ConfigError(
            "config: the multiplier proxy resamples centered rows directly; cov must stay naive");
    if (cfg.method.method == ProxyMethod::spherical) {
        // Sphere dimension is known up front except for data-dependent
        // ranks (thresholded or banded estimates), checked at run time.
        std::size_t s_known = 0;
        if (cfg.method.sphere_s)
            s_known = *cfg.method.sphere_s;
        else if (cfg.stat.kind == StatKind::v)
            s_known = cfg.n;
        else if (cfg.cov.kind == CovEstimator::naive)
            s_known = cfg.n - 1;
        if (cfg.method.sphere_s || cfg.stat.kind == StatKind::v ||
            cfg.cov.kind == CovEstimator::naive) {
            if (s_known < 2)
                throw ConfigError("config: spherical proxy needs sphere dimension >= 2");
        }
    }
    if (cfg.cov.kind == CovEstimator::thresholded && cfg.cov.lambda &&
        !(*cfg.cov.lambda >= 0.0))
        throw ConfigError("config: threshold level must be nonnegative");
    if (cfg.alt) {
        if (cfg.alt->s < 1 || cfg.alt->s > cfg.d)
            throw ConfigError("config: alternative support size must lie in [1, d]");
        if (!std::isfinite(cfg.alt->delta) || cfg.alt->delta < 0.0)
            throw ConfigError("config: alternative delta must be finite and nonnegative");
    }
    return cfg;
}

namespace detail {

struct SimContext {
    SimConfig cfg;
    Hypothesis h{std::nullopt, Vector()};
    bool identity_factor = false;
    Matrix data_factor;  // unused when the true covariance is identity
    Vector mu;           // true mean; empty for size experiments
    TailRegime regime = TailRegime::sub_gaussian;
    std::size_t band_k = 0;
    std::vector<std::size_t> k_index;  // order-statistic index per alpha
};

struct RepOutcome {
    std::vector<unsigned char> reject;
    double p_value = 0.0;
};

inline SimContext make_context(SimConfig cfg, bool power) {
    SimContext ctx;
    ctx.cfg = std::move(cfg);
    const SimConfig& c = ctx.cfg;
    ctx.h = Hypothesis::identity_zero(c.d);
    ctx.regime = c.dgp.family == DgpFamily::student_t4 ? TailRegime::heavy_tail
                                                       : TailRegime::sub_gaussian;
    ctx.band_k = c.cov.band_k ? *c.cov.band_k : banded_true_k(c.d);
    ctx.k_index.reserve(c.alpha.size());
    for (double a : c.alpha) ctx.k_index.push_back(quantile_index(c.B, a));

    const Matrix sigma = build_sigma(c.dgp.cov, c.d);
    if (c.dgp.cov == CovKind::identity)
        ctx.identity_factor = true;
    else
        ctx.data_factor = psd_factor(sigma);

    if (power) {
        Vector omega_diag(c.d);
        for (std::size_t j = 0; j < c.d; ++j) omega_diag[j] = sigma(j, j);
        AltSpec spec;
        spec.s = c.alt->s;
        spec.delta = c.alt->delta;
        if (!c.alt->support_seed) {
            std::vector<std::size_t> sup(spec.s);
            for (std::size_t i = 0; i < spec.s; ++i) sup[i] = i;
            spec.support = std::move(sup);
        }
        RngStream support_stream(c.alt->support_seed.value_or(0), 0);
        ctx.mu = make_alternative(spec, omega_diag, ctx.h, support_stream);
    }
    return ctx;
}

inline CovModel build_cov_estimate(const Matrix& data, const SimContext& ctx) {
    const SimConfig& c = ctx.cfg;
    switch (c.cov.kind) {
        case CovEstimator::naive:
            return sample_cov_transformed(data, ctx.h);
        case CovEstimator::thresholded:
            return thresholded_cov(data, ctx.h, c.cov.lambda, ctx.regime);
        case CovEstimator::banded:
            return banded_cov(data, ctx.h, ctx.band_k);
    }
    throw DomainError("build_cov_estimate: unknown covariance estimator");
}

inline RepOutcome run_rep(const SimContext& ctx, std::size_t rep) {
    const SimConfig& c = ctx.cfg;
    RngStream data_stream(c.seed, static_cast<std::uint64_t>(rep) * kStreamsPerRep + kDataRole);

    // An identity factor is skipped, not multiplied: Gamma G with
    // Gamma = I reproduces G bit for bit and consumes the same words.
    Matrix x(c.n, c.d);
    for (std::size_t i = 0; i < c.n; ++i) {
        Vector row = ctx.identity_factor ? std_normal_vec(data_stream, c.d)
                                         : mvn_from_factor(ctx.data_factor, data_stream);
        switch (c.dgp.family) {
            case DgpFamily::gaussian:
                break;
            case DgpFamily::copula:
                copula_transform(row);
                break;
            case DgpFamily::student_t4: {
                const double scale = chi2_4_scale(data_stream);
                for (double& v : row) v *= scale;
                break;
            }
        }
        double* dst = x.row(i);
        if (!ctx.mu.empty())
            for (std::size_t j = 0; j < c.d; ++j) dst[j] = row[j] + ctx.mu[j];
        else
            std::copy(row.begin(), row.end(), dst);
    }

    StatFunc func = StatFunc::lp(c.stat.p);
    double stat_value = 0.0;
    const Matrix* cov_data = &x;
    Matrix studentized_storage;
    switch (c.stat.kind) {
        case StatKind::lp:
            stat_value = t_stat(x, ctx.h, c.stat.p);
            break;
        case StatKind::w:
            stat_value = w_stat(x, ctx.h);
            func = StatFunc::w_sum();
            break;
        case StatKind::v:
            stat_value = v_stat(x, ctx.h);
            func = StatFunc::lp(LpExponent::finite(2.0));
            break;
        case StatKind::studentized:
            studentized_storage = studentize(x).data;
            cov_data = &studentized_storage;
            stat_value = t_stat(studentized_storage, ctx.h, c.stat.p);
            break;
        case StatKind::post_sel:
            // Selected-block statistic against the full-vector critical
            // value: conservative, so the proxies below stay full-dim.
            stat_value = post_selection_stat(x, c.stat.p, c.stat.bsel);
            break;
    }

    RngStream proxy_base(c.seed, static_cast<std::uint64_t>(rep) * kStreamsPerRep + kProxyRole);
    ProxyDraws draws;
    if (c.stat.kind == StatKind::v) {
        // The v statistic pins the self-normalized covariance. Size
        // runs center at the hypothesized r, power runs at the true
        // mean so the proxy law matches the sampling law.
        std::optional<Vector> center;
        if (!ctx.mu.empty()) center = ctx.mu;
        if (c.method.method == ProxyMethod::multiplier) {
            const detail::SelfNormRows sn = detail::selfnorm_rows(x, ctx.h, center);
            draws = multiplier_proxy_rows(sn.rows, func, c.B, proxy_base);
        } else {
            const CovModel cov = selfnorm_cov(x, ctx.h, center);
            draws = c.method.method == ProxyMethod::gaussian
                        ? gaussian_proxy(cov, func, c.B, proxy_base)
                        : spherical_proxy(cov, func, c.B, proxy_base, c.method.sphere_s);
        }
    } else if (c.method.method == ProxyMethod::multiplier) {
        draws = multiplier_proxy(*cov_data, ctx.h, func, c.B, proxy_base);
    } else {
        const CovModel cov = build_cov_estimate(*cov_data, ctx);
        draws = c.method.method == ProxyMethod::gaussian
                    ? gaussian_proxy(cov, func, c.B, proxy_base)
                    : spherical_proxy(cov, func, c.B, proxy_base, c.method.sphere_s);
    }

    RepOutcome out;
    out.reject.resize(ctx.k_index.size());
    for (std::size_t a = 0; a < ctx.k_index.size(); ++a)
        out.reject[a] = stat_value >= draws.values[ctx.k_index[a] - 1] ? 1 : 0;
    const auto ge = std::lower_bound(draws.values.begin(), draws.values.end(), stat_value);
    out.p_value = static_cast<double>(draws.values.end() - ge) /
                  static_cast<double>(draws.values.size());
    return out;
}

inline SizeCurve run_experiment(SimConfig cfg, bool power) {
    const auto t0 = std::chrono::steady_clock::now();
    SimConfig normalized = validated_config(std::move(cfg));
    if (power && !normalized.alt)
        throw ConfigError("config: power experiment needs an alternative");
    if (!power && normalized.alt)
        throw ConfigError("config: size experiment must not carry an alternative");
    const SimContext ctx = make_context(std::move(normalized), power);
    const SimConfig& c = ctx.cfg;

    std::vector<RepOutcome> outcomes(c.reps);
    const std::size_t workers = std::min<std::size_t>(c.workers, c.reps);
    if (workers <= 1) {
        for (std::size_t rep = 0; rep < c.reps; ++rep) outcomes[rep] = run_rep(ctx, rep);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&ctx, &outcomes, &next, &errors, w, reps = c.reps] {
                try {
                    for (;;) {
                        const std::size_t rep = next.fetch_add(1);
                        if (rep >= reps) break;
                        outcomes[rep] = run_rep(ctx, rep);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                    next.store(reps);
                }
            });
        }
        for (std::thread& th : pool) th.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);
    }

    SizeCurve out;
    out.config = c;
    out.rows.resize(c.alpha.size());
    for (std::size_t a = 0; a < c.alpha.size(); ++a) {
        std::size_t count = 0;
        for (const RepOutcome& o : outcomes) count += o.reject[a];
        SizeRow& row = out.rows[a];
        row.alpha_nominal = c.alpha[a];
        row.reps = c.reps;
        row.reject_count = count;
        row.alpha_actual = static_cast<double>(count) / static_cast<double>(c.reps);
        row.mc_se = std::sqrt(row.alpha_actual * (1.0 - row.alpha_actual) /
                              static_cast<double>(c.reps));
    }
    if (c.collect_pvalues) {
        out.p_values.reserve(c.reps);
        for (const RepOutcome& o : outcomes) out.p_values.push_back(o.p_value);
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace detail

// Size experiment: data drawn under the null, alpha_actual estimates
// the true size at each nominal level.
inline SizeCurve run_size_experiment(SimConfig cfg) {
    return detail::run_experiment(std::move(cfg), false);
}

// Power experiment: data drawn at the configured alternative,
// alpha_actual estimates the rejection rate (power).
inline SizeCurve run_power_experiment(SimConfig cfg) {
    return detail::run_experiment(std::move(cfg), true);
}

}  // namespace hdlpboot
