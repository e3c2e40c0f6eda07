#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hdlpboot/errors.hpp"
#include "hdlpboot/estimators.hpp"
#include "hdlpboot/hdtest.hpp"
#include "hdlpboot/rng.hpp"
#include "helpers.hpp"

using namespace hdlpboot;
using Catch::Approx;

namespace {

Matrix gaussian_data(std::size_t n, std::size_t d, std::uint64_t seed, std::uint64_t sid) {
    RngStream s(seed, sid);
    Matrix x(n, d);
    for (std::size_t i = 0; i < n; ++i) std_normal_fill(s, x.row(i), d);
    return x;
}

CovModel identity_cov(std::size_t t) {
    CovModel cov;
    cov.factor = Matrix::identity(t);
    return cov;
}

}  // namespace

TEST_CASE("StatFunc: lp kind and two-norm sum", "[hdtest]") {
    const Vector v{3.0, -4.0};
    const StatFunc f2 = StatFunc::lp(LpExponent::finite(2.0));
    REQUIRE(f2.kind() == StatFunc::Kind::lp);
    REQUIRE(f2(v) == Approx(5.0));

    const StatFunc fw = StatFunc::w_sum();
    REQUIRE(fw.kind() == StatFunc::Kind::w_sum);
    // t = 2 resolves log_dim to exponent 1.
    REQUIRE(fw(v) == Approx(5.0 + 7.0));
    REQUIRE(fw(v.data(), v.size()) == fw(v));
}

TEST_CASE("quantile_index arithmetic and guard rails", "[hdtest]") {
    // 0.95 * 2000 lands at 1899.9999999999998 in binary; the nudge
    // recovers the exact order statistic 1900.
    REQUIRE(quantile_index(2000, 0.05) == 1900);
    REQUIRE(quantile_index(2000, 0.10) == 1800);
    REQUIRE(quantile_index(100, 0.05) == 95);
    REQUIRE(quantile_index(5, 0.3) == 3);    // floor(3.5)
    REQUIRE(quantile_index(10, 0.05) == 9);  // floor(9.5)
    REQUIRE(quantile_index(1000, 0.001) == 999);
    REQUIRE_THROWS_AS(quantile_index(10, 0.99), AlphaGridError);   // floor(0.1) = 0
    REQUIRE_THROWS_AS(quantile_index(10, 1.0), AlphaGridError);
    REQUIRE_THROWS_AS(quantile_index(100, 2.0), AlphaGridError);
    REQUIRE_THROWS_AS(quantile_index(0, 0.05), AlphaGridError);
}

TEST_CASE("mc_quantile equals the k-th order statistic under heavy ties", "[hdtest]") {
    RngStream s(2026, 0);
    const double alphas[] = {0.01, 0.05, 0.1, 0.25, 0.5, 0.9};
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t B = 1 + s.next_below(50);
        std::vector<double> raw(B);
        // Small integer support forces many exact ties.
        for (double& v : raw) v = static_cast<double>(s.next_below(6));
        ProxyDraws draws;
        draws.values = raw;
        std::sort(draws.values.begin(), draws.values.end());
        for (double a : alphas) {
            std::size_t k = 0;
            try {
                k = quantile_index(B, a);
            } catch (const AlphaGridError&) {
                REQUIRE_THROWS_AS(mc_quantile(draws, a), AlphaGridError);
                continue;
            }
            std::vector<double> copy = raw;
            std::nth_element(copy.begin(), copy.begin() + (k - 1), copy.end());
            REQUIRE(mc_quantile(draws, a) == copy[k - 1]);
        }
    }
}

TEST_CASE("run_test hand case: rejection at the boundary, p-value counting", "[hdtest]") {
    ProxyDraws draws;
    draws.values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    draws.method = ProxyMethod::spherical;

    // alpha = 0.3: k = 7, critical value 7. Rejection is >=, and the
    // p-value counts draws >= the statistic.
    TestResult r = run_test(7.0, draws, 0.3);
    REQUIRE(r.critical_value == 7.0);
    REQUIRE(r.reject);
    REQUIRE(r.p_value == Approx(0.4));
    REQUIRE(r.B == 10);
    REQUIRE(r.method == ProxyMethod::spherical);
    REQUIRE(r.alpha == 0.3);
    REQUIRE(r.statistic == 7.0);

    r = run_test(6.5, draws, 0.3);
    REQUIRE_FALSE(r.reject);
    REQUIRE(r.p_value == Approx(0.4));  // draws 7..10 are >= 6.5

    r = run_test(10.0, draws, 0.3);
    REQUIRE(r.reject);
    REQUIRE(r.p_value == Approx(0.1));

    r = run_test(11.0, draws, 0.3);
    REQUIRE(r.reject);
    REQUIRE(r.p_value == 0.0);

    r = run_test(0.5, draws, 0.3);
    REQUIRE_FALSE(r.reject);
    REQUIRE(r.p_value == 1.0);
}

TEST_CASE("run_test: rejection and p-value agree on tie-free draws", "[hdtest]") {
    RngStream s(7, 1);
    ProxyDraws draws;
    draws.values.resize(201);
    for (double& v : draws.values) v = s.next_unit();  // a.s. tie-free
    std::sort(draws.values.begin(), draws.values.end());
    const std::size_t B = draws.B();
    for (double a : {0.05, 0.1, 0.5}) {
        const std::size_t k = quantile_index(B, a);
        for (int i = 0; i < 50; ++i) {
            const double stat = s.next_unit();
            const TestResult r = run_test(stat, draws, a);
            // With distinct draws, stat >= v_(k) iff at most B - k + 1
            // draws lie at or above stat.
            const bool via_p =
                r.p_value * static_cast<double>(B) <= static_cast<double>(B - k + 1) + 1e-9;
            REQUIRE(r.reject == via_p);
        }
    }
}

TEST_CASE("t_stat hand values and restriction handling", "[hdtest]") {
    Matrix x(2, 2);
    x(0, 0) = 1.0;
    x(0, 1) = 2.0;
    x(1, 0) = 3.0;
    x(1, 1) = 4.0;  // mean (2, 3)
    const double rt2 = std::sqrt(2.0);
    REQUIRE(t_stat(x, Hypothesis::identity_zero(2), LpExponent::finite(1.0)) == Approx(rt2 * 5.0));
    REQUIRE(t_stat(x, Hypothesis::identity_zero(2), LpExponent::infinity()) == Approx(rt2 * 3.0));

    // r at the truth kills the statistic.
    const Hypothesis truth{std::nullopt, Vector{2.0, 3.0}};
    REQUIRE(t_stat(x, truth, LpExponent::finite(2.0)) == Approx(0.0).margin(1e-14));

    // Contrast R = (1, -1), r = 0: sqrt(2) |2 - 3|.
    Matrix r1(1, 2);
    r1(0, 0) = 1.0;
    r1(0, 1) = -1.0;
    const Hypothesis hc{r1, Vector{0.0}};
    REQUIRE(t_stat(x, hc, LpExponent::finite(2.0)) == Approx(rt2));

    REQUIRE_THROWS_AS(t_stat(Matrix(0, 2, 0.0), Hypothesis::identity_zero(2),
                             LpExponent::finite(2.0)),
                      SampleSizeError);
}

TEST_CASE("w_stat is the sum of the 2-norm and log-dim statistics", "[hdtest]") {
    Matrix x(2, 2);
    x(0, 0) = 1.0;
    x(0, 1) = 2.0;
    x(1, 0) = 3.0;
    x(1, 1) = 4.0;
    const Hypothesis h = Hypothesis::identity_zero(2);
    const double expected = t_stat(x, h, LpExponent::finite(2.0)) +
                            t_stat(x, h, LpExponent::log_dim());
    REQUIRE(w_stat(x, h) == Approx(expected).epsilon(1e-15));

    REQUIRE_THROWS_AS(w_stat(Matrix(2, 1, 1.0), Hypothesis::identity_zero(1)), ShapeError);
}

TEST_CASE("v_stat normalizes rows before averaging", "[hdtest]") {
    // Rows (3,4) and (6,8) normalize to the same direction (0.6, 0.8),
    // so V = sqrt(2) * 1.
    Matrix x(2, 2);
    x(0, 0) = 3.0;
    x(0, 1) = 4.0;
    x(1, 0) = 6.0;
    x(1, 1) = 8.0;
    const Hypothesis h = Hypothesis::identity_zero(2);
    REQUIRE(v_stat(x, h) == Approx(std::sqrt(2.0)));

    // A row equal to r contributes zero direction: mean direction is
    // (0.3, 0.4), V = sqrt(2) * 0.5.
    Matrix y(2, 2, 0.0);
    y(1, 0) = 3.0;
    y(1, 1) = 4.0;
    REQUIRE(v_stat(y, h) == Approx(std::sqrt(2.0) * 0.5));

    REQUIRE_THROWS_AS(v_stat(Matrix(0, 2, 0.0), h), SampleSizeError);
}

TEST_CASE("top_abs_indices: magnitude order with index tie-break", "[hdtest]") {
    REQUIRE(detail::top_abs_indices({1.0, 3.0, 3.0, 2.0}, 2) ==
            std::vector<std::size_t>{1, 2});
    REQUIRE(detail::top_abs_indices({2.0, -2.0, 1.0}, 2) == std::vector<std::size_t>{0, 1});
    REQUIRE(detail::top_abs_indices({-5.0, 1.0}, 1) == std::vector<std::size_t>{0});
    REQUIRE_THROWS_AS(detail::top_abs_indices({1.0, 2.0}, 0), DomainError);
    REQUIRE_THROWS_AS(detail::top_abs_indices({1.0, 2.0}, 3), DomainError);
}

TEST_CASE("post_selection_stat endpoints and monotonicity", "[hdtest]") {
    const Matrix x = gaussian_data(10, 6, 301, 0);
    const LpExponent p2 = LpExponent::finite(2.0);

    // Bsel = d keeps everything.
    REQUIRE(post_selection_stat(x, p2, 6) ==
            Approx(t_stat(x, Hypothesis::identity_zero(6), p2)));

    // Bsel = 1 is the largest |S| entry, any p.
    const double m1 = post_selection_stat(x, LpExponent::finite(1.0), 1);
    REQUIRE(m1 == Approx(t_stat(x, Hypothesis::identity_zero(6), LpExponent::infinity())));

    // Growing the selection can only grow the norm.
    double prev = 0.0;
    for (std::size_t b = 1; b <= 6; ++b) {
        const double cur = post_selection_stat(x, p2, b);
        REQUIRE(cur >= prev - 1e-12);
        prev = cur;
    }

    REQUIRE_THROWS_AS(post_selection_stat(x, p2, 0), DomainError);
    REQUIRE_THROWS_AS(post_selection_stat(x, p2, 7), DomainError);
}

TEST_CASE("linearized_stat is the plain norm of the supplied vector", "[hdtest]") {
    REQUIRE(linearized_stat({3.0, -4.0}, LpExponent::finite(2.0)) == Approx(5.0));
    REQUIRE(linearized_stat({3.0, -4.0}, LpExponent::infinity()) == 4.0);
}

TEST_CASE("gaussian_proxy: determinism, sortedness, metadata", "[hdtest]") {
    const CovModel cov = identity_cov(5);
    const ProxyDraws a = gaussian_proxy(cov, LpExponent::finite(2.0), 200, RngStream(9, 2));
    const ProxyDraws b = gaussian_proxy(cov, LpExponent::finite(2.0), 200, RngStream(9, 2));
    REQUIRE(a.values == b.values);
    REQUIRE(a.B() == 200);
    REQUIRE(std::is_sorted(a.values.begin(), a.values.end()));
    REQUIRE(a.method == ProxyMethod::gaussian);
    REQUIRE(a.seed == 9);
    REQUIRE(a.stream_id == 2);
    REQUIRE_THROWS_AS(gaussian_proxy(cov, LpExponent::finite(2.0), 0, RngStream(9, 2)),
                      DomainError);
}

TEST_CASE("gaussian_proxy matches the chi mean for an identity factor", "[hdtest]") {
    const CovModel cov = identity_cov(10);
    const ProxyDraws d = gaussian_proxy(cov, LpExponent::finite(2.0), 20000, RngStream(11, 0));
    double mean = 0.0;
    for (double v : d.values) mean += v;
    mean /= 20000.0;
    // E chi_10 = sqrt(2) Gamma(5.5) / Gamma(5).
    const double expect = std::sqrt(2.0) * std::exp(std::lgamma(5.5) - std::lgamma(5.0));
    REQUIRE(mean == Approx(expect).margin(0.02));
}

TEST_CASE("gaussian_proxy scales exactly with the factor", "[hdtest]") {
    // Doubling the factor doubles each draw bitwise: the dot product
    // scales by the power of two 2.0 with no rounding.
    CovModel cov = identity_cov(4);
    CovModel cov2 = identity_cov(4);
    for (std::size_t i = 0; i < 4; ++i) cov2.factor(i, i) = 2.0;
    const ProxyDraws a = gaussian_proxy(cov, LpExponent::finite(2.0), 64, RngStream(3, 3));
    const ProxyDraws b = gaussian_proxy(cov2, LpExponent::finite(2.0), 64, RngStream(3, 3));
    for (std::size_t i = 0; i < 64; ++i) REQUIRE(b.values[i] == 2.0 * a.values[i]);
}

TEST_CASE("w_sum proxy decomposes into its two norms on a shared draw", "[hdtest]") {
    const Matrix x = gaussian_data(8, 5, 302, 0);
    const CovModel cov = sample_cov_transformed(x, Hypothesis::identity_zero(5));
    const RngStream base(17, 4);
    const ProxyDraws w = gaussian_proxy(cov, StatFunc::w_sum(), 1, base);
    const ProxyDraws l2 = gaussian_proxy(cov, LpExponent::finite(2.0), 1, base);
    const ProxyDraws llog = gaussian_proxy(cov, LpExponent::log_dim(), 1, base);
    // Substream 0 produces the same normal vector in all three calls.
    REQUIRE(w.values[0] == l2.values[0] + llog.values[0]);
}

TEST_CASE("spherical_proxy: identity factor with s = t gives sqrt(s) exactly", "[hdtest]") {
    const CovModel cov = identity_cov(6);
    const ProxyDraws d =
        spherical_proxy(cov, LpExponent::finite(2.0), 50, RngStream(19, 0));
    for (double v : d.values) REQUIRE(v == Approx(std::sqrt(6.0)).epsilon(1e-12));
    REQUIRE(d.method == ProxyMethod::spherical);
    REQUIRE(d.sphere_s == 6);
}

TEST_CASE("spherical_proxy s_override truncates or pads the factor", "[hdtest]") {
    const Matrix sigma = testutil::make_equicorr(4, 0.8);
    CovModel cov;
    cov.factor = psd_factor(sigma);
    REQUIRE(cov.s() == 4);

    // Truncation: override s' < s equals a proxy on the first s'
    // factor columns with no override, same stream.
    CovModel trunc;
    trunc.factor = Matrix(4, 3);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) trunc.factor(i, j) = cov.factor(i, j);
    const ProxyDraws via_override =
        spherical_proxy(cov, LpExponent::finite(2.0), 100, RngStream(23, 0), 3);
    const ProxyDraws via_trunc =
        spherical_proxy(trunc, LpExponent::finite(2.0), 100, RngStream(23, 0));
    REQUIRE(via_override.values == via_trunc.values);
    REQUIRE(via_override.sphere_s == 3);

    // Padding: s' > s draws the sphere in s' dimensions; the second
    // moment sqrt(s')^2 E||Gamma u_{1:s}||^2 = tr(Gamma' Gamma) is
    // preserved. For the identity factor in t=2, that is 2.
    const CovModel small = identity_cov(2);
    const ProxyDraws pad =
        spherical_proxy(small, LpExponent::finite(2.0), 20000, RngStream(29, 0), 5);
    double sq = 0.0;
    for (double v : pad.values) sq += v * v;
    REQUIRE(sq / 20000.0 == Approx(2.0).margin(0.1));
    REQUIRE(pad.sphere_s == 5);

    REQUIRE_THROWS_AS(
        spherical_proxy(cov, LpExponent::finite(2.0), 10, RngStream(1, 0), 1),
        DimensionError);
    CovModel rank1;
    rank1.factor = Matrix(3, 1, 1.0);
    REQUIRE_THROWS_AS(spherical_proxy(rank1, LpExponent::finite(2.0), 10, RngStream(1, 0)),
                      DimensionError);
}

TEST_CASE("spherical_proxy is deterministic in the base stream", "[hdtest]") {
    const CovModel cov = identity_cov(3);
    const ProxyDraws a = spherical_proxy(cov, LpExponent::infinity(), 150, RngStream(31, 6));
    const ProxyDraws b = spherical_proxy(cov, LpExponent::infinity(), 150, RngStream(31, 6));
    REQUIRE(a.values == b.values);
    REQUIRE(std::is_sorted(a.values.begin(), a.values.end()));
}

TEST_CASE("multiplier_proxy second moment matches the naive covariance trace", "[hdtest]") {
    const Matrix x = gaussian_data(12, 4, 303, 0);
    const Hypothesis h = Hypothesis::identity_zero(4);
    const ProxyDraws d =
        multiplier_proxy(x, h, LpExponent::finite(2.0), 20000, RngStream(37, 0));
    double sq = 0.0;
    for (double v : d.values) sq += v * v;
    // E||sum_i xi_i c_i||^2 = sum_i ||c_i||^2 = tr(Omega_hat).
    const double tr = trace(sample_cov_transformed(x, h).omega_hat());
    REQUIRE(sq / 20000.0 == Approx(tr).epsilon(0.05));
    REQUIRE(d.method == ProxyMethod::multiplier);

    const ProxyDraws e =
        multiplier_proxy(x, h, LpExponent::finite(2.0), 100, RngStream(37, 0));
    const ProxyDraws f =
        multiplier_proxy(x, h, LpExponent::finite(2.0), 100, RngStream(37, 0));
    REQUIRE(e.values == f.values);

    REQUIRE_THROWS_AS(
        multiplier_proxy(Matrix(1, 4, 0.0), h, LpExponent::finite(2.0), 10, RngStream(1, 0)),
        SampleSizeError);
}

TEST_CASE("multiplier_proxy_rows resamples uncentered rows", "[hdtest]") {
    // Rows of unit norm: E[draw^2] = (1/n) sum ||row_i||^2 = 1.
    Matrix rows(6, 3, 0.0);
    for (std::size_t i = 0; i < 6; ++i) rows(i, i % 3) = 1.0;
    const ProxyDraws d =
        multiplier_proxy_rows(rows, StatFunc::lp(LpExponent::finite(2.0)), 20000,
                              RngStream(41, 0));
    double sq = 0.0;
    for (double v : d.values) sq += v * v;
    REQUIRE(sq / 20000.0 == Approx(1.0).epsilon(0.05));
    REQUIRE_THROWS_AS(multiplier_proxy_rows(Matrix(0, 3, 0.0),
                                            StatFunc::lp(LpExponent::finite(2.0)), 10,
                                            RngStream(1, 0)),
                      SampleSizeError);
}

TEST_CASE("conf_ellipsoid_contains is the t_stat level set", "[hdtest]") {
    Matrix x(1, 2);
    x(0, 0) = 1.0;
    x(0, 1) = 1.0;
    const Hypothesis h = Hypothesis::identity_zero(2);
    const LpExponent p2 = LpExponent::finite(2.0);
    // mu at the sample mean is inside any ellipsoid.
    REQUIRE(conf_ellipsoid_contains({1.0, 1.0}, x, h, p2, 0.0));
    // mu = 0: distance sqrt(2), so c = 1.5 contains and c = 1.4 does not.
    REQUIRE(conf_ellipsoid_contains({0.0, 0.0}, x, h, p2, 1.5));
    REQUIRE_FALSE(conf_ellipsoid_contains({0.0, 0.0}, x, h, p2, 1.4));
    REQUIRE_THROWS_AS(conf_ellipsoid_contains({0.0}, x, h, p2, 1.0), ShapeError);
}

TEST_CASE("simultaneous_ci hand cases via conjugate norms", "[hdtest]") {
    Matrix x(2, 2);
    x(0, 0) = 1.0;
    x(0, 1) = 2.0;
    x(1, 0) = 3.0;
    x(1, 1) = 4.0;  // mean (2, 3)
    const Hypothesis h = Hypothesis::identity_zero(2);
    const double rt2 = std::sqrt(2.0);

    // Coordinate functional: ||e_0||_q = 1 for every q.
    Interval iv = simultaneous_ci({1.0, 0.0}, x, h, LpExponent::finite(2.0), 1.0);
    REQUIRE(iv.lo == Approx(2.0 - 1.0 / rt2));
    REQUIRE(iv.hi == Approx(2.0 + 1.0 / rt2));

    // Sum functional under p = 2: ||(1,1)||_2 = sqrt(2) cancels 1/sqrt(n).
    iv = simultaneous_ci({1.0, 1.0}, x, h, LpExponent::finite(2.0), 1.0);
    REQUIRE(iv.lo == Approx(4.0));
    REQUIRE(iv.hi == Approx(6.0));

    // p = 1 pairs with the sup norm: ||(1,1)||_inf = 1.
    iv = simultaneous_ci({1.0, 1.0}, x, h, LpExponent::finite(1.0), 1.0);
    REQUIRE(iv.lo == Approx(5.0 - 1.0 / rt2));
    REQUIRE(iv.hi == Approx(5.0 + 1.0 / rt2));

    REQUIRE_THROWS_AS(simultaneous_ci({1.0}, x, h, LpExponent::finite(2.0), 1.0), ShapeError);
}

TEST_CASE("norm_ci brackets the sample norm and clips at zero", "[hdtest]") {
    const Matrix x = gaussian_data(20, 4, 304, 0);
    const CovModel cov = sample_cov_transformed(x, Hypothesis::identity_zero(4));
    const Interval iv =
        norm_ci(x, LpExponent::finite(2.0), cov, 0.1, 200, RngStream(43, 0));
    Vector mean(4, 0.0);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 4; ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= 20.0;
    const double mhat = lp_norm(mean, 2.0);
    REQUIRE(iv.lo >= 0.0);
    REQUIRE(iv.lo <= mhat);
    REQUIRE(iv.hi >= mhat);
}
