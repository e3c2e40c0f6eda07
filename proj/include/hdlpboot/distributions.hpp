#pragma once

#include <cmath>
#include <cstddef>

#include "hdlpboot/errors.hpp"
#include "hdlpboot/lp_norm.hpp"
#include "hdlpboot/matrix.hpp"
#include "hdlpboot/rng.hpp"

namespace hdlpboot {

// Standard normal cdf. std::erfc is correctly rounded on this
// platform, so the absolute error is far below 1e-12 everywhere.
inline double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865475244008443621048490);
}

// Quantile of Gamma(shape=1, rate=1), i.e. the unit exponential:
// F^{-1}(u) = -log(1-u), computed stably near u -> 1.
inline double gamma11_quantile(double u) {
    if (!(u >= 0.0) || u >= 1.0) throw DomainError("gamma11_quantile: u must lie in [0,1)");
    return -std::log1p(-u);
}

// Gamma * G with G standard normal; draw covariance is Gamma Gamma'.
inline Vector mvn_from_factor(const Matrix& factor, RngStream& stream) {
    const Vector g = std_normal_vec(stream, factor.cols());
    Vector y(factor.rows());
    for (std::size_t i = 0; i < factor.rows(); ++i)
        y[i] = dot(factor.row(i), g.data(), factor.cols());
    return y;
}

// Uniform draw on the unit sphere in R^s.
inline Vector sphere_sample(std::size_t s, RngStream& stream) {
    if (s < 2) throw DimensionError("sphere_sample: s must be at least 2");
    for (;;) {
        Vector g = std_normal_vec(stream, s);
        const double norm = lp_norm(g, LpExponent::finite(2.0));
        if (norm > 0.0) {
            for (double& x : g) x /= norm;
            return g;
        }
    }
}

// Entrywise Gamma(1,1) copula push-forward X_j = F^{-1}(Phi(y_j)) - 1,
// giving centered unit-variance marginals with skewness 2 and excess
// kurtosis 6. Phi is taken from the accurate tail of erfc on each
// side so neither tail of the quantile loses precision. erfc itself
// underflows to zero near 37.5 sigma, so the far right tail switches
// to the Mills-ratio series for -log(1 - Phi(v)); at the seam (v = 36)
// the truncation error is at the ulp level of the result.
inline void copula_transform(Vector& y) {
    for (double& v : y) {
        if (v >= 36.0) {
            const double r2 = 1.0 / (v * v);
            const double series = 1.0 - r2 * (1.0 - r2 * (3.0 - r2 * (15.0 - 105.0 * r2)));
            v = 0.5 * v * v + std::log(v) +
                0.5 * std::log(2.0 * 3.14159265358979323846) - std::log(series) - 1.0;
        } else if (v >= 0.0) {
            const double tail = 0.5 * std::erfc(v * 0.7071067811865475244008443621048490);
            v = -std::log(tail) - 1.0;
        } else {
            const double q = 0.5 * std::erfc(-v * 0.7071067811865475244008443621048490);
            v = -std::log1p(-q) - 1.0;
        }
    }
}

// One row of the Gamma(1,1) copula model: Y ~ N(0, Sigma) through the
// marginal transform above.
inline Vector copula_row(const Matrix& sigma_factor, RngStream& stream) {
    Vector y = mvn_from_factor(sigma_factor, stream);
    copula_transform(y);
    return y;
}

// sqrt((nu-2)/W) with W ~ chi^2_4, so E[scale^2] = 1 and a scaled
// Gaussian keeps its covariance. Consumes exactly two words.
inline double chi2_4_scale(RngStream& stream) {
    double w = -2.0 * (std::log(stream.next_unit()) + std::log(stream.next_unit()));
    w = std::max(w, 1e-300);
    return std::sqrt(2.0 / w);
}

// One multivariate t(4) row with covariance sigma_factor sigma_factor'.
// Consumes the normal words first, then the two scale words.
inline Vector mvt4_row(const Matrix& sigma_factor, RngStream& stream) {
    Vector y = mvn_from_factor(sigma_factor, stream);
    const double scale = chi2_4_scale(stream);
    for (double& v : y) v *= scale;
    return y;
}

}  // namespace hdlpboot
