#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "hdlpboot/errors.hpp"
#include "hdlpboot/matrix.hpp"

namespace hdlpboot {

// Norm exponent. Finite requires p >= 1. LogDim resolves to
// max(ln t, 1) at the evaluation site, where t is the vector length.
class LpExponent {
  public:
    enum class Kind { finite, infinity, log_dim };

    static LpExponent finite(double p) {
        if (!(p >= 1.0) || !std::isfinite(p))
            throw DomainError("LpExponent: finite exponent requires p >= 1");
        return LpExponent(Kind::finite, p);
    }
    static LpExponent infinity() { return LpExponent(Kind::infinity, 0.0); }
    static LpExponent log_dim() { return LpExponent(Kind::log_dim, 0.0); }

    Kind kind() const { return kind_; }
    bool is_infinity() const { return kind_ == Kind::infinity; }

    // Raw exponent; only the finite kind carries one.
    double value() const {
        if (kind_ != Kind::finite) throw DomainError("LpExponent: value() requires a finite kind");
        return p_;
    }

    // Concrete exponent for a vector of length t.
    double resolve(std::size_t t) const {
        switch (kind_) {
            case Kind::finite:
                return p_;
            case Kind::infinity:
                return std::numeric_limits<double>::infinity();
            case Kind::log_dim:
                if (t == 0) throw DimensionError("LpExponent: empty vector");
                return std::max(std::log(static_cast<double>(t)), 1.0);
        }
        return p_;
    }

    bool operator==(const LpExponent& o) const {
        return kind_ == o.kind_ && (kind_ != Kind::finite || p_ == o.p_);
    }

  private:
    LpExponent(Kind k, double p) : kind_(k), p_(p) {}
    Kind kind_;
    double p_;
};

// lp norm of v. Overflow-safe: entries are rescaled by the max
// magnitude before powers are taken, so large p never overflows.
inline double lp_norm(const double* v, std::size_t len, LpExponent p) {
    if (len == 0) throw DimensionError("lp_norm: empty vector");
    double m = 0.0;
    // NaN loses every max() comparison, so finiteness is checked per
    // entry instead of once on the final maximum.
    for (std::size_t i = 0; i < len; ++i) {
        const double a = std::fabs(v[i]);
        if (!std::isfinite(a)) throw NumericalError("lp_norm: non-finite entry");
        m = std::max(m, a);
    }
    if (p.is_infinity() || m == 0.0) return m;

    const double pe = p.resolve(len);
    double s = 0.0;
    if (pe == 1.0) {
        for (std::size_t i = 0; i < len; ++i) s += std::fabs(v[i]) / m;
        return m * s;
    }
    if (pe == 2.0) {
        for (std::size_t i = 0; i < len; ++i) {
            const double r = v[i] / m;
            s += r * r;
        }
        return m * std::sqrt(s);
    }
    for (std::size_t i = 0; i < len; ++i) {
        const double r = std::fabs(v[i]) / m;
        if (r > 0.0) s += std::pow(r, pe);
    }
    return m * std::pow(s, 1.0 / pe);
}

inline double lp_norm(const Vector& v, LpExponent p) { return lp_norm(v.data(), v.size(), p); }

inline double lp_norm(const Vector& v, double p) { return lp_norm(v, LpExponent::finite(p)); }

// Conjugate exponent q with 1/p + 1/q = 1. LogDim is resolved at t first.
inline LpExponent conjugate_exponent(LpExponent p, std::size_t t) {
    if (p.is_infinity()) return LpExponent::finite(1.0);
    const double pe = p.resolve(t);
    if (pe == 1.0) return LpExponent::infinity();
    return LpExponent::finite(pe / (pe - 1.0));
}

}  // namespace hdlpboot
