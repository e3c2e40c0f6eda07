#pragma once

// Text codecs for experiment configs and results. The canonical config
// JSON echoed in every output header uses shortest round-trip number
// formatting, so parsing it back reproduces the config bit for bit.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "hdlpboot/errors.hpp"
#include "hdlpboot/lp_norm.hpp"
#include "hdlpboot/simharness.hpp"
#include "hdlpboot/version.hpp"

namespace hdlpboot {

namespace detail {

// Shortest decimal string that parses back to exactly v.
inline std::string double_repr(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Fixed 17 significant digits for tabular output.
inline std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline double parse_double(const std::string& tok) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw ConfigError("config: trailing junk in number '" + tok + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("config: expected a number, got '" + tok + "'");
    }
}

inline std::uint64_t parse_uint(const std::string& tok) {
    if (tok.empty() || tok[0] == '-' || tok[0] == '+')
        throw ConfigError("config: expected a nonnegative integer, got '" + tok + "'");
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(tok, &pos);
        if (pos != tok.size()) throw ConfigError("config: trailing junk in integer '" + tok + "'");
        return static_cast<std::uint64_t>(v);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("config: expected a nonnegative integer, got '" + tok + "'");
    }
}

inline std::string cov_kind_name(CovKind kind) {
    switch (kind) {
        case CovKind::identity: return "identity";
        case CovKind::equicorrelated: return "equicorr";
        case CovKind::toeplitz: return "toeplitz";
        case CovKind::banded: return "banded";
    }
    throw DomainError("cov_kind_name: unknown kind");
}

inline CovKind parse_cov_kind(const std::string& s) {
    if (s == "identity") return CovKind::identity;
    if (s == "equicorr") return CovKind::equicorrelated;
    if (s == "toeplitz") return CovKind::toeplitz;
    if (s == "banded") return CovKind::banded;
    throw ConfigError("config: unknown covariance kind '" + s + "'");
}

inline std::string norm_suffix(LpExponent p) {
    switch (p.kind()) {
        case LpExponent::Kind::infinity: return "inf";
        case LpExponent::Kind::log_dim: return "logt";
        case LpExponent::Kind::finite: return double_repr(p.value());
    }
    throw DomainError("norm_suffix: unknown exponent kind");
}

inline LpExponent parse_norm_suffix(const std::string& s) {
    if (s == "inf") return LpExponent::infinity();
    if (s == "logt") return LpExponent::log_dim();
    try {
        return LpExponent::finite(parse_double(s));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

}  // namespace detail

inline std::string dgp_string(const DgpSpec& dgp) {
    const std::string cov = detail::cov_kind_name(dgp.cov);
    switch (dgp.family) {
        case DgpFamily::copula: return cov;
        case DgpFamily::student_t4:
            return dgp.cov == CovKind::toeplitz ? "t4toeplitz" : "t4:" + cov;
        case DgpFamily::gaussian: return "gauss:" + cov;
    }
    throw DomainError("dgp_string: unknown family");
}

inline DgpSpec parse_dgp(const std::string& s) {
    DgpSpec out;
    if (s == "t4toeplitz") {
        out.family = DgpFamily::student_t4;
        out.cov = CovKind::toeplitz;
        return out;
    }
    if (s == "gauss") {
        out.family = DgpFamily::gaussian;
        out.cov = CovKind::identity;
        return out;
    }
    if (s.rfind("gauss:", 0) == 0) {
        out.family = DgpFamily::gaussian;
        out.cov = detail::parse_cov_kind(s.substr(6));
        return out;
    }
    if (s.rfind("t4:", 0) == 0) {
        out.family = DgpFamily::student_t4;
        out.cov = detail::parse_cov_kind(s.substr(3));
        return out;
    }
    out.family = DgpFamily::copula;
    out.cov = detail::parse_cov_kind(s);
    return out;
}

inline std::string stat_string(const StatSpec& stat) {
    switch (stat.kind) {
        case StatKind::w: return "w";
        case StatKind::v: return "v";
        case StatKind::lp: {
            const std::string sfx = detail::norm_suffix(stat.p);
            return sfx == "logt" ? sfx : "l" + sfx;
        }
        case StatKind::studentized: {
            const std::string sfx = detail::norm_suffix(stat.p);
            return "student-" + (sfx == "logt" ? sfx : "l" + sfx);
        }
        case StatKind::post_sel:
            return "postsel:" + detail::norm_suffix(stat.p) + ":" + std::to_string(stat.bsel);
    }
    throw DomainError("stat_string: unknown statistic kind");
}

inline StatSpec parse_stat(const std::string& s) {
    StatSpec out;
    if (s == "w") {
        out.kind = StatKind::w;
        return out;
    }
    if (s == "v") {
        out.kind = StatKind::v;
        return out;
    }
    if (s.rfind("postsel:", 0) == 0) {
        const auto parts = detail::split(s.substr(8), ':');
        if (parts.size() != 2)
            throw ConfigError("config: postsel statistic needs the form postsel:<p>:<Bsel>");
        out.kind = StatKind::post_sel;
        out.p = detail::parse_norm_suffix(parts[0]);
        out.bsel = static_cast<std::size_t>(detail::parse_uint(parts[1]));
        return out;
    }
    std::string body = s;
    out.kind = StatKind::lp;
    if (s.rfind("student-", 0) == 0) {
        out.kind = StatKind::studentized;
        body = s.substr(8);
    }
    if (body == "logt") {
        out.p = LpExponent::log_dim();
        return out;
    }
    if (body.rfind("l", 0) == 0 && body.size() > 1) {
        out.p = detail::parse_norm_suffix(body.substr(1));
        return out;
    }
    throw ConfigError("config: unknown statistic '" + s + "'");
}

inline std::string method_string(const MethodSpec& m) {
    switch (m.method) {
        case ProxyMethod::gaussian: return "gaussian";
        case ProxyMethod::multiplier: return "multiplier";
        case ProxyMethod::spherical:
            return m.sphere_s ? "spherical:" + std::to_string(*m.sphere_s) : "spherical";
    }
    throw DomainError("method_string: unknown method");
}

inline MethodSpec parse_method(const std::string& s) {
    MethodSpec out;
    if (s == "gaussian") {
        out.method = ProxyMethod::gaussian;
        return out;
    }
    if (s == "multiplier") {
        out.method = ProxyMethod::multiplier;
        return out;
    }
    if (s == "spherical") {
        out.method = ProxyMethod::spherical;
        return out;
    }
    if (s.rfind("spherical:", 0) == 0) {
        out.method = ProxyMethod::spherical;
        out.sphere_s = static_cast<std::size_t>(detail::parse_uint(s.substr(10)));
        return out;
    }
    throw ConfigError("config: unknown proxy method '" + s + "'");
}

inline std::string cov_string(const CovSpec& cov) {
    switch (cov.kind) {
        case CovEstimator::naive: return "naive";
        case CovEstimator::thresholded:
            return cov.lambda ? "threshold:" + detail::double_repr(*cov.lambda) : "threshold";
        case CovEstimator::banded:
            return cov.band_k ? "band:" + std::to_string(*cov.band_k) : "band";
    }
    throw DomainError("cov_string: unknown estimator");
}

inline CovSpec parse_cov(const std::string& s) {
    CovSpec out;
    if (s == "naive") return out;
    if (s == "threshold") {
        out.kind = CovEstimator::thresholded;
        return out;
    }
    if (s.rfind("threshold:", 0) == 0) {
        out.kind = CovEstimator::thresholded;
        out.lambda = detail::parse_double(s.substr(10));
        return out;
    }
    if (s == "band") {
        out.kind = CovEstimator::banded;
        return out;
    }
    if (s.rfind("band:", 0) == 0) {
        out.kind = CovEstimator::banded;
        out.band_k = static_cast<std::size_t>(detail::parse_uint(s.substr(5)));
        return out;
    }
    throw ConfigError("config: unknown covariance estimator '" + s + "'");
}

// "<s>:<delta>[:<support-seed>]"
inline AltConfig parse_alt(const std::string& s) {
    const auto parts = detail::split(s, ':');
    if (parts.size() != 2 && parts.size() != 3)
        throw ConfigError("config: alternative needs the form <s>:<delta>[:<support-seed>]");
    AltConfig out;
    out.s = static_cast<std::size_t>(detail::parse_uint(parts[0]));
    out.delta = detail::parse_double(parts[1]);
    if (parts.size() == 3) out.support_seed = detail::parse_uint(parts[2]);
    return out;
}

// Comma-separated probabilities, or "grid99" for 0.01, ..., 0.99.
inline std::vector<double> parse_alpha(const std::string& s) {
    if (s == "grid99") {
        std::vector<double> grid(99);
        for (std::size_t i = 0; i < 99; ++i) grid[i] = static_cast<double>(i + 1) / 100.0;
        return grid;
    }
    std::vector<double> out;
    for (const std::string& tok : detail::split(s, ','))
        out.push_back(detail::parse_double(tok));
    return out;
}

// Canonical config serialization: fixed key order, shortest round-trip
// numbers, no whitespace. Every output header embeds this string.
inline std::string canonical_config_json(const SimConfig& cfg) {
    std::string out = "{";
    out += "\"dgp\":\"" + dgp_string(cfg.dgp) + "\"";
    out += ",\"d\":" + std::to_string(cfg.d);
    out += ",\"n\":" + std::to_string(cfg.n);
    out += ",\"B\":" + std::to_string(cfg.B);
    out += ",\"reps\":" + std::to_string(cfg.reps);
    out += ",\"stat\":\"" + stat_string(cfg.stat) + "\"";
    out += ",\"method\":\"" + method_string(cfg.method) + "\"";
    out += ",\"cov\":\"" + cov_string(cfg.cov) + "\"";
    out += ",\"alpha\":[";
    for (std::size_t i = 0; i < cfg.alpha.size(); ++i) {
        if (i) out += ",";
        out += detail::double_repr(cfg.alpha[i]);
    }
    out += "]";
    if (cfg.alt) {
        out += ",\"alt\":{\"s\":" + std::to_string(cfg.alt->s);
        out += ",\"delta\":" + detail::double_repr(cfg.alt->delta);
        out += ",\"support_seed\":";
        out += cfg.alt->support_seed ? std::to_string(*cfg.alt->support_seed) : "null";
        out += "}";
    } else {
        out += ",\"alt\":null";
    }
    out += ",\"seed\":" + std::to_string(cfg.seed);
    out += ",\"workers\":" + std::to_string(cfg.workers);
    out += "}";
    return out;
}

// CSV: one comment header carrying the tool version and the exact
// config, a column line, then one row per nominal level.
inline std::string to_csv(const SizeCurve& curve) {
    std::string out = "# hdlpboot v";
    out += kVersion;
    out += " config=" + canonical_config_json(curve.config) + "\n";
    out += "alpha_nominal,alpha_actual,mc_se,reps,reject_count\n";
    for (const SizeRow& row : curve.rows) {
        out += detail::csv_double(row.alpha_nominal) + ",";
        out += detail::csv_double(row.alpha_actual) + ",";
        out += detail::csv_double(row.mc_se) + ",";
        out += std::to_string(row.reps) + ",";
        out += std::to_string(row.reject_count) + "\n";
    }
    return out;
}

// JSON mirror of the CSV with the config embedded as an object.
inline std::string to_json(const SizeCurve& curve) {
    std::string out = "{\"version\":\"";
    out += kVersion;
    out += "\",\"config\":" + canonical_config_json(curve.config);
    out += ",\"rows\":[";
    for (std::size_t i = 0; i < curve.rows.size(); ++i) {
        const SizeRow& row = curve.rows[i];
        if (i) out += ",";
        out += "{\"alpha_nominal\":" + detail::double_repr(row.alpha_nominal);
        out += ",\"alpha_actual\":" + detail::double_repr(row.alpha_actual);
        out += ",\"mc_se\":" + detail::double_repr(row.mc_se);
        out += ",\"reps\":" + std::to_string(row.reps);
        out += ",\"reject_count\":" + std::to_string(row.reject_count);
        out += "}";
    }
    out += "]";
    if (!curve.p_values.empty()) {
        out += ",\"p_values\":[";
        for (std::size_t i = 0; i < curve.p_values.size(); ++i) {
            if (i) out += ",";
            out += detail::double_repr(curve.p_values[i]);
        }
        out += "]";
    }
    out += ",\"wall_seconds\":" + detail::double_repr(curve.wall_seconds);
    out += "}";
    return out;
}

}  // namespace hdlpboot
