#pragma once

// JSON config file support. Kept apart from io.hpp so the core headers
// stay free of the vendored nlohmann single header; include this one
// only where config files are read (CLI, round-trip tests).

#include <cstdint>
#include <string>

#include <json.hpp>

#include "hdlpboot/errors.hpp"
#include "hdlpboot/io.hpp"
#include "hdlpboot/simharness.hpp"

namespace hdlpboot {

// Parses the canonical config JSON (the exact string emitted by
// canonical_config_json, or a subset of its keys; missing keys keep
// their defaults). Unknown keys are rejected so typos cannot silently
// run the wrong experiment.
inline SimConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: JSON root must be an object");

    static const char* const kKnown[] = {"dgp",    "d",   "n",     "B",   "reps", "stat",
                                         "method", "cov", "alpha", "alt", "seed", "workers"};
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : kKnown) known = known || item.key() == key;
        if (!known) throw ConfigError("config: unknown key '" + item.key() + "'");
    }

    SimConfig cfg;
    try {
        if (j.contains("dgp")) cfg.dgp = parse_dgp(j.at("dgp").get<std::string>());
        if (j.contains("d")) cfg.d = j.at("d").get<std::size_t>();
        if (j.contains("n")) cfg.n = j.at("n").get<std::size_t>();
        if (j.contains("B")) cfg.B = j.at("B").get<std::size_t>();
        if (j.contains("reps")) cfg.reps = j.at("reps").get<std::size_t>();
        if (j.contains("stat")) cfg.stat = parse_stat(j.at("stat").get<std::string>());
        if (j.contains("method")) cfg.method = parse_method(j.at("method").get<std::string>());
        if (j.contains("cov")) cfg.cov = parse_cov(j.at("cov").get<std::string>());
        if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<std::vector<double>>();
        if (j.contains("alt") && !j.at("alt").is_null()) {
            const nlohmann::json& a = j.at("alt");
            AltConfig alt;
            alt.s = a.at("s").get<std::size_t>();
            alt.delta = a.at("delta").get<double>();
            if (a.contains("support_seed") && !a.at("support_seed").is_null())
                alt.support_seed = a.at("support_seed").get<std::uint64_t>();
            cfg.alt = alt;
        }
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("workers")) cfg.workers = j.at("workers").get<std::size_t>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

}  // namespace hdlpboot
