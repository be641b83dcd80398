#pragma once

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "wpcn/system_model.hpp"

namespace wpcn {

/// Parses a SystemConfig from JSON text. Keys mirror the model symbols:
/// M, K, B, T, s_max, P_b, sigma2_un, c0, d0, delta, d (array of meters).
/// Unknown keys are rejected; missing keys keep the defaults.
inline SystemConfig config_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {"M",  "K",  "B",        "T", "s_max", "P_b",
                                               "sigma2_un", "c0", "d0", "delta", "d"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) throw ConfigError("unknown config key: " + it.key());
    }
    SystemConfig cfg;
    if (j.contains("M")) cfg.antennas = j.at("M").get<int>();
    if (j.contains("K")) cfg.wd_count = j.at("K").get<int>();
    if (j.contains("B")) cfg.bandwidth_hz = j.at("B").get<double>();
    if (j.contains("T")) cfg.frame_s = j.at("T").get<double>();
    if (j.contains("s_max")) cfg.psd_max_w_per_hz = j.at("s_max").get<double>();
    if (j.contains("P_b")) cfg.power_budget_w = j.at("P_b").get<double>();
    if (j.contains("sigma2_un")) cfg.noise_variance_w = j.at("sigma2_un").get<double>();
    if (j.contains("c0")) cfg.ref_attenuation = j.at("c0").get<double>();
    if (j.contains("d0")) cfg.ref_distance_m = j.at("d0").get<double>();
    if (j.contains("delta")) cfg.pathloss_exponent = j.at("delta").get<double>();
    if (j.contains("d")) {
        cfg.distances_m = j.at("d").get<std::vector<double>>();
        if (!j.contains("K")) cfg.wd_count = static_cast<int>(cfg.distances_m.size());
    }
    return cfg;
}

inline nlohmann::json config_to_json(const SystemConfig& cfg) {
    return nlohmann::json{{"M", cfg.antennas},
                          {"K", cfg.wd_count},
                          {"B", cfg.bandwidth_hz},
                          {"T", cfg.frame_s},
                          {"s_max", cfg.psd_max_w_per_hz},
                          {"P_b", cfg.power_budget_w},
                          {"sigma2_un", cfg.noise_variance_w},
                          {"c0", cfg.ref_attenuation},
                          {"d0", cfg.ref_distance_m},
                          {"delta", cfg.pathloss_exponent},
                          {"d", cfg.distances_m}};
}

/// Loads and validates a config file; throws ConfigError on parse or
/// invariant failure.
inline SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return validated(config_from_json(j));
}

}  // namespace wpcn
