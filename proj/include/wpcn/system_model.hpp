#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpcn {

/// Physical configuration of the network: one HAP with `antennas` elements,
/// `wd_count` single-antenna devices at the given distances (sorted ascending).
struct SystemConfig {
    int antennas = 10;                    ///< M
    int wd_count = 4;                     ///< K
    double bandwidth_hz = 1e5;            ///< B, total FDD bandwidth
    double frame_s = 1e-3;                ///< T
    double psd_max_w_per_hz = 1e-4;       ///< s_max
    double power_budget_w = 10.0;         ///< P_b
    double noise_variance_w = 1e-12;      ///< UL noise variance at the HAP
    double ref_attenuation = 1e-3;        ///< c0, attenuation at d0
    double ref_distance_m = 1.0;          ///< d0
    double pathloss_exponent = 3.0;       ///< delta
    std::vector<double> distances_m = {4.0, 6.0, 8.0, 10.0};
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Returns the names of every violated invariant (empty when valid).
inline std::vector<std::string> validate(const SystemConfig& cfg) {
    std::vector<std::string> errs;
    if (cfg.wd_count < 1) errs.push_back("K >= 1 violated");
    if (cfg.antennas <= cfg.wd_count) errs.push_back("M > K violated");
    if (!(cfg.bandwidth_hz > 0)) errs.push_back("B > 0 violated");
    if (!(cfg.frame_s > 0)) errs.push_back("T > 0 violated");
    if (!(cfg.psd_max_w_per_hz > 0)) errs.push_back("s_max > 0 violated");
    if (!(cfg.noise_variance_w > 0)) errs.push_back("sigma2_un > 0 violated");
    if (!(cfg.ref_attenuation > 0)) errs.push_back("c0 > 0 violated");
    if (!(cfg.ref_distance_m > 0)) errs.push_back("d0 > 0 violated");
    if (!(cfg.pathloss_exponent > 0)) errs.push_back("delta > 0 violated");
    if (!(cfg.power_budget_w > 0)) errs.push_back("P_b > 0 violated");
    if (cfg.power_budget_w > cfg.bandwidth_hz * cfg.psd_max_w_per_hz)
        errs.push_back("P_b <= B*s_max violated");
    if (static_cast<int>(cfg.distances_m.size()) != cfg.wd_count)
        errs.push_back("distance count != K");
    bool positive = true, sorted = true;
    for (std::size_t i = 0; i < cfg.distances_m.size(); ++i) {
        if (!(cfg.distances_m[i] > 0)) positive = false;
        if (i > 0 && cfg.distances_m[i] < cfg.distances_m[i - 1]) sorted = false;
    }
    if (!positive) errs.push_back("distances > 0 violated");
    if (!sorted) errs.push_back("distances not sorted");
    return errs;
}

/// Throwing form of validate(); returns the config unchanged when valid.
inline SystemConfig validated(SystemConfig cfg) {
    const auto errs = validate(cfg);
    if (!errs.empty()) {
        std::ostringstream oss;
        oss << "invalid config:";
        for (const auto& e : errs) oss << " [" << e << "]";
        throw ConfigError(oss.str());
    }
    return cfg;
}

/// Large-scale fading vector b = c0 * d0^delta * d^(-delta), componentwise.
inline Eigen::VectorXd path_loss(const SystemConfig& cfg) {
    Eigen::VectorXd b(cfg.wd_count);
    for (int k = 0; k < cfg.wd_count; ++k) {
        b[k] = cfg.ref_attenuation *
               std::pow(cfg.ref_distance_m / cfg.distances_m[k], cfg.pathloss_exponent);
    }
    return b;
}

}  // namespace wpcn
