#pragma once

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "wpcn/config_io.hpp"
#include "wpcn/monte_carlo.hpp"
#include "wpcn/optimizer.hpp"
#include "wpcn/rate_analytics.hpp"
#include "wpcn/table_io.hpp"

namespace wpcn {
namespace cli {

enum class Command { forward, optimize, sweep_m, surface, asymptotics, oracle };
enum class Format { csv, json };

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct RunManifest {
    Command command = Command::forward;
    std::string config_path;  ///< empty: built-in defaults
    std::uint64_t seed = 42;
    int trials = 1000;
    std::string output_path;  ///< empty: stdout
    Format format = Format::csv;
    bool with_oracle = false;
    bool asymptotic_init = false;
    int grid_alpha = 0;  ///< 0: per-command default
    int grid_beta = 0;
    std::vector<int> m_list = {8, 16, 32, 64, 128, 256, 512, 1024};
};

namespace detail {

inline SystemConfig manifest_config(const RunManifest& m) {
    if (m.config_path.empty()) return validated(SystemConfig{});
    return load_config(m.config_path);
}

inline void stamp_meta(Table& t, const RunManifest& m, const char* command) {
    t.meta["command"] = command;
    t.meta["seed"] = m.seed;
    t.meta["version"] = kVersion;
}

inline void emit(const Table& t, const RunManifest& m) {
    if (m.output_path.empty()) {
        m.format == Format::json ? write_json(t, std::cout) : write_csv(t, std::cout);
    } else {
        write_table(t, m.output_path, m.format == Format::json);
    }
}

inline double mbps(double bps) { return bps / 1e6; }

/// The five canonical sub-scenarios: each WD beamed alone, then uniform weights.
inline std::vector<Eigen::VectorXd> default_scenarios(int k_count) {
    std::vector<Eigen::VectorXd> list;
    for (int k = 0; k < k_count; ++k) {
        Eigen::VectorXd xi = Eigen::VectorXd::Zero(k_count);
        xi[k] = 1.0;
        list.push_back(xi);
    }
    list.push_back(Eigen::VectorXd::Constant(k_count, 1.0 / k_count));
    return list;
}

}  // namespace detail

/// Reference sub-scenario experiment: per sub-scenario, the simulated and analytic
/// WIT rates at (alpha, beta) = (0.05, 0.1).
inline int cmd_forward(const RunManifest& m) {
    const SystemConfig cfg = detail::manifest_config(m);
    Table t;
    detail::stamp_meta(t, m, "forward");
    t.meta["trials"] = m.trials;
    t.columns = {"scenario", "method"};
    for (int k = 1; k <= cfg.wd_count; ++k) t.columns.push_back("rw_Mbps_wd" + std::to_string(k));
    for (int k = 1; k <= cfg.wd_count; ++k) t.columns.push_back("se_Mbps_wd" + std::to_string(k));
    t.columns.push_back("trials");
    t.columns.push_back("discarded");

    const auto scenarios = detail::default_scenarios(cfg.wd_count);
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        const rates::DecisionVariables vars{0.05, 0.1, scenarios[s]};
        const mc::ForwardExperiment exp =
            mc::run_forward_experiment(cfg, vars, m.trials, m.seed + s);
        std::vector<nlohmann::json> sim = {static_cast<int>(s + 1), "simulation"};
        std::vector<nlohmann::json> ana = {static_cast<int>(s + 1), "analytic"};
        for (int k = 0; k < cfg.wd_count; ++k) sim.push_back(detail::mbps(exp.sim_rate.mean[k]));
        for (int k = 0; k < cfg.wd_count; ++k) ana.push_back(detail::mbps(exp.analytic.wit_rate_bps[k]));
        for (int k = 0; k < cfg.wd_count; ++k) sim.push_back(detail::mbps(exp.sim_rate.std_err[k]));
        for (int k = 0; k < cfg.wd_count; ++k) ana.push_back(0.0);
        sim.push_back(exp.sim_rate.trials);
        sim.push_back(exp.discarded);
        ana.push_back(0);
        ana.push_back(0);
        t.add_row(sim);
        t.add_row(ana);
    }
    detail::emit(t, m);
    return kExitOk;
}

/// Algorithm-1 optimum; --oracle appends the grid-search row.
inline int cmd_optimize(const RunManifest& m) {
    const SystemConfig cfg = detail::manifest_config(m);
    opt::AlgorithmOptions options;
    options.asymptotic_init = m.asymptotic_init;
    const opt::OptimizationResult res = opt::run_algorithm1(cfg, options);

    Table t;
    detail::stamp_meta(t, m, "optimize");
    t.columns = {"method",        "alpha",      "beta",       "min_rate_Mbps",
                 "fairness_radius_m", "iterations", "converged"};
    for (int k = 1; k <= cfg.wd_count; ++k) t.columns.push_back("xi_wd" + std::to_string(k));
    for (int k = 1; k <= cfg.wd_count; ++k) t.columns.push_back("rw_Mbps_wd" + std::to_string(k));
    for (int k = 1; k <= cfg.wd_count; ++k) t.columns.push_back("fair_wd" + std::to_string(k));

    std::vector<nlohmann::json> row = {"algorithm1",
                                       res.vars.alpha,
                                       res.vars.beta,
                                       detail::mbps(res.report.wit_rate_bps.minCoeff()),
                                       res.partition.radius_m,
                                       res.iterations,
                                       res.converged};
    for (int k = 0; k < cfg.wd_count; ++k) row.push_back(res.vars.xi[k]);
    for (int k = 0; k < cfg.wd_count; ++k) row.push_back(detail::mbps(res.report.wit_rate_bps[k]));
    for (int k = 0; k < cfg.wd_count; ++k) {
        const bool fair = std::find(res.partition.fair.begin(), res.partition.fair.end(), k) !=
                          res.partition.fair.end();
        row.push_back(fair);
    }
    t.add_row(row);

    if (m.with_oracle) {
        const int na = m.grid_alpha > 0 ? m.grid_alpha : 200;
        const int nb = m.grid_beta > 0 ? m.grid_beta : 200;
        const opt::GridOptimum g = opt::grid_oracle(cfg, na, nb);
        std::vector<nlohmann::json> orow = {"grid_oracle", g.alpha, g.beta,
                                            detail::mbps(g.min_rate_bps), nullptr, na * nb, true};
        for (int k = 0; k < 3 * cfg.wd_count; ++k) orow.push_back(nullptr);
        t.add_row(orow);
    }
    detail::emit(t, m);
    return kExitOk;
}

/// Optimum versus antenna count: one row per M.
inline int cmd_sweep_m(const RunManifest& m) {
    SystemConfig cfg = detail::manifest_config(m);
    Table t;
    detail::stamp_meta(t, m, "sweep-m");
    t.columns = {"M", "alpha", "beta", "fairness_radius_m", "rf_scaled", "common_rate_Mbps",
                 "gap_frac"};
    for (int k = 1; k <= cfg.wd_count; ++k) t.columns.push_back("rw_Mbps_wd" + std::to_string(k));

    opt::AlgorithmOptions options;
    options.asymptotic_init = m.asymptotic_init;
    for (int antennas : m.m_list) {
        if (antennas <= cfg.wd_count) {
            throw ConfigError("sweep-m: M = " + std::to_string(antennas) + " must exceed K");
        }
        cfg.antennas = antennas;
        const opt::OptimizationResult res = opt::run_algorithm1(cfg, options);
        const double common = res.partition.common_rate_bps;
        const double gap =
            (res.report.wit_rate_bps.maxCoeff() - res.report.wit_rate_bps.minCoeff()) / common;
        std::vector<nlohmann::json> row = {
            antennas,
            res.vars.alpha,
            res.vars.beta,
            res.partition.radius_m,
            res.partition.radius_m *
                std::pow(antennas, 1.0 / (2.0 * cfg.pathloss_exponent)),
            detail::mbps(common),
            gap};
        for (int k = 0; k < cfg.wd_count; ++k)
            row.push_back(detail::mbps(res.report.wit_rate_bps[k]));
        t.add_row(row);
    }
    detail::emit(t, m);
    return kExitOk;
}

/// WIT-rate surface over (alpha, beta) with xi re-optimized per point;
/// long-format rows (alpha, beta, wd, rate).
inline int cmd_surface(const RunManifest& m) {
    const SystemConfig cfg = detail::manifest_config(m);
    const int na = m.grid_alpha > 0 ? m.grid_alpha : 40;
    const int nb = m.grid_beta > 0 ? m.grid_beta : 40;
    const double beta_max =
        std::min(1.0, cfg.power_budget_w / (cfg.bandwidth_hz * cfg.psd_max_w_per_hz));

    Table t;
    detail::stamp_meta(t, m, "surface");
    t.meta["grid"] = std::to_string(na) + "x" + std::to_string(nb);
    t.columns = {"alpha", "beta", "wd", "rw_Mbps"};
    for (int i = 0; i < na; ++i) {
        const double alpha = na > 1 ? static_cast<double>(i) / (na - 1) : 0.0;
        for (int j = 0; j < nb; ++j) {
            const double beta = beta_max * (j + 1) / nb;
            try {
                const Eigen::VectorXd xi = opt::xi_star_or_asym(cfg, alpha, beta);
                const rates::RateReport rep = rates::forward_rates(cfg, {alpha, beta, xi});
                for (int k = 0; k < cfg.wd_count; ++k) {
                    t.add_row({alpha, beta, k + 1, detail::mbps(rep.wit_rate_bps[k])});
                }
            } catch (const std::exception&) {
                continue;  // point outside the model's validity region
            }
        }
    }
    detail::emit(t, m);
    return kExitOk;
}

/// Closed-form large-M values for the current geometry.
inline int cmd_asymptotics(const RunManifest& m) {
    const SystemConfig cfg = detail::manifest_config(m);
    const opt::Asymptotics a = opt::asymptotics(cfg);
    Table t;
    detail::stamp_meta(t, m, "asymptotics");
    t.columns = {"M", "alpha_asym", "beta_asym", "radius_coeff_m"};
    for (int k = 1; k <= cfg.wd_count; ++k) t.columns.push_back("xi_asym_wd" + std::to_string(k));
    std::vector<nlohmann::json> row = {cfg.antennas, a.alpha, a.beta, a.radius_coeff};
    for (int k = 0; k < cfg.wd_count; ++k) row.push_back(a.xi[k]);
    t.add_row(row);
    detail::emit(t, m);
    return kExitOk;
}

/// Standalone grid-search oracle.
inline int cmd_oracle(const RunManifest& m) {
    const SystemConfig cfg = detail::manifest_config(m);
    const int na = m.grid_alpha > 0 ? m.grid_alpha : 200;
    const int nb = m.grid_beta > 0 ? m.grid_beta : 200;
    const opt::GridOptimum g = opt::grid_oracle(cfg, na, nb);
    Table t;
    detail::stamp_meta(t, m, "oracle");
    t.columns = {"alpha", "beta", "min_rate_Mbps", "n_alpha", "n_beta"};
    t.add_row({g.alpha, g.beta, detail::mbps(g.min_rate_bps), na, nb});
    detail::emit(t, m);
    return kExitOk;
}

/// Dispatches a manifest; maps config failures to exit 2 and runtime
/// failures to exit 3, with the reason on stderr.
inline int run(const RunManifest& m) {
    try {
        switch (m.command) {
            case Command::forward: return cmd_forward(m);
            case Command::optimize: return cmd_optimize(m);
            case Command::sweep_m: return cmd_sweep_m(m);
            case Command::surface: return cmd_surface(m);
            case Command::asymptotics: return cmd_asymptotics(m);
            case Command::oracle: return cmd_oracle(m);
        }
        std::cerr << "error: unknown command\n";
        return kExitRuntime;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace cli
}  // namespace wpcn
