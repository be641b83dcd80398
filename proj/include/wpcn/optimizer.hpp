#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "wpcn/rate_analytics.hpp"
#include "wpcn/specfun.hpp"
#include "wpcn/system_model.hpp"

namespace wpcn {
namespace opt {

struct SingularMixingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Index partition of the WDs by energy allocation: fair ones share the
/// minimum WIT rate and receive positive weights, unfair ones sit closer
/// than the fairness radius and exceed it with zero weight.
struct FairnessPartition {
    std::vector<int> fair;
    std::vector<int> unfair;
    double radius_m = 0.0;
    double common_rate_bps = 0.0;
};

struct XiResult {
    Eigen::VectorXd xi;
    std::vector<int> fair;
    std::vector<int> unfair;
};

/// Max-min optimal energy allocation: solve Mix_ff xi_f = b_f^-2 on the fair
/// set, drop every index that comes out negative, repeat until nonnegative,
/// then normalize to sum one. The farthest WD always survives.
inline XiResult optimal_xi(const Eigen::VectorXd& b, const Eigen::VectorXd& sigma2_uf,
                           int antennas) {
    const int k_count = static_cast<int>(b.size());
    for (int k = 0; k < k_count; ++k) {
        if (!((antennas - 1) - antennas * sigma2_uf[k] > 0.0)) {
            std::ostringstream oss;
            oss << "optimal_xi: sigma2_uf[" << k << "] = " << sigma2_uf[k]
                << " >= (M-1)/M, mixing submatrix singular (feedback below pareto threshold)";
            throw SingularMixingError(oss.str());
        }
    }
    std::vector<int> fair(k_count);
    std::iota(fair.begin(), fair.end(), 0);
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(k_count);
    while (true) {
        const int n = static_cast<int>(fair.size());
        Eigen::MatrixXd mix = Eigen::MatrixXd::Ones(n, n);
        Eigen::VectorXd rhs(n);
        for (int i = 0; i < n; ++i) {
            mix(i, i) = antennas * (1.0 - sigma2_uf[fair[i]]);
            rhs[i] = 1.0 / (b[fair[i]] * b[fair[i]]);
        }
        const Eigen::VectorXd y = mix.partialPivLu().solve(rhs);
        std::vector<int> next;
        for (int i = 0; i < n; ++i) {
            if (y[i] >= 0.0) next.push_back(fair[i]);
        }
        if (static_cast<int>(next.size()) == n) {
            xi.setZero();
            const double total = y.sum();
            for (int i = 0; i < n; ++i) xi[fair[i]] = y[i] / total;
            break;
        }
        if (next.empty()) {
            // cannot happen for a singleton (diagonal solve is positive);
            // keep the farthest WD as the guaranteed survivor
            next.push_back(fair.back());
        }
        fair = std::move(next);
    }
    XiResult out;
    out.xi = xi;
    out.fair = fair;
    for (int k = 0; k < k_count; ++k) {
        if (std::find(fair.begin(), fair.end(), k) == fair.end()) out.unfair.push_back(k);
    }
    return out;
}

/// v = [(M-1) 1 - M sigma2]^-1 componentwise; the Sherman-Morrison weights of
/// the mixing-matrix inverse.
inline Eigen::VectorXd mixing_weights(const Eigen::VectorXd& sigma2_uf, int antennas) {
    Eigen::VectorXd v(sigma2_uf.size());
    for (Eigen::Index k = 0; k < sigma2_uf.size(); ++k) {
        const double denom = (antennas - 1) - antennas * sigma2_uf[k];
        if (!(denom > 0.0)) {
            throw std::domain_error("mixing_weights: (M-1) - M*sigma2 <= 0");
        }
        v[k] = 1.0 / denom;
    }
    return v;
}

/// Mixing-matrix inverse via Sherman-Morrison: diag(v) - v v^T / (1 + 1^T v).
inline Eigen::MatrixXd mixing_inverse_sherman_morrison(const Eigen::VectorXd& sigma2_uf,
                                                       int antennas) {
    const Eigen::VectorXd v = mixing_weights(sigma2_uf, antennas);
    return Eigen::MatrixXd(v.asDiagonal()) - (v * v.transpose()) / (1.0 + v.sum());
}

/// Distance below which a WD would get zero energy weight:
///   r_f = (v^T d^(2 delta) / (1 + 1^T v))^(1/(2 delta)).
inline double fairness_radius(const Eigen::VectorXd& sigma2_uf, const Eigen::VectorXd& distances,
                              double pathloss_exponent, int antennas) {
    const Eigen::VectorXd v = mixing_weights(sigma2_uf, antennas);
    const Eigen::VectorXd d2d = distances.array().pow(2.0 * pathloss_exponent);
    const double ratio = v.dot(d2d) / (1.0 + v.sum());
    return std::pow(ratio, 1.0 / (2.0 * pathloss_exponent));
}

/// Optimal DL bandwidth ratio for the beta-normalized SINR slope of the
/// farthest WD: the stationary point of (1-beta) log2(1+beta g), capped by
/// the HAP power budget.
inline double optimal_beta(double gamma_bar_max_K, double power_budget_w, double bandwidth_hz,
                           double psd_max_w_per_hz) {
    if (!(gamma_bar_max_K > 0.0)) throw std::domain_error("optimal_beta: gamma_bar <= 0");
    const double g = gamma_bar_max_K;
    const double w = specfun::lambert_w0(std::exp(1.0) * (g + 1.0));
    const double stationary = (g + 1.0) / (g * w) - 1.0 / g;
    return std::min(stationary, power_budget_w / (bandwidth_hz * psd_max_w_per_hz));
}

struct AlphaResult {
    double alpha = 0.0;
    int iterations = 0;
    bool grid_fallback = false;
};

namespace detail {

inline double wit_rate_K(double gamma_max, double gamma_maxloss, double alpha, double frame_s,
                         double bandwidth_hz, int antennas, double beta) {
    const double s2 = rates::feedback_error_closed_form(gamma_max, gamma_maxloss, alpha, frame_s,
                                                        bandwidth_hz, antennas);
    const double gamma = gamma_max - gamma_maxloss * s2;
    return (1.0 - alpha) * (1.0 - beta) * bandwidth_hz * std::log2(1.0 + gamma);
}

inline AlphaResult alpha_grid_refine(double gamma_max, double gamma_maxloss, double frame_s,
                                     double bandwidth_hz, int antennas, double beta) {
    AlphaResult res;
    res.grid_fallback = true;
    double best_rate = -1.0;
    for (int i = 0; i <= 5000; ++i) {
        const double a = i * 1e-4;
        double r;
        try {
            r = wit_rate_K(gamma_max, gamma_maxloss, a, frame_s, bandwidth_hz, antennas, beta);
        } catch (const rates::FeedbackRegimeError&) {
            continue;
        }
        if (r > best_rate) {
            best_rate = r;
            res.alpha = a;
        }
    }
    return res;
}

}  // namespace detail

/// Optimal CSI feedback time ratio: fixed point of the stationarity relation
///   alpha = (M-1)/(T B (1-beta)) log2(gl (T B (1-beta)/(M-1) + 1)/(1+g))
///           / log2(1 + gamma(alpha)),
/// compared against the alpha = 0 boundary; never returns 1. Falls back to a
/// 1e-4 grid on [0, 0.5] when the closed-form error leaves its regime.
inline AlphaResult optimal_alpha(double gamma_max_K, double gamma_maxloss_K, double frame_s,
                                 double bandwidth_hz, int antennas, double beta) {
    if (!(gamma_max_K > 0.0)) throw std::domain_error("optimal_alpha: gamma_max <= 0");
    const double tb_eff = frame_s * bandwidth_hz * (1.0 - beta);
    const double log_arg =
        gamma_maxloss_K * (tb_eff / (antennas - 1) + 1.0) / (1.0 + gamma_max_K);
    if (!(log_arg > 1.0)) {
        return AlphaResult{};  // interior stationary point infeasible
    }
    const double numerator = (antennas - 1) / tb_eff * std::log2(log_arg);

    AlphaResult res;
    double alpha = 0.0;
    bool need_fallback = false;
    int it = 0;
    try {
        for (; it < 200; ++it) {
            const double s2 = rates::feedback_error_closed_form(
                gamma_max_K, gamma_maxloss_K, alpha, frame_s, bandwidth_hz, antennas);
            const double gamma = gamma_max_K - gamma_maxloss_K * s2;
            const double denom = std::log2(1.0 + gamma);
            if (!(denom > 0.0) || !std::isfinite(denom)) {
                need_fallback = true;
                break;
            }
            const double next = numerator / denom;
            if (!(next >= 0.0 && next < 1.0)) {
                need_fallback = true;
                break;
            }
            const double gap = std::abs(next - alpha);
            alpha = next;
            if (gap < 1e-9) break;
            if (it == 199) {
                std::ostringstream oss;
                oss << "optimal_alpha: fixed point did not converge; last iterates "
                    << alpha - gap << ", " << alpha;
                throw std::runtime_error(oss.str());
            }
        }
    } catch (const rates::FeedbackRegimeError&) {
        need_fallback = true;
    }
    if (need_fallback) {
        return detail::alpha_grid_refine(gamma_max_K, gamma_maxloss_K, frame_s, bandwidth_hz,
                                         antennas, beta);
    }
    res.iterations = it + 1;
    // argmax over the boundary candidate alpha = 0 and the interior point;
    // ties go to the smaller alpha (less feedback at equal rate)
    const double rate0 =
        detail::wit_rate_K(gamma_max_K, gamma_maxloss_K, 0.0, frame_s, bandwidth_hz, antennas, beta);
    const double rate_inf =
        detail::wit_rate_K(gamma_max_K, gamma_maxloss_K, alpha, frame_s, bandwidth_hz, antennas, beta);
    res.alpha = rate_inf > rate0 ? alpha : 0.0;
    return res;
}

struct OptimizationResult {
    rates::DecisionVariables vars;
    FairnessPartition partition;
    rates::RateReport report;
    int iterations = 0;
    bool converged = false;
    std::vector<double> min_rate_trace;  ///< min WIT rate after each outer pass
};

struct AlgorithmOptions {
    bool asymptotic_init = false;
    double eps_xi = 1e-8;
    double eps_alpha = 1e-9;
    int max_outer = 500;
};

/// Closed-form asymptotic (large-M) values used for initialization and the
/// envelope checks.
struct Asymptotics {
    Eigen::VectorXd xi;
    double beta = 0.0;
    double alpha = 0.0;
    double radius_coeff = 0.0;  ///< c in r_f ~ c * M^(-1/(2 delta))
};

inline double gamma_bar_max_farthest(const SystemConfig& cfg, const Eigen::VectorXd& b,
                                     const Eigen::VectorXd& xi) {
    const int k = cfg.wd_count - 1;
    return cfg.bandwidth_hz * cfg.psd_max_w_per_hz * (cfg.antennas - cfg.wd_count) /
           cfg.noise_variance_w * b[k] * b[k] * ((cfg.antennas - 1) * xi[k] + xi.sum());
}

inline Asymptotics asymptotics(const SystemConfig& cfg) {
    const Eigen::VectorXd b = path_loss(cfg);
    Asymptotics a;
    const Eigen::VectorXd inv_b2 = b.array().square().inverse();
    a.xi = inv_b2 / inv_b2.sum();
    const double gamma_bar = gamma_bar_max_farthest(cfg, b, a.xi);
    a.beta = 1.0 / specfun::lambert_w0(std::exp(1.0) * gamma_bar);
    const double gamma_max = a.beta * gamma_bar;
    a.alpha = std::log(2.0) /
              specfun::lambert_w0(cfg.frame_s * cfg.bandwidth_hz * gamma_max *
                                  std::log(gamma_max) * std::log(2.0) / (cfg.antennas - 1));
    const double max_d =
        *std::max_element(cfg.distances_m.begin(), cfg.distances_m.end());
    const double exp2d = 1.0 / (2.0 * cfg.pathloss_exponent);
    a.radius_coeff = max_d * std::pow(static_cast<double>(cfg.antennas) /
                                          (cfg.antennas + cfg.wd_count - 1),
                                      exp2d);
    return a;
}

/// Alternating maximization: bandwidth split, feedback time, then energy
/// allocation, with the feedback error refreshed after each change, until both
/// the xi and alpha updates settle.
inline OptimizationResult run_algorithm1(const SystemConfig& cfg,
                                         const AlgorithmOptions& options = {}) {
    const SystemConfig c = validated(cfg);
    const Eigen::VectorXd b = path_loss(c);
    const Eigen::VectorXd dist =
        Eigen::Map<const Eigen::VectorXd>(c.distances_m.data(), c.wd_count);

    OptimizationResult out;
    const Asymptotics asym = asymptotics(c);
    Eigen::VectorXd xi = asym.xi;
    double alpha = options.asymptotic_init ? asym.alpha : 0.0;
    double beta = options.asymptotic_init
                      ? asym.beta
                      : c.power_budget_w / (c.bandwidth_hz * c.psd_max_w_per_hz);
    XiResult xi_res;
    xi_res.xi = xi;
    xi_res.fair.resize(c.wd_count);
    std::iota(xi_res.fair.begin(), xi_res.fair.end(), 0);

    int it = 0;
    for (; it < options.max_outer; ++it) {
        beta = optimal_beta(gamma_bar_max_farthest(c, b, xi), c.power_budget_w, c.bandwidth_hz,
                            c.psd_max_w_per_hz);
        const rates::SinrDecomposition sinr = rates::sinr_decomposition(c, beta, xi);
        const double alpha_prev = alpha;
        alpha = optimal_alpha(sinr.gamma_max[c.wd_count - 1], sinr.gamma_maxloss[c.wd_count - 1],
                              c.frame_s, c.bandwidth_hz, c.antennas, beta)
                    .alpha;
        const rates::RateReport rep = rates::forward_rates(c, {alpha, beta, xi});
        xi_res = optimal_xi(b, rep.sigma2_uf, c.antennas);
        const double delta_xi = (xi_res.xi - xi).norm();
        xi = xi_res.xi;
        out.min_rate_trace.push_back(
            rates::forward_rates(c, {alpha, beta, xi}).wit_rate_bps.minCoeff());
        if (delta_xi < options.eps_xi && std::abs(alpha - alpha_prev) < options.eps_alpha) {
            out.converged = true;
            ++it;
            break;
        }
    }
    out.iterations = it;
    out.vars = rates::DecisionVariables{alpha, beta, xi};
    out.report = rates::forward_rates(c, out.vars);
    out.partition.fair = xi_res.fair;
    out.partition.unfair = xi_res.unfair;
    // radius over the final fair set: every removed WD sits strictly below it
    // (each removal round only raises the boundary), every fair WD at or above
    const int fair_n = static_cast<int>(xi_res.fair.size());
    Eigen::VectorXd s2_fair(fair_n), d_fair(fair_n);
    for (int i = 0; i < fair_n; ++i) {
        s2_fair[i] = out.report.sigma2_uf[xi_res.fair[i]];
        d_fair[i] = dist[xi_res.fair[i]];
    }
    out.partition.radius_m =
        fairness_radius(s2_fair, d_fair, c.pathloss_exponent, c.antennas);
    out.partition.common_rate_bps = out.report.wit_rate_bps[c.wd_count - 1];
    return out;
}

/// Self-consistent energy allocation at fixed (alpha, beta): alternate the
/// closed-form feedback error with the allocation solve until xi settles.
inline XiResult xi_star_fixed_point(const SystemConfig& cfg, double alpha, double beta,
                                    int max_rounds = 100) {
    const Eigen::VectorXd b = path_loss(cfg);
    const Eigen::VectorXd inv_b2 = b.array().square().inverse();
    Eigen::VectorXd xi = inv_b2 / inv_b2.sum();
    XiResult res;
    res.xi = xi;
    for (int round = 0; round < max_rounds; ++round) {
        const rates::RateReport rep = rates::forward_rates(cfg, {alpha, beta, xi});
        res = optimal_xi(b, rep.sigma2_uf, cfg.antennas);
        const double change = (res.xi - xi).norm();
        xi = res.xi;
        if (change < 1e-12) break;
    }
    return res;
}

/// xi*(alpha, beta) with a defined value at no-feedback points: where the
/// mixing matrix is singular (sigma2 = 1, e.g. alpha = 0) the energy split no
/// longer moves the harvest, so the large-M weights stand in.
inline Eigen::VectorXd xi_star_or_asym(const SystemConfig& cfg, double alpha, double beta) {
    try {
        return xi_star_fixed_point(cfg, alpha, beta).xi;
    } catch (const SingularMixingError&) {
        const Eigen::VectorXd b = path_loss(cfg);
        const Eigen::VectorXd inv_b2 = b.array().square().inverse();
        return inv_b2 / inv_b2.sum();
    }
}

struct GridOptimum {
    double alpha = 0.0;
    double beta = 0.0;
    double min_rate_bps = 0.0;
};

/// Exhaustive validation oracle, independent of the closed-form optima: maximize
/// the minimum WIT rate over an (alpha, beta) grid with xi re-optimized at
/// every point. Ties break toward smaller alpha, then smaller beta.
inline GridOptimum grid_oracle(const SystemConfig& cfg, int n_alpha, int n_beta) {
    const SystemConfig c = validated(cfg);
    const double beta_max =
        std::min(1.0, c.power_budget_w / (c.bandwidth_hz * c.psd_max_w_per_hz));
    GridOptimum best;
    best.min_rate_bps = -1.0;
    for (int i = 0; i < n_alpha; ++i) {
        const double alpha = n_alpha > 1 ? static_cast<double>(i) / (n_alpha - 1) : 0.0;
        for (int j = 0; j < n_beta; ++j) {
            const double beta = beta_max * (j + 1) / n_beta;
            double min_rate;
            try {
                const Eigen::VectorXd xi = xi_star_or_asym(c, alpha, beta);
                min_rate = rates::forward_rates(c, {alpha, beta, xi}).wit_rate_bps.minCoeff();
            } catch (const std::exception&) {
                continue;  // point outside the model's validity region
            }
            if (min_rate > best.min_rate_bps) {
                best = GridOptimum{alpha, beta, min_rate};
            }
        }
    }
    return best;
}

}  // namespace opt
}  // namespace wpcn
