#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "wpcn/system_model.hpp"

namespace wpcn {
namespace rates {

/// The optimization triple: CSI feedback time ratio, DL bandwidth ratio,
/// and the energy allocation weights (nonnegative, summing to one).
struct DecisionVariables {
    double alpha = 0.0;
    double beta = 0.0;
    Eigen::VectorXd xi;
};

inline std::vector<std::string> validate(const SystemConfig& cfg, const DecisionVariables& v) {
    std::vector<std::string> errs;
    if (!(v.alpha >= 0.0 && v.alpha <= 1.0)) errs.push_back("alpha outside [0,1]");
    if (!(v.beta >= 0.0 && v.beta <= 1.0)) errs.push_back("beta outside [0,1]");
    if (v.beta * cfg.bandwidth_hz * cfg.psd_max_w_per_hz > cfg.power_budget_w * (1 + 1e-12))
        errs.push_back("beta*B*s_max > P_b");
    if (v.xi.size() != cfg.wd_count) errs.push_back("xi size != K");
    if ((v.xi.array() < -1e-15).any()) errs.push_back("xi has negative entries");
    if (v.xi.size() == cfg.wd_count && std::abs(v.xi.sum() - 1.0) > 1e-12)
        errs.push_back("xi does not sum to 1");
    return errs;
}

/// K x K mixing power matrix: diagonal M*(1 - sigma2_uf_k), off-diagonal 1.
/// Maps energy weights to per-WD harvested-energy multipliers.
inline Eigen::MatrixXd mixing_matrix(const Eigen::VectorXd& sigma2_uf, int antennas) {
    const Eigen::Index k = sigma2_uf.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        m(i, i) = antennas * (1.0 - sigma2_uf[i]);
    }
    return m;
}

struct HarvestResult {
    Eigen::VectorXd energy_j;    ///< expected harvested energy per frame
    Eigen::VectorXd ul_power_w;  ///< energy_j / T
};

/// Expected harvested energy eps = T*B*beta*s_max * b (x) (Mix * xi) and the
/// steady-state UL transmit power p_u = eps / T.
inline HarvestResult harvested_energy(const SystemConfig& cfg, double beta,
                                      const Eigen::VectorXd& xi,
                                      const Eigen::VectorXd& sigma2_uf) {
    const Eigen::VectorXd b = path_loss(cfg);
    const Eigen::MatrixXd mix = mixing_matrix(sigma2_uf, cfg.antennas);
    HarvestResult out;
    out.energy_j = cfg.frame_s * cfg.bandwidth_hz * beta * cfg.psd_max_w_per_hz *
                   (b.array() * (mix * xi).array()).matrix();
    out.ul_power_w = out.energy_j / cfg.frame_s;
    return out;
}

/// Per-WD SINR split into the perfect-CSI part and the maximum loss scale:
/// gamma = gamma_max - gamma_maxloss (x) sigma2_uf.
struct SinrDecomposition {
    Eigen::VectorXd gamma_max;
    Eigen::VectorXd gamma_maxloss;
    Eigen::VectorXd gamma;
};

/// Fills gamma_max and gamma_maxloss; gamma is left zero until the feedback
/// error is known (forward_rates completes it).
inline SinrDecomposition sinr_decomposition(const SystemConfig& cfg, double beta,
                                            const Eigen::VectorXd& xi) {
    const Eigen::VectorXd b = path_loss(cfg);
    const double base = cfg.bandwidth_hz * beta * cfg.psd_max_w_per_hz *
                        (cfg.antennas - cfg.wd_count) / cfg.noise_variance_w;
    SinrDecomposition s;
    // (M' xi)_k = (M-1) xi_k + sum(xi) with M' = (M-1) I + 1 1^T
    s.gamma_max = base * b.array().square() *
                  ((cfg.antennas - 1) * xi.array() + xi.sum());
    s.gamma_maxloss = base * cfg.antennas * b.array().square() * xi.array();
    s.gamma = Eigen::VectorXd::Zero(cfg.wd_count);
    return s;
}

/// Raised when the closed-form feedback error leaves its derivation regime
/// (denominator crosses zero or the error exceeds 1).
struct FeedbackRegimeError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Closed-form DL feedback quantization error for one WD:
///   sigma2 = (1+g) / ((1+g)^(1+c a) - c a * gl),  c = T B / (M-1),
/// with g = gamma_max, gl = gamma_maxloss, a = alpha. Result clamped to [0,1];
/// values outside signal that the small-perturbation derivation broke down.
inline double feedback_error_closed_form(double gamma_max, double gamma_maxloss, double alpha,
                                         double frame_s, double bandwidth_hz, int antennas) {
    const double c_alpha = alpha * frame_s * bandwidth_hz / (antennas - 1);
    const double one_p_g = 1.0 + gamma_max;
    const double denom = std::pow(one_p_g, 1.0 + c_alpha) - c_alpha * gamma_maxloss;
    if (!(denom > 0.0)) {
        std::ostringstream oss;
        oss << "feedback_error_closed_form: denominator " << denom
            << " <= 0 (approximation regime violated)";
        throw FeedbackRegimeError(oss.str());
    }
    double sigma2 = one_p_g / denom;
    if (sigma2 > 1.0 + 1e-9) {
        std::ostringstream oss;
        oss << "feedback_error_closed_form: sigma2 = " << sigma2
            << " > 1 (approximation regime violated)";
        throw FeedbackRegimeError(oss.str());
    }
    if (sigma2 > 1.0) sigma2 = 1.0;
    if (sigma2 < 0.0) sigma2 = 0.0;
    return sigma2;
}

struct ImplicitRateSolution {
    double rate_bps = 0.0;  ///< total UL rate r = (1-beta) B log2(x)
    double sigma2 = 0.0;    ///< implied feedback error x^(-c alpha) mapping
    int iterations = 0;
};

/// Direct iteration on the implicit rate equation
///   x = 1 + gamma_max - gamma_maxloss * x^(-alpha T B/(M-1)),  x_1 = 1+gamma_max,
/// to |x_n - x_{n-1}| < 1e-10 x_n. Independent oracle for the closed form above.
inline ImplicitRateSolution implicit_rate_solve(double gamma_max, double gamma_maxloss,
                                                double alpha, double frame_s,
                                                double bandwidth_hz, int antennas, double beta) {
    const double c_alpha = alpha * frame_s * bandwidth_hz / (antennas - 1);
    const int max_iter = 10000;
    double x = 1.0 + gamma_max;
    int it = 0;
    for (; it < max_iter; ++it) {
        const double x_next = 1.0 + gamma_max - gamma_maxloss * std::pow(x, -c_alpha);
        if (!(x_next > 1.0)) {
            std::ostringstream oss;
            oss << "implicit_rate_solve: iterate left (1, inf): x = " << x_next;
            throw FeedbackRegimeError(oss.str());
        }
        const double gap = std::abs(x_next - x);
        x = x_next;
        if (gap < 1e-10 * x) break;
    }
    if (it == max_iter) {
        std::ostringstream oss;
        oss << "implicit_rate_solve: no convergence after " << max_iter
            << " iterations; last iterate " << x << ", gap "
            << std::abs(1.0 + gamma_max - gamma_maxloss * std::pow(x, -c_alpha) - x);
        throw std::runtime_error(oss.str());
    }
    ImplicitRateSolution sol;
    sol.rate_bps = (1.0 - beta) * bandwidth_hz * std::log2(x);
    sol.sigma2 = gamma_maxloss > 0.0 ? std::min(1.0, std::pow(x, -c_alpha)) : 1.0;
    sol.iterations = it + 1;
    return sol;
}

/// Full per-WD forward report at one decision point.
struct RateReport {
    Eigen::VectorXd sigma2_uf;      ///< feedback quantization errors
    SinrDecomposition sinr;
    Eigen::VectorXd total_rate_bps;     ///< r
    Eigen::VectorXd wit_rate_bps;       ///< r_w = (1-alpha) r
    Eigen::VectorXd feedback_rate_bps;  ///< r_f = alpha r
    Eigen::VectorXd feedback_bits;      ///< n = T r_f
};

/// Forward model: sigma2 via the closed form, gamma via the SINR split,
/// r_w = (1-alpha)(1-beta) B log2(1+gamma), and the rate partition.
/// At alpha = 1 the WIT rate is zero and r is reported as 0.
inline RateReport forward_rates(const SystemConfig& cfg, const DecisionVariables& v) {
    const int k_count = cfg.wd_count;
    RateReport rep;
    rep.sinr = sinr_decomposition(cfg, v.beta, v.xi);
    rep.sigma2_uf.resize(k_count);
    rep.total_rate_bps.resize(k_count);
    rep.wit_rate_bps.resize(k_count);
    rep.feedback_rate_bps.resize(k_count);
    rep.feedback_bits.resize(k_count);
    for (int k = 0; k < k_count; ++k) {
        const double s2 = feedback_error_closed_form(rep.sinr.gamma_max[k],
                                                     rep.sinr.gamma_maxloss[k], v.alpha,
                                                     cfg.frame_s, cfg.bandwidth_hz, cfg.antennas);
        rep.sigma2_uf[k] = s2;
        const double gamma = rep.sinr.gamma_max[k] - rep.sinr.gamma_maxloss[k] * s2;
        rep.sinr.gamma[k] = gamma;
        const double r_w =
            (1.0 - v.alpha) * (1.0 - v.beta) * cfg.bandwidth_hz * std::log2(1.0 + gamma);
        rep.wit_rate_bps[k] = r_w;
        rep.total_rate_bps[k] =
            v.alpha < 1.0 ? r_w / (1.0 - v.alpha)
                          : (1.0 - v.beta) * cfg.bandwidth_hz * std::log2(1.0 + gamma);
        rep.feedback_rate_bps[k] = v.alpha * rep.total_rate_bps[k];
        rep.feedback_bits[k] = cfg.frame_s * rep.feedback_rate_bps[k];
    }
    if (v.alpha >= 1.0) rep.wit_rate_bps.setZero();
    return rep;
}

}  // namespace rates
}  // namespace wpcn
