#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wpcn/rate_analytics.hpp"
#include "wpcn/specfun.hpp"
#include "wpcn/system_model.hpp"

namespace wpcn {
namespace mc {

/// Deterministic counter-free generator (splitmix64 core, Box-Muller normals).
/// One stream per realization index, derived from a master seed, so growing
/// the trial count never changes earlier draws.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng for_realization(std::uint64_t master_seed, std::uint64_t index) {
        std::uint64_t s = master_seed;
        s ^= (index + 0x9e3779b97f4a7c15ULL) * 0xbf58476d1ce4e5b9ULL;
        return Rng(mix(s));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// uniform on [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    /// standard circularly-symmetric complex Gaussian, unit variance
    std::complex<double> cnormal() {
        const double re = normal();
        const double im = normal();
        return {re * 0.7071067811865476, im * 0.7071067811865476};
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::uint64_t state_;
};

/// One Monte-Carlo draw: fading matrices, quantized feedback directions,
/// the injected per-WD quantization errors, and the energy beam.
struct ChannelRealization {
    Eigen::MatrixXcd h_ul, h_dl;   ///< Rayleigh coefficients, entries CN(0,1)
    Eigen::MatrixXcd g_ul, g_dl;   ///< scaled by diag(b^(1/2))
    Eigen::MatrixXcd g_fed;        ///< unit-norm fed-back DL directions
    Eigen::VectorXd injected_error;  ///< exact sin^2 angle per WD
    Eigen::VectorXcd beam;         ///< unit-norm beam direction
    double beam_gain = 0.0;        ///< norm of the raw combination G_fed xi^(1/2)
    std::uint64_t seed = 0;
};

struct TrialStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd std_err;  ///< sample std / sqrt(trials)
    int trials = 0;
};

/// Draws the UL/DL Rayleigh matrices for one realization.
inline void generate_channels(const SystemConfig& cfg, const Eigen::VectorXd& b, Rng& rng,
                              ChannelRealization& out) {
    const int m = cfg.antennas, k_count = cfg.wd_count;
    out.h_ul.resize(m, k_count);
    out.h_dl.resize(m, k_count);
    for (int k = 0; k < k_count; ++k)
        for (int i = 0; i < m; ++i) out.h_ul(i, k) = rng.cnormal();
    for (int k = 0; k < k_count; ++k)
        for (int i = 0; i < m; ++i) out.h_dl(i, k) = rng.cnormal();
    const Eigen::VectorXd root_b = b.cwiseSqrt();
    out.g_ul = out.h_ul * root_b.asDiagonal();
    out.g_dl = out.h_dl * root_b.asDiagonal();
}

/// Quantizes one DL channel direction with an exact RVQ error sample:
/// returns a unit vector at angle theta from g with sin^2 theta drawn from
/// the min-of-2^n Beta(M-1,1) law, a uniformly random orthogonal component,
/// and a uniformly random carrier phase. The error is exact by construction.
inline Eigen::VectorXcd apply_rvq(const Eigen::VectorXcd& g, double n_bits, Rng& rng,
                                  double* error_out = nullptr) {
    const int m = static_cast<int>(g.size());
    const Eigen::VectorXcd dir = g / g.norm();
    const double z = specfun::rvq_error_sample(n_bits, m, rng.uniform());
    Eigen::VectorXcd ortho(m);
    double norm = 0.0;
    do {
        for (int i = 0; i < m; ++i) ortho[i] = rng.cnormal();
        ortho -= dir.dot(ortho) * dir;  // Eigen dot conjugates the left argument
        norm = ortho.norm();
    } while (!(norm > 1e-30));
    ortho /= norm;
    const double phase = 6.283185307179586 * rng.uniform();
    const std::complex<double> rot(std::cos(phase), std::sin(phase));
    if (error_out) *error_out = z;
    return rot * (std::sqrt(1.0 - z) * dir + std::sqrt(z) * ortho);
}

struct BeamformerResult {
    Eigen::VectorXcd direction;  ///< unit norm
    double gain = 0.0;           ///< norm of the raw combination (mean-square 1)
    bool degenerate = false;     ///< zero-vector collision, caller should resample
};

/// Energy beam w = G_fed xi^(1/2). The raw combination has unit mean-square
/// norm; its realized norm is kept as `gain` so harvested-energy statistics
/// follow the mixing-matrix law exactly.
inline BeamformerResult beamformer(const Eigen::MatrixXcd& g_fed, const Eigen::VectorXd& xi) {
    BeamformerResult res;
    const Eigen::VectorXcd raw = g_fed * xi.cwiseSqrt().cast<std::complex<double>>();
    res.gain = raw.norm();
    if (!(res.gain > 1e-150)) {
        res.degenerate = true;
        res.direction = Eigen::VectorXcd::Zero(g_fed.rows());
        return res;
    }
    res.direction = raw / res.gain;
    return res;
}

/// Full realization for a decision point: channels, per-WD RVQ with the given
/// bit counts, and the beam.
inline ChannelRealization realize(const SystemConfig& cfg, const Eigen::VectorXd& b,
                                  const Eigen::VectorXd& xi, const Eigen::VectorXd& n_bits,
                                  std::uint64_t master_seed, std::uint64_t index) {
    Rng rng = Rng::for_realization(master_seed, index);
    ChannelRealization r;
    r.seed = master_seed;
    generate_channels(cfg, b, rng, r);
    r.g_fed.resize(cfg.antennas, cfg.wd_count);
    r.injected_error.resize(cfg.wd_count);
    for (int k = 0; k < cfg.wd_count; ++k) {
        double err = 0.0;
        r.g_fed.col(k) = apply_rvq(r.g_dl.col(k), n_bits[k], rng, &err);
        r.injected_error[k] = err;
    }
    const BeamformerResult beam = beamformer(r.g_fed, xi);
    r.beam = beam.direction;
    r.beam_gain = beam.gain;
    return r;
}

struct HarvestRates {
    Eigen::VectorXd energy_j;
    Eigen::VectorXd ul_power_w;
    Eigen::VectorXd wit_rate_bps;
    bool discarded = false;  ///< UL Gram matrix numerically singular
};

/// Measures one realization: harvested energy from the DL beam, then the
/// ZF-detector SINR and WIT rate on the UL with the harvested power.
inline HarvestRates harvest_and_rates(const ChannelRealization& r, const SystemConfig& cfg,
                                      const rates::DecisionVariables& v) {
    const int k_count = cfg.wd_count;
    HarvestRates out;
    const Eigen::VectorXcd w_raw = r.beam_gain * r.beam;
    out.energy_j = cfg.frame_s * cfg.bandwidth_hz * v.beta * cfg.psd_max_w_per_hz *
                   (r.g_dl.adjoint() * w_raw).cwiseAbs2();
    out.ul_power_w = out.energy_j / cfg.frame_s;

    const Eigen::MatrixXcd gram = r.g_ul.adjoint() * r.g_ul;
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (!(smin > 0.0) || smax / smin > 1e12) {
        out.discarded = true;
        out.wit_rate_bps = Eigen::VectorXd::Zero(k_count);
        return out;
    }
    const Eigen::MatrixXcd zf = r.g_ul * gram.inverse();
    out.wit_rate_bps.resize(k_count);
    for (int k = 0; k < k_count; ++k) {
        const Eigen::VectorXcd a = zf.col(k);
        const double signal = out.ul_power_w[k] * std::norm(a.dot(r.g_ul.col(k)));
        double interference = 0.0;
        for (int i = 0; i < k_count; ++i) {
            if (i != k) interference += out.ul_power_w[i] * std::norm(a.dot(r.g_ul.col(i)));
        }
        const double noise = a.squaredNorm() * cfg.noise_variance_w;
        const double sinr = signal / (interference + noise);
        out.wit_rate_bps[k] =
            (1.0 - v.alpha) * (1.0 - v.beta) * cfg.bandwidth_hz * std::log2(1.0 + sinr);
    }
    return out;
}

struct ForwardExperiment {
    TrialStats sim_rate;       ///< empirical WIT rates, bit/s
    TrialStats sim_energy;     ///< empirical harvested energy, joule
    rates::RateReport analytic;
    Eigen::VectorXd bits_used;  ///< per-WD RVQ bits fed to the sampler
    int discarded = 0;
    bool bits_floored = false;  ///< analytic bit count fell below the 1-bit floor
};

/// Simulation and analytic rows side by side for one decision point.
/// Feedback bits come from the analytic report (n = T alpha r), floored at
/// one bit; when the floor binds (e.g. alpha = 0) the flag reports the
/// sim/analytic mismatch instead of hiding it.
inline ForwardExperiment run_forward_experiment(const SystemConfig& cfg,
                                                const rates::DecisionVariables& v, int trials,
                                                std::uint64_t master_seed) {
    if (trials < 2) throw std::invalid_argument("run_forward_experiment: need trials >= 2");
    const SystemConfig c = validated(cfg);
    const Eigen::VectorXd b = path_loss(c);
    ForwardExperiment exp;
    exp.analytic = rates::forward_rates(c, v);
    exp.bits_used = exp.analytic.feedback_bits.cwiseMax(1.0);
    exp.bits_floored = (exp.analytic.feedback_bits.array() < 1.0).any();

    const int k_count = c.wd_count;
    Eigen::VectorXd sum_r = Eigen::VectorXd::Zero(k_count), sum_r2 = sum_r;
    Eigen::VectorXd sum_e = sum_r, sum_e2 = sum_r;
    int kept = 0;
    for (int t = 0; t < trials; ++t) {
        const ChannelRealization r = realize(c, b, v.xi, exp.bits_used, master_seed, t);
        const HarvestRates hr = harvest_and_rates(r, c, v);
        if (hr.discarded) {
            ++exp.discarded;
            continue;
        }
        ++kept;
        sum_r += hr.wit_rate_bps;
        sum_r2 += hr.wit_rate_bps.cwiseAbs2();
        sum_e += hr.energy_j;
        sum_e2 += hr.energy_j.cwiseAbs2();
    }
    if (kept < 2) throw std::runtime_error("run_forward_experiment: fewer than 2 usable trials");
    auto finish = [kept](const Eigen::VectorXd& s, const Eigen::VectorXd& s2) {
        TrialStats st;
        st.trials = kept;
        st.mean = s / kept;
        const Eigen::VectorXd var =
            ((s2 - s.cwiseAbs2() / kept) / (kept - 1)).cwiseMax(0.0);
        st.std_err = (var / kept).cwiseSqrt();
        return st;
    };
    exp.sim_rate = finish(sum_r, sum_r2);
    exp.sim_energy = finish(sum_e, sum_e2);
    return exp;
}

struct ParetoCheck {
    Eigen::VectorXd combination_mean;   ///< energy of the combination beam
    Eigen::VectorXd leaked_mean;  ///< energy with part of the weight leaked
    Eigen::VectorXd diff_mean;    ///< paired difference, combination - leaked
    Eigen::VectorXd diff_std_err;
    bool dominant = false;  ///< diff >= -3 s.e. componentwise
};

/// Monte-Carlo version of the pareto-optimality argument: leaking a fraction
/// of the beam weight into the orthogonal complement of the fed-back
/// directions must not increase any WD's harvested energy (given every WD
/// feeds back at least one bit).
inline ParetoCheck pareto_check(const SystemConfig& cfg, double beta, const Eigen::VectorXd& xi,
                                const Eigen::VectorXd& n_bits, double leak_fraction, int trials,
                                std::uint64_t master_seed) {
    const SystemConfig c = validated(cfg);
    const Eigen::VectorXd b = path_loss(c);
    const int k_count = c.wd_count;
    const double scale = c.frame_s * c.bandwidth_hz * beta * c.psd_max_w_per_hz;

    Eigen::VectorXd sum_l = Eigen::VectorXd::Zero(k_count), sum_k = sum_l;
    Eigen::VectorXd sum_d = sum_l, sum_d2 = sum_l;
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::for_realization(master_seed, t);
        ChannelRealization r;
        generate_channels(c, b, rng, r);
        r.g_fed.resize(c.antennas, k_count);
        for (int k = 0; k < k_count; ++k) {
            r.g_fed.col(k) = apply_rvq(r.g_dl.col(k), n_bits[k], rng);
        }
        const Eigen::VectorXcd w_comb =
            r.g_fed * xi.cwiseSqrt().cast<std::complex<double>>();
        // one orthonormal complement direction carries the leaked weight
        Eigen::VectorXcd u(c.antennas);
        double norm = 0.0;
        do {
            for (int i = 0; i < c.antennas; ++i) u[i] = rng.cnormal();
            for (int k = 0; k < k_count; ++k) {
                const Eigen::VectorXcd col = r.g_fed.col(k);
                u -= col.dot(u) * col;
            }
            norm = u.norm();
        } while (!(norm > 1e-30));
        u /= norm;
        const Eigen::VectorXcd w_leaked =
            r.g_fed * ((1.0 - leak_fraction) * xi).cwiseSqrt().cast<std::complex<double>>() +
            std::sqrt(leak_fraction) * u;
        const Eigen::VectorXd e_comb = scale * (r.g_dl.adjoint() * w_comb).cwiseAbs2();
        const Eigen::VectorXd e_leaked = scale * (r.g_dl.adjoint() * w_leaked).cwiseAbs2();
        sum_l += e_comb;
        sum_k += e_leaked;
        sum_d += e_comb - e_leaked;
        sum_d2 += (e_comb - e_leaked).cwiseAbs2();
    }
    ParetoCheck out;
    out.combination_mean = sum_l / trials;
    out.leaked_mean = sum_k / trials;
    out.diff_mean = sum_d / trials;
    const Eigen::VectorXd var =
        ((sum_d2 - sum_d.cwiseAbs2() / trials) / (trials - 1)).cwiseMax(0.0);
    out.diff_std_err = (var / trials).cwiseSqrt();
    out.dominant = (out.diff_mean.array() >= -3.0 * out.diff_std_err.array()).all();
    return out;
}

}  // namespace mc
}  // namespace wpcn
