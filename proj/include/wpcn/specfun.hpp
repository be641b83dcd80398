#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wpcn {
namespace specfun {

/// Principal branch of the Lambert W function: returns w >= -1 with w*exp(w) = x.
/// Defined for x >= -1/e; Halley iteration, tolerance 1e-14, at most 50 steps.
inline double lambert_w0(double x) {
    constexpr double inv_e = 0.36787944117144233;  // 1/e
    if (std::isnan(x) || x < -inv_e) {
        throw std::domain_error("lambert_w0: argument below -1/e");
    }
    if (x == 0.0) return 0.0;

    double w;
    if (x < -inv_e + 0.04) {
        // branch-point series in p = sqrt(2(e x + 1))
        const double p = std::sqrt(std::max(0.0, 2.0 * (std::exp(1.0) * x + 1.0)));
        w = -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0;
        if (p < 1e-4) return w;  // series already exact; Halley degenerates at w = -1
    } else if (x < std::exp(1.0)) {
        w = std::log1p(x > -0.5 ? x : -0.5 + 1e-9);
        if (x < 0.0) w = x * (1.0 - x);  // series seed for small negatives
    } else {
        const double lx = std::log(x);
        w = lx - std::log(lx);
    }

    for (int it = 0; it < 50; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        // Halley step: f' = e^w (w+1), f'' = e^w (w+2)
        const double denom = ew * wp1 - f * (w + 2.0) / (2.0 * wp1);
        const double dw = f / denom;
        w -= dw;
        if (std::abs(dw) <= 1e-14 * (std::abs(w) + 1e-300)) break;
    }
    if (w < -1.0) w = -1.0;  // clamp roundoff at the branch point
    return w;
}

/// log Beta(p, q) for p, q > 0.
inline double log_beta(double p, double q) {
    return std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q);
}

/// Mean RVQ quantization error E{sin^2(angle(g_fed, g))} for a random codebook
/// of 2^n_bits unit vectors in C^m: 2^n * Beta(2^n, m/(m-1)) with q = 1/(m-1).
///
/// Differencing lgamma at N and N+q cancels catastrophically once N is large,
/// so the Gamma ratio is evaluated three ways: the exact 1/(N+1) form at m = 2,
/// a log1p product recurrence for N up to 2^20, and the Gamma-ratio asymptote
/// Gamma(1+q) N^(-q) (1 - q(q+1)/(2N)) beyond that (truncation below 1e-11).
inline double rvq_error_mean(double n_bits, int m_antennas) {
    if (m_antennas < 2) throw std::domain_error("rvq_error_mean: need M >= 2");
    if (!(n_bits >= 0.0)) throw std::domain_error("rvq_error_mean: need n_bits >= 0");
    const double q = 1.0 / (m_antennas - 1);
    if (m_antennas == 2) {
        const double inv_n = std::exp2(-n_bits);
        return inv_n / (1.0 + inv_n);
    }
    if (n_bits <= 20.0) {
        // Gamma(N+1)/Gamma(N+1+q) peeled down to arguments in (1, 2]
        double z = std::exp2(n_bits) + 1.0;
        double log_ratio = 0.0;
        while (z > 2.0) {
            z -= 1.0;
            log_ratio -= std::log1p(q / z);
        }
        return std::exp(log_ratio + std::lgamma(z) - std::lgamma(z + q) +
                        std::lgamma(1.0 + q));
    }
    const double correction =
        n_bits < 1000.0 ? q * (q + 1.0) / (2.0 * std::exp2(n_bits)) : 0.0;
    return std::exp(std::lgamma(1.0 + q) - q * n_bits * std::log(2.0)) * (1.0 - correction);
}

/// Exact sample of the RVQ error: inverse CDF, at uniform quantile u, of the
/// minimum of 2^n_bits iid Beta(m-1, 1) variates,
///   z = (1 - (1-u)^(1/N))^(1/(m-1)),  N = 2^n_bits.
/// log1p/expm1 forms keep precision for large codebooks and extreme u.
inline double rvq_error_sample(double n_bits, int m_antennas, double u) {
    if (m_antennas < 2) throw std::domain_error("rvq_error_sample: need M >= 2");
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("rvq_error_sample: u outside [0,1]");
    if (u == 0.0) return 0.0;
    if (u == 1.0) return 1.0;
    const double t = std::log1p(-u) * std::exp2(-n_bits);  // (1/N) ln(1-u), <= 0
    const double base = -std::expm1(t);                    // 1 - (1-u)^(1/N)
    return std::pow(base, 1.0 / (m_antennas - 1));
}

}  // namespace specfun
}  // namespace wpcn
