#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "hetcop/common.hpp"
#include "hetcop/dvine.hpp"
#include "hetcop/margins.hpp"
#include "hetcop/rng.hpp"

namespace hetcop {

// Benchmark data-generating processes. Gaussian innovations throughout;
// recursions start at their unconditional values and the first 1000 draws
// are discarded.

struct ArchParams {
    double alpha0 = 0.01;
    std::vector<double> alphas{0.5};  // alpha_1..alpha_q

    void validate() const {
        if (!(alpha0 > 0.0)) throw invalid_parameter("arch: alpha0 must be > 0");
        double sum = 0.0;
        for (double a : alphas) {
            if (a < 0.0) throw invalid_parameter("arch: lag coefficients must be >= 0");
            sum += a;
        }
        if (!(sum < 1.0)) throw invalid_parameter("arch: sum of lag coefficients must be < 1");
    }

    double unconditional_variance() const {
        double sum = std::accumulate(alphas.begin(), alphas.end(), 0.0);
        return alpha0 / (1.0 - sum);
    }
};

struct GarchParams {
    double alpha0 = 0.01, alpha1 = 0.05, beta1 = 0.9;

    void validate() const {
        if (!(alpha0 > 0.0) || alpha1 < 0.0 || beta1 < 0.0 || !(alpha1 + beta1 < 1.0))
            throw invalid_parameter("garch: need alpha0>0, alpha1,beta1>=0, alpha1+beta1<1");
    }

    double unconditional_variance() const { return alpha0 / (1.0 - alpha1 - beta1); }
};

struct SvParams {
    double h_bar = 0.8, phi1 = 0.5, sigma2 = 2.5;

    void validate() const {
        if (!(std::abs(phi1) < 1.0)) throw invalid_parameter("sv: need |phi1| < 1");
        if (!(sigma2 > 0.0)) throw invalid_parameter("sv: need sigma2 > 0");
    }
};

inline constexpr std::size_t kDgpBurnin = 1000;

inline std::vector<double> simulate_arch(const ArchParams& par, std::size_t T, std::uint64_t seed,
                                         std::size_t burnin = kDgpBurnin) {
    par.validate();
    Rng rng(seed);
    const std::size_t q = par.alphas.size();
    std::vector<double> y2(q, par.unconditional_variance());  // lagged squares, newest first
    std::vector<double> out;
    out.reserve(T);
    for (std::size_t t = 0; t < burnin + T; ++t) {
        double s2 = par.alpha0;
        for (std::size_t j = 0; j < q; ++j) s2 += par.alphas[j] * y2[j];
        double y = rng.normal() * std::sqrt(s2);
        for (std::size_t j = q - 1; j > 0; --j) y2[j] = y2[j - 1];
        if (q > 0) y2[0] = y * y;
        if (t >= burnin) out.push_back(y);
    }
    return out;
}

inline std::vector<double> simulate_garch(const GarchParams& par, std::size_t T,
                                          std::uint64_t seed, std::size_t burnin = kDgpBurnin) {
    par.validate();
    Rng rng(seed);
    double s2 = par.unconditional_variance();
    double y = 0.0;
    std::vector<double> out;
    out.reserve(T);
    for (std::size_t t = 0; t < burnin + T; ++t) {
        if (t > 0) s2 = par.alpha0 + par.alpha1 * y * y + par.beta1 * s2;
        y = rng.normal() * std::sqrt(s2);
        if (t >= burnin) out.push_back(y);
    }
    return out;
}

inline std::vector<double> simulate_sv(const SvParams& par, std::size_t T, std::uint64_t seed,
                                       std::size_t burnin = kDgpBurnin) {
    par.validate();
    Rng rng(seed);
    double sig = std::sqrt(par.sigma2);
    double h = par.h_bar;
    std::vector<double> out;
    out.reserve(T);
    for (std::size_t t = 0; t < burnin + T; ++t) {
        if (t > 0) h = par.h_bar + par.phi1 * (h - par.h_bar) + sig * rng.normal();
        double y = rng.normal() * std::exp(0.5 * h);
        if (t >= burnin) out.push_back(y);
    }
    return out;
}

/// Copula time-series model sample: u from the vine, y_t = F^{-1}(u_t).
inline std::vector<double> simulate_copula_model(const DVineSpec& spec, const Margin& margin,
                                                 std::size_t T, std::uint64_t seed) {
    auto u = simulate_uni(spec, T, seed);
    std::vector<double> y(T);
    for (std::size_t t = 0; t < T; ++t) y[t] = margin.quantile(u[t]);
    return y;
}

inline std::vector<std::vector<double>> simulate_copula_model_multi(
    const DVineSpec& spec, const std::vector<MarginPtr>& margins, std::size_t T,
    std::uint64_t seed) {
    auto u = simulate_multi(spec, T, seed);
    for (auto& row : u)
        for (std::size_t l = 0; l < row.size(); ++l) row[l] = margins[l]->quantile(row[l]);
    return u;
}

}  // namespace hetcop
