#pragma once

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hetcop/dvine.hpp"
#include "hetcop/margins.hpp"
#include "hetcop/stats.hpp"
#include "hetcop/threads.hpp"

namespace hetcop {

// ---------------------------------------------------------------------------
// One-step-ahead predictive distribution, univariate
// ---------------------------------------------------------------------------

/// F_{t|t-1}(y) = F(u_t <= F_margin(y) | PIT(history)).
inline double predictive_cdf_uni(const DVineSpec& spec, const Margin& margin,
                                 std::span<const double> history_y, double y) {
    std::vector<double> hist_u(history_y.size());
    for (std::size_t i = 0; i < history_y.size(); ++i)
        hist_u[i] = clamp_unit_unchecked(margin.cdf(history_y[i]));
    return conditional_cdf(spec, hist_u, margin.cdf(y));
}

/// VaR_{t|t-1}(alpha) = F_margin^{-1}(conditional quantile of the copula).
inline double predictive_var_uni(const DVineSpec& spec, const Margin& margin,
                                 std::span<const double> history_y, double alpha) {
    std::vector<double> hist_u(history_y.size());
    for (std::size_t i = 0; i < history_y.size(); ++i)
        hist_u[i] = clamp_unit_unchecked(margin.cdf(history_y[i]));
    return margin.quantile(conditional_quantile(spec, hist_u, alpha));
}

// ---------------------------------------------------------------------------
// Next-slice simulation and portfolio predictive sample (multivariate)
// ---------------------------------------------------------------------------

namespace detail {

/// Simulate the m values of time slice T+1 conditional on a history whose
/// ConditionalGrid was produced by loglik_multi (full grid). History rows
/// are read-only; the new slice lives in a per-call scratch, so many draws
/// can share one history grid.
inline std::vector<double> simulate_next_slice(const DVineSpec& spec,
                                               const ConditionalGrid& hist_grid,
                                               std::span<const double> u_hist_stacked, Rng& rng) {
    const int m = spec.m, p = spec.p;
    const std::size_t nh = u_hist_stacked.size();  // stacked history length
    // the new slice can pair with up to m(p+1)-1 predecessors even when the
    // history grid itself is shallower
    const std::size_t depth =
        static_cast<std::size_t>(m) * (static_cast<std::size_t>(p) + 1) - 1;
    const int t_new = static_cast<int>(nh / static_cast<std::size_t>(m)) + 1;
    std::vector<double> scratch(static_cast<std::size_t>(m) * depth * 2, 0.0);
    std::vector<double> u_new(static_cast<std::size_t>(m), 0.0);

    auto g_read = [&](std::size_t i, std::size_t r, int side) {
        if (i <= nh) return hist_grid.at(i, r, side);
        return scratch[(((i - nh) - 1) * depth + (r - 1)) * 2 + static_cast<std::size_t>(side)];
    };
    auto g_write = [&](std::size_t i, std::size_t r, int side, double v) {
        scratch[(((i - nh) - 1) * depth + (r - 1)) * 2 + static_cast<std::size_t>(side)] = v;
    };
    auto u_at = [&](std::size_t i) {
        return i <= nh ? u_hist_stacked[i - 1] : u_new[i - nh - 1];
    };

    for (int l = 1; l <= m; ++l) {
        std::size_t i = nh + static_cast<std::size_t>(l);
        std::size_t j_min = static_cast<std::size_t>(
            std::max<long long>(1, static_cast<long long>(m) * (t_new - 1 - p) + 1));
        double w = rng.uniform();
        std::size_t span = i - j_min;
        std::vector<double> a(span), qv(span + 1);
        for (std::size_t j = j_min; j < i; ++j) {
            std::size_t r = (i - 1) - j;
            a[j - j_min] = (r == 0) ? u_at(j) : g_read(i - 1, r, 1);
        }
        qv[0] = w;
        for (std::size_t j = j_min; j < i; ++j) {
            detail::StackIndex si = detail::stack_index(i, j, m);
            const PairCopula& pc = spec.pair(si.k, si.l2, si.l1);
            qv[j - j_min + 1] = pc.h1_inv(qv[j - j_min], a[j - j_min]);
        }
        u_new[static_cast<std::size_t>(l - 1)] = qv[span];
        for (std::size_t j = j_min; j < i; ++j) {
            detail::StackIndex si = detail::stack_index(i, j, m);
            const PairCopula& pc = spec.pair(si.k, si.l2, si.l1);
            g_write(i, i - j, 0, clamp_unit_unchecked(qv[j - j_min]));
            g_write(i, i - j, 1, clamp_unit_unchecked(pc.h2(a[j - j_min], qv[j - j_min + 1])));
        }
    }
    return u_new;
}

}  // namespace detail

/// Simulated-sample representation of the one-day-ahead portfolio return
/// distribution: draws of w' y_{T+1} conditional on the history.
struct PredictiveSample {
    std::vector<double> draws;

    double quantile(double alpha) const { return sample_quantile(draws, alpha); }
};

inline PredictiveSample predictive_portfolio(const DVineSpec& spec,
                                             const std::vector<MarginPtr>& margins,
                                             const std::vector<std::vector<double>>& history_y,
                                             std::span<const double> weights, std::size_t n,
                                             std::uint64_t seed) {
    const int m = spec.m;
    if (static_cast<int>(weights.size()) != m)
        throw invalid_parameter("predictive_portfolio: weight count != m");
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    if (std::abs(wsum - 1.0) > 1e-8)
        throw invalid_parameter("predictive_portfolio: weights must sum to 1");

    // PIT the history, run the likelihood once for the conditional grid
    std::vector<std::vector<double>> u(history_y.size(),
                                       std::vector<double>(static_cast<std::size_t>(m)));
    std::vector<double> stacked;
    for (std::size_t t = 0; t < history_y.size(); ++t)
        for (int l = 0; l < m; ++l) {
            u[t][static_cast<std::size_t>(l)] = clamp_unit_unchecked(
                margins[static_cast<std::size_t>(l)]->cdf(history_y[t][static_cast<std::size_t>(l)]));
            stacked.push_back(u[t][static_cast<std::size_t>(l)]);
        }
    LoglikOptions opt;
    auto res = loglik_multi(spec, u, opt);

    PredictiveSample out;
    out.draws.resize(n);
    Rng rng(seed);
    std::vector<double> y(static_cast<std::size_t>(m));
    for (std::size_t d = 0; d < n; ++d) {
        auto un = detail::simulate_next_slice(spec, res.grid, stacked, rng);
        double port = 0.0;
        for (int l = 0; l < m; ++l)
            port += weights[static_cast<std::size_t>(l)] *
                    margins[static_cast<std::size_t>(l)]->quantile(un[static_cast<std::size_t>(l)]);
        out.draws[d] = port;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exceedance counting and the conditional-coverage test
// ---------------------------------------------------------------------------

struct BacktestResult {
    double alpha = 0.0;
    double alpha_hat = 0.0;                        // mean exceedance rate over all days
    long long n00 = 0, n01 = 0, n10 = 0, n11 = 0;  // indicator transition counts
    double lr_uc = 0.0, lr_ind = 0.0, lr_cc = 0.0;
    double p_uc = 1.0, p_ind = 1.0, p_cc = 1.0;
    bool degenerate = false;  // all-zero or all-one indicator: LR_uc only
};

namespace detail {
inline double xlogy(double x, double y) { return x > 0.0 ? x * std::log(y) : 0.0; }

inline BacktestResult backtest_counts(double alpha, double n0, double n1, long long n00,
                                      long long n01, long long n10, long long n11) {
    BacktestResult r;
    r.alpha = alpha;
    r.n00 = n00;
    r.n01 = n01;
    r.n10 = n10;
    r.n11 = n11;
    double n = n0 + n1;
    r.alpha_hat = n > 0 ? n1 / n : 0.0;
    double pi = n > 0 ? n1 / n : 0.0;

    r.lr_uc = -2.0 * (detail::xlogy(n0, 1.0 - alpha) + detail::xlogy(n1, alpha) -
                      detail::xlogy(n0, 1.0 - pi) - detail::xlogy(n1, pi));
    r.degenerate = (n1 == 0.0) || (n0 == 0.0);

    boost::math::chi_squared_distribution<double> chi1(1.0), chi2(2.0);
    r.p_uc = 1.0 - boost::math::cdf(chi1, std::max(r.lr_uc, 0.0));
    if (!r.degenerate) {
        double d0 = static_cast<double>(n00 + n01), d1 = static_cast<double>(n10 + n11);
        double pi01 = d0 > 0 ? static_cast<double>(n01) / d0 : 0.0;
        double pi11 = d1 > 0 ? static_cast<double>(n11) / d1 : 0.0;
        double pi2 = (d0 + d1) > 0 ? static_cast<double>(n01 + n11) / (d0 + d1) : 0.0;
        r.lr_ind = -2.0 * (detail::xlogy(static_cast<double>(n00 + n10), 1.0 - pi2) +
                           detail::xlogy(static_cast<double>(n01 + n11), pi2) -
                           detail::xlogy(static_cast<double>(n00), 1.0 - pi01) -
                           detail::xlogy(static_cast<double>(n01), pi01) -
                           detail::xlogy(static_cast<double>(n10), 1.0 - pi11) -
                           detail::xlogy(static_cast<double>(n11), pi11));
        r.lr_cc = r.lr_uc + r.lr_ind;
        r.p_ind = 1.0 - boost::math::cdf(chi1, std::max(r.lr_ind, 0.0));
        r.p_cc = 1.0 - boost::math::cdf(chi2, std::max(r.lr_cc, 0.0));
    } else {
        r.lr_ind = 0.0;
        r.lr_cc = r.lr_uc;
        r.p_ind = 1.0;
        r.p_cc = r.p_uc;
    }
    return r;
}
}  // namespace detail

/// Christoffersen conditional-coverage test of the exceedance indicator
/// 1(y_t < VaR_t). alpha_hat and LR_uc use all evaluated days; the
/// independence statistic uses the first-order transition counts. Cells
/// with zero counts follow the 0 log 0 = 0 convention.
inline BacktestResult backtest(std::span<const double> realized, std::span<const double> var_series,
                               double alpha) {
    if (realized.size() != var_series.size() || realized.size() < 100)
        throw invalid_parameter("backtest: need aligned series of length >= 100");
    const std::size_t n = realized.size();
    std::vector<int> ind(n);
    for (std::size_t t = 0; t < n; ++t) ind[t] = realized[t] < var_series[t] ? 1 : 0;
    long long n1 = 0, n00 = 0, n01 = 0, n10 = 0, n11 = 0;
    for (std::size_t t = 0; t < n; ++t) {
        n1 += ind[t];
        if (t > 0) {
            if (ind[t - 1] == 0 && ind[t] == 0) ++n00;
            if (ind[t - 1] == 0 && ind[t] == 1) ++n01;
            if (ind[t - 1] == 1 && ind[t] == 0) ++n10;
            if (ind[t - 1] == 1 && ind[t] == 1) ++n11;
        }
    }
    return detail::backtest_counts(alpha, static_cast<double>(n - n1), static_cast<double>(n1),
                                   n00, n01, n10, n11);
}

/// Variant for when only the transition counts are known; the marginal
/// counts are then taken over the transition targets.
inline BacktestResult backtest_from_counts(long long n00, long long n01, long long n10,
                                           long long n11, double alpha) {
    return detail::backtest_counts(alpha, static_cast<double>(n00 + n10),
                                   static_cast<double>(n01 + n11), n00, n01, n10, n11);
}

// ---------------------------------------------------------------------------
// In-sample rolling backtest
// ---------------------------------------------------------------------------

struct BacktestRow {
    double alpha = 0.0;
    double alpha_hat = 0.0;
    double lr_uc = 0.0, lr_ind = 0.0, lr_cc = 0.0, p_cc = 1.0;
    bool reject95 = false, reject99 = false;
};

/// One-step-ahead VaR for every day t = 2..T from a single fitted model
/// (the in-sample protocol), then the exceedance table across the alpha
/// set. Days are independent given the fit, so the VaR pass parallelizes.
inline std::vector<BacktestRow> rolling_backtest_uni(const DVineSpec& spec, const Margin& margin,
                                                     std::span<const double> y,
                                                     std::span<const double> alphas,
                                                     unsigned threads = 0) {
    const std::size_t T = y.size();
    if (T < 101) throw invalid_parameter("rolling_backtest_uni: need T > 100");
    std::vector<double> u(T);
    for (std::size_t t = 0; t < T; ++t) u[t] = clamp_unit_unchecked(margin.cdf(y[t]));
    LoglikOptions opt;
    opt.threads = threads;
    auto res = loglik_uni(spec, u, opt);
    const ConditionalGrid& g = res.grid;
    const int p = spec.p;

    // VaR matrix for days t = 1..T-1 (0-based): condition on the grid column
    // of day t-1, exactly as in sequential simulation
    std::vector<std::vector<double>> var(alphas.size(), std::vector<double>(T - 1));
    parallel_for(T - 1, threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t idx = b; idx < e; ++idx) {
            std::size_t t = idx + 1;
            int K = static_cast<int>(std::min<std::size_t>(t, static_cast<std::size_t>(p)));
            for (std::size_t a = 0; a < alphas.size(); ++a) {
                double x = clamp_unit(alphas[a]);
                for (int k = K; k >= 1; --k) {
                    double cond = (k == 1) ? u[t - 1]
                                           : g.at(t - 1, static_cast<std::size_t>(k - 1), 1);
                    x = spec.pair_uni(k).h1_inv(x, cond);
                }
                var[a][idx] = margin.quantile(x);
            }
        }
    });

    std::vector<BacktestRow> rows;
    std::span<const double> realized(y.data() + 1, T - 1);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        BacktestResult r = backtest(realized, var[a], alphas[a]);
        BacktestRow row;
        row.alpha = alphas[a];
        row.alpha_hat = r.alpha_hat;
        row.lr_uc = r.lr_uc;
        row.lr_ind = r.lr_ind;
        row.lr_cc = r.lr_cc;
        row.p_cc = r.p_cc;
        row.reject95 = r.p_cc < 0.05;
        row.reject99 = r.p_cc < 0.01;
        rows.push_back(row);
    }
    return rows;
}

/// Equally-weighted (or custom-weighted) portfolio backtest for the
/// multivariate model: each day's predictive sample is simulated with its
/// own seed stream derived from (seed, t).
inline std::vector<BacktestRow> rolling_backtest_portfolio(
    const DVineSpec& spec, const std::vector<MarginPtr>& margins,
    const std::vector<std::vector<double>>& y, std::span<const double> weights,
    std::span<const double> alphas, std::size_t draws_per_day, std::uint64_t seed,
    unsigned threads = 0) {
    const std::size_t T = y.size();
    const int m = spec.m;
    std::vector<std::vector<double>> u(T, std::vector<double>(static_cast<std::size_t>(m)));
    std::vector<double> stacked(T * static_cast<std::size_t>(m));
    for (std::size_t t = 0; t < T; ++t)
        for (int l = 0; l < m; ++l) {
            double v = clamp_unit_unchecked(
                margins[static_cast<std::size_t>(l)]->cdf(y[t][static_cast<std::size_t>(l)]));
            u[t][static_cast<std::size_t>(l)] = v;
            stacked[t * static_cast<std::size_t>(m) + static_cast<std::size_t>(l)] = v;
        }
    LoglikOptions opt;
    opt.threads = threads;
    auto res = loglik_multi(spec, u, opt);

    // realized portfolio series
    std::vector<double> port(T);
    for (std::size_t t = 0; t < T; ++t) {
        double s = 0.0;
        for (int l = 0; l < m; ++l)
            s += weights[static_cast<std::size_t>(l)] * y[t][static_cast<std::size_t>(l)];
        port[t] = s;
    }

    std::vector<std::vector<double>> var(alphas.size(), std::vector<double>(T - 1));
    parallel_for(T - 1, threads, [&](std::size_t b, std::size_t e) {
        std::vector<double> sample(draws_per_day);
        for (std::size_t idx = b; idx < e; ++idx) {
            std::size_t t = idx + 1;  // forecast day (0-based)
            std::span<const double> hist(stacked.data(), t * static_cast<std::size_t>(m));
            Rng rng(seed, t);
            for (std::size_t d = 0; d < draws_per_day; ++d) {
                auto un = detail::simulate_next_slice(spec, res.grid, hist, rng);
                double s = 0.0;
                for (int l = 0; l < m; ++l)
                    s += weights[static_cast<std::size_t>(l)] *
                         margins[static_cast<std::size_t>(l)]->quantile(
                             un[static_cast<std::size_t>(l)]);
                sample[d] = s;
            }
            std::sort(sample.begin(), sample.end());
            for (std::size_t a = 0; a < alphas.size(); ++a) {
                double h = (static_cast<double>(draws_per_day) - 1.0) * alphas[a];
                std::size_t lo = static_cast<std::size_t>(h);
                double wfrac = h - static_cast<double>(lo);
                var[a][idx] = lo + 1 < draws_per_day
                                  ? (1.0 - wfrac) * sample[lo] + wfrac * sample[lo + 1]
                                  : sample.back();
            }
        }
    });

    std::vector<BacktestRow> rows;
    std::span<const double> realized(port.data() + 1, T - 1);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        BacktestResult r = backtest(realized, var[a], alphas[a]);
        BacktestRow row;
        row.alpha = alphas[a];
        row.alpha_hat = r.alpha_hat;
        row.lr_uc = r.lr_uc;
        row.lr_ind = r.lr_ind;
        row.lr_cc = r.lr_cc;
        row.p_cc = r.p_cc;
        row.reject95 = r.p_cc < 0.05;
        row.reject99 = r.p_cc < 0.01;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace hetcop
