#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace hetcop {

/// Average ranks in 1..n (ties get midranks).
inline std::vector<double> ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
        double mid = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mid;
        i = j + 1;
    }
    return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

/// Sample Spearman correlation (Pearson correlation of midranks).
inline double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: bad sizes");
    auto rx = ranks(x);
    auto ry = ranks(y);
    return pearson(rx, ry);
}

struct Moments {
    double mean = 0, sd = 0, skewness = 0, kurtosis = 0;  // kurtosis is non-excess
};

inline Moments moments(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 4) throw std::invalid_argument("moments: need n >= 4");
    Moments m;
    for (double v : x) m.mean += v;
    m.mean /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : x) {
        double d = v - m.mean;
        double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m.sd = std::sqrt(m2 * static_cast<double>(n) / static_cast<double>(n - 1));
    m.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
    m.kurtosis = m2 > 0 ? m4 / (m2 * m2) : 0.0;
    return m;
}

/// Kolmogorov-Smirnov distance of a sample against the uniform(0,1) CDF.
inline double ks_uniform(std::vector<double> u) {
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - u[i]);
        d = std::max(d, u[i] - static_cast<double>(i) / n);
    }
    return d;
}

inline double sample_quantile(std::vector<double> x, double p) {
    if (x.empty()) throw std::invalid_argument("sample_quantile: empty");
    std::sort(x.begin(), x.end());
    double h = (static_cast<double>(x.size()) - 1.0) * p;
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= x.size()) return x.back();
    double w = h - static_cast<double>(lo);
    return (1.0 - w) * x[lo] + w * x[lo + 1];
}

inline double autocorr(std::span<const double> x, std::size_t lag) {
    const std::size_t n = x.size();
    if (n <= lag + 1) throw std::invalid_argument("autocorr: series too short");
    double mean = 0;
    for (double v : x) mean += v;
    mean /= n;
    double num = 0, den = 0;
    for (std::size_t t = 0; t < n; ++t) {
        double d = x[t] - mean;
        den += d * d;
        if (t + lag < n) num += d * (x[t + lag] - mean);
    }
    return den > 0 ? num / den : 0.0;
}

/// Rank-based PIT: r_i/(n+1), the usual empirical copula data construction.
inline std::vector<double> rank_pit(std::span<const double> x) {
    auto r = ranks(x);
    double denom = static_cast<double>(x.size()) + 1.0;
    for (double& v : r) v /= denom;
    return r;
}

/// Empirical copula C_n(a,b) of the paired sample.
inline double empirical_copula(std::span<const double> u, std::span<const double> v, double a,
                               double b) {
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] <= a && v[i] <= b) ++cnt;
    return static_cast<double>(cnt) / static_cast<double>(u.size());
}

}  // namespace hetcop
