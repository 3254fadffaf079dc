#pragma once

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "hetcop/common.hpp"
#include "hetcop/roots.hpp"
#include "hetcop/special.hpp"
#include "hetcop/stats.hpp"

namespace hetcop {

/// A univariate marginal distribution: everything the copula machinery
/// needs from a margin is F, F^{-1}, f and the mean.
class Margin {
  public:
    virtual ~Margin() = default;
    virtual double pdf(double y) const = 0;
    virtual double cdf(double y) const = 0;
    virtual double quantile(double p) const = 0;
    virtual double mean() const = 0;
};

using MarginPtr = std::shared_ptr<const Margin>;

// ---------------------------------------------------------------------------
// Parametric margins (used by the simulators and in tests)
// ---------------------------------------------------------------------------

class NormalMargin final : public Margin {
  public:
    NormalMargin(double mu, double sd) : mu_(mu), sd_(sd) {}
    double pdf(double y) const override { return norm_pdf((y - mu_) / sd_) / sd_; }
    double cdf(double y) const override { return norm_cdf((y - mu_) / sd_); }
    double quantile(double p) const override { return mu_ + sd_ * norm_quantile(p); }
    double mean() const override { return mu_; }

  private:
    double mu_, sd_;
};

/// Y = loc + scale * T_nu.
class StudentTScaledMargin final : public Margin {
  public:
    StudentTScaledMargin(double loc, double scale, double nu) : loc_(loc), scale_(scale), nu_(nu) {}
    double pdf(double y) const override { return t_pdf((y - loc_) / scale_, nu_) / scale_; }
    double cdf(double y) const override { return t_cdf((y - loc_) / scale_, nu_); }
    double quantile(double p) const override { return loc_ + scale_ * t_quantile(p, nu_); }
    double mean() const override { return loc_; }

  private:
    double loc_, scale_, nu_;
};

class BetaMargin final : public Margin {
  public:
    BetaMargin(double a, double b) : dist_(a, b), mean_(a / (a + b)) {}
    double pdf(double y) const override {
        return (y <= 0.0 || y >= 1.0) ? 0.0 : boost::math::pdf(dist_, y);
    }
    double cdf(double y) const override {
        if (y <= 0.0) return 0.0;
        if (y >= 1.0) return 1.0;
        return boost::math::cdf(dist_, y);
    }
    double quantile(double p) const override { return boost::math::quantile(dist_, p); }
    double mean() const override { return mean_; }

  private:
    boost::math::beta_distribution<double> dist_;
    double mean_;
};

/// ln Y ~ N(mu, sigma^2).
class LognormalMargin final : public Margin {
  public:
    LognormalMargin(double mu, double sigma)
        : dist_(mu, sigma), mean_(std::exp(mu + 0.5 * sigma * sigma)) {}
    double pdf(double y) const override { return y <= 0.0 ? 0.0 : boost::math::pdf(dist_, y); }
    double cdf(double y) const override { return y <= 0.0 ? 0.0 : boost::math::cdf(dist_, y); }
    double quantile(double p) const override { return boost::math::quantile(dist_, p); }
    double mean() const override { return mean_; }

  private:
    boost::math::lognormal_distribution<double> dist_;
    double mean_;
};

// ---------------------------------------------------------------------------
// Adaptive kernel density margin
// ---------------------------------------------------------------------------

struct KdeConfig {
    std::size_t grid_size = 4096;
    double span_sd = 4.0;       // grid reaches this many sd beyond the sample range
    double sensitivity = 0.5;   // Abramson local-bandwidth exponent
    double kernel_cutoff = 9.0; // kernels truncated at this many bandwidths
};

/// Gaussian-tail extension beyond one grid edge: F matches value and slope
/// at the edge and runs to 0 (lower) or 1 (upper).
struct GaussTail {
    double a = 0.0;  // mass multiplier
    double m = 0.0;  // location
    double s = 1.0;  // scale
};

/// Nonparametric margin fitted by a locally adaptive Gaussian KDE
/// (Silverman pilot, Abramson bandwidth scaling). The CDF is the trapezoid
/// integral of the density over the grid plus matched Gaussian tails, so
/// cdf and quantile are exact inverses of each other up to grid resolution.
class KdeMargin final : public Margin {
  public:
    KdeMargin(std::vector<double> grid, std::vector<double> pdf, std::vector<double> cdf,
              double mean, GaussTail lower, GaussTail upper)
        : grid_(std::move(grid)), pdf_(std::move(pdf)), cdf_(std::move(cdf)), mean_(mean),
          lower_(lower), upper_(upper) {}

    double pdf(double y) const override {
        if (y <= grid_.front()) return lower_.a * norm_pdf((y - lower_.m) / lower_.s) / lower_.s;
        if (y >= grid_.back()) return upper_.a * norm_pdf((y - upper_.m) / upper_.s) / upper_.s;
        auto [i, w] = locate(y);
        return (1.0 - w) * pdf_[i] + w * pdf_[i + 1];
    }

    double cdf(double y) const override {
        if (y <= grid_.front()) return lower_.a * norm_cdf((y - lower_.m) / lower_.s);
        if (y >= grid_.back()) return 1.0 - upper_.a * norm_cdf(-(y - upper_.m) / upper_.s);
        auto [i, w] = locate(y);
        return (1.0 - w) * cdf_[i] + w * cdf_[i + 1];
    }

    double quantile(double p) const override {
        if (p <= 0.0) p = 1e-300;
        if (p >= 1.0) p = 1.0 - 1e-16;
        auto tail_z = [](double ratio) {
            // ratio can exceed 1 when the tail mass is ~0; keep z finite
            return std::clamp(norm_quantile(std::clamp(ratio, 1e-300, 1.0 - 1e-16)), -38.0, 38.0);
        };
        if (p <= cdf_.front()) {
            if (lower_.a <= 0.0) return grid_.front();
            return lower_.m + lower_.s * tail_z(p / lower_.a);
        }
        if (p >= cdf_.back()) {
            if (upper_.a <= 0.0) return grid_.back();
            return upper_.m - upper_.s * tail_z((1.0 - p) / upper_.a);
        }
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), p);
        std::size_t i = static_cast<std::size_t>(std::distance(cdf_.begin(), it));
        if (i == 0) return grid_.front();
        if (i >= cdf_.size()) return grid_.back();
        double c0 = cdf_[i - 1], c1 = cdf_[i];
        double w = c1 > c0 ? (p - c0) / (c1 - c0) : 0.5;
        return grid_[i - 1] + w * (grid_[i] - grid_[i - 1]);
    }

    double mean() const override { return mean_; }

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& pdf_values() const { return pdf_; }
    const std::vector<double>& cdf_values() const { return cdf_; }
    const GaussTail& lower_tail() const { return lower_; }
    const GaussTail& upper_tail() const { return upper_; }

  private:
    std::pair<std::size_t, double> locate(double y) const {
        double step = (grid_.back() - grid_.front()) / static_cast<double>(grid_.size() - 1);
        double s = (y - grid_.front()) / step;
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(s), grid_.size() - 2);
        return {i, s - static_cast<double>(i)};
    }

    std::vector<double> grid_, pdf_, cdf_;
    double mean_;
    GaussTail lower_, upper_;
};

namespace detail {

/// Solve phi(z)/Phi(z) = r for z (strictly decreasing in z).
inline double solve_hazard(double r) {
    if (!(r > 0.0)) return 38.0;
    double lo = -38.0, hi = 38.0;
    for (int it = 0; it < 200; ++it) {
        double z = 0.5 * (lo + hi);
        double val = norm_pdf(z) / std::max(norm_cdf(z), 1e-300);
        if (val > r)
            lo = z;
        else
            hi = z;
    }
    return 0.5 * (lo + hi);
}

inline GaussTail match_lower_tail(double x_edge, double f_edge, double mass_below, double s) {
    GaussTail t;
    t.s = s;
    if (mass_below <= 0.0 || f_edge <= 0.0) {
        t.a = 0.0;
        t.m = x_edge;
        return t;
    }
    double z = solve_hazard(s * f_edge / mass_below);
    t.m = x_edge - s * z;
    t.a = mass_below / std::max(norm_cdf(z), 1e-300);
    return t;
}

inline GaussTail match_upper_tail(double x_edge, double f_edge, double mass_above, double s) {
    // mirror image of the lower match
    GaussTail t = match_lower_tail(-x_edge, f_edge, mass_above, s);
    t.m = -t.m;
    return t;
}

}  // namespace detail

/// Fit the adaptive KDE margin. Throws invalid_parameter for series that are
/// too short or (numerically) constant.
inline KdeMargin fit_margin(std::span<const double> data, const KdeConfig& cfg = {}) {
    const std::size_t n = data.size();
    if (n < 100) throw invalid_parameter("fit_margin: need at least 100 observations");
    Moments mom = moments(data);
    if (!(mom.sd > 1e-12 * (1.0 + std::abs(mom.mean))) || !std::isfinite(mom.sd))
        throw invalid_parameter("fit_margin: degenerate (constant or non-finite) series");

    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    double iqr = sorted[static_cast<std::size_t>(0.75 * (n - 1))] -
                 sorted[static_cast<std::size_t>(0.25 * (n - 1))];
    double spread = std::min(mom.sd, iqr > 0.0 ? iqr / 1.34 : mom.sd);
    double h0 = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);

    const std::size_t g = cfg.grid_size;
    double lo = sorted.front() - cfg.span_sd * mom.sd;
    double hi = sorted.back() + cfg.span_sd * mom.sd;
    double step = (hi - lo) / static_cast<double>(g - 1);
    std::vector<double> grid(g);
    for (std::size_t i = 0; i < g; ++i) grid[i] = lo + step * static_cast<double>(i);

    auto accumulate = [&](const std::vector<double>& bw, std::vector<double>& dens) {
        dens.assign(g, 0.0);
        const double wk = 1.0 / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            double h = bw.size() == 1 ? bw[0] : bw[k];
            double x = sorted[k];
            double cut = cfg.kernel_cutoff * h;
            std::size_t i0 = static_cast<std::size_t>(
                std::max(0.0, std::ceil((x - cut - lo) / step)));
            std::size_t i1 = static_cast<std::size_t>(
                std::min(static_cast<double>(g - 1), std::floor((x + cut - lo) / step)));
            double inv_h = 1.0 / h;
            for (std::size_t i = i0; i <= i1; ++i) {
                double z = (grid[i] - x) * inv_h;
                dens[i] += wk * inv_h * norm_pdf(z);
            }
        }
    };

    // pilot pass with the fixed Silverman bandwidth
    std::vector<double> pilot;
    accumulate({h0}, pilot);

    // Abramson local bandwidths from the pilot density at the data points
    auto interp = [&](double y) {
        double s = (y - lo) / step;
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(s), g - 2);
        double w = s - static_cast<double>(i);
        return (1.0 - w) * pilot[i] + w * pilot[i + 1];
    };
    std::vector<double> fp(n);
    double log_gm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        fp[k] = std::max(interp(sorted[k]), 1e-300);
        log_gm += std::log(fp[k]);
    }
    log_gm /= static_cast<double>(n);
    std::vector<double> bw(n);
    for (std::size_t k = 0; k < n; ++k) {
        double lambda = std::pow(fp[k] / std::exp(log_gm), -cfg.sensitivity);
        bw[k] = h0 * std::clamp(lambda, 0.05, 20.0);
    }

    std::vector<double> pdf;
    accumulate(bw, pdf);

    // mass outside the grid, from the exact kernel CDFs at the edges
    double below = 0.0, above = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        below += norm_cdf((lo - sorted[k]) / bw[k]);
        above += norm_cdf((sorted[k] - hi) / bw[k]);
    }
    below /= static_cast<double>(n);
    above /= static_cast<double>(n);

    std::vector<double> cdf(g);
    cdf[0] = below;
    for (std::size_t i = 1; i < g; ++i)
        cdf[i] = cdf[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * step;

    GaussTail lower = detail::match_lower_tail(lo, pdf.front(), below, mom.sd);
    GaussTail upper = detail::match_upper_tail(hi, pdf.back(), std::max(1.0 - cdf.back(), 0.0),
                                               mom.sd);

    return KdeMargin(std::move(grid), std::move(pdf), std::move(cdf), mom.mean, lower, upper);
}

/// Probability integral transform, clamped into the open unit interval.
inline std::vector<double> pit(const Margin& margin, std::span<const double> data) {
    std::vector<double> u(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) u[i] = clamp_unit_unchecked(margin.cdf(data[i]));
    return u;
}

}  // namespace hetcop
