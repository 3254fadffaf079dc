#pragma once

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <vector>

#include "hetcop/common.hpp"

namespace hetcop {

// ---------------------------------------------------------------------------
// Normal distribution helpers
// ---------------------------------------------------------------------------

inline double norm_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

inline double norm_quantile(double p) {
    static const boost::math::normal_distribution<double> dist(0.0, 1.0);
    return boost::math::quantile(dist, p);
}

// ---------------------------------------------------------------------------
// Student-t distribution, exact (boost) and table-accelerated paths
// ---------------------------------------------------------------------------

inline double t_pdf(double x, double nu) {
    return boost::math::pdf(boost::math::students_t_distribution<double>(nu), x);
}

inline double t_cdf(double x, double nu) {
    return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}

inline double t_quantile(double p, double nu) {
    return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}

namespace detail {

/// Cubic Hermite interpolant on a uniform grid with exact nodal slopes.
/// Slopes are limited (Fritsch-Carlson style) so a monotone data set yields
/// a monotone interpolant.
class CubicTable {
  public:
    CubicTable() = default;

    void build(double x0, double x1, std::size_t n, const std::vector<double>& y,
               const std::vector<double>& dy) {
        x0_ = x0;
        dx_ = (x1 - x0) / static_cast<double>(n - 1);
        inv_dx_ = 1.0 / dx_;
        y_ = y;
        d_ = dy;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double sec = (y_[i + 1] - y_[i]) * inv_dx_;
            if (sec == 0.0) continue;
            double cap = 3.0 * sec;
            if ((d_[i] > 0) == (cap > 0) && std::abs(d_[i]) > std::abs(cap)) d_[i] = cap;
            if ((d_[i + 1] > 0) == (cap > 0) && std::abs(d_[i + 1]) > std::abs(cap)) d_[i + 1] = cap;
        }
    }

    double operator()(double x) const {
        double s = (x - x0_) * inv_dx_;
        if (s <= 0.0) return y_.front();
        std::size_t i = static_cast<std::size_t>(s);
        if (i >= y_.size() - 1) return y_.back();
        double t = s - static_cast<double>(i);
        double t2 = t * t, t3 = t2 * t;
        double h00 = 2 * t3 - 3 * t2 + 1;
        double h10 = t3 - 2 * t2 + t;
        double h01 = -2 * t3 + 3 * t2;
        double h11 = t3 - t2;
        return h00 * y_[i] + h10 * dx_ * d_[i] + h01 * y_[i + 1] + h11 * dx_ * d_[i + 1];
    }

    bool empty() const { return y_.empty(); }

  private:
    double x0_ = 0.0, dx_ = 1.0, inv_dx_ = 1.0;
    std::vector<double> y_, d_;
};

}  // namespace detail

/// Table-accelerated Student-t CDF and quantile for one fixed nu.
///
/// Likelihood evaluation hits t_cdf/t_quantile millions of times with the
/// same nu; interpolation on transformed grids (logit for the quantile, atan
/// for the CDF) brings each call to a few ns at ~1e-8 accuracy. Tables build
/// lazily on first use and the object is safe to share across threads.
class StudentTFast {
  public:
    explicit StudentTFast(double nu)
        : nu_(nu), scale_(std::sqrt(nu)),
          log_norm_(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                    0.5 * std::log(nu * M_PI)) {}

    double nu() const { return nu_; }

    double cdf(double x) const {
        ensure_cdf();
        return cdf_table_(std::atan(x / scale_));
    }

    double quantile(double p) const {
        ensure_quantile();
        if (p <= kMinP) p = kMinP;
        if (p >= 1.0 - kMinP) p = 1.0 - kMinP;
        return q_table_(std::log(p / (1.0 - p)));
    }

    double pdf(double x) const { return std::exp(log_pdf(x)); }

    double log_pdf(double x) const {
        return log_norm_ - 0.5 * (nu_ + 1.0) * std::log1p(x * x / nu_);
    }

  private:
    static constexpr double kMinP = 1e-12;
    static constexpr std::size_t kN = 1281;
    static constexpr std::size_t kNq = 769;

    void ensure_cdf() const {
        std::call_once(cdf_once_, [this] {
            const double z0 = -1.5707963267948966, z1 = 1.5707963267948966;
            std::vector<double> y(kN), dy(kN);
            double dz = (z1 - z0) / static_cast<double>(kN - 1);
            boost::math::students_t_distribution<double> dist(nu_);
            for (std::size_t i = 0; i < kN; ++i) {
                double z = z0 + dz * static_cast<double>(i);
                double c = std::cos(z);
                if (i == 0) {
                    y[i] = 0.0;
                    dy[i] = 0.0;
                } else if (i == kN - 1) {
                    y[i] = 1.0;
                    dy[i] = 0.0;
                } else {
                    double x = scale_ * std::tan(z);
                    y[i] = boost::math::cdf(dist, x);
                    dy[i] = boost::math::pdf(dist, x) * scale_ / (c * c);
                }
            }
            const_cast<detail::CubicTable&>(cdf_table_).build(z0, z1, kN, y, dy);
        });
    }

    void ensure_quantile() const {
        std::call_once(q_once_, [this] {
            const double s_max = std::log((1.0 - kMinP) / kMinP);
            std::vector<double> y(kNq), dy(kNq);
            double ds = 2.0 * s_max / static_cast<double>(kNq - 1);
            boost::math::students_t_distribution<double> dist(nu_);
            for (std::size_t i = 0; i < kNq; ++i) {
                double s = -s_max + ds * static_cast<double>(i);
                double p = 1.0 / (1.0 + std::exp(-s));
                double x = boost::math::quantile(dist, p);
                y[i] = x;
                // dx/ds = p(1-p)/f(x)
                dy[i] = p * (1.0 - p) / boost::math::pdf(dist, x);
            }
            const_cast<detail::CubicTable&>(q_table_).build(-s_max, s_max, kNq, y, dy);
        });
    }

    double nu_;
    double scale_;
    double log_norm_;
    mutable std::once_flag cdf_once_, q_once_;
    detail::CubicTable cdf_table_, q_table_;
};

}  // namespace hetcop
