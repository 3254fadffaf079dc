#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "hetcop/bicop.hpp"
#include "hetcop/dvine.hpp"
#include "hetcop/margins.hpp"
#include "hetcop/quadrature.hpp"
#include "hetcop/stats.hpp"

namespace hetcop {

// ---------------------------------------------------------------------------
// Volatility proxy margin
// ---------------------------------------------------------------------------
//
// The proxy is v_t = V(y_t - mu) with V symmetric around zero, increasing in
// |.|. The copula of (v_s, v_t) is invariant to the choice of V, so the
// canonical V = |.| is used throughout and G (the inverse of V on |a|) is
// the identity. The margin of the proxy is
//     F_V(v) = F(mu + v) - F(mu - v),   f_V(v) = f(mu + v) + f(mu - v).

class VolatilityMargin {
  public:
    explicit VolatilityMargin(MarginPtr base, std::size_t table_size = 4096)
        : base_(std::move(base)), mu_(base_->mean()) {
        double hi = std::max(base_->quantile(1.0 - 1e-13) - mu_, mu_ - base_->quantile(1e-13));
        vmax_ = std::max(hi, 1e-12);
        table_.resize(table_size);
        step_ = vmax_ / static_cast<double>(table_size - 1);
        for (std::size_t i = 0; i < table_size; ++i) table_[i] = cdf(step_ * static_cast<double>(i));
    }

    double cdf(double v) const {
        if (v <= 0.0) return 0.0;
        return std::min(1.0, base_->cdf(mu_ + v) - base_->cdf(mu_ - v));
    }

    double pdf(double v) const {
        if (v < 0.0) return 0.0;
        return base_->pdf(mu_ + v) + base_->pdf(mu_ - v);
    }

    /// Inverse of F_V by bisection: the cached table brackets the root, the
    /// exact formula refines it to 1e-10.
    double quantile(double q) const {
        if (q <= 0.0) return 0.0;
        if (q >= 1.0) return vmax_;
        auto it = std::upper_bound(table_.begin(), table_.end(), q);
        std::size_t idx = static_cast<std::size_t>(std::distance(table_.begin(), it));
        double lo = idx == 0 ? 0.0 : step_ * static_cast<double>(idx - 1);
        double hi = idx >= table_.size() ? vmax_ : step_ * static_cast<double>(idx);
        for (int i = 0; i < 100 && hi - lo > 1e-10 * (1.0 + hi); ++i) {
            double mid = 0.5 * (lo + hi);
            if (cdf(mid) < q)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    const Margin& base() const { return *base_; }
    double mu() const { return mu_; }
    double vmax() const { return vmax_; }

  private:
    MarginPtr base_;
    double mu_, vmax_, step_;
    std::vector<double> table_;
};

// ---------------------------------------------------------------------------
// Volatility copula (Theorem 1) and its symmetric-margin form (Lemma 1)
// ---------------------------------------------------------------------------

/// C_V(us, ut): the 2x2 signed sum of the base copula over the reflected
/// margin arguments -- the probability that (Y_s, Y_t) lands in the rectangle
/// (mu_s - v_s, mu_s + v_s) x (mu_t - v_t, mu_t + v_t).
inline double vol_copula_cdf(const PairCopula& base, const VolatilityMargin& ms,
                             const VolatilityMargin& mt, double us, double ut) {
    if (!(us >= 0.0 && us <= 1.0 && ut >= 0.0 && ut <= 1.0))
        throw std::domain_error("vol_copula_cdf: arguments outside [0,1]");
    double vs = ms.quantile(us), vt = mt.quantile(ut);
    double sp = ms.base().cdf(ms.mu() + vs), sm = ms.base().cdf(ms.mu() - vs);
    double tp = mt.base().cdf(mt.mu() + vt), tm = mt.base().cdf(mt.mu() - vt);
    double c = base.cdf(sp, tp) - base.cdf(sm, tp) - base.cdf(sp, tm) + base.cdf(sm, tm);
    return std::clamp(c, 0.0, 1.0);
}

/// c_V(us, ut): the Theorem-1 density with V = |.| (so G' = 1).
inline double vol_copula_density(const PairCopula& base, const VolatilityMargin& ms,
                                 const VolatilityMargin& mt, double us, double ut) {
    double vs = ms.quantile(us), vt = mt.quantile(ut);
    double fvs = ms.pdf(vs), fvt = mt.pdf(vt);
    if (!(fvs > 1e-300) || !(fvt > 1e-300))
        throw numerical_error("vol_copula_density: proxy density underflow at (" +
                              std::to_string(us) + ", " + std::to_string(ut) + ")");
    double num = 0.0;
    for (int i = 0; i < 2; ++i) {
        double ys = ms.mu() + (i == 0 ? -vs : vs);
        double fs = ms.base().pdf(ys);
        double as = ms.base().cdf(ys);
        for (int j = 0; j < 2; ++j) {
            double yt = mt.mu() + (j == 0 ? -vt : vt);
            num += base.density(as, mt.base().cdf(yt)) * fs * mt.base().pdf(yt);
        }
    }
    return num / (fvs * fvt);
}

/// Lemma 1: C_V when both margins are symmetric; depends on the base copula
/// only.
inline double vol_copula_cdf_symmetric(const PairCopula& base, double us, double ut) {
    double ap = 0.5 * (1.0 + us), am = 0.5 * (1.0 - us);
    double bp = 0.5 * (1.0 + ut), bm = 0.5 * (1.0 - ut);
    double c = base.cdf(ap, bp) - base.cdf(am, bp) - base.cdf(ap, bm) + base.cdf(am, bm);
    return std::clamp(c, 0.0, 1.0);
}

inline double vol_copula_density_symmetric(const PairCopula& base, double us, double ut) {
    double ap = 0.5 * (1.0 + us), am = 0.5 * (1.0 - us);
    double bp = 0.5 * (1.0 + ut), bm = 0.5 * (1.0 - ut);
    return 0.25 * (base.density(ap, bp) + base.density(am, bp) + base.density(ap, bm) +
                   base.density(am, bm));
}

// ---------------------------------------------------------------------------
// Volatility Spearman's rho
// ---------------------------------------------------------------------------

namespace detail {
/// Composite quadrature nodes on (0,1): two cosine-substituted
/// Gauss-Legendre panels split at `brk`. The substitution sends the weight
/// to zero at the panel ends, taming the corner spikes of heavy-tailed
/// copula densities, and the split keeps kinks (e.g. the fold of the
/// volatility transform at F(mu)) on a panel boundary.
inline void split_cosine_nodes(double brk, std::size_t n, std::vector<double>& x,
                               std::vector<double>& jac) {
    const QuadRule& r = gauss_legendre(n / 2);
    x.clear();
    jac.clear();
    auto panel = [&](double a, double b) {
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            double s = r.nodes[i];
            x.push_back(a + (b - a) * 0.5 * (1.0 - std::cos(M_PI * s)));
            jac.push_back((b - a) * 0.5 * M_PI * std::sin(M_PI * s) * r.weights[i]);
        }
    };
    panel(0.0, brk);
    panel(brk, 1.0);
}
}  // namespace detail

/// rho^v at lag 1 for the pair-copula `base` and the series margins:
/// 12 E[u~_{t-1} u~_t] - 3, integrating g(x) = F_V(|F^{-1}(x) - mu|) against
/// the base copula density on a 200x200 Gauss-Legendre tensor grid (split
/// at the fold point F(mu) where g has a kink). Deterministic.
inline double rho_v_lag1(const PairCopula& base, const VolatilityMargin& ms,
                         const VolatilityMargin& mt, std::size_t n = 200) {
    std::vector<double> xs, js, xt, jt;
    detail::split_cosine_nodes(clamp_unit(ms.base().cdf(ms.mu())), n, xs, js);
    detail::split_cosine_nodes(clamp_unit(mt.base().cdf(mt.mu())), n, xt, jt);
    std::vector<double> gs(xs.size()), gt(xt.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        gs[i] = ms.cdf(std::abs(ms.base().quantile(xs[i]) - ms.mu()));
    for (std::size_t j = 0; j < xt.size(); ++j)
        gt[j] = mt.cdf(std::abs(mt.base().quantile(xt[j]) - mt.mu()));
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < xt.size(); ++j)
            row += jt[j] * gt[j] * std::exp(base.log_density(xs[i], xt[j]));
        acc += js[i] * gs[i] * row;
    }
    return 12.0 * acc - 3.0;
}

namespace detail {
/// Reference route: 12 int int C_V - 3 integrating the Theorem-1 CDF
/// directly (each evaluation inverts F_V through the cached tables).
inline double rho_v_lag1_via_cdf(const PairCopula& base, const VolatilityMargin& ms,
                                 const VolatilityMargin& mt, std::size_t n = 60) {
    double i2 = integrate2d_gl(
        [&](double a, double b) { return vol_copula_cdf(base, ms, mt, a, b); }, n);
    return 12.0 * i2 - 3.0;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Simulation-based dependence metrics
// ---------------------------------------------------------------------------

struct McEstimate {
    double value = 0.0;
    double se = 0.0;  // block standard error (10 blocks)
};

enum class VolTransform { abs_value, square };

/// rho^v_{i,j,k} (and rho^y for levels) by simulating n paths of length k+1
/// from the vine. Spearman is rank-based, so with margins fixed the estimate
/// is invariant to replacing |.| by (.)^2; the transform argument exists to
/// assert exactly that.
inline McEstimate rho_v_simulated(const DVineSpec& spec, const std::vector<MarginPtr>& margins,
                                  int k, int i, int j, std::size_t n, std::uint64_t seed,
                                  VolTransform vt = VolTransform::abs_value) {
    if (k < 0) throw invalid_parameter("rho_v_simulated: k must be >= 0");
    const int m = spec.m;
    if (i < 1 || i > m || j < 1 || j > m) throw invalid_parameter("rho_v_simulated: bad series");
    const std::size_t len = static_cast<std::size_t>(k) + 1;
    std::vector<double> vi(n), vj(n);
    const Margin& mi = *margins[static_cast<std::size_t>(i - 1)];
    const Margin& mj = *margins[static_cast<std::size_t>(j - 1)];
    double mu_i = mi.mean(), mu_j = mj.mean();
    auto transform = [&](double y, double mu) {
        double a = std::abs(y - mu);
        return vt == VolTransform::abs_value ? a : a * a;
    };
    for (std::size_t l = 0; l < n; ++l) {
        if (m == 1) {
            auto path = simulate_uni(spec, len, seed + l);
            vi[l] = transform(mi.quantile(path.front()), mu_i);
            vj[l] = transform(mj.quantile(path.back()), mu_j);
        } else {
            auto path = simulate_multi(spec, len, seed + l);
            vi[l] = transform(mi.quantile(path.front()[static_cast<std::size_t>(i - 1)]), mu_i);
            vj[l] = transform(mj.quantile(path.back()[static_cast<std::size_t>(j - 1)]), mu_j);
        }
    }
    McEstimate est;
    est.value = spearman(vi, vj);
    const std::size_t blocks = 10;
    std::size_t bs = n / blocks;
    if (bs >= 10) {
        double mean = 0.0, m2 = 0.0;
        std::vector<double> rb(blocks);
        for (std::size_t b = 0; b < blocks; ++b) {
            std::span<const double> si(vi.data() + b * bs, bs), sj(vj.data() + b * bs, bs);
            rb[b] = spearman(si, sj);
            mean += rb[b];
        }
        mean /= blocks;
        for (double v : rb) m2 += (v - mean) * (v - mean);
        est.se = std::sqrt(m2 / (blocks - 1) / blocks);
    }
    return est;
}

/// Same-path Spearman of the series levels (used for the P^y matrices).
struct DependenceMatrices {
    std::vector<std::vector<double>> p_y;
    std::vector<std::vector<double>> p_v;
};

/// All pairwise Spearman matrices P^y_k, P^v_k from one shared simulation of
/// n paths of length max(lags)+1.
inline std::map<int, DependenceMatrices> dependence_matrices(const DVineSpec& spec,
                                                             const std::vector<MarginPtr>& margins,
                                                             const std::vector<int>& lags,
                                                             std::size_t n, std::uint64_t seed) {
    if (spec.m < 2) throw invalid_parameter("dependence_matrices: need m > 1");
    const int m = spec.m;
    int kmax = 0;
    for (int k : lags) kmax = std::max(kmax, k);
    const std::size_t len = static_cast<std::size_t>(kmax) + 1;

    // u[l][t][series], v likewise
    std::vector<std::vector<std::vector<double>>> us(n), vs(n);
    std::vector<double> mu(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) mu[static_cast<std::size_t>(i)] = margins[static_cast<std::size_t>(i)]->mean();
    for (std::size_t l = 0; l < n; ++l) {
        us[l] = simulate_multi(spec, len, seed + l);
        vs[l] = us[l];
        for (auto& row : vs[l])
            for (int i = 0; i < m; ++i) {
                std::size_t ii = static_cast<std::size_t>(i);
                row[ii] = std::abs(margins[ii]->quantile(row[ii]) - mu[ii]);
            }
    }

    std::map<int, DependenceMatrices> out;
    std::vector<double> a(n), b(n);
    for (int k : lags) {
        DependenceMatrices dm;
        dm.p_y.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m)));
        dm.p_v = dm.p_y;
        for (int i = 1; i <= m; ++i) {
            for (int j = 1; j <= m; ++j) {
                for (std::size_t l = 0; l < n; ++l) {
                    a[l] = us[l][0][static_cast<std::size_t>(i - 1)];
                    b[l] = us[l][static_cast<std::size_t>(k)][static_cast<std::size_t>(j - 1)];
                }
                dm.p_y[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] =
                    (k == 0 && i == j) ? 1.0 : spearman(a, b);
                for (std::size_t l = 0; l < n; ++l) {
                    a[l] = vs[l][0][static_cast<std::size_t>(i - 1)];
                    b[l] = vs[l][static_cast<std::size_t>(k)][static_cast<std::size_t>(j - 1)];
                }
                dm.p_v[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] =
                    (k == 0 && i == j) ? 1.0 : spearman(a, b);
            }
        }
        out.emplace(k, std::move(dm));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quantile dependence
// ---------------------------------------------------------------------------

struct QuantileDependence {
    std::vector<double> alpha;
    std::vector<double> lambda_low;  // P(u_t < a | u_{t-1} < a)
    std::vector<double> lambda_up;   // P(u_t > a | u_{t-1} > a)
    std::vector<double> lambda_lu;   // P(u_t > 1-a | u_{t-1} < a)
    std::vector<double> lambda_ul;   // P(u_t < a | u_{t-1} > 1-a)
};

/// Quantile-dependence curves from any bivariate copula CDF evaluator
/// (series copula or volatility copula alike).
inline QuantileDependence quantile_dependence(
    const std::function<double(double, double)>& cdf, std::span<const double> alphas) {
    QuantileDependence qd;
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0))
            throw std::domain_error("quantile_dependence: alpha must be inside (0,1)");
        double caa = cdf(a, a);
        qd.alpha.push_back(a);
        qd.lambda_low.push_back(caa / a);
        qd.lambda_up.push_back((1.0 - 2.0 * a + caa) / (1.0 - a));
        qd.lambda_lu.push_back((a - cdf(a, 1.0 - a)) / a);
        qd.lambda_ul.push_back((a - cdf(1.0 - a, a)) / a);
    }
    return qd;
}

/// Rank-based empirical quantile dependence of the lag-k pairs of a series.
inline QuantileDependence empirical_quantile_dependence(std::span<const double> series, int k,
                                                        std::span<const double> alphas) {
    const std::size_t n = series.size();
    if (n <= static_cast<std::size_t>(k)) throw invalid_parameter("series too short for lag");
    auto r = rank_pit(series);
    std::vector<double> x(r.begin(), r.end() - k), y(r.begin() + k, r.end());
    QuantileDependence qd;
    for (double a : alphas) {
        std::size_t low_b = 0, low_c = 0, up_b = 0, up_c = 0, lu_b = 0, ul_b = 0, ul_c = 0;
        for (std::size_t t = 0; t < x.size(); ++t) {
            if (x[t] < a) {
                ++low_c;
                if (y[t] < a) ++low_b;
                if (y[t] > 1.0 - a) ++lu_b;
            }
            if (x[t] > a && y[t] > a) ++up_b;
            if (x[t] > a) ++up_c;
            if (x[t] > 1.0 - a) {
                ++ul_c;
                if (y[t] < a) ++ul_b;
            }
        }
        qd.alpha.push_back(a);
        qd.lambda_low.push_back(low_c ? static_cast<double>(low_b) / low_c : 0.0);
        qd.lambda_up.push_back(up_c ? static_cast<double>(up_b) / up_c : 0.0);
        qd.lambda_lu.push_back(low_c ? static_cast<double>(lu_b) / low_c : 0.0);
        qd.lambda_ul.push_back(ul_c ? static_cast<double>(ul_b) / ul_c : 0.0);
    }
    return qd;
}

// ---------------------------------------------------------------------------
// Empirical lagged copula histogram
// ---------------------------------------------------------------------------

/// Normalized 2-D histogram of (u_{t-k}, u_t); cell values are densities, so
/// their average is 1 and they integrate to 1 over the unit square.
inline std::vector<std::vector<double>> empirical_copula_hist(std::span<const double> u, int k,
                                                              std::size_t bins) {
    if (bins < 2) throw invalid_parameter("empirical_copula_hist: bins >= 2");
    if (u.size() <= 10 * bins * bins)
        throw invalid_parameter("empirical_copula_hist: series too short for bin count");
    std::vector<std::vector<double>> h(bins, std::vector<double>(bins, 0.0));
    const std::size_t n = u.size() - static_cast<std::size_t>(k);
    for (std::size_t t = 0; t < n; ++t) {
        auto cell = [&](double x) {
            std::size_t c = static_cast<std::size_t>(x * static_cast<double>(bins));
            return std::min(c, bins - 1);
        };
        h[cell(u[t])][cell(u[t + static_cast<std::size_t>(k)])] += 1.0;
    }
    double scale = static_cast<double>(bins) * static_cast<double>(bins) / static_cast<double>(n);
    for (auto& row : h)
        for (double& v : row) v *= scale;
    return h;
}

}  // namespace hetcop
