#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hetcop/common.hpp"
#include "hetcop/quadrature.hpp"
#include "hetcop/rng.hpp"
#include "hetcop/roots.hpp"
#include "hetcop/special.hpp"

namespace hetcop {

/// Joint evaluation of one pair-copula at one argument pair. The vine
/// recursions need the log density and both h-functions at the same (u,v),
/// and the families share most of the work between the three.
struct CellEval {
    double log_density = 0.0;
    double h1 = 0.0;  // P(V <= v | U = u)
    double h2 = 0.0;  // P(U <= u | V = v)
};

/// Serializable description of a pair-copula (family name, scalar
/// parameters, component copulas for composite families).
struct BicopDesc {
    std::string family;
    std::map<std::string, double> params;
    std::vector<BicopDesc> components;
};

namespace detail {

class BicopImpl {
  public:
    virtual ~BicopImpl() = default;

    virtual double log_density(double u, double v) const = 0;
    virtual double cdf(double u, double v) const = 0;
    virtual double h1(double v, double u) const = 0;
    virtual double h2(double u, double v) const = 0;

    virtual CellEval cell(double u, double v, bool with_h) const {
        CellEval c;
        c.log_density = log_density(u, v);
        if (with_h) {
            c.h1 = h1(v, u);
            c.h2 = h2(u, v);
        }
        return c;
    }

    /// Solve h1(v|u) = q for v. Derivative of h1 in v is the copula density,
    /// so a safeguarded Newton iteration converges quickly.
    virtual double h1_inv(double q, double u) const {
        return invert_monotone([&](double v) { return h1(v, u); },
                               [&](double v) { return std::exp(log_density(u, v)); }, q, kUnitEps,
                               1.0 - kUnitEps);
    }

    virtual double h2_inv(double q, double v) const {
        return invert_monotone([&](double u) { return h2(u, v); },
                               [&](double u) { return std::exp(log_density(u, v)); }, q, kUnitEps,
                               1.0 - kUnitEps);
    }

    virtual BicopDesc describe() const = 0;
};

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// ---------------------------------------------------------------------------
// Bivariate t copula
// ---------------------------------------------------------------------------

class TCopulaImpl final : public BicopImpl {
  public:
    TCopulaImpl(double zeta, double nu)
        : zeta_(zeta), nu_(nu), tn_(std::make_shared<StudentTFast>(nu)),
          tn1_(std::make_shared<StudentTFast>(nu + 1.0)) {
        if (!(zeta >= 0.0 && zeta < 1.0))
            throw invalid_parameter("t copula: zeta must be in [0,1)");
        if (!(nu > kNuMin && nu <= kNuMax))
            throw invalid_parameter("t copula: nu must be in (2, nu_max]");
        log_norm_ = std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
                    2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log1p(-zeta * zeta);
        one_m_z2_ = 1.0 - zeta * zeta;
    }

    double log_density(double u, double v) const override {
        double x = tn_->quantile(u), y = tn_->quantile(v);
        return log_density_xy(x, y);
    }

    double h1(double v, double u) const override {
        double x = tn_->quantile(u), y = tn_->quantile(v);
        return clamp01(tn1_->cdf((y - zeta_ * x) / cond_scale(x)));
    }

    double h2(double u, double v) const override { return h1(u, v); }

    double cdf(double u, double v) const override {
        u = clamp_unit_unchecked(u);
        v = clamp_unit_unchecked(v);
        // integrate the conditional CDF against the t density in quantile
        // space, where the integrand is analytic with decaying tails
        double xu = tn_->quantile(u);
        double y = tn_->quantile(v);
        double c = integrate1d(
            [&](double x) {
                return tn1_->cdf((y - zeta_ * x) / cond_scale(x)) * tn_->pdf(x);
            },
            -std::numeric_limits<double>::infinity(), xu, 1e-10);
        return clamp01(c);
    }

    CellEval cell(double u, double v, bool with_h) const override {
        double x = tn_->quantile(u), y = tn_->quantile(v);
        CellEval c;
        c.log_density = log_density_xy(x, y);
        if (with_h) {
            c.h1 = clamp01(tn1_->cdf((y - zeta_ * x) / cond_scale(x)));
            c.h2 = clamp01(tn1_->cdf((x - zeta_ * y) / cond_scale(y)));
        }
        return c;
    }

    double h1_inv(double q, double u) const override {
        double x = tn_->quantile(u);
        double y = tn1_->quantile(q) * cond_scale(x) + zeta_ * x;
        return clamp_unit_unchecked(tn_->cdf(y));
    }

    double h2_inv(double q, double v) const override { return h1_inv(q, v); }

    BicopDesc describe() const override {
        return {"t", {{"zeta", zeta_}, {"nu", nu_}}, {}};
    }

    double zeta() const { return zeta_; }
    double nu() const { return nu_; }

  private:
    double cond_scale(double x) const {
        return std::sqrt((nu_ + x * x) * one_m_z2_ / (nu_ + 1.0));
    }

    double log_density_xy(double x, double y) const {
        double qf = (x * x - 2.0 * zeta_ * x * y + y * y) / (nu_ * one_m_z2_);
        return log_norm_ + 0.5 * (nu_ + 1.0) * (std::log1p(x * x / nu_) + std::log1p(y * y / nu_)) -
               0.5 * (nu_ + 2.0) * std::log1p(qf);
    }

    double zeta_, nu_, log_norm_, one_m_z2_;
    std::shared_ptr<StudentTFast> tn_, tn1_;
};

// ---------------------------------------------------------------------------
// Gumbel copula parameterized by Kendall's tau, theta = 1/(1-tau).
// Everything is evaluated in log space so large theta stays finite.
// ---------------------------------------------------------------------------

class GumbelImpl final : public BicopImpl {
  public:
    explicit GumbelImpl(double tau) : tau_(tau), theta_(1.0 / (1.0 - tau)) {
        if (!(tau >= 0.0 && tau < 1.0)) throw invalid_parameter("gumbel: tau must be in [0,1)");
    }

    double log_density(double u, double v) const override {
        Work w = prep(u, v);
        return log_density_w(w);
    }

    double cdf(double u, double v) const override {
        Work w = prep(u, v);
        return std::exp(-std::exp(w.logS / theta_));
    }

    double h1(double v, double u) const override {
        Work w = prep(u, v);
        return clamp01(std::exp(log_h1_w(w)));
    }

    double h2(double u, double v) const override { return h1(u, v); }

    CellEval cell(double u, double v, bool with_h) const override {
        Work w = prep(u, v);
        CellEval c;
        c.log_density = log_density_w(w);
        if (with_h) {
            c.h1 = clamp01(std::exp(log_h1_w(w)));
            // exchangeable: swap the roles of u and v
            Work ws = w;
            std::swap(ws.lx, ws.ly);
            std::swap(ws.log_u, ws.log_v);
            c.h2 = clamp01(std::exp(log_h1_w(ws)));
        }
        return c;
    }

    BicopDesc describe() const override { return {"gumbel", {{"tau", tau_}}, {}}; }

    double tau() const { return tau_; }

  private:
    struct Work {
        double lx, ly;        // log(-log u), log(-log v)
        double log_u, log_v;  // log u, log v
        double logS;          // log((-log u)^theta + (-log v)^theta)
        double logC;          // log C(u,v)
    };

    Work prep(double u, double v) const {
        Work w;
        w.log_u = std::log(u);
        w.log_v = std::log(v);
        w.lx = std::log(-w.log_u);
        w.ly = std::log(-w.log_v);
        double a = theta_ * w.lx, b = theta_ * w.ly;
        double hi = std::max(a, b), lo = std::min(a, b);
        w.logS = hi + std::log1p(std::exp(lo - hi));
        w.logC = -std::exp(w.logS / theta_);
        return w;
    }

    // h1(v|u) = C * S^(1/theta - 1) * (-log u)^(theta-1) / u
    double log_h1_w(const Work& w) const {
        return w.logC + (1.0 / theta_ - 1.0) * w.logS + (theta_ - 1.0) * w.lx - w.log_u;
    }

    // c(u,v) = C (xy)^(theta-1) / (uv) * S^(2/theta-2) * (1 + (theta-1) S^(-1/theta))
    double log_density_w(const Work& w) const {
        return w.logC + (theta_ - 1.0) * (w.lx + w.ly) + (2.0 / theta_ - 2.0) * w.logS - w.log_u -
               w.log_v + std::log1p((theta_ - 1.0) * std::exp(-w.logS / theta_));
    }

    double tau_, theta_;
};

// ---------------------------------------------------------------------------
// Convex Gumbel: delta-weighted mix of a Gumbel and its survival copula.
// ---------------------------------------------------------------------------

class ConvexGumbelImpl final : public BicopImpl {
  public:
    ConvexGumbelImpl(double tau, double delta) : g_(tau), delta_(delta) {
        if (!(delta >= 0.0 && delta <= 1.0))
            throw invalid_parameter("convex gumbel: delta must be in [0,1]");
    }

    double log_density(double u, double v) const override {
        double ca = std::exp(g_.log_density(u, v));
        double cb = std::exp(g_.log_density(1.0 - u, 1.0 - v));
        return std::log(delta_ * ca + (1.0 - delta_) * cb);
    }

    double cdf(double u, double v) const override {
        return delta_ * g_.cdf(u, v) + (1.0 - delta_) * (u + v - 1.0 + g_.cdf(1.0 - u, 1.0 - v));
    }

    double h1(double v, double u) const override {
        return clamp01(delta_ * g_.h1(v, u) + (1.0 - delta_) * (1.0 - g_.h1(1.0 - v, 1.0 - u)));
    }

    double h2(double u, double v) const override { return h1(u, v); }

    CellEval cell(double u, double v, bool with_h) const override {
        CellEval a = g_.cell(u, v, with_h);
        CellEval b = g_.cell(1.0 - u, 1.0 - v, with_h);
        CellEval c;
        c.log_density =
            std::log(delta_ * std::exp(a.log_density) + (1.0 - delta_) * std::exp(b.log_density));
        if (with_h) {
            c.h1 = clamp01(delta_ * a.h1 + (1.0 - delta_) * (1.0 - b.h1));
            c.h2 = clamp01(delta_ * a.h2 + (1.0 - delta_) * (1.0 - b.h2));
        }
        return c;
    }

    BicopDesc describe() const override {
        return {"convex_gumbel", {{"tau", g_.tau()}, {"delta", delta_}}, {}};
    }

    double tau() const { return g_.tau(); }
    double delta() const { return delta_; }

  private:
    GumbelImpl g_;
    double delta_;
};

}  // namespace detail

/// A parametric bivariate copula. Immutable value type; copies share the
/// implementation. All evaluators clamp their arguments to
/// [kUnitEps, 1 - kUnitEps] first.
class PairCopula {
  public:
    PairCopula() = default;  // empty; only assignable

    double density(double u, double v) const { return std::exp(log_density(u, v)); }

    double log_density(double u, double v) const {
        return impl().log_density(clamp_unit(u), clamp_unit(v));
    }

    /// C(u,v). Exact at the boundary (uniform margins, groundedness).
    double cdf(double u, double v) const {
        if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0)
            throw std::domain_error("cdf: argument outside [0,1]");
        if (u <= 0.0 || v <= 0.0) return 0.0;
        if (u >= 1.0) return v;
        if (v >= 1.0) return u;
        return impl().cdf(u, v);
    }

    /// Conditional CDF of V given U = u.
    double h1(double v, double u) const { return impl().h1(clamp_unit(v), clamp_unit(u)); }

    /// Conditional CDF of U given V = v.
    double h2(double u, double v) const { return impl().h2(clamp_unit(u), clamp_unit(v)); }

    double h1_inv(double q, double u) const { return impl().h1_inv(clamp_unit(q), clamp_unit(u)); }

    double h2_inv(double q, double v) const { return impl().h2_inv(clamp_unit(q), clamp_unit(v)); }

    CellEval cell(double u, double v, bool with_h = true) const {
        return impl().cell(clamp_unit(u), clamp_unit(v), with_h);
    }

    BicopDesc describe() const { return impl().describe(); }
    std::string family() const { return impl().describe().family; }

    bool valid() const { return static_cast<bool>(impl_); }

    static PairCopula wrap(std::shared_ptr<const detail::BicopImpl> impl) {
        PairCopula c;
        c.impl_ = std::move(impl);
        return c;
    }

    const detail::BicopImpl& impl() const {
        if (!impl_) throw std::logic_error("PairCopula: empty");
        return *impl_;
    }

  private:
    std::shared_ptr<const detail::BicopImpl> impl_;
};

namespace detail {

/// 90 degree rotation: density c(1-u, v).
class Rot90Impl final : public BicopImpl {
  public:
    explicit Rot90Impl(PairCopula base) : base_(std::move(base)) {}

    double log_density(double u, double v) const override {
        return base_.impl().log_density(1.0 - u, v);
    }
    double cdf(double u, double v) const override { return v - base_.impl().cdf(1.0 - u, v); }
    double h1(double v, double u) const override { return base_.impl().h1(v, 1.0 - u); }
    double h2(double u, double v) const override {
        return clamp01(1.0 - base_.impl().h2(1.0 - u, v));
    }
    CellEval cell(double u, double v, bool with_h) const override {
        CellEval b = base_.impl().cell(1.0 - u, v, with_h);
        CellEval c;
        c.log_density = b.log_density;
        if (with_h) {
            c.h1 = b.h1;
            c.h2 = clamp01(1.0 - b.h2);
        }
        return c;
    }
    double h1_inv(double q, double u) const override { return base_.impl().h1_inv(q, 1.0 - u); }
    double h2_inv(double q, double v) const override {
        return 1.0 - base_.impl().h2_inv(1.0 - q, v);
    }
    BicopDesc describe() const override { return {"rot90", {}, {base_.describe()}}; }

  private:
    PairCopula base_;
};

/// Mixture of component a and the 90 degree rotation of component b:
/// c(u,v) = w ca(u,v) + (1-w) cb(1-u,v). Asymmetric in general, so h1 != h2.
class MixtureImpl final : public BicopImpl {
  public:
    MixtureImpl(double w, PairCopula a, PairCopula b)
        : w_(w), a_(std::move(a)), b_(std::move(b)) {
        if (!(w > 0.0 && w < 1.0)) throw invalid_parameter("mixture: w must be in (0,1)");
    }

    double log_density(double u, double v) const override {
        double ca = std::exp(a_.impl().log_density(u, v));
        double cb = std::exp(b_.impl().log_density(1.0 - u, v));
        return std::log(w_ * ca + (1.0 - w_) * cb);
    }

    double cdf(double u, double v) const override {
        return w_ * a_.impl().cdf(u, v) + (1.0 - w_) * (v - b_.impl().cdf(1.0 - u, v));
    }

    double h1(double v, double u) const override {
        return clamp01(w_ * a_.impl().h1(v, u) + (1.0 - w_) * b_.impl().h1(v, 1.0 - u));
    }

    double h2(double u, double v) const override {
        return clamp01(w_ * a_.impl().h2(u, v) + (1.0 - w_) * (1.0 - b_.impl().h2(1.0 - u, v)));
    }

    CellEval cell(double u, double v, bool with_h) const override {
        CellEval ca = a_.impl().cell(u, v, with_h);
        CellEval cb = b_.impl().cell(1.0 - u, v, with_h);
        CellEval c;
        c.log_density =
            std::log(w_ * std::exp(ca.log_density) + (1.0 - w_) * std::exp(cb.log_density));
        if (with_h) {
            c.h1 = clamp01(w_ * ca.h1 + (1.0 - w_) * cb.h1);
            c.h2 = clamp01(w_ * ca.h2 + (1.0 - w_) * (1.0 - cb.h2));
        }
        return c;
    }

    BicopDesc describe() const override {
        return {"mixture", {{"w", w_}}, {a_.describe(), b_.describe()}};
    }

    double w() const { return w_; }
    const PairCopula& comp_a() const { return a_; }
    const PairCopula& comp_b() const { return b_; }

  private:
    double w_;
    PairCopula a_, b_;
};

/// Independence copula; used for vine defaults and as a cheap exact base
/// case (a convex Gumbel with tau = 0 evaluates to the same thing).
class IndependenceImpl final : public BicopImpl {
  public:
    double log_density(double, double) const override { return 0.0; }
    double cdf(double u, double v) const override { return u * v; }
    double h1(double v, double) const override { return v; }
    double h2(double u, double) const override { return u; }
    CellEval cell(double u, double v, bool with_h) const override {
        return {0.0, with_h ? v : 0.0, with_h ? u : 0.0};
    }
    double h1_inv(double q, double) const override { return q; }
    double h2_inv(double q, double) const override { return q; }
    BicopDesc describe() const override { return {"independence", {}, {}}; }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

inline PairCopula make_t(double zeta, double nu) {
    return PairCopula::wrap(std::make_shared<detail::TCopulaImpl>(zeta, nu));
}

inline PairCopula make_gumbel(double tau) {
    return PairCopula::wrap(std::make_shared<detail::GumbelImpl>(tau));
}

inline PairCopula make_convex_gumbel(double tau, double delta) {
    return PairCopula::wrap(std::make_shared<detail::ConvexGumbelImpl>(tau, delta));
}

inline PairCopula make_rot90(PairCopula base) {
    return PairCopula::wrap(std::make_shared<detail::Rot90Impl>(std::move(base)));
}

inline PairCopula make_mixture(double w, PairCopula a, PairCopula b) {
    return PairCopula::wrap(std::make_shared<detail::MixtureImpl>(w, std::move(a), std::move(b)));
}

inline PairCopula make_independence() {
    return PairCopula::wrap(std::make_shared<detail::IndependenceImpl>());
}

inline PairCopula make_mixture_t(double w, double zeta_a, double nu_a, double zeta_b,
                                 double nu_b) {
    return make_mixture(w, make_t(zeta_a, nu_a), make_t(zeta_b, nu_b));
}

inline PairCopula make_mixture_cgumbel(double w, double tau_a, double delta_a, double tau_b,
                                       double delta_b) {
    return make_mixture(w, make_convex_gumbel(tau_a, delta_a),
                        make_convex_gumbel(tau_b, delta_b));
}

inline PairCopula make_from_desc(const BicopDesc& d) {
    auto p = [&](const char* k) {
        auto it = d.params.find(k);
        if (it == d.params.end())
            throw invalid_parameter("bicop desc: missing parameter " + std::string(k));
        return it->second;
    };
    if (d.family == "t") return make_t(p("zeta"), p("nu"));
    if (d.family == "gumbel") return make_gumbel(p("tau"));
    if (d.family == "convex_gumbel") return make_convex_gumbel(p("tau"), p("delta"));
    if (d.family == "independence") return make_independence();
    if (d.family == "rot90") {
        if (d.components.size() != 1) throw invalid_parameter("rot90 desc: need one component");
        return make_rot90(make_from_desc(d.components[0]));
    }
    if (d.family == "mixture") {
        if (d.components.size() != 2) throw invalid_parameter("mixture desc: need two components");
        return make_mixture(p("w"), make_from_desc(d.components[0]),
                            make_from_desc(d.components[1]));
    }
    throw invalid_parameter("unknown copula family: " + d.family);
}

// ---------------------------------------------------------------------------
// Dependence summaries and sampling
// ---------------------------------------------------------------------------

/// Spearman's rho, 12 * int int C(u,v) du dv - 3 = 12 E[UV] - 3, evaluated
/// as the density-weighted moment on a Gauss-Legendre tensor grid.
/// The cosine substitution u = (1-cos(pi s))/2 sends the quadrature weight
/// to zero at the corners, where heavy-tailed copula densities blow up.
/// Deterministic for a fixed grid order.
inline double spearman_rho(const PairCopula& c, std::size_t n = 200) {
    const QuadRule& r = gauss_legendre(n);
    std::vector<double> x(n), jac(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = r.nodes[i];
        x[i] = 0.5 * (1.0 - std::cos(M_PI * s));
        jac[i] = 0.5 * M_PI * std::sin(M_PI * s) * r.weights[i];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            row += jac[j] * x[j] * std::exp(c.log_density(x[i], x[j]));
        acc += jac[i] * x[i] * row;
    }
    return 12.0 * acc - 3.0;
}

namespace detail {
/// Reference route for Spearman's rho integrating the copula CDF directly;
/// slower, used to cross-check spearman_rho.
inline double spearman_rho_cdf_route(const PairCopula& c, std::size_t n = 100) {
    double i = integrate2d_gl([&](double u, double v) { return c.cdf(u, v); }, n);
    return 12.0 * i - 3.0;
}
}  // namespace detail

/// Conditional-inversion sampler: u ~ U(0,1), v = h1^{-1}(q | u).
inline std::vector<std::pair<double, double>> sample_pair(const PairCopula& c, std::size_t n,
                                                          std::uint64_t seed) {
    std::vector<std::pair<double, double>> out(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform();
        double q = rng.uniform();
        out[i] = {u, c.h1_inv(q, u)};
    }
    return out;
}

/// Extremal tail-dependence coefficients, where the family admits a closed
/// or limit form. For the t copula lambda = 2 T_{nu+1}(-sqrt((nu+1)(1-z)/(1+z))),
/// for the Gumbel family the usual 2 - 2^(1-tau) expressions, and for the
/// mixture the component limits combine linearly (the rotated component
/// contributes its opposite-corner coefficient).
struct TailDependence {
    double lower = 0.0;
    double upper = 0.0;
    bool available = false;
};

inline TailDependence tail_dependence(const PairCopula& c);

namespace detail {
inline double t_tail_lambda(double zeta, double nu) {
    return 2.0 * t_cdf(-std::sqrt((nu + 1.0) * (1.0 - zeta) / (1.0 + zeta)), nu + 1.0);
}

inline TailDependence tail_from_desc(const BicopDesc& d) {
    TailDependence td;
    if (d.family == "independence") {
        td = {0.0, 0.0, true};
    } else if (d.family == "t") {
        double l = t_tail_lambda(d.params.at("zeta"), d.params.at("nu"));
        td = {l, l, true};
    } else if (d.family == "gumbel") {
        double tau = d.params.at("tau");
        td = {0.0, 2.0 - std::pow(2.0, 1.0 - tau), true};
    } else if (d.family == "convex_gumbel") {
        double tau = d.params.at("tau");
        double delta = d.params.at("delta");
        double g = 2.0 - std::pow(2.0, 1.0 - tau);
        td = {(1.0 - delta) * g, delta * g, true};
    } else if (d.family == "rot90") {
        // corners (0,0)/(1,1) of the rotation map to (1,0)/(0,1) of the base;
        // only the t base has non-zero opposite-corner dependence.
        const BicopDesc& b = d.components[0];
        if (b.family == "t") {
            double l = t_tail_lambda(-b.params.at("zeta"), b.params.at("nu"));
            td = {l, l, true};
        } else if (b.family == "gumbel" || b.family == "convex_gumbel" ||
                   b.family == "independence") {
            td = {0.0, 0.0, true};
        }
    } else if (d.family == "mixture") {
        BicopDesc rot{"rot90", {}, {d.components[1]}};
        TailDependence a = tail_from_desc(d.components[0]);
        TailDependence b = tail_from_desc(rot);
        if (a.available && b.available) {
            double w = d.params.at("w");
            td = {w * a.lower + (1.0 - w) * b.lower, w * a.upper + (1.0 - w) * b.upper, true};
        }
    }
    return td;
}
}  // namespace detail

inline TailDependence tail_dependence(const PairCopula& c) {
    return detail::tail_from_desc(c.describe());
}

}  // namespace hetcop
