#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hetcop/bicop.hpp"
#include "hetcop/datagen.hpp"
#include "hetcop/dvine.hpp"
#include "hetcop/margins.hpp"
#include "hetcop/optimize.hpp"
#include "hetcop/volcop.hpp"

namespace hetcop {

// ---------------------------------------------------------------------------
// Parameter transforms
// ---------------------------------------------------------------------------
//
// Estimation works on unconstrained reals: logit for weights, deltas, taus
// and correlations (each onto its open unit interval), log(nu - 2) for the
// degrees of freedom with the hard cap nu <= kNuMax. The cap is enforced by
// clamping in the MLE path and by prior support in the MCMC path.

enum class ParamKind { unit, nu };

inline double to_unconstrained(ParamKind kind, double x) {
    switch (kind) {
        case ParamKind::unit: {
            double c = std::clamp(x, 1e-12, 1.0 - 1e-12);
            return std::log(c / (1.0 - c));
        }
        case ParamKind::nu:
            return std::log(std::max(x, kNuMin + 1e-12) - kNuMin);
    }
    return 0.0;
}

inline double to_natural(ParamKind kind, double theta, bool clamp_cap = true) {
    switch (kind) {
        case ParamKind::unit:
            return 1.0 / (1.0 + std::exp(-theta));
        case ParamKind::nu: {
            double nu = kNuMin + std::exp(theta);
            return clamp_cap ? std::min(nu, kNuMax) : nu;
        }
    }
    return 0.0;
}

/// log |d natural / d theta|, the Jacobian that turns a flat prior on the
/// natural range into the transformed-space target.
inline double transform_log_jacobian(ParamKind kind, double theta) {
    switch (kind) {
        case ParamKind::unit: {
            double s = 1.0 / (1.0 + std::exp(-theta));
            return std::log(std::max(s * (1.0 - s), 1e-300));
        }
        case ParamKind::nu:
            return theta;
    }
    return 0.0;
}

inline bool in_prior_support(ParamKind kind, double theta) {
    if (kind == ParamKind::nu) return kNuMin + std::exp(theta) <= kNuMax;
    return std::isfinite(theta);
}

// ---------------------------------------------------------------------------
// Fit families and the block layout of a vine parameter vector
// ---------------------------------------------------------------------------

struct FitFamily {
    std::string name;
    std::vector<std::string> param_names;
    std::vector<ParamKind> kinds;
    std::function<PairCopula(const std::vector<double>&)> build;
    std::function<std::vector<double>(const BicopDesc&)> extract;
    std::vector<double> default_start;  // natural scale
};

inline const FitFamily& fit_family(const std::string& name) {
    static const std::vector<FitFamily> families = {
        {"mixture_t",
         {"w", "zeta_a", "nu_a", "zeta_b", "nu_b"},
         {ParamKind::unit, ParamKind::unit, ParamKind::nu, ParamKind::unit, ParamKind::nu},
         [](const std::vector<double>& v) { return make_mixture_t(v[0], v[1], v[2], v[3], v[4]); },
         [](const BicopDesc& d) {
             return std::vector<double>{d.params.at("w"), d.components[0].params.at("zeta"),
                                        d.components[0].params.at("nu"),
                                        d.components[1].params.at("zeta"),
                                        d.components[1].params.at("nu")};
         },
         {0.5, 0.4, 8.0, 0.2, 8.0}},
        {"mixture_cgumbel",
         {"w", "tau_a", "delta_a", "tau_b", "delta_b"},
         {ParamKind::unit, ParamKind::unit, ParamKind::unit, ParamKind::unit, ParamKind::unit},
         [](const std::vector<double>& v) {
             return make_mixture_cgumbel(v[0], v[1], v[2], v[3], v[4]);
         },
         [](const BicopDesc& d) {
             return std::vector<double>{d.params.at("w"), d.components[0].params.at("tau"),
                                        d.components[0].params.at("delta"),
                                        d.components[1].params.at("tau"),
                                        d.components[1].params.at("delta")};
         },
         {0.5, 0.3, 0.5, 0.2, 0.5}},
        {"t",
         {"zeta", "nu"},
         {ParamKind::unit, ParamKind::nu},
         [](const std::vector<double>& v) { return make_t(v[0], v[1]); },
         [](const BicopDesc& d) {
             return std::vector<double>{d.params.at("zeta"), d.params.at("nu")};
         },
         {0.3, 8.0}},
        {"convex_gumbel",
         {"tau", "delta"},
         {ParamKind::unit, ParamKind::unit},
         [](const std::vector<double>& v) { return make_convex_gumbel(v[0], v[1]); },
         [](const BicopDesc& d) {
             return std::vector<double>{d.params.at("tau"), d.params.at("delta")};
         },
         {0.3, 0.5}},
        {"gumbel",
         {"tau"},
         {ParamKind::unit},
         [](const std::vector<double>& v) { return make_gumbel(v[0]); },
         [](const BicopDesc& d) { return std::vector<double>{d.params.at("tau")}; },
         {0.3}},
    };
    for (const auto& f : families)
        if (f.name == name) return f;
    throw invalid_parameter("unknown fit family: " + name);
}

/// Block structure of a vine's parameter vector: one block per unique
/// pair-copula, all of the same fit family.
struct VineLayout {
    int m = 1, p = 1;
    std::string family;

    std::size_t blocks() const { return DVineSpec::pair_count(m, p); }
    std::size_t block_dim() const { return fit_family(family).kinds.size(); }
    std::size_t dim() const { return blocks() * block_dim(); }

    /// (k, l2, l1) labels per block, in DVineSpec::pair_index storage order.
    std::vector<std::array<int, 3>> block_labels() const {
        std::vector<std::array<int, 3>> lab;
        if (m == 1) {
            for (int k = 1; k <= p; ++k) lab.push_back({k, 1, 1});
            return lab;
        }
        for (int l1 = 1; l1 <= m; ++l1)
            for (int l2 = 1; l2 < l1; ++l2) lab.push_back({0, l2, l1});
        for (int k = 1; k <= p; ++k)
            for (int l2 = 1; l2 <= m; ++l2)
                for (int l1 = 1; l1 <= m; ++l1) lab.push_back({k, l2, l1});
        return lab;
    }

    DVineSpec build_natural(const std::vector<double>& nat) const {
        const FitFamily& fam = fit_family(family);
        std::size_t bd = fam.kinds.size();
        std::vector<PairCopula> pairs(blocks());
        for (std::size_t b = 0; b < blocks(); ++b) {
            std::vector<double> v(nat.begin() + static_cast<std::ptrdiff_t>(b * bd),
                                  nat.begin() + static_cast<std::ptrdiff_t>((b + 1) * bd));
            pairs[b] = fam.build(v);
        }
        return DVineSpec(m, p, std::move(pairs));
    }

    std::vector<double> natural_of(const std::vector<double>& theta, bool clamp_cap = true) const {
        const FitFamily& fam = fit_family(family);
        std::vector<double> nat(theta.size());
        for (std::size_t i = 0; i < theta.size(); ++i)
            nat[i] = to_natural(fam.kinds[i % fam.kinds.size()], theta[i], clamp_cap);
        return nat;
    }

    std::vector<double> unconstrained_of(const std::vector<double>& nat) const {
        const FitFamily& fam = fit_family(family);
        std::vector<double> theta(nat.size());
        for (std::size_t i = 0; i < nat.size(); ++i)
            theta[i] = to_unconstrained(fam.kinds[i % fam.kinds.size()], nat[i]);
        return theta;
    }

    std::vector<double> extract_natural(const DVineSpec& spec) const {
        const FitFamily& fam = fit_family(family);
        std::vector<double> nat;
        for (const auto& pc : spec.pairs) {
            auto v = fam.extract(pc.describe());
            nat.insert(nat.end(), v.begin(), v.end());
        }
        return nat;
    }

    std::vector<std::string> param_names() const {
        const FitFamily& fam = fit_family(family);
        auto labels = block_labels();
        std::vector<std::string> names;
        for (const auto& lab : labels) {
            std::string prefix = (m == 1) ? "k" + std::to_string(lab[0])
                                          : "k" + std::to_string(lab[0]) + "_l" +
                                                std::to_string(lab[1]) + std::to_string(lab[2]);
            for (const auto& pn : fam.param_names) names.push_back(prefix + "." + pn);
        }
        return names;
    }
};

// ---------------------------------------------------------------------------
// Log-likelihood plumbing
// ---------------------------------------------------------------------------

/// Copula data container covering both the univariate and multivariate
/// cases.
struct CopulaData {
    std::vector<double> uni;
    std::vector<std::vector<double>> multi;
    bool is_multi = false;

    static CopulaData univariate(std::vector<double> u) {
        CopulaData d;
        d.uni = std::move(u);
        return d;
    }
    static CopulaData multivariate(std::vector<std::vector<double>> u) {
        CopulaData d;
        d.multi = std::move(u);
        d.is_multi = true;
        return d;
    }
    std::size_t rows() const { return is_multi ? multi.size() : uni.size(); }
};

inline double loglik_of(const DVineSpec& spec, const CopulaData& data, unsigned threads) {
    LoglikOptions opt;
    opt.threads = threads;
    opt.full_grid = false;
    return data.is_multi ? loglik_multi(spec, data.multi, opt).loglik
                         : loglik_uni(spec, data.uni, opt).loglik;
}

// ---------------------------------------------------------------------------
// Maximum likelihood
// ---------------------------------------------------------------------------

struct MleOptions {
    int starts = 5;
    int max_evals = 3000;          // per start
    unsigned threads = 1;
    std::uint64_t seed = 1;        // start jitter
    bool sequential_init = true;   // tree-by-tree warm start for larger vines
};

struct FitReport {
    VineLayout layout;
    std::vector<std::string> names;
    std::vector<double> estimate;                  // natural scale
    std::vector<double> se;                        // delta-method standard errors
    std::vector<std::pair<double, double>> ci90;   // clipped to the feasible region
    double loglik = 0.0;
    int evals = 0;
    bool converged = false;

    DVineSpec spec() const { return layout.build_natural(estimate); }
};

namespace detail {

/// Feasible bounds of each natural parameter (for interval clipping).
inline std::pair<double, double> natural_bounds(ParamKind kind) {
    if (kind == ParamKind::nu) return {kNuMin, kNuMax};
    return {0.0, 1.0};
}

/// Tree-by-tree warm start: fit pair-copulas one level at a time against the
/// running conditional grid (the usual sequential vine estimator).
inline std::vector<double> sequential_start_uni(const VineLayout& layout,
                                                const CopulaData& data, const MleOptions& opt) {
    const FitFamily& fam = fit_family(layout.family);
    std::size_t bd = fam.kinds.size();
    std::vector<double> nat;
    std::vector<PairCopula> fitted;
    const std::vector<double>& u = data.uni;
    const std::size_t T = u.size();

    for (int k = 1; k <= layout.p; ++k) {
        // conditional pairs for this level from the grid of the vine so far
        std::vector<double> a, b;
        if (k == 1) {
            a.assign(u.begin(), u.end() - 1);
            b.assign(u.begin() + 1, u.end());
        } else {
            DVineSpec partial(1, k - 1, fitted);
            LoglikOptions lo;
            lo.threads = opt.threads;
            auto res = loglik_uni(partial, u, lo);
            a.reserve(T - k);
            b.reserve(T - k);
            for (std::size_t t = static_cast<std::size_t>(k); t < T; ++t) {
                a.push_back(res.grid.at(t - 1, static_cast<std::size_t>(k - 1), 1));
                b.push_back(res.grid.at(t, static_cast<std::size_t>(k - 1), 0));
            }
        }
        auto objective = [&](const std::vector<double>& theta) {
            std::vector<double> v(bd);
            for (std::size_t i = 0; i < bd; ++i) v[i] = to_natural(fam.kinds[i], theta[i]);
            PairCopula pc;
            try {
                pc = fam.build(v);
            } catch (const std::exception&) {
                return -std::numeric_limits<double>::infinity();
            }
            double ll = 0.0;
            for (std::size_t t = 0; t < a.size(); ++t) ll += pc.log_density(a[t], b[t]);
            return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
        };
        std::vector<double> theta0(bd);
        for (std::size_t i = 0; i < bd; ++i)
            theta0[i] = to_unconstrained(fam.kinds[i], fam.default_start[i]);
        NmOptions nm;
        nm.max_evals = 800;
        NmResult r = nelder_mead_max(objective, theta0, nm);
        std::vector<double> v(bd);
        for (std::size_t i = 0; i < bd; ++i) v[i] = to_natural(fam.kinds[i], r.x[i]);
        fitted.push_back(fam.build(v));
        nat.insert(nat.end(), v.begin(), v.end());
    }
    return nat;
}

}  // namespace detail

/// Maximize the vine copula likelihood over the transformed parameter space
/// with a multi-start Nelder-Mead simplex. Standard errors come from a
/// central-difference Hessian in transformed space mapped back by the delta
/// method; 90% intervals are clipped to the feasible region.
inline FitReport fit_mle(const VineLayout& layout, const CopulaData& data,
                         const MleOptions& opt = {}) {
    const FitFamily& fam = fit_family(layout.family);
    const std::size_t d = layout.dim();
    const std::size_t bd = fam.kinds.size();

    auto objective = [&](const std::vector<double>& theta) {
        std::vector<double> nat = layout.natural_of(theta);
        try {
            DVineSpec spec = layout.build_natural(nat);
            return loglik_of(spec, data, opt.threads);
        } catch (const std::exception&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    // starting points: family defaults, optional sequential warm start,
    // seeded jitters of the defaults
    std::vector<std::vector<double>> starts;
    {
        std::vector<double> nat0;
        for (std::size_t b = 0; b < layout.blocks(); ++b)
            nat0.insert(nat0.end(), fam.default_start.begin(), fam.default_start.end());
        starts.push_back(layout.unconstrained_of(nat0));
        if (opt.sequential_init && layout.m == 1 && layout.p > 1 && !data.is_multi)
            starts.push_back(layout.unconstrained_of(detail::sequential_start_uni(layout, data, opt)));
        Rng rng(opt.seed);
        while (static_cast<int>(starts.size()) < opt.starts) {
            std::vector<double> s = starts[0];
            for (double& x : s) x += 1.2 * (rng.uniform() - 0.5) * 2.0;
            starts.push_back(std::move(s));
        }
    }

    NmResult best;
    int total_evals = 0;
    for (const auto& s : starts) {
        NmOptions nm;
        nm.max_evals = opt.max_evals;
        NmResult r = nelder_mead_max(objective, s, nm);
        total_evals += r.evals;
        if (r.f > best.f) best = std::move(r);
    }
    if (!std::isfinite(best.f))
        throw numerical_error("fit_mle: no feasible point found across starts");

    FitReport rep;
    rep.layout = layout;
    rep.names = layout.param_names();
    rep.estimate = layout.natural_of(best.x);
    rep.loglik = best.f;
    rep.evals = total_evals;
    rep.converged = best.converged;

    // central-difference Hessian in transformed space
    const double h = 1e-4;
    std::vector<std::vector<double>> H(d, std::vector<double>(d, 0.0));
    double f0 = best.f;
    std::vector<double> fp(d), fm(d);
    for (std::size_t i = 0; i < d; ++i) {
        auto xp = best.x, xm = best.x;
        xp[i] += h;
        xm[i] -= h;
        fp[i] = objective(xp);
        fm[i] = objective(xm);
        H[i][i] = (fp[i] - 2.0 * f0 + fm[i]) / (h * h);
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            auto xpp = best.x, xpm = best.x, xmp = best.x, xmm = best.x;
            xpp[i] += h;
            xpp[j] += h;
            xpm[i] += h;
            xpm[j] -= h;
            xmp[i] -= h;
            xmp[j] += h;
            xmm[i] -= h;
            xmm[j] -= h;
            H[i][j] = H[j][i] =
                (objective(xpp) - objective(xpm) - objective(xmp) + objective(xmm)) /
                (4.0 * h * h);
        }
    }
    // covariance = (-H)^{-1}, ridge-regularized until the inversion succeeds
    std::vector<std::vector<double>> A(d, std::vector<double>(d));
    std::vector<std::vector<double>> cov;
    for (double ridge = 0.0;; ridge = ridge == 0.0 ? 1e-8 : ridge * 100.0) {
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) A[i][j] = -H[i][j] + (i == j ? ridge : 0.0);
        // Gauss-Jordan with partial pivoting
        std::vector<std::vector<double>> inv(d, std::vector<double>(d, 0.0));
        for (std::size_t i = 0; i < d; ++i) inv[i][i] = 1.0;
        bool ok = true;
        auto M = A;
        for (std::size_t c = 0; c < d && ok; ++c) {
            std::size_t piv = c;
            for (std::size_t r2 = c + 1; r2 < d; ++r2)
                if (std::abs(M[r2][c]) > std::abs(M[piv][c])) piv = r2;
            if (std::abs(M[piv][c]) < 1e-14) {
                ok = false;
                break;
            }
            std::swap(M[piv], M[c]);
            std::swap(inv[piv], inv[c]);
            double s = 1.0 / M[c][c];
            for (std::size_t j = 0; j < d; ++j) {
                M[c][j] *= s;
                inv[c][j] *= s;
            }
            for (std::size_t r2 = 0; r2 < d; ++r2) {
                if (r2 == c) continue;
                double f = M[r2][c];
                for (std::size_t j = 0; j < d; ++j) {
                    M[r2][j] -= f * M[c][j];
                    inv[r2][j] -= f * inv[c][j];
                }
            }
        }
        if (ok) {
            bool pos = true;
            for (std::size_t i = 0; i < d; ++i) pos = pos && inv[i][i] > 0.0;
            if (pos) {
                cov = std::move(inv);
                break;
            }
        }
        if (ridge > 1.0) {
            cov.assign(d, std::vector<double>(d, 0.0));
            break;
        }
    }

    rep.se.resize(d);
    rep.ci90.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        ParamKind kind = fam.kinds[i % bd];
        double se_theta = std::sqrt(std::max(cov[i][i], 0.0));
        // delta method: d natural / d theta at the optimum
        double eps = 1e-6;
        double dnat =
            (to_natural(kind, best.x[i] + eps) - to_natural(kind, best.x[i] - eps)) / (2.0 * eps);
        rep.se[i] = se_theta * std::abs(dnat);
        auto [lo, hi] = detail::natural_bounds(kind);
        double c_lo = std::max(rep.estimate[i] - 1.645 * rep.se[i], lo);
        double c_hi = std::min(rep.estimate[i] + 1.645 * rep.se[i], hi);
        rep.ci90[i] = {c_lo, c_hi};
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Adaptive random walk Metropolis-Hastings
// ---------------------------------------------------------------------------

struct McmcConfig {
    std::size_t iterations = 20000;
    std::size_t burnin = 10000;
    std::size_t adapt_start = 1000;    // sweeps before the adaptive component kicks in
    double beta = 0.05;                // weight of the fixed-scale proposal component
    double target_accept = 0.234;     // informational; the 2.38^2/d scale targets it
    std::uint64_t seed = 1;
    std::size_t thin = 10;             // metric posteriors use every thin-th retained draw
    unsigned threads = 1;
};

struct PosteriorSummary {
    std::string name;
    double mean = 0.0, q05 = 0.0, q95 = 0.0;
};

struct McmcResult {
    std::vector<std::string> names;
    std::vector<std::vector<double>> chain;  // retained draws, natural scale
    std::vector<double> chain_loglik;
    std::vector<double> accept_rate;         // per block, post adaptation
    std::vector<PosteriorSummary> params;
    std::vector<PosteriorSummary> metrics;   // rho_y_1, rho_v_1, lambda_v(0.05), ...
    double dic2 = 0.0;
    std::vector<double> posterior_mean;      // natural scale

    DVineSpec posterior_mean_spec(const VineLayout& layout) const {
        return layout.build_natural(posterior_mean);
    }
};

/// DIC_2: -4 E[log L] + 2 log L(point), the point being the retained draw
/// with the highest posterior density (equivalently, with flat priors, the
/// highest likelihood).
inline double dic2(std::span<const double> chain_loglik, double loglik_at_point) {
    if (chain_loglik.empty()) throw invalid_parameter("dic2: empty chain");
    double mean = std::accumulate(chain_loglik.begin(), chain_loglik.end(), 0.0) /
                  static_cast<double>(chain_loglik.size());
    return -4.0 * mean + 2.0 * loglik_at_point;
}

namespace detail {

/// Running mean/covariance of one block's transformed draws plus the
/// Cholesky factor used by the adaptive proposal.
struct BlockAdapt {
    std::size_t d = 0, n = 0;
    std::vector<double> mean;
    std::vector<std::vector<double>> cov;  // scatter / (n-1)
    std::vector<std::vector<double>> chol;
    bool chol_fresh = false;

    explicit BlockAdapt(std::size_t dim)
        : d(dim), mean(dim, 0.0), cov(dim, std::vector<double>(dim, 0.0)),
          chol(dim, std::vector<double>(dim, 0.0)) {}

    void update(const std::vector<double>& x) {
        ++n;
        std::vector<double> delta(d);
        for (std::size_t i = 0; i < d; ++i) {
            delta[i] = x[i] - mean[i];
            mean[i] += delta[i] / static_cast<double>(n);
        }
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                cov[i][j] += delta[i] * (x[j] - mean[j]);  // Welford cross-product
        chol_fresh = false;
    }

    bool refresh_chol() {
        if (n < d + 2) return false;
        if (chol_fresh) return true;
        std::vector<std::vector<double>> a(d, std::vector<double>(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                a[i][j] = cov[i][j] / static_cast<double>(n - 1) + (i == j ? 1e-10 : 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = a[i][j];
                for (std::size_t k2 = 0; k2 < j; ++k2) s -= chol[i][k2] * chol[j][k2];
                if (i == j) {
                    if (s <= 0.0) return false;
                    chol[i][j] = std::sqrt(s);
                } else {
                    chol[i][j] = s / chol[j][j];
                }
            }
            for (std::size_t j = i + 1; j < d; ++j) chol[i][j] = 0.0;
        }
        chol_fresh = true;
        return true;
    }
};

}  // namespace detail

/// Blockwise adaptive RWMH in transformed space, flat proper priors on the
/// natural parameter ranges. The parameters of each pair-copula form one
/// block; blocks are updated in random order each sweep. Per block the
/// proposal is the usual mixture: with probability 1 - beta a Gaussian with
/// covariance (2.38^2/d) Sigma_hat estimated from past draws, with
/// probability beta (or before adaptation starts) a Gaussian with
/// covariance (0.1^2/d) I. Chains are reproducible bit-for-bit given the
/// seed and thread width.
inline McmcResult fit_mcmc(const VineLayout& layout, const CopulaData& data,
                           const McmcConfig& cfg, const Margin* margin_for_vol = nullptr) {
    if (cfg.burnin >= cfg.iterations)
        throw invalid_parameter("fit_mcmc: burnin must be < iterations");
    const FitFamily& fam = fit_family(layout.family);
    const std::size_t nb = layout.blocks();
    const std::size_t bd = fam.kinds.size();
    const std::size_t d = nb * bd;

    Rng rng(cfg.seed);

    std::vector<double> theta(d);
    {
        std::vector<double> nat0;
        for (std::size_t b = 0; b < nb; ++b)
            nat0.insert(nat0.end(), fam.default_start.begin(), fam.default_start.end());
        theta = layout.unconstrained_of(nat0);
    }

    auto log_posterior = [&](const std::vector<double>& th, double& ll_out) {
        for (std::size_t i = 0; i < d; ++i)
            if (!in_prior_support(fam.kinds[i % bd], th[i]))
                return -std::numeric_limits<double>::infinity();
        double lj = 0.0;
        for (std::size_t i = 0; i < d; ++i) lj += transform_log_jacobian(fam.kinds[i % bd], th[i]);
        try {
            DVineSpec spec = layout.build_natural(layout.natural_of(th, false));
            ll_out = loglik_of(spec, data, cfg.threads);
        } catch (const std::exception&) {
            return -std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(ll_out)) return -std::numeric_limits<double>::infinity();
        return ll_out + lj;
    };

    double cur_ll = 0.0;
    double cur_lp = log_posterior(theta, cur_ll);
    if (!std::isfinite(cur_lp)) throw numerical_error("fit_mcmc: infeasible starting point");

    std::vector<detail::BlockAdapt> adapt(nb, detail::BlockAdapt(bd));
    std::vector<std::size_t> order(nb);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> accepted(nb, 0), proposed(nb, 0);
    std::size_t stall = 0;

    McmcResult res;
    res.names = layout.param_names();
    res.chain.reserve(cfg.iterations - cfg.burnin);
    res.chain_loglik.reserve(cfg.iterations - cfg.burnin);

    const double fixed_sd = 0.1 / std::sqrt(static_cast<double>(bd));
    const double adapt_scale = 2.38 / std::sqrt(static_cast<double>(bd));

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        bool any_accept = false;
        for (std::size_t b : order) {
            std::vector<double> prop = theta;
            bool use_adaptive = it >= cfg.adapt_start && rng.uniform() > cfg.beta &&
                                adapt[b].refresh_chol();
            if (use_adaptive) {
                std::vector<double> z(bd);
                for (auto& v : z) v = rng.normal();
                for (std::size_t i = 0; i < bd; ++i) {
                    double step = 0.0;
                    for (std::size_t j = 0; j <= i; ++j) step += adapt[b].chol[i][j] * z[j];
                    prop[b * bd + i] += adapt_scale * step;
                }
            } else {
                for (std::size_t i = 0; i < bd; ++i) prop[b * bd + i] += fixed_sd * rng.normal();
            }
            double prop_ll = 0.0;
            double prop_lp = log_posterior(prop, prop_ll);
            ++proposed[b];
            if (std::log(rng.uniform()) < prop_lp - cur_lp) {
                theta = std::move(prop);
                cur_lp = prop_lp;
                cur_ll = prop_ll;
                if (it >= cfg.adapt_start) ++accepted[b];
                any_accept = true;
            }
            if (it >= cfg.adapt_start) {
                std::vector<double> block(theta.begin() + static_cast<std::ptrdiff_t>(b * bd),
                                          theta.begin() + static_cast<std::ptrdiff_t>((b + 1) * bd));
                adapt[b].update(block);
            }
        }
        if (it >= cfg.adapt_start) {
            stall = any_accept ? 0 : stall + 1;
            if (stall >= 1000)
                throw numerical_error("fit_mcmc: zero acceptance over 1000 post-adaptation sweeps");
        }
        if (it >= cfg.burnin) {
            res.chain.push_back(layout.natural_of(theta, false));
            res.chain_loglik.push_back(cur_ll);
        }
    }

    res.accept_rate.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        std::size_t post = cfg.iterations > cfg.adapt_start ? cfg.iterations - cfg.adapt_start : 1;
        res.accept_rate[b] = static_cast<double>(accepted[b]) / static_cast<double>(post);
    }

    // posterior summaries
    const std::size_t n_ret = res.chain.size();
    res.posterior_mean.assign(d, 0.0);
    for (const auto& row : res.chain)
        for (std::size_t i = 0; i < d; ++i) res.posterior_mean[i] += row[i];
    for (double& v : res.posterior_mean) v /= static_cast<double>(n_ret);
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> col(n_ret);
        for (std::size_t r = 0; r < n_ret; ++r) col[r] = res.chain[r][i];
        PosteriorSummary s;
        s.name = res.names[i];
        s.mean = res.posterior_mean[i];
        s.q05 = sample_quantile(col, 0.05);
        s.q95 = sample_quantile(col, 0.95);
        res.params.push_back(s);
    }

    // DIC_2 at the highest-likelihood retained draw (flat priors: posterior
    // mode proxy)
    std::size_t best = 0;
    for (std::size_t r = 1; r < n_ret; ++r)
        if (res.chain_loglik[r] > res.chain_loglik[best]) best = r;
    res.dic2 = dic2(res.chain_loglik, res.chain_loglik[best]);

    // dependence-metric posteriors on thinned draws
    if (layout.m == 1) {
        std::vector<double> r_y, r_v, l_lo, l_up;
        std::optional<VolatilityMargin> vm;
        if (margin_for_vol) {
            // margins are shared across draws; wrap without owning
            struct Ref final : Margin {
                const Margin* m;
                explicit Ref(const Margin* mm) : m(mm) {}
                double pdf(double y) const override { return m->pdf(y); }
                double cdf(double y) const override { return m->cdf(y); }
                double quantile(double p) const override { return m->quantile(p); }
                double mean() const override { return m->mean(); }
            };
            vm.emplace(std::make_shared<Ref>(margin_for_vol));
        }
        for (std::size_t r = 0; r < n_ret; r += cfg.thin) {
            DVineSpec spec = layout.build_natural(res.chain[r]);
            const PairCopula& c2 = spec.pair_uni(1);
            r_y.push_back(spearman_rho(c2));
            if (vm) {
                r_v.push_back(rho_v_lag1(c2, *vm, *vm));
                auto cv = [&](double a, double b) { return vol_copula_cdf(c2, *vm, *vm, a, b); };
                std::vector<double> al{0.05, 0.95};
                auto qd = quantile_dependence(cv, al);
                l_lo.push_back(qd.lambda_low[0]);
                l_up.push_back(qd.lambda_up[1]);
            }
        }
        auto summarize = [&](const std::string& name, std::vector<double> v) {
            PosteriorSummary s;
            s.name = name;
            s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            s.q05 = sample_quantile(v, 0.05);
            s.q95 = sample_quantile(v, 0.95);
            res.metrics.push_back(s);
        };
        summarize("rho_y_1", r_y);
        if (vm) {
            summarize("rho_v_1", r_v);
            summarize("lambda_v_low_05", l_lo);
            summarize("lambda_v_up_05", l_up);
        }
    } else {
        // per-pair Spearman posteriors for the multivariate vine
        auto labels = layout.block_labels();
        std::vector<std::vector<double>> sp(nb);
        for (std::size_t r = 0; r < n_ret; r += cfg.thin) {
            DVineSpec spec = layout.build_natural(res.chain[r]);
            for (std::size_t b = 0; b < nb; ++b) sp[b].push_back(spearman_rho(spec.pairs[b], 100));
        }
        for (std::size_t b = 0; b < nb; ++b) {
            PosteriorSummary s;
            s.name = "spearman.k" + std::to_string(labels[b][0]) + "_l" +
                     std::to_string(labels[b][1]) + std::to_string(labels[b][2]);
            s.mean = std::accumulate(sp[b].begin(), sp[b].end(), 0.0) /
                     static_cast<double>(sp[b].size());
            s.q05 = sample_quantile(sp[b], 0.05);
            s.q95 = sample_quantile(sp[b], 0.95);
            res.metrics.push_back(s);
        }
    }

    return res;
}

// ---------------------------------------------------------------------------
// ARCH(1) Gaussian MLE (simulation-study scaffolding)
// ---------------------------------------------------------------------------

struct Arch1Fit {
    double alpha0 = 0.0, alpha1 = 0.0, loglik = 0.0;
};

/// Conditional Gaussian MLE of an ARCH(1) model, conditioning on the first
/// observation. Used by the misspecification study, not a general
/// benchmark-model fitting facility.
inline Arch1Fit fit_arch1(std::span<const double> y) {
    if (y.size() < 50) throw invalid_parameter("fit_arch1: series too short");
    double var = 0.0, mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(y.size() - 1);

    auto objective = [&](const std::vector<double>& th) {
        double a0 = std::exp(th[0]);
        double a1 = 1.0 / (1.0 + std::exp(-th[1]));
        double ll = 0.0;
        for (std::size_t t = 1; t < y.size(); ++t) {
            double s2 = a0 + a1 * y[t - 1] * y[t - 1];
            ll += -0.5 * std::log(2.0 * M_PI * s2) - y[t] * y[t] / (2.0 * s2);
        }
        return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
    };
    NmOptions nm;
    nm.max_evals = 600;
    NmResult best;
    for (double a1_start : {0.2, 0.5, 0.8}) {
        std::vector<double> x0{std::log(var * (1.0 - a1_start)),
                               std::log(a1_start / (1.0 - a1_start))};
        NmResult r = nelder_mead_max(objective, x0, nm);
        if (r.f > best.f) best = std::move(r);
    }
    Arch1Fit fit;
    fit.alpha0 = std::exp(best.x[0]);
    fit.alpha1 = 1.0 / (1.0 + std::exp(-best.x[1]));
    fit.loglik = best.f;
    return fit;
}

}  // namespace hetcop
