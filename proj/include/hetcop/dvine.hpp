#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hetcop/bicop.hpp"
#include "hetcop/common.hpp"
#include "hetcop/rng.hpp"
#include "hetcop/threads.hpp"

namespace hetcop {

/// Parsimonious D-vine for stationary series: one pair-copula per lag for a
/// univariate Markov-p series, and one per (lag, variable pair) cell for an
/// m-variate series. Stationarity is structural: the same PairCopula object
/// is shared by every time index.
struct DVineSpec {
    int m = 1;
    int p = 1;
    std::vector<PairCopula> pairs;

    DVineSpec() = default;

    DVineSpec(int m_, int p_, std::vector<PairCopula> pairs_)
        : m(m_), p(p_), pairs(std::move(pairs_)) {
        if (m < 1 || p < 1) throw invalid_parameter("DVineSpec: need m >= 1 and p >= 1");
        if (pairs.size() != pair_count(m, p))
            throw invalid_parameter("DVineSpec: expected " + std::to_string(pair_count(m, p)) +
                                    " pair-copulas, got " + std::to_string(pairs.size()));
    }

    /// p for m = 1; p m^2 + m(m-1)/2 otherwise.
    static std::size_t pair_count(int m, int p) {
        if (m == 1) return static_cast<std::size_t>(p);
        return static_cast<std::size_t>(p) * m * m + static_cast<std::size_t>(m) * (m - 1) / 2;
    }

    /// Univariate accessor: the lag-k pair-copula c_{k+1}, k = 1..p.
    const PairCopula& pair_uni(int k) const { return pairs[static_cast<std::size_t>(k - 1)]; }

    /// General accessor c^{(k)}_{l2,l1}. For k = 0 requires l2 < l1.
    const PairCopula& pair(int k, int l2, int l1) const {
        return pairs[pair_index(k, l2, l1)];
    }

    std::size_t pair_index(int k, int l2, int l1) const {
        if (m == 1) return static_cast<std::size_t>(k - 1);
        if (k == 0) {
            // triangular block, l2 < l1
            return static_cast<std::size_t>(l1 - 1) * (l1 - 2) / 2 + static_cast<std::size_t>(l2 - 1);
        }
        return static_cast<std::size_t>(m) * (m - 1) / 2 +
               static_cast<std::size_t>(k - 1) * m * m + static_cast<std::size_t>(l2 - 1) * m +
               static_cast<std::size_t>(l1 - 1);
    }

    /// All pair-copulas set to independence (useful as a null model).
    static DVineSpec independence(int m, int p) {
        std::vector<PairCopula> ps(pair_count(m, p), make_independence());
        return DVineSpec(m, p, std::move(ps));
    }
};

/// The working set of conditional arguments. Stored as an (N x depth x 2)
/// array with u_{i|i-r} at (i, r, 0) and u_{i-r|i} at (i, r, 1); for a
/// univariate series N = T, depth = p and the indices reduce to the
/// (t, k, .) layout. Memory is O(T p) / O(T m^2 p), never O(T^2).
class ConditionalGrid {
  public:
    ConditionalGrid() = default;
    ConditionalGrid(std::size_t n, std::size_t depth)
        : n_(n), depth_(depth), store_(n * depth * 2, 0.0) {}

    double& at(std::size_t i, std::size_t r, int side) {
        return store_[(i * depth_ + (r - 1)) * 2 + static_cast<std::size_t>(side)];
    }
    double at(std::size_t i, std::size_t r, int side) const {
        return store_[(i * depth_ + (r - 1)) * 2 + static_cast<std::size_t>(side)];
    }

    std::size_t size() const { return n_; }
    std::size_t depth() const { return depth_; }
    const std::vector<double>& raw() const { return store_; }

  private:
    std::size_t n_ = 0, depth_ = 0;
    std::vector<double> store_;
};

struct LoglikResult {
    double loglik = 0.0;
    ConditionalGrid grid;
};

struct LoglikOptions {
    unsigned threads = 1;
    /// When false, the h-updates of the deepest level are skipped (they feed
    /// no density term); estimation loops use this.
    bool full_grid = true;
};

// ---------------------------------------------------------------------------
// Univariate likelihood (Algorithm 1)
// ---------------------------------------------------------------------------

/// Log density of the stationary univariate D-vine at the copula data u.
/// Level k computes, in parallel across t, the pair-copula term
/// c_{k+1}(u_{t-k|t-1}, u_{t|t-k+1}) and the two h-updates. Per-term logs
/// land in a buffer summed sequentially, so the result does not depend on
/// the thread count.
inline LoglikResult loglik_uni(const DVineSpec& spec, std::span<const double> u,
                               const LoglikOptions& opt = {}) {
    if (spec.m != 1) throw invalid_parameter("loglik_uni: spec must have m = 1");
    const std::size_t T = u.size();
    if (T < 2) throw invalid_parameter("loglik_uni: need T >= 2");
    const int p = spec.p;

    LoglikResult res;
    res.grid = ConditionalGrid(T, static_cast<std::size_t>(p));
    ConditionalGrid& g = res.grid;
    std::vector<double> terms(T);
    double total = 0.0;

    for (int k = 1; k <= p; ++k) {
        const PairCopula& pc = spec.pair_uni(k);
        const bool with_h = opt.full_grid || k < p;
        std::fill(terms.begin(), terms.end(), 0.0);
        const std::size_t t_begin = static_cast<std::size_t>(k);  // 0-based t = k..T-1
        parallel_for(T - t_begin, opt.threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t idx = b; idx < e; ++idx) {
                std::size_t t = t_begin + idx;
                // a = u_{t-k|t-1}, b = u_{t|t-k+1}
                double a = (k == 1) ? u[t - 1] : g.at(t - 1, static_cast<std::size_t>(k - 1), 1);
                double bb = (k == 1) ? u[t] : g.at(t, static_cast<std::size_t>(k - 1), 0);
                CellEval c = pc.cell(a, bb, with_h);
                if (!std::isfinite(c.log_density))
                    throw numerical_error("loglik_uni: non-finite term at t=" +
                                          std::to_string(t + 1) + ", k=" + std::to_string(k));
                terms[t] = c.log_density;
                if (with_h) {
                    g.at(t, static_cast<std::size_t>(k), 0) = clamp_unit_unchecked(c.h1);
                    g.at(t, static_cast<std::size_t>(k), 1) = clamp_unit_unchecked(c.h2);
                }
            }
        });
        for (std::size_t t = t_begin; t < T; ++t) total += terms[t];
    }
    res.loglik = total;
    return res;
}

// ---------------------------------------------------------------------------
// Multivariate likelihood (Algorithm 2)
// ---------------------------------------------------------------------------

namespace detail {
struct StackIndex {
    int s, t, k, l1, l2;
};

/// Index map between stacked positions (i, j) and (time, variable) labels.
inline StackIndex stack_index(std::size_t i1, std::size_t j1, int m) {
    StackIndex r;
    r.s = static_cast<int>((j1 + static_cast<std::size_t>(m) - 1) / m);
    r.t = static_cast<int>((i1 + static_cast<std::size_t>(m) - 1) / m);
    r.k = r.t - r.s;
    r.l1 = static_cast<int>(i1) - m * (r.t - 1);
    r.l2 = static_cast<int>(j1) - m * (r.s - 1);
    return r;
}
}  // namespace detail

/// Log density of the stationary multivariate D-vine (blocks K_0..K_p) at
/// the T x m copula data matrix, stacked by time then variable. Pairs whose
/// lag exceeds p have no pair-copula and are skipped; their grid cells are
/// provably never read by retained pairs.
inline LoglikResult loglik_multi(const DVineSpec& spec, const std::vector<std::vector<double>>& u,
                                 const LoglikOptions& opt = {}) {
    const int m = spec.m, p = spec.p;
    const std::size_t T = u.size();
    if (T < 1) throw invalid_parameter("loglik_multi: need T >= 1");
    for (const auto& row : u)
        if (static_cast<int>(row.size()) != m)
            throw invalid_parameter("loglik_multi: data row width != m");
    const std::size_t N = T * static_cast<std::size_t>(m);
    const std::size_t depth = N > 1
        ? std::min(N - 1, static_cast<std::size_t>(m) * (static_cast<std::size_t>(p) + 1) - 1)
        : 0;

    auto u_at = [&](std::size_t i1) {  // 1-based stacked index
        std::size_t t = (i1 - 1) / static_cast<std::size_t>(m);
        std::size_t l = (i1 - 1) % static_cast<std::size_t>(m);
        return u[t][l];
    };

    LoglikResult res;
    res.grid = ConditionalGrid(N + 1, depth);  // 1-based rows; row 0 unused
    ConditionalGrid& g = res.grid;
    std::vector<double> terms(N + 1);
    double total = 0.0;

    for (std::size_t r = 1; r <= depth; ++r) {
        std::fill(terms.begin(), terms.end(), 0.0);
        parallel_for(N - r, opt.threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t idx = b; idx < e; ++idx) {
                std::size_t i = r + 1 + idx;  // 1-based
                std::size_t j = i - r;
                detail::StackIndex si = detail::stack_index(i, j, m);
                if (si.k > p) continue;
                double a = (r == 1) ? u_at(j) : g.at(i - 1, r - 1, 1);   // u_{j|i-1}
                double bb = (r == 1) ? u_at(i) : g.at(i, r - 1, 0);      // u_{i|j+1}
                const PairCopula& pc = spec.pair(si.k, si.l2, si.l1);
                bool with_h = opt.full_grid || r < depth;
                CellEval c = pc.cell(a, bb, with_h);
                if (!std::isfinite(c.log_density))
                    throw numerical_error("loglik_multi: non-finite term at i=" +
                                          std::to_string(i) + ", j=" + std::to_string(j));
                terms[i] = c.log_density;
                if (with_h) {
                    g.at(i, r, 0) = clamp_unit_unchecked(c.h1);  // u_{i|j}
                    g.at(i, r, 1) = clamp_unit_unchecked(c.h2);  // u_{j|i}
                }
            }
        });
        for (std::size_t i = r + 1; i <= N; ++i) total += terms[i];
    }
    res.loglik = total;
    return res;
}

// ---------------------------------------------------------------------------
// Simulation by sequential conditional inversion
// ---------------------------------------------------------------------------

/// Simulate a univariate copula-data series of length T. Each new value is
/// obtained by drawing w ~ U(0,1) and inverting the chain of conditional
/// CDFs through lags p..1; the running ConditionalGrid supplies the
/// conditioning arguments.
inline std::vector<double> simulate_uni(const DVineSpec& spec, std::size_t T, std::uint64_t seed) {
    if (spec.m != 1) throw invalid_parameter("simulate_uni: spec must have m = 1");
    const int p = spec.p;
    Rng rng(seed);
    std::vector<double> u(T);
    ConditionalGrid g(T, static_cast<std::size_t>(p));
    std::vector<double> q(static_cast<std::size_t>(p) + 1);
    if (T == 0) return u;
    u[0] = rng.uniform();
    for (std::size_t t = 1; t < T; ++t) {
        int K = static_cast<int>(std::min<std::size_t>(t, static_cast<std::size_t>(p)));
        double w = rng.uniform();
        // q[k] = u_{t|t-k}; invert from the deepest lag inward
        q[static_cast<std::size_t>(K)] = w;
        for (int k = K; k >= 1; --k) {
            double a = (k == 1) ? u[t - 1] : g.at(t - 1, static_cast<std::size_t>(k - 1), 1);
            q[static_cast<std::size_t>(k - 1)] = spec.pair_uni(k).h1_inv(q[static_cast<std::size_t>(k)], a);
        }
        u[t] = q[0];
        for (int k = 1; k <= K; ++k) {
            double a = (k == 1) ? u[t - 1] : g.at(t - 1, static_cast<std::size_t>(k - 1), 1);
            g.at(t, static_cast<std::size_t>(k), 0) = q[static_cast<std::size_t>(k)];
            g.at(t, static_cast<std::size_t>(k), 1) =
                spec.pair_uni(k).h2(a, q[static_cast<std::size_t>(k - 1)]);
        }
    }
    return u;
}

/// Simulate a T x m matrix of copula data from the multivariate vine.
/// Within each time slice variables are generated in the fixed order 1..m.
inline std::vector<std::vector<double>> simulate_multi(const DVineSpec& spec, std::size_t T,
                                                       std::uint64_t seed) {
    const int m = spec.m, p = spec.p;
    Rng rng(seed);
    const std::size_t N = T * static_cast<std::size_t>(m);
    const std::size_t depth =
        N > 1 ? std::min(N - 1, static_cast<std::size_t>(m) * (static_cast<std::size_t>(p) + 1) - 1)
              : 1;
    ConditionalGrid g(N + 1, depth);
    std::vector<double> u(N + 1, 0.0);  // 1-based

    for (std::size_t i = 1; i <= N; ++i) {
        int t = static_cast<int>((i + static_cast<std::size_t>(m) - 1) / m);
        std::size_t j_min = static_cast<std::size_t>(
            std::max<long long>(1, static_cast<long long>(m) * (t - 1 - p) + 1));
        double w = rng.uniform();
        if (i == 1) {
            u[1] = w;
            continue;
        }
        std::size_t span = i - j_min;     // number of conditioning pairs
        std::vector<double> a(span);      // a[j - j_min] = u_{j|i-1}
        for (std::size_t j = j_min; j < i; ++j) {
            std::size_t r = (i - 1) - j;
            a[j - j_min] = (r == 0) ? u[j] : g.at(i - 1, r, 1);
        }
        // qv[idx] = u_{i|j_min+idx}; invert outermost (j_min) to innermost
        std::vector<double> qv(span + 1);
        qv[0] = w;  // u_{i|j_min} = F(u_i | window) set to the innovation
        for (std::size_t j = j_min; j < i; ++j) {
            detail::StackIndex si = detail::stack_index(i, j, m);
            const PairCopula& pc = spec.pair(si.k, si.l2, si.l1);
            qv[j - j_min + 1] = pc.h1_inv(qv[j - j_min], a[j - j_min]);
        }
        u[i] = qv[span];
        // store u_{i|j} = qv[j - j_min] and u_{j|i} = h2(u_{j|i-1} | u_{i|j+1})
        for (std::size_t j = j_min; j < i; ++j) {
            detail::StackIndex si = detail::stack_index(i, j, m);
            const PairCopula& pc = spec.pair(si.k, si.l2, si.l1);
            g.at(i, i - j, 0) = clamp_unit_unchecked(qv[j - j_min]);
            g.at(i, i - j, 1) = clamp_unit_unchecked(pc.h2(a[j - j_min], qv[j - j_min + 1]));
        }
    }

    std::vector<std::vector<double>> out(T, std::vector<double>(static_cast<std::size_t>(m)));
    for (std::size_t i = 1; i <= N; ++i)
        out[(i - 1) / static_cast<std::size_t>(m)][(i - 1) % static_cast<std::size_t>(m)] = u[i];
    return out;
}

// ---------------------------------------------------------------------------
// One-step conditional distribution (univariate)
// ---------------------------------------------------------------------------

namespace detail {
/// Grid column values u_{s|t_end} for the history window, where t_end is the
/// last history index. Returns a[k-1] = u_{t_end+1-k | t_end} for k = 1..K.
inline std::vector<double> history_arguments(const DVineSpec& spec,
                                             std::span<const double> history) {
    const std::size_t L = history.size();
    const int K = static_cast<int>(std::min<std::size_t>(L, static_cast<std::size_t>(spec.p)));
    std::vector<double> a(static_cast<std::size_t>(K));
    if (K == 0) return a;
    a[0] = clamp_unit(history[L - 1]);
    if (K == 1) return a;
    LoglikOptions opt;
    LoglikResult r = loglik_uni(spec, history, opt);
    for (int k = 2; k <= K; ++k)
        a[static_cast<std::size_t>(k - 1)] = r.grid.at(L - 1, static_cast<std::size_t>(k - 1), 1);
    return a;
}
}  // namespace detail

/// F(u_{t} <= u | last p copula data): one extra sweep of the Algorithm-1
/// recursion, u_{t|t-k} = h1(u_{t|t-k+1} | u_{t-k|t-1}).
inline double conditional_cdf(const DVineSpec& spec, std::span<const double> history, double u) {
    if (spec.m != 1) throw invalid_parameter("conditional_cdf: univariate only");
    auto a = detail::history_arguments(spec, history);
    double x = clamp_unit(u);
    for (std::size_t k = 1; k <= a.size(); ++k)
        x = spec.pair_uni(static_cast<int>(k)).h1(x, a[k - 1]);
    return x;
}

/// Quantile of the one-step conditional distribution: nested h1-inverses,
/// lag order p down to 1.
inline double conditional_quantile(const DVineSpec& spec, std::span<const double> history,
                                   double q) {
    if (spec.m != 1) throw invalid_parameter("conditional_quantile: univariate only");
    auto a = detail::history_arguments(spec, history);
    double x = clamp_unit(q);
    for (std::size_t k = a.size(); k >= 1; --k)
        x = spec.pair_uni(static_cast<int>(k)).h1_inv(x, a[k - 1]);
    return x;
}

}  // namespace hetcop
