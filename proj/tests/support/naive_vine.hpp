#pragma once

// Literal top-down recursion for the D-vine conditional arguments and
// log-likelihood. Every conditional CDF is recomputed from scratch, with no
// grid, no level ordering and no shared state — an independent oracle for
// the O(T p) algorithms in dvine.hpp. Exponential cost; only usable for toy
// sizes.

#include <cmath>
#include <span>
#include <vector>

#include "hetcop/dvine.hpp"

namespace testutil {

// ---- univariate ----------------------------------------------------------

// u_{t|s} = h1_{s,t}(u_{t|s+1} | u_{s|t-1}), 1-based t, s <= t
inline double naive_u_fwd(const hetcop::DVineSpec& spec, std::span<const double> u, int t, int s);
// u_{s|t} = h2_{s,t}(u_{s|t-1} | u_{t|s+1})
inline double naive_u_bwd(const hetcop::DVineSpec& spec, std::span<const double> u, int s, int t);

inline double naive_u_fwd(const hetcop::DVineSpec& spec, std::span<const double> u, int t, int s) {
    if (s == t) return u[static_cast<std::size_t>(t - 1)];
    int k = t - s;
    return spec.pair_uni(k).h1(naive_u_fwd(spec, u, t, s + 1), naive_u_bwd(spec, u, s, t - 1));
}

inline double naive_u_bwd(const hetcop::DVineSpec& spec, std::span<const double> u, int s, int t) {
    if (s == t) return u[static_cast<std::size_t>(s - 1)];
    int k = t - s;
    return spec.pair_uni(k).h2(naive_u_bwd(spec, u, s, t - 1), naive_u_fwd(spec, u, t, s + 1));
}

inline double naive_loglik_uni(const hetcop::DVineSpec& spec, std::span<const double> u) {
    int T = static_cast<int>(u.size());
    double total = 0.0;
    for (int t = 2; t <= T; ++t) {
        int kmax = std::min(t - 1, spec.p);
        for (int k = 1; k <= kmax; ++k) {
            double a = naive_u_bwd(spec, u, t - k, t - 1);
            double b = naive_u_fwd(spec, u, t, t - k + 1);
            total += spec.pair_uni(k).log_density(a, b);
        }
    }
    return total;
}

// ---- multivariate (stacked indices) ---------------------------------------

struct NaiveMulti {
    const hetcop::DVineSpec& spec;
    std::vector<double> stacked;  // 1-based copy
    int m;

    NaiveMulti(const hetcop::DVineSpec& s, const std::vector<std::vector<double>>& u)
        : spec(s), m(s.m) {
        stacked.push_back(0.0);
        for (const auto& row : u)
            for (double v : row) stacked.push_back(v);
    }

    const hetcop::PairCopula& pc(std::size_t i, std::size_t j) const {
        auto si = hetcop::detail::stack_index(i, j, m);
        return spec.pair(si.k, si.l2, si.l1);
    }

    int lag(std::size_t i, std::size_t j) const { return hetcop::detail::stack_index(i, j, m).k; }

    // u_{i|j} for j <= i
    double fwd(std::size_t i, std::size_t j) const {
        if (j == i) return stacked[i];
        return pc(i, j).h1(fwd(i, j + 1), bwd(j, i - 1));
    }

    // u_{j|i} for j <= i
    double bwd(std::size_t j, std::size_t i) const {
        if (j == i) return stacked[j];
        return pc(i, j).h2(bwd(j, i - 1), fwd(i, j + 1));
    }

    double loglik() const {
        std::size_t N = stacked.size() - 1;
        double total = 0.0;
        for (std::size_t i = 2; i <= N; ++i) {
            for (std::size_t j = 1; j < i; ++j) {
                if (lag(i, j) > spec.p) continue;
                total += pc(i, j).log_density(bwd(j, i - 1), fwd(i, j + 1));
            }
        }
        return total;
    }
};

}  // namespace testutil
