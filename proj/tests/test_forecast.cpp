#include <gtest/gtest.h>

#include <cmath>

#include "hetcop/datagen.hpp"
#include "hetcop/forecast.hpp"
#include "support/test_utils.hpp"

using namespace hetcop;

TEST(PredictiveUni, IndependenceReducesToMargin) {
    DVineSpec spec = DVineSpec::independence(1, 2);
    NormalMargin nm(0.0, 2.0);
    std::vector<double> hist{0.5, -1.0};
    for (double y : {-2.0, 0.0, 1.5}) {
        EXPECT_NEAR(predictive_cdf_uni(spec, nm, hist, y), nm.cdf(y), 1e-10);
    }
    EXPECT_NEAR(predictive_var_uni(spec, nm, hist, 0.05), nm.quantile(0.05), 1e-8);
}

TEST(PredictiveUni, MonotoneInY) {
    PairCopula c = make_mixture_t(0.5, 0.8, 4.0, 0.4, 6.0);
    DVineSpec spec(1, 1, {c});
    NormalMargin nm(0.0, 1.0);
    std::vector<double> hist{2.0};
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
        double y = -4.0 + 8.0 * i / 100.0;
        double f = predictive_cdf_uni(spec, nm, hist, y);
        EXPECT_GE(f, prev - 1e-12);
        prev = f;
    }
}

TEST(PredictiveUni, VarNondecreasingInAlpha) {
    PairCopula c = make_mixture_t(0.5, 0.8, 4.0, 0.4, 6.0);
    DVineSpec spec(1, 1, {c});
    NormalMargin nm(0.0, 1.0);
    std::vector<double> hist{2.0};
    double prev = -1e9;
    for (double a : {0.01, 0.05, 0.1, 0.5, 0.9, 0.95, 0.99}) {
        double v = predictive_var_uni(spec, nm, hist, a);
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(PredictiveUni, MonteCarloDecileCheck) {
    PairCopula c = make_mixture_t(0.5, 0.9, 3.0, 0.9, 3.0);
    DVineSpec spec(1, 1, {c});
    NormalMargin nm(0.0, 1.0);
    std::vector<double> hist{2.2};  // a large previous move
    std::vector<double> hist_u{clamp_unit_unchecked(nm.cdf(hist[0]))};
    // simulate next-step values through the conditional quantile
    Rng rng(121);
    const std::size_t n = 100000;
    std::vector<double> draws(n);
    for (auto& d : draws) d = nm.quantile(conditional_quantile(spec, hist_u, rng.uniform()));
    std::sort(draws.begin(), draws.end());
    for (int dec = 1; dec <= 9; ++dec) {
        double q = dec / 10.0;
        double y = draws[static_cast<std::size_t>(q * n)];
        EXPECT_NEAR(predictive_cdf_uni(spec, nm, hist, y), q, 0.01) << "decile " << dec;
    }
}

TEST(PredictivePortfolio, DegenerateWeightMatchesUnivariate) {
    // cross-sectional dependence plus a degenerate weight vector: the
    // portfolio sample must reproduce the first series' predictive law
    std::vector<PairCopula> pairs{make_t(0.6, 10.0)};
    for (int i = 0; i < 4; ++i) pairs.push_back(make_mixture_t(0.5, 0.7, 5.0, 0.3, 7.0));
    DVineSpec spec(2, 1, pairs);
    std::vector<MarginPtr> margins{std::make_shared<NormalMargin>(0.0, 1.0),
                                   std::make_shared<NormalMargin>(0.0, 2.0)};
    std::vector<std::vector<double>> hist{{0.3, -0.5}, {1.9, 0.8}};
    std::vector<double> w{1.0, 0.0};
    auto ps = predictive_portfolio(spec, margins, hist, w, 60000, 122);

    // oracle: marginal predictive of series 1 via its own conditional chain,
    // by simulation from the same model
    Rng rng(123);
    std::vector<double> direct(60000);
    std::vector<std::vector<double>> u(hist.size(), std::vector<double>(2));
    std::vector<double> stacked;
    for (std::size_t t = 0; t < hist.size(); ++t)
        for (int l = 0; l < 2; ++l) {
            u[t][l] = clamp_unit_unchecked(margins[l]->cdf(hist[t][l]));
            stacked.push_back(u[t][l]);
        }
    auto res = loglik_multi(spec, u);
    for (auto& d : direct) {
        auto un = detail::simulate_next_slice(spec, res.grid, stacked, rng);
        d = margins[0]->quantile(un[0]);
    }
    std::sort(direct.begin(), direct.end());
    for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) {
        EXPECT_NEAR(ps.quantile(q), direct[static_cast<std::size_t>(q * direct.size())], 0.06);
    }
}

TEST(PredictivePortfolio, ComonotonePairsAverageQuantiles) {
    // tau -> 1 Gumbel makes the two series near-comonotone, so the portfolio
    // quantile approaches the average of the marginal quantiles
    std::vector<PairCopula> pairs{make_gumbel(0.995)};
    for (int i = 0; i < 4; ++i) pairs.push_back(make_independence());
    DVineSpec spec(2, 1, pairs);
    std::vector<MarginPtr> margins{std::make_shared<NormalMargin>(0.0, 1.0),
                                   std::make_shared<NormalMargin>(0.5, 2.0)};
    std::vector<std::vector<double>> hist{{0.0, 0.5}};
    std::vector<double> w{0.5, 0.5};
    auto ps = predictive_portfolio(spec, margins, hist, w, 40000, 124);
    for (double a : {0.05, 0.5, 0.95}) {
        double avg = 0.5 * (margins[0]->quantile(a) + margins[1]->quantile(a));
        EXPECT_NEAR(ps.quantile(a), avg, 0.05);
    }
}

TEST(PredictivePortfolio, IndependenceTrivariateMatchesConvolutionOracle) {
    DVineSpec spec = DVineSpec::independence(3, 1);
    std::vector<MarginPtr> margins{std::make_shared<NormalMargin>(0.0, 1.0),
                                   std::make_shared<NormalMargin>(0.0, 1.5),
                                   std::make_shared<NormalMargin>(0.0, 0.5)};
    std::vector<std::vector<double>> hist{{0.1, -0.2, 0.3}};
    std::vector<double> w{1.0 / 3, 1.0 / 3, 1.0 / 3};
    auto ps = predictive_portfolio(spec, margins, hist, w, 100000, 125);
    // direct convolution by simulation
    Rng rng(126);
    std::vector<double> conv(100000);
    for (auto& v : conv)
        v = (rng.normal() * 1.0 + rng.normal() * 1.5 + rng.normal() * 0.5) / 3.0;
    std::sort(conv.begin(), conv.end());
    double oracle = conv[static_cast<std::size_t>(0.05 * conv.size())];
    double se = 0.011;  // ~ 2 MC SEs of a 5% quantile at n = 1e5 for this scale
    EXPECT_NEAR(ps.quantile(0.05), oracle, 2.0 * se);
}

// ---------------------------------------------------------------------------
// backtest statistics
// ---------------------------------------------------------------------------

TEST(Backtest, NullCountsGiveZeroStatistics) {
    // transition counts tuned so pi01 = pi11 = pi = alpha = 0.25
    auto r = backtest_from_counts(900, 300, 300, 100, 0.25);
    EXPECT_NEAR(r.lr_uc, 0.0, 1e-12);
    EXPECT_NEAR(r.lr_ind, 0.0, 1e-12);
    EXPECT_NEAR(r.lr_cc, 0.0, 1e-12);
}

TEST(Backtest, CountsMatchDirectLikelihoodOracle) {
    long long n00 = 900, n01 = 50, n10 = 50, n11 = 0;
    double alpha = 0.05;
    auto r = backtest_from_counts(n00, n01, n10, n11, alpha);
    // independent arithmetic from the likelihoods
    double n0 = 950, n1 = 50, n = 1000;
    double pi = n1 / n;
    double lr_uc = -2.0 * (n0 * std::log((1 - alpha) / (1 - pi)) + n1 * std::log(alpha / pi));
    double pi01 = 50.0 / 950.0, pi2 = 50.0 / 1000.0;
    double lr_ind = -2.0 * ((n00 + n10) * std::log(1 - pi2) + (n01 + n11) * std::log(pi2) -
                            n00 * std::log(1 - pi01) - n01 * std::log(pi01) - 0.0 - 0.0);
    EXPECT_NEAR(r.lr_uc, lr_uc, 1e-10);
    EXPECT_NEAR(r.lr_ind, lr_ind, 1e-10);
    EXPECT_NEAR(r.lr_cc, lr_uc + lr_ind, 1e-10);
}

TEST(Backtest, ZeroExceedancesClosedForm) {
    std::vector<double> realized(500, 1.0), var(500, 0.0);  // never breached
    auto r = backtest(realized, var, 0.01);
    EXPECT_TRUE(r.degenerate);
    EXPECT_NEAR(r.lr_uc, -2.0 * 500.0 * std::log(0.99), 1e-10);
    EXPECT_DOUBLE_EQ(r.alpha_hat, 0.0);
}

TEST(Backtest, InvariantToMonotoneTransform) {
    Rng rng(127);
    std::vector<double> y(400), v(400);
    for (std::size_t i = 0; i < 400; ++i) {
        y[i] = rng.normal();
        v[i] = -1.5 + 0.1 * rng.normal();
    }
    auto r1 = backtest(y, v, 0.05);
    std::vector<double> ty(400), tv(400);
    for (std::size_t i = 0; i < 400; ++i) {
        ty[i] = std::exp(y[i]);
        tv[i] = std::exp(v[i]);
    }
    auto r2 = backtest(ty, tv, 0.05);
    EXPECT_DOUBLE_EQ(r1.lr_cc, r2.lr_cc);
    EXPECT_DOUBLE_EQ(r1.alpha_hat, r2.alpha_hat);
}

TEST(Backtest, TrueModelOracleIsCalibrated) {
    // ARCH(1) with its exact conditional VaR: exceedances are iid Bernoulli
    ArchParams par;
    auto y = simulate_arch(par, 3669, 1);
    for (double alpha : {0.01, 0.05, 0.1, 0.9, 0.95, 0.99}) {
        std::vector<double> var(y.size() - 1);
        for (std::size_t t = 1; t < y.size(); ++t) {
            double s2 = par.alpha0 + par.alphas[0] * y[t - 1] * y[t - 1];
            var[t - 1] = std::sqrt(s2) * norm_quantile(alpha);
        }
        std::span<const double> realized(y.data() + 1, y.size() - 1);
        auto r = backtest(realized, var, alpha);
        double band = 1.96 * std::sqrt(alpha * (1 - alpha) / static_cast<double>(realized.size()));
        EXPECT_NEAR(r.alpha_hat, alpha, band) << alpha;
        EXPECT_GT(r.p_cc, 0.01) << alpha;
    }
}

TEST(RollingBacktest, IndependenceModelOnIidData) {
    Rng rng(129);
    std::vector<double> y(2000);
    for (auto& v : y) v = rng.normal();
    DVineSpec spec = DVineSpec::independence(1, 1);
    NormalMargin nm(0.0, 1.0);
    std::vector<double> alphas{0.01, 0.05, 0.1, 0.9, 0.95, 0.99};
    auto rows = rolling_backtest_uni(spec, nm, y, alphas, 2);
    ASSERT_EQ(rows.size(), alphas.size());
    for (const auto& row : rows) {
        double band =
            1.96 * std::sqrt(row.alpha * (1 - row.alpha) / static_cast<double>(y.size() - 1));
        EXPECT_NEAR(row.alpha_hat, row.alpha, band + 0.002) << row.alpha;
        EXPECT_FALSE(row.reject99) << row.alpha;
    }
}

TEST(RollingBacktest, VarSeriesRespondsToVolatility) {
    // after a large move the fitted heteroskedastic copula must widen the
    // predictive interval
    PairCopula c = make_mixture_t(0.5, 0.9, 3.0, 0.9, 3.0);
    DVineSpec spec(1, 1, {c});
    NormalMargin nm(0.0, 1.0);
    std::vector<double> histq{0.02};   // extreme yesterday
    std::vector<double> histm{0.5};    // calm yesterday
    std::vector<double> yq{nm.quantile(histq[0])}, ym{nm.quantile(histm[0])};
    double vq = predictive_var_uni(spec, nm, yq, 0.05);
    double vm = predictive_var_uni(spec, nm, ym, 0.05);
    EXPECT_LT(vq, vm);  // wider (more negative) VaR after the extreme day
}
