#include <gtest/gtest.h>

#include <cmath>

#include "hetcop/volcop.hpp"
#include "support/test_utils.hpp"

using namespace hetcop;

namespace {
VolatilityMargin normal_vol() {
    return VolatilityMargin(std::make_shared<NormalMargin>(0.0, 1.0));
}
}  // namespace

// ---------------------------------------------------------------------------
// proxy margin
// ---------------------------------------------------------------------------

TEST(VolMargin, StandardNormalFold) {
    VolatilityMargin vm = normal_vol();
    EXPECT_DOUBLE_EQ(vm.cdf(0.0), 0.0);
    for (double v : {0.3, 1.0, 2.5}) EXPECT_NEAR(vm.cdf(v), 2.0 * norm_cdf(v) - 1.0, 1e-12);
}

TEST(VolMargin, UniformFoldIsLinear) {
    VolatilityMargin vm(std::make_shared<BetaMargin>(1.0, 1.0));  // uniform(0,1), mean 0.5
    for (double v : {0.05, 0.2, 0.45}) EXPECT_NEAR(vm.cdf(v), 2.0 * v, 1e-9);
}

TEST(VolMargin, QuantileRoundTrip) {
    VolatilityMargin vm = normal_vol();
    for (double q : {0.1, 0.5, 0.9}) EXPECT_NEAR(vm.cdf(vm.quantile(q)), q, 1e-8);
    VolatilityMargin lm(std::make_shared<LognormalMargin>(1.0, 1.0));
    for (double q : {0.1, 0.5, 0.9}) EXPECT_NEAR(lm.cdf(lm.quantile(q)), q, 1e-8);
}

TEST(VolMargin, FoldInvariantToVolatilityTransform) {
    // G(F_V^{-1}(q)) is the same whether the proxy is |a| or a^2: invert the
    // squared-proxy margin F_{V2}(v) = F_V(sqrt(v)) and map back
    VolatilityMargin vm(std::make_shared<LognormalMargin>(0.5, 0.8));
    for (double q : {0.05, 0.3, 0.7, 0.97}) {
        double a1 = vm.quantile(q);
        double lo = 0.0, hi = vm.vmax() * vm.vmax();
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            if (vm.cdf(std::sqrt(mid)) < q)
                lo = mid;
            else
                hi = mid;
        }
        double a2 = std::sqrt(0.5 * (lo + hi));
        EXPECT_NEAR(a1, a2, 5e-9 * (1.0 + a1));
    }
}

// ---------------------------------------------------------------------------
// Theorem 1 / Lemma 1
// ---------------------------------------------------------------------------

TEST(VolCopula, IndependenceBaseFactorizes) {
    VolatilityMargin vm = normal_vol();
    PairCopula indep = make_independence();
    for (double a : {0.2, 0.5, 0.9})
        for (double b : {0.1, 0.6}) {
            EXPECT_NEAR(vol_copula_cdf(indep, vm, vm, a, b), a * b, 1e-9);
            EXPECT_NEAR(vol_copula_density(indep, vm, vm, a, b), 1.0, 1e-9);
        }
}

TEST(VolCopula, SymmetricMarginsMatchLemma1OnGrid) {
    VolatilityMargin vm = normal_vol();
    PairCopula base = make_mixture_t(0.4, 0.7, 6.0, 0.3, 4.0);
    for (int i = 1; i <= 20; ++i) {
        for (int j = 1; j <= 20; ++j) {
            double a = i / 21.0, b = j / 21.0;
            EXPECT_NEAR(vol_copula_cdf(base, vm, vm, a, b), vol_copula_cdf_symmetric(base, a, b),
                        1e-8);
            EXPECT_NEAR(vol_copula_density(base, vm, vm, a, b),
                        vol_copula_density_symmetric(base, a, b), 1e-6);
        }
    }
}

TEST(VolCopula, AsymmetricMarginChangesTheCopula) {
    // with a log-normal margin the volatility copula must differ from the
    // symmetric-margin formula somewhere
    VolatilityMargin lm(std::make_shared<LognormalMargin>(0.0, 0.8));
    PairCopula base = make_mixture_t(0.4, 0.7, 6.0, 0.3, 4.0);
    double worst = 0.0;
    for (int i = 1; i <= 20; ++i)
        for (int j = 1; j <= 20; ++j) {
            double a = i / 21.0, b = j / 21.0;
            worst = std::max(worst, std::abs(vol_copula_cdf(base, lm, lm, a, b) -
                                             vol_copula_cdf_symmetric(base, a, b)));
        }
    EXPECT_GT(worst, 1e-3);
}

TEST(VolCopula, UniformMarginsOfCv) {
    VolatilityMargin vm = normal_vol();
    VolatilityMargin lm(std::make_shared<LognormalMargin>(0.0, 0.8));
    PairCopula base = make_mixture_t(0.5, 0.8, 5.0, 0.4, 7.0);
    for (double a : {0.05, 0.3, 0.55, 0.8, 0.99}) {
        EXPECT_NEAR(vol_copula_cdf(base, vm, vm, a, 1.0), a, 1e-8);
        EXPECT_NEAR(vol_copula_cdf(base, vm, vm, 1.0, a), a, 1e-8);
        EXPECT_NEAR(vol_copula_cdf(base, lm, lm, a, 1.0), a, 1e-8);
        EXPECT_NEAR(vol_copula_cdf(base, lm, lm, 1.0, a), a, 1e-8);
    }
}

TEST(VolCopula, MonteCarloOracleAtCenter) {
    // simulate from the base copula, push through normal margins, fold, and
    // compare the rank-based empirical volatility copula at (0.5, 0.5)
    PairCopula base = make_t(0.9, 40.0);
    VolatilityMargin vm = normal_vol();
    auto pairs = sample_pair(base, 1000000, 71);
    std::vector<double> vs(pairs.size()), vt(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        vs[i] = std::abs(norm_quantile(pairs[i].first));
        vt[i] = std::abs(norm_quantile(pairs[i].second));
    }
    auto rs = rank_pit(vs), rt = rank_pit(vt);
    double emp = empirical_copula(rs, rt, 0.5, 0.5);
    EXPECT_NEAR(emp, vol_copula_cdf(base, vm, vm, 0.5, 0.5), 0.005);
}

TEST(VolCopula, DensityIntegratesToOneWithAsymmetricMargins) {
    VolatilityMargin lm(std::make_shared<LognormalMargin>(0.0, 0.8));
    PairCopula base = make_mixture_t(0.4, 0.7, 6.0, 0.3, 4.0);
    // cosine substitution tames the corner spikes inherited from the base
    const QuadRule& r = gauss_legendre(300);
    double mass = 0.0;
    for (std::size_t i = 0; i < 300; ++i) {
        double si = r.nodes[i];
        double x = 0.5 * (1.0 - std::cos(M_PI * si));
        double ji = 0.5 * M_PI * std::sin(M_PI * si) * r.weights[i];
        double row = 0.0;
        for (std::size_t j = 0; j < 300; ++j) {
            double sj = r.nodes[j];
            double y = 0.5 * (1.0 - std::cos(M_PI * sj));
            double jj = 0.5 * M_PI * std::sin(M_PI * sj) * r.weights[j];
            row += jj * vol_copula_density(base, lm, lm, x, y);
        }
        mass += ji * row;
    }
    EXPECT_NEAR(mass, 1.0, 1e-3);
}

// ---------------------------------------------------------------------------
// rho_v
// ---------------------------------------------------------------------------

TEST(RhoV, IndependenceIsZero) {
    VolatilityMargin vm = normal_vol();
    EXPECT_NEAR(rho_v_lag1(make_independence(), vm, vm), 0.0, 1e-6);
}

TEST(RhoV, FittedArchMixtures) {
    VolatilityMargin vm = normal_vol();
    PairCopula arch05 = make_mixture_t(0.191, 0.705, 39.996, 0.179, 2.984);
    EXPECT_NEAR(rho_v_lag1(arch05, vm, vm), 0.241, 0.02);
    PairCopula sv09 = make_mixture_t(0.512, 0.693, 10.740, 0.728, 15.031);
    EXPECT_NEAR(rho_v_lag1(sv09, vm, vm), 0.395, 0.03);
}

TEST(RhoV, ExpectationAndCdfRoutesAgree) {
    VolatilityMargin vm = normal_vol();
    VolatilityMargin lm(std::make_shared<LognormalMargin>(0.0, 0.8));
    PairCopula base = make_mixture_t(0.5, 0.8, 5.0, 0.3, 9.0);
    EXPECT_NEAR(rho_v_lag1(base, vm, vm), detail::rho_v_lag1_via_cdf(base, vm, vm), 5e-3);
    EXPECT_NEAR(rho_v_lag1(base, lm, lm), detail::rho_v_lag1_via_cdf(base, lm, lm), 5e-3);
}

TEST(RhoVSimulated, IndependenceNearZero) {
    std::vector<MarginPtr> margins{std::make_shared<NormalMargin>(0.0, 1.0)};
    auto est = rho_v_simulated(DVineSpec::independence(1, 1), margins, 1, 1, 1, 100000, 72);
    EXPECT_LT(std::abs(est.value), 3.0 / std::sqrt(100000.0));
    EXPECT_GT(est.se, 0.0);
}

TEST(RhoVSimulated, MatchesQuadratureWithinTwoSes) {
    PairCopula base = make_mixture_t(0.5, 0.8, 5.0, 0.4, 7.0);
    DVineSpec spec(1, 1, {base});
    std::vector<MarginPtr> margins{std::make_shared<NormalMargin>(0.0, 1.0)};
    VolatilityMargin vm = normal_vol();
    auto est = rho_v_simulated(spec, margins, 1, 1, 1, 200000, 73);
    double quad = rho_v_lag1(base, vm, vm);
    EXPECT_NEAR(est.value, quad, 2.0 * est.se + 0.002);
}

TEST(RhoVSimulated, InvariantToVolatilityTransform) {
    PairCopula base = make_mixture_t(0.5, 0.8, 5.0, 0.4, 7.0);
    DVineSpec spec(1, 1, {base});
    std::vector<MarginPtr> margins{std::make_shared<LognormalMargin>(0.3, 0.9)};
    auto abs_est = rho_v_simulated(spec, margins, 1, 1, 1, 20000, 74, VolTransform::abs_value);
    auto sq_est = rho_v_simulated(spec, margins, 1, 1, 1, 20000, 74, VolTransform::square);
    EXPECT_EQ(abs_est.value, sq_est.value);  // exact rank tie
}

// ---------------------------------------------------------------------------
// quantile dependence
// ---------------------------------------------------------------------------

TEST(QuantileDep, IndependenceDiagonal) {
    auto cdf = [](double a, double b) { return a * b; };
    std::vector<double> alphas{0.05, 0.25, 0.45};
    auto qd = quantile_dependence(cdf, alphas);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        EXPECT_NEAR(qd.lambda_low[i], alphas[i], 1e-12);
        EXPECT_NEAR(qd.lambda_up[i], 1.0 - alphas[i], 1e-12);
    }
    EXPECT_THROW(quantile_dependence(cdf, std::vector<double>{0.0}), std::domain_error);
}

TEST(QuantileDep, AudVolatilityQuantileDependence) {
    // Copula A1 posterior means; lambda^v_up(0.05) is the upper diagonal
    // coefficient of the volatility copula at quantile 0.95
    PairCopula aud = make_mixture_t(0.474, 0.153, 9.668, 0.170, 9.866);
    VolatilityMargin vm = normal_vol();
    auto cv = [&](double a, double b) { return vol_copula_cdf(aud, vm, vm, a, b); };
    std::vector<double> alphas{0.05, 0.95};
    auto qd = quantile_dependence(cv, alphas);
    EXPECT_NEAR(qd.lambda_up[1], 0.142, 0.02);
    EXPECT_NEAR(qd.lambda_low[0], 0.054, 0.02);
}

TEST(QuantileDep, EmpiricalMatchesAnalytic) {
    PairCopula c = make_mixture_t(0.5, 0.9, 3.0, 0.9, 3.0);
    DVineSpec spec(1, 1, {c});
    auto u = simulate_uni(spec, 1000000, 75);
    std::vector<double> alphas{0.05, 0.25, 0.75, 0.95};
    auto emp = empirical_quantile_dependence(u, 1, alphas);
    auto ana = quantile_dependence([&](double a, double b) { return c.cdf(a, b); }, alphas);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        EXPECT_NEAR(emp.lambda_low[i], ana.lambda_low[i], 0.01);
        EXPECT_NEAR(emp.lambda_up[i], ana.lambda_up[i], 0.01);
    }
}

// ---------------------------------------------------------------------------
// dependence matrices
// ---------------------------------------------------------------------------

TEST(DependenceMatrices, IndependenceVineGivesIdentity) {
    std::vector<MarginPtr> margins(2, std::make_shared<NormalMargin>(0.0, 1.0));
    auto mats = dependence_matrices(DVineSpec::independence(2, 1), margins, {0, 1}, 20000, 76);
    for (int k : {0, 1}) {
        const auto& dm = mats.at(k);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double expect = (k == 0 && i == j) ? 1.0 : 0.0;
                EXPECT_NEAR(dm.p_y[i][j], expect, 0.03);
                EXPECT_NEAR(dm.p_v[i][j], expect, 0.03);
            }
    }
}

TEST(DependenceMatrices, ContemporaneousMatrixIsSymmetric) {
    Rng rng(77);
    std::vector<PairCopula> pairs;
    for (std::size_t i = 0; i < DVineSpec::pair_count(2, 1); ++i)
        pairs.push_back(testutil::random_family("mixture_t", rng));
    DVineSpec spec(2, 1, std::move(pairs));
    std::vector<MarginPtr> margins(2, std::make_shared<NormalMargin>(0.0, 1.0));
    auto mats = dependence_matrices(spec, margins, {0}, 5000, 78);
    EXPECT_DOUBLE_EQ(mats.at(0).p_y[0][1], mats.at(0).p_y[1][0]);
    EXPECT_DOUBLE_EQ(mats.at(0).p_v[0][1], mats.at(0).p_v[1][0]);
}

TEST(DependenceMatrices, GaussianPairClosedForm) {
    // cross-sectional pair ~ Gaussian copula (t with nu = 40): off-diagonal
    // of P^y_0 approaches 6 asin(zeta/2) / pi
    double zeta = 0.5;
    std::vector<PairCopula> pairs{make_t(zeta, 40.0), make_independence(), make_independence(),
                                  make_independence(), make_independence()};
    DVineSpec spec(2, 1, std::move(pairs));
    std::vector<MarginPtr> margins(2, std::make_shared<NormalMargin>(0.0, 1.0));
    auto mats = dependence_matrices(spec, margins, {0}, 400000, 79);
    double closed = 6.0 / M_PI * std::asin(zeta / 2.0);
    EXPECT_NEAR(mats.at(0).p_y[0][1], closed, 0.01);
    EXPECT_DOUBLE_EQ(mats.at(0).p_y[0][0], 1.0);
    EXPECT_DOUBLE_EQ(mats.at(0).p_v[1][1], 1.0);
}

// ---------------------------------------------------------------------------
// empirical copula histogram
// ---------------------------------------------------------------------------

TEST(CopulaHist, UniformInputIsFlatAndNormalized) {
    Rng rng(80);
    std::vector<double> u(200000);
    for (auto& v : u) v = rng.uniform();
    auto h = empirical_copula_hist(u, 1, 10);
    double sum = 0.0;
    for (const auto& row : h)
        for (double v : row) {
            EXPECT_NEAR(v, 1.0, 0.1);
            sum += v;
        }
    EXPECT_NEAR(sum / 100.0, 1.0, 1e-9);
}

TEST(CopulaHist, HeteroskedasticCopulaConcentratesInCorners) {
    PairCopula c = make_mixture_t(0.5, 0.9, 3.0, 0.9, 3.0);
    auto u = simulate_uni(DVineSpec(1, 1, {c}), 300000, 81);
    auto h = empirical_copula_hist(u, 1, 10);
    double corners = (h[0][0] + h[0][9] + h[9][0] + h[9][9]) / 4.0;
    double edges = (h[0][5] + h[5][0] + h[9][5] + h[5][9]) / 4.0;
    EXPECT_GT(corners, edges);
}
