#include <gtest/gtest.h>

#include <cmath>

#include "hetcop/bicop.hpp"
#include "hetcop/stats.hpp"
#include "support/test_utils.hpp"

using namespace hetcop;

// ---------------------------------------------------------------------------
// density
// ---------------------------------------------------------------------------

TEST(BicopDensity, ConvexGumbelTauZeroIsIndependence) {
    for (double delta : {0.0, 0.3, 1.0}) {
        PairCopula c = make_convex_gumbel(0.0, delta);
        EXPECT_NEAR(c.density(0.3, 0.8), 1.0, 1e-12);
        EXPECT_NEAR(c.density(0.05, 0.5), 1.0, 1e-12);
    }
}

TEST(BicopDensity, MixtureReflectionSymmetryIdenticalComponents) {
    PairCopula a = make_t(0.7, 5.0);
    PairCopula c = make_mixture(0.5, a, a);
    EXPECT_NEAR(c.density(0.2, 0.7), c.density(0.8, 0.7), 1e-12);
}

TEST(BicopDensity, MixtureReflectionIdentity) {
    // c_{w,(a,b)}(u,v) = c_{1-w,(b,a)}(1-u,v)
    PairCopula a = make_t(0.6, 7.0);
    PairCopula b = make_convex_gumbel(0.4, 0.7);
    PairCopula m1 = make_mixture(0.3, a, b);
    PairCopula m2 = make_mixture(0.7, b, a);
    for (auto [u, v] : {std::pair{0.2, 0.7}, {0.55, 0.13}, {0.9, 0.42}}) {
        EXPECT_NEAR(m1.density(u, v), m2.density(1.0 - u, v), 1e-11);
    }
}

TEST(BicopDensity, TableOA1MixtureIntegratesToOne) {
    // fitted mixture-of-t for the medium-persistence ARCH case
    PairCopula c = make_mixture_t(0.191, 0.705, 39.996, 0.179, 2.984);
    double mass = testutil::density_mass(c);
    EXPECT_NEAR(mass, 1.0, 1e-4);
}

TEST(BicopDensity, RandomDrawsIntegrateToOne) {
    Rng rng(11);
    for (const auto& fam : testutil::family_names()) {
        for (int rep = 0; rep < 3; ++rep) {
            PairCopula c = testutil::random_family(fam, rng);
            EXPECT_NEAR(testutil::density_mass(c), 1.0, 1e-4) << fam << " rep " << rep;
        }
    }
}

// ---------------------------------------------------------------------------
// cdf
// ---------------------------------------------------------------------------

TEST(BicopCdf, UniformMarginsAndGrounded) {
    Rng rng(12);
    for (const auto& fam : testutil::family_names()) {
        PairCopula c = testutil::random_family(fam, rng);
        for (double x : {0.1, 0.33, 0.92}) {
            EXPECT_NEAR(c.cdf(x, 1.0), x, 2e-8) << fam;
            EXPECT_NEAR(c.cdf(1.0, x), x, 2e-8) << fam;
            EXPECT_NEAR(c.cdf(x, 0.0), 0.0, 1e-12) << fam;
            EXPECT_NEAR(c.cdf(0.0, x), 0.0, 1e-12) << fam;
        }
    }
}

TEST(BicopCdf, MatchesDensityQuadrature) {
    // identical symmetric t components, the copula behind Figure 1
    PairCopula c = make_mixture_t(0.5, 0.9, 3.0, 0.9, 3.0);
    double oracle = testutil::cdf_by_quadrature(c, 0.3, 0.7);
    EXPECT_NEAR(c.cdf(0.3, 0.7), oracle, 1e-5);
}

TEST(BicopCdf, TwoIncreasingOnRandomRectangles) {
    Rng rng(13);
    for (const auto& fam : testutil::family_names()) {
        PairCopula c = testutil::random_family(fam, rng);
        for (int i = 0; i < 1000; ++i) {
            double u1 = rng.uniform(), u2 = rng.uniform();
            double v1 = rng.uniform(), v2 = rng.uniform();
            if (u1 > u2) std::swap(u1, u2);
            if (v1 > v2) std::swap(v1, v2);
            double mass = c.cdf(u2, v2) - c.cdf(u1, v2) - c.cdf(u2, v1) + c.cdf(u1, v1);
            EXPECT_GT(mass, -1e-8) << fam;
        }
    }
}

// ---------------------------------------------------------------------------
// h-functions
// ---------------------------------------------------------------------------

TEST(BicopH, IndependenceLimits) {
    PairCopula c = make_convex_gumbel(0.0, 0.5);
    for (double u : {0.1, 0.5, 0.88}) {
        EXPECT_NEAR(c.h1(0.6, u), 0.6, 1e-12);
        EXPECT_NEAR(c.h2(0.6, u), 0.6, 1e-12);
    }
}

TEST(BicopH, MatchesFiniteDifferenceOfCdf) {
    Rng rng(14);
    const double h = 1e-4;
    for (const auto& fam : testutil::family_names()) {
        PairCopula c = testutil::random_family(fam, rng);
        for (int i = 0; i < 12; ++i) {
            double u = 0.05 + 0.9 * rng.uniform();
            double v = 0.05 + 0.9 * rng.uniform();
            double d1 = testutil::fd_central([&](double x) { return c.cdf(x, v); }, u, h);
            double d2 = testutil::fd_central([&](double x) { return c.cdf(u, x); }, v, h);
            EXPECT_NEAR(c.h1(v, u), d1, 1e-5) << fam << " at " << u << "," << v;
            EXPECT_NEAR(c.h2(u, v), d2, 1e-5) << fam << " at " << u << "," << v;
        }
    }
}

TEST(BicopH, FixedPointChecks) {
    PairCopula mix = make_mixture_t(0.5, 0.6, 8.0, 0.3, 4.0);
    double d1 = testutil::fd_central([&](double x) { return mix.cdf(x, 0.6); }, 0.3, 1e-4);
    EXPECT_NEAR(mix.h1(0.6, 0.3), d1, 1e-5);
    double d2 = testutil::fd_central([&](double x) { return mix.cdf(0.4, x); }, 0.2, 1e-4);
    EXPECT_NEAR(mix.h2(0.4, 0.2), d2, 1e-5);
}

TEST(BicopH, SymmetricTCopulaExchangeable) {
    PairCopula c = make_t(0.55, 6.2);
    EXPECT_NEAR(c.h2(0.25, 0.65), c.h1(0.25, 0.65), 1e-13);
}

TEST(BicopH, MixtureH1ReflectionCrossCheck) {
    // with w = 1/2 and identical components, h1(v|u) + h1(v|1-u) equals the
    // sum of the component conditionals; check against the derivative of the
    // cdf computed by quadrature at both points.
    PairCopula c = make_mixture_t(0.5, 0.9, 3.0, 0.9, 3.0);
    double u = 0.35, v = 0.6, h = 1e-4;
    auto dCdu = [&](double uu) {
        return testutil::fd_central([&](double x) { return c.cdf(x, v); }, uu, h);
    };
    EXPECT_NEAR(c.h1(v, u) + c.h1(v, 1.0 - u), dCdu(u) + dCdu(1.0 - u), 3e-5);
}

TEST(BicopH, MonotoneAndOnto) {
    Rng rng(15);
    for (const auto& fam : testutil::family_names()) {
        PairCopula c = testutil::random_family(fam, rng);
        double u = 0.4;
        double prev = -1.0;
        for (int i = 0; i <= 50; ++i) {
            double v = static_cast<double>(i) / 50.0;
            double hv = c.h1(v, u);
            EXPECT_GE(hv, prev - 1e-12) << fam;
            prev = hv;
        }
        EXPECT_LT(c.h1(1e-9, u), 1e-4) << fam;
        EXPECT_GT(c.h1(1.0 - 1e-9, u), 1.0 - 1e-4) << fam;
    }
}

// ---------------------------------------------------------------------------
// h-inverses
// ---------------------------------------------------------------------------

TEST(BicopHInv, Independence) {
    PairCopula c = make_convex_gumbel(0.0, 0.2);
    EXPECT_NEAR(c.h1_inv(0.37, 0.81), 0.37, 1e-10);
    EXPECT_NEAR(c.h2_inv(0.37, 0.81), 0.37, 1e-10);
}

TEST(BicopHInv, RoundTrip) {
    Rng rng(16);
    for (const auto& fam : testutil::family_names()) {
        PairCopula c = testutil::random_family(fam, rng);
        for (int i = 0; i < 25; ++i) {
            double q = 0.01 + 0.98 * rng.uniform();
            double u = 0.01 + 0.98 * rng.uniform();
            EXPECT_NEAR(c.h1(c.h1_inv(q, u), u), q, 1e-8) << fam;
            EXPECT_NEAR(c.h2(c.h2_inv(q, u), u), q, 1e-8) << fam;
        }
    }
    PairCopula c = make_mixture_t(0.5, 0.7, 4.0, 0.4, 9.0);
    EXPECT_NEAR(c.h1(c.h1_inv(0.37, 0.81), 0.81), 0.37, 1e-8);
}

TEST(BicopHInv, MonotoneLimits) {
    PairCopula c = make_mixture_cgumbel(0.4, 0.5, 0.6, 0.3, 0.2);
    EXPECT_LT(c.h1_inv(1e-8, 0.5), 1e-3);
    EXPECT_GT(c.h1_inv(1.0 - 1e-8, 0.5), 1.0 - 1e-3);
}

// ---------------------------------------------------------------------------
// Spearman's rho
// ---------------------------------------------------------------------------

TEST(BicopSpearman, Independence) {
    EXPECT_NEAR(spearman_rho(make_independence()), 0.0, 1e-6);
    EXPECT_NEAR(spearman_rho(make_convex_gumbel(0.0, 0.7)), 0.0, 1e-6);
}

TEST(BicopSpearman, GaussianLikeClosedFormForLargeNu) {
    // t copula with nu -> inf approaches the Gaussian copula, whose
    // Spearman's rho is (6/pi) asin(zeta/2)
    double zeta = 0.5;
    double rho = spearman_rho(make_t(zeta, 40.0));
    double gauss = 6.0 / M_PI * std::asin(zeta / 2.0);
    EXPECT_NEAR(rho, gauss, 5e-3);
}

TEST(BicopSpearman, DensityAndCdfRoutesAgree) {
    for (auto c : {make_t(0.9, 3.0), make_mixture_t(0.3, 0.6, 8.0, 0.4, 4.0),
                   make_convex_gumbel(0.6, 0.3)}) {
        EXPECT_NEAR(spearman_rho(c), detail::spearman_rho_cdf_route(c, 100), 5e-4);
    }
}

TEST(BicopSpearman, FittedArchMixtureNearZero) {
    PairCopula c = make_mixture_t(0.191, 0.705, 39.996, 0.179, 2.984);
    EXPECT_NEAR(spearman_rho(c), -0.002, 0.01);
}

TEST(BicopSpearman, FittedSvMixtureNearZero) {
    PairCopula c = make_mixture_t(0.512, 0.693, 10.740, 0.728, 15.031);
    EXPECT_NEAR(spearman_rho(c), -0.002, 0.01);
}

TEST(BicopSpearman, ExchangeInvarianceForTCopula) {
    // swapping the axes of an exchangeable copula leaves rho unchanged;
    // integrate the transposed cdf explicitly.
    PairCopula c = make_t(0.45, 5.0);
    double r1 = spearman_rho(c);
    double r2 = 12.0 * integrate2d_gl([&](double u, double v) { return c.cdf(v, u); }, 100) - 3.0;
    EXPECT_NEAR(r1, r2, 5e-4);
}

TEST(BicopSpearman, Rot90Negates) {
    PairCopula base = make_gumbel(0.5);
    EXPECT_NEAR(spearman_rho(make_rot90(base)), -spearman_rho(base), 5e-4);
}

// ---------------------------------------------------------------------------
// sampling
// ---------------------------------------------------------------------------

TEST(BicopSample, IndependenceEmpiricalRho) {
    auto pairs = sample_pair(make_independence(), 1000000, 99);
    std::vector<double> u(pairs.size()), v(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        u[i] = pairs[i].first;
        v[i] = pairs[i].second;
    }
    EXPECT_NEAR(spearman(u, v), 0.0, 0.005);
}

TEST(BicopSample, MixtureTEmpiricalRhoMatchesQuadrature) {
    PairCopula c = make_mixture_t(0.5, 0.9, 3.0, 0.9, 3.0);
    auto pairs = sample_pair(c, 400000, 100);
    std::vector<double> u(pairs.size()), v(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        u[i] = pairs[i].first;
        v[i] = pairs[i].second;
    }
    EXPECT_NEAR(spearman(u, v), spearman_rho(c), 0.01);
    EXPECT_NEAR(empirical_copula(u, v, 0.25, 0.25), c.cdf(0.25, 0.25), 0.005);
}

// ---------------------------------------------------------------------------
// parameter validation and serialization descriptors
// ---------------------------------------------------------------------------

TEST(BicopParams, Validation) {
    EXPECT_THROW(make_t(1.2, 5.0), invalid_parameter);
    EXPECT_THROW(make_t(0.5, 1.9), invalid_parameter);
    EXPECT_THROW(make_t(0.5, 41.0), invalid_parameter);
    EXPECT_THROW(make_gumbel(1.0), invalid_parameter);
    EXPECT_THROW(make_convex_gumbel(0.5, 1.2), invalid_parameter);
    EXPECT_THROW(make_mixture_t(0.0, 0.5, 5, 0.5, 5), invalid_parameter);
    EXPECT_THROW(make_independence().density(1.5, 0.5), std::domain_error);
}

TEST(BicopParams, DescribeRoundTrip) {
    PairCopula c = make_mixture_t(0.3, 0.6, 7.5, 0.2, 3.1);
    PairCopula c2 = make_from_desc(c.describe());
    EXPECT_NEAR(c.density(0.3, 0.8), c2.density(0.3, 0.8), 1e-14);
    EXPECT_EQ(c2.family(), "mixture");
}

TEST(BicopTail, MixtureTailDependence) {
    // tail coefficients of the mixture combine the unrotated component's
    // diagonal limit and the rotated component's opposite-corner limit
    PairCopula c = make_mixture_t(0.321, 1e-9, 39.995, 0.020, 4.777);
    TailDependence td = tail_dependence(c);
    ASSERT_TRUE(td.available);
    EXPECT_NEAR(td.lower, td.upper, 1e-12);
    EXPECT_GT(td.lower, 0.01);
    EXPECT_LT(td.lower, 0.09);
}
