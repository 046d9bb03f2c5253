#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <rankgroth/special_functions.hpp>

namespace rg = rankgroth;

namespace {
const double kPi = std::acos(-1.0);
}

TEST(LeadCoefficient, ClosedFormsAndLimit) {
    EXPECT_NEAR(rg::lead_coefficient<double>(1), 2.0 / kPi, 1e-16);
    EXPECT_NEAR(rg::lead_coefficient<double>(2), kPi / 4.0, 1e-16);
    EXPECT_NEAR(rg::lead_coefficient<double>(3), 8.0 / (3.0 * kPi), 1e-16);
    for (unsigned r = 1; r <= 30; ++r) {
        const double g = std::tgamma((r + 1.0) / 2.0) / std::tgamma(r / 2.0);
        EXPECT_NEAR(rg::lead_coefficient<double>(r), 2.0 / r * g * g, 1e-14);
        EXPECT_NEAR(rg::lead_coefficient(static_cast<double>(r)), 2.0 / r * g * g, 1e-13);
    }
    // rises to 1 as r grows
    EXPECT_GT(rg::lead_coefficient(1000.0), 0.999);
    EXPECT_LT(rg::lead_coefficient(1000.0), 1.0);
    EXPECT_THROW(rg::lead_coefficient<double>(0), std::invalid_argument);
}

TEST(ErEval, RankOneIsArcsine) {
    for (double t = -1.0; t <= 1.0; t += 0.125)
        EXPECT_NEAR(rg::er_eval_hyp(1, t), 2.0 / kPi * std::asin(t), 1e-13) << t;
}

TEST(ErEval, EndpointsAndOddness) {
    for (unsigned r : {1u, 2u, 7u}) {
        EXPECT_EQ(rg::er_eval_hyp(r, 1.0), 1.0);
        EXPECT_EQ(rg::er_eval_hyp(r, -1.0), -1.0);
        EXPECT_EQ(rg::er_eval_hyp(r, 0.0), 0.0);
        EXPECT_DOUBLE_EQ(rg::er_eval_hyp(r, -0.3), -rg::er_eval_hyp(r, 0.3));
    }
    EXPECT_THROW(rg::er_eval_hyp(1, 1.5), std::invalid_argument);
    EXPECT_THROW(rg::er_eval_quadrature(1, 0.5), std::invalid_argument);
}

TEST(ErEval, HypergeometricMatchesQuadrature) {
    for (unsigned r : {2u, 3u, 5u})
        for (int i = 0; i <= 20; ++i) {
            const double t = -1.0 + 0.1 * i;
            EXPECT_NEAR(rg::er_eval_hyp(r, t), rg::er_eval_quadrature(r, t), 1e-8) << "r=" << r << " t=" << t;
        }
}

TEST(ErEval, MonotoneAndBelowIdentityForLargeRank) {
    // E_r(t) -> t as r grows; for finite r, E_r(t) > a_1 t on (0, 1).
    for (double t : {0.2, 0.6, 0.9}) {
        const double e = rg::er_eval_hyp(50, t);
        EXPECT_NEAR(e, t, 0.02);
        EXPECT_GT(e, rg::lead_coefficient<double>(50) * t);
    }
}

TEST(UpperIncompleteGamma, ClosedForms) {
    for (double x : {0.0, 0.5, 2.0, 10.0}) {
        EXPECT_NEAR(rg::upper_incomplete_gamma(1.0, x), std::exp(-x), 1e-14);
        EXPECT_NEAR(rg::upper_incomplete_gamma(2.0, x), (1.0 + x) * std::exp(-x), 1e-14);
        EXPECT_NEAR(rg::upper_incomplete_gamma(0.5, x), std::sqrt(kPi) * std::erfc(std::sqrt(x)), 1e-14);
    }
    EXPECT_NEAR(rg::upper_incomplete_gamma(3.5, 0.0), std::tgamma(3.5), 1e-12);
    EXPECT_THROW(rg::upper_incomplete_gamma(0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(rg::upper_incomplete_gamma(1.0, -1.0), std::invalid_argument);
}

TEST(Gegenbauer, NormalizedAtOne) {
    for (unsigned q : {2u, 3u, 4u, 9u})
        for (unsigned k = 0; k <= 12; ++k) EXPECT_NEAR(rg::gegenbauer_eval(q, k, 1.0), 1.0, 1e-13);
}

TEST(Gegenbauer, ChebyshevAndLegendre) {
    for (double t : {-0.9, -0.2, 0.35, 0.8})
        for (unsigned k = 0; k <= 10; ++k) {
            EXPECT_NEAR(rg::gegenbauer_eval(2, k, t), std::cos(k * std::acos(t)), 1e-13);
            EXPECT_NEAR(rg::gegenbauer_eval(3, k, t), std::legendre(k, t), 1e-13);
        }
}

TEST(Gegenbauer, BatchMatchesSingle) {
    const auto all = rg::gegenbauer_all(5, 15, 0.37);
    ASSERT_EQ(all.size(), 16u);
    for (unsigned k = 0; k <= 15; ++k) EXPECT_NEAR(all[k], rg::gegenbauer_eval(5, k, 0.37), 1e-14);
}

TEST(Gegenbauer, OrthogonalUnderSphereWeight) {
    const unsigned q = 4;
    auto inner = [&](unsigned j, unsigned k) {
        auto f = [&](double t) {
            return rg::gegenbauer_eval(q, j, t) * rg::gegenbauer_eval(q, k, t) * std::pow(1.0 - t * t, (q - 3.0) / 2.0);
        };
        return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -1.0, 1.0);
    };
    EXPECT_NEAR(inner(1, 3), 0.0, 1e-12);
    EXPECT_NEAR(inner(2, 5), 0.0, 1e-12);
    EXPECT_GT(inner(3, 3), 0.0);
}

TEST(ConnectionTable, ReproducesMonomials) {
    for (unsigned q : {2u, 3u, 6u}) {
        const auto table = rg::build_connection_table(q, 15);
        for (double t : {-0.7, 0.1, 0.55}) {
            const auto p = rg::gegenbauer_all(q, 15, t);
            for (unsigned l = 0; l <= 15; ++l) {
                double s = 0.0;
                for (unsigned k = 0; k <= l; ++k) s += table(l, k) * p[k];
                EXPECT_NEAR(s, std::pow(t, l), 1e-13) << "q=" << q << " l=" << l;
            }
        }
    }
}

TEST(ConnectionTable, NonnegativeParityAndStochastic) {
    const auto table = rg::build_connection_table(3, 21);
    for (unsigned l = 0; l <= 21; ++l) {
        double s = 0.0;
        for (unsigned k = 0; k <= l; ++k) {
            EXPECT_GE(table(l, k), 0.0);
            if ((l + k) % 2 == 1) {
                EXPECT_EQ(table(l, k), 0.0);
            }
            s += table(l, k);
        }
        EXPECT_NEAR(s, 1.0, 1e-14);  // evaluate at t = 1
    }
    // q = 2: t^3 = (3 T_1 + T_3) / 4
    const auto cheb = rg::build_connection_table(2, 3);
    EXPECT_NEAR(cheb(3, 1), 0.75, 1e-15);
    EXPECT_NEAR(cheb(3, 3), 0.25, 1e-15);
    EXPECT_THROW(rg::build_connection_table(1, 3), std::invalid_argument);
}
