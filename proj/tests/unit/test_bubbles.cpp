#include <gtest/gtest.h>

#include <cmath>

#include "bubblelab/bubbles.hpp"
#include "bubblelab/error.hpp"
#include "bubblelab/rng.hpp"

using namespace bubblelab;

// Frozen values from tests/oracles/bubble_oracles.py (mpmath, 30 digits).
namespace oracle {
constexpr double alpha[] = {0, 0, 0, 1.3160740129524924608192189018, 2.82842712474619009760337744842,
                            7.62199122231922104420307865068, 24.0};
constexpr double Ip[] = {0, 0, 0, 16.5382738026879548284133034629, 111.661827194222072546520974979,
                         601.808304902929952425228640096, 2976.60256130878273684572624644};
constexpr double Ip1[] = {0, 0, 0, 12.8209922049691268360572296386, 105.275780278286491934234570665,
                          844.360264762738559693780962669, 7143.84614714107856842974299146};
}  // namespace oracle

TEST(Rational, CriticalExponentInLowestTerms) {
    EXPECT_EQ(critical_exponent(3).num, 5);
    EXPECT_EQ(critical_exponent(3).den, 1);
    EXPECT_EQ(critical_exponent(4).num, 3);
    EXPECT_EQ(critical_exponent(4).den, 1);
    EXPECT_EQ(critical_exponent(6).num, 2);
    EXPECT_EQ(critical_exponent(5).num, 7);
    EXPECT_EQ(critical_exponent(5).den, 3);
    EXPECT_TRUE(make_rational(10, 4) == make_rational(5, 2));
    EXPECT_THROW(critical_exponent(2), InvalidArgument);
}

TEST(Bubble, AlphaMatchesOracle) {
    for (int n = 3; n <= 6; ++n) EXPECT_NEAR(alpha_n(n), oracle::alpha[n], 1e-13 * oracle::alpha[n]) << n;
}

TEST(Bubble, PeakValueAndSymmetry) {
    BubbleParams b = make_bubble(3, 0.5, {0.1, 0.0, -0.2});
    // U(xi) = alpha delta^{-(n-2)/2}
    EXPECT_NEAR(bubble_eval(b, b.xi), oracle::alpha[3] / std::sqrt(0.5), 1e-14);
    EXPECT_NEAR(bubble_eval(b, {0.4, 0.0, -0.2}), bubble_eval(b, {0.1, 0.3, -0.2}), 1e-15);
    EXPECT_THROW(make_bubble(3, 0.0, {0.0, 0.0, 0.0}), InvalidArgument);
    EXPECT_THROW(make_bubble(3, 1.0, {0.0, 0.0}), InvalidArgument);
}

// Property: -Delta U = U^p pointwise, for random (n, delta, xi, x).
TEST(Bubble, SatisfiesCriticalEquation) {
    CounterRng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(rng.next_u64() % 4);
        const double delta = 0.05 + rng.uniform();
        Point xi(n), x(n);
        for (int i = 0; i < n; ++i) {
            xi[i] = rng.uniform() - 0.5;
            x[i] = 2.0 * rng.uniform() - 1.0;
        }
        BubbleParams b = make_bubble(n, delta, xi);
        const double p = critical_exponent(n).value();
        const double u = bubble_eval(b, x);
        const double r = bubble_laplacian(b, x) + std::pow(u, p);
        EXPECT_LE(std::abs(r), 1e-13 * bubble_laplacian_scale(b, x)) << "n=" << n;
    }
}

// Property: every psi^j solves the linearised equation -Delta psi = p U^{p-1} psi.
TEST(Bubble, KernelFunctionsSolveLinearisedEquation) {
    CounterRng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + static_cast<int>(rng.next_u64() % 4);
        Point xi(n), x(n);
        for (int i = 0; i < n; ++i) {
            xi[i] = 0.2 * (rng.uniform() - 0.5);
            x[i] = rng.uniform() - 0.5;
        }
        BubbleParams b = make_bubble(n, 0.1 + 0.5 * rng.uniform(), xi);
        const double p = critical_exponent(n).value();
        const double up1 = p * std::pow(bubble_eval(b, x), p - 1.0);
        for (int j = 0; j <= n; ++j) {
            const double r = psi_laplacian(b, j, x) + up1 * psi_eval(b, j, x);
            EXPECT_LE(std::abs(r), 1e-12 * psi_laplacian_scale(b, j, x)) << "n=" << n << " j=" << j;
        }
    }
}

TEST(Bubble, PsiZeroAtCentre) {
    BubbleParams b = make_bubble(3, 1.0, {0.0, 0.0, 0.0});
    EXPECT_NEAR(psi_eval(b, 0, b.xi), -0.658037006476246230409609450899, 1e-14);
    // psi^j for j >= 1 is odd about xi
    EXPECT_NEAR(psi_eval(b, 1, {0.3, 0.1, 0.0}), -psi_eval(b, 1, {-0.3, -0.1, 0.0}), 1e-15);
}

// Property: psi^j agrees with a central difference of U in the parameters.
TEST(Bubble, PsiMatchesParameterDerivative) {
    const Point x{0.2, -0.1, 0.05, 0.3};
    BubbleParams b = make_bubble(4, 0.4, {0.05, 0.0, -0.1, 0.1});
    const double h = 1e-5;
    BubbleParams bp = b, bm = b;
    bp.delta += h;
    bm.delta -= h;
    EXPECT_NEAR(psi_eval(b, 0, x), (bubble_eval(bp, x) - bubble_eval(bm, x)) / (2 * h), 1e-7);
    for (int j = 1; j <= 4; ++j) {
        bp = b;
        bm = b;
        bp.xi[j - 1] += h;
        bm.xi[j - 1] -= h;
        EXPECT_NEAR(psi_eval(b, j, x), (bubble_eval(bp, x) - bubble_eval(bm, x)) / (2 * h), 1e-7) << j;
    }
}

TEST(Rescaled, Gamma0AndResidual) {
    EXPECT_NEAR(gamma0_of(3, 16.0), 0.5, 1e-15);
    RescaledBubble w = rescaled_bubble(make_bubble(3, 0.3, {0.0, 0.0, 0.0}), 16.0);
    for (double r : {0.0, 0.1, 0.7, 3.0}) {
        const Point x{r, 0.0, 0.0};
        EXPECT_NEAR(w.residual(x), 0.0, 1e-12 * std::abs(w.laplacian(x)) + 1e-14) << r;
    }
}

TEST(Integrals, MatchOracle) {
    for (int n = 3; n <= 6; ++n) {
        BubbleIntegrals I = bubble_integrals(n);
        EXPECT_NEAR(I.Ip, oracle::Ip[n], 1e-9 * oracle::Ip[n]) << n;
        EXPECT_NEAR(I.Ip1, oracle::Ip1[n], 1e-9 * oracle::Ip1[n]) << n;
    }
}

TEST(Coefficient, AffineAndInverseHalfNorm) {
    CoefficientField q = CoefficientField::affine(1.0, {0.5, 0.0, 0.0});
    EXPECT_DOUBLE_EQ(q.eval({0.4, 1.0, 1.0}), 1.2);
    EXPECT_DOUBLE_EQ(q.gradient({0.0, 0.0, 0.0})[0], 0.5);
    EXPECT_NO_THROW(q.validate_on(Domain::unit_ball(3)));
    CoefficientField bad = CoefficientField::affine(0.2, {0.5, 0.0, 0.0});
    EXPECT_THROW(bad.validate_on(Domain::unit_ball(3)), InvalidArgument);
    CoefficientField ihn = CoefficientField::inverse_half_norm();
    EXPECT_DOUBLE_EQ(ihn.eval({2.0, 0.0, 0.0, 0.0}), 0.25);
}

TEST(Geometry, SphereArea) {
    EXPECT_NEAR(sphere_area(2), 2 * M_PI, 1e-15);
    EXPECT_NEAR(sphere_area(3), 4 * M_PI, 1e-14);
    EXPECT_NEAR(sphere_area(4), 2 * M_PI * M_PI, 1e-14);
}
