#include <gtest/gtest.h>

#include <cmath>

#include "bubblelab/landscape.hpp"

using namespace bubblelab;

// Unit ball, xi0 = 0, Q = 1 + x_1/2. Frozen from tests/oracles/landscape_oracle.py.
namespace oracle {
struct Row {
    int n;
    double c0, alpha, beta, gamma, d0, eta1, F;
};
const Row rows[] = {
    {3, 4.27366406832304227868574321286, 10.8827961854053071035644695459, 10.8827961854053071035644695459,
     2.13683203416152113934287160643, 0.996410844018236369919280205258, -0.04896967224887666083165136409,
     21.791736659966052736559522748},
    {4, 26.3189450695716229835586426663, 0.0, 157.913670417429737901351855998, 26.3189450695716229835586426663,
     1.81712059283213965889121175633, -1.0, 35.8685228006523800361410676336},
    {5, 168.872052952547711938756192534, 0.0, 2293.48880874447076748358417138, 253.308079428821567908134288801,
     1.61427385021322809687730031076, -1.0, 272.605739113121328726901354632},
};
}  // namespace oracle

namespace {

ReducedCoefficients coeffs(int n) {
    Point g(n, 0.0);
    g[0] = 0.5;
    return compute_coefficients(n, Domain::unit_ball(n), Point(n, 0.0), CoefficientField::affine(1.0, g));
}

Point eta_e1(int n, double t) {
    Point e(n, 0.0);
    e[0] = t;
    return e;
}

}  // namespace

TEST(Coefficients, MatchOracle) {
    for (const auto& o : oracle::rows) {
        ReducedCoefficients c = coeffs(o.n);
        EXPECT_NEAR(c.c0, o.c0, 1e-9 * o.c0) << o.n;
        EXPECT_NEAR(c.beta, o.beta, 1e-9 * o.beta) << o.n;
        EXPECT_NEAR(c.gamma, o.gamma, 1e-9 * o.gamma) << o.n;
        EXPECT_EQ(c.has_alpha, o.n == 3);
        if (o.n == 3) EXPECT_NEAR(c.alpha, o.alpha, 1e-9 * o.alpha);
        EXPECT_DOUBLE_EQ(c.zeta[0], 0.5);
    }
}

TEST(CriticalPoint, MatchesOracle) {
    for (const auto& o : oracle::rows) {
        ReducedCoefficients c = coeffs(o.n);
        CriticalPoint cp = critical_point(c, c.grad_q, c.q0);
        EXPECT_NEAR(cp.d0, o.d0, 1e-8) << o.n;
        EXPECT_NEAR(cp.eta0[0], o.eta1, 1e-8) << o.n;
        for (int i = 1; i < o.n; ++i) EXPECT_NEAR(cp.eta0[i], 0.0, 1e-12);
        EXPECT_NEAR(F_eval(c, cp.d0, cp.eta0), o.F, 1e-8 * o.F) << o.n;
        EXPECT_LT(cp.grad_norm, 1e-10);
        EXPECT_LT(cp.fd_grad_norm, 1e-5);
        EXPECT_TRUE(cp.nondegenerate);
    }
}

TEST(CriticalPoint, InverseHalfNormInDimensionFour) {
    const Point xi0{1.0, 0.0, 0.0, 0.0};
    Domain D = Domain::ball({1.0, 0.0, 0.0, 0.0}, 0.5);
    ReducedCoefficients c = compute_coefficients(4, D, xi0, CoefficientField::inverse_half_norm());
    CriticalPoint cp = critical_point(c, c.grad_q, c.q0);
    EXPECT_NEAR(cp.d0, 1.44224957030740838232163831078, 1e-8);
    EXPECT_NEAR(cp.eta0[0], 1.0, 1e-8);
}

// Property: the analytic gradient agrees with finite differences of F.
TEST(Landscape, GradientAgreesWithFiniteDifferences) {
    for (int n : {3, 4, 5}) {
        ReducedCoefficients c = coeffs(n);
        for (double d : {0.7, 1.3}) {
            for (double t : {-0.4, 0.25}) {
                Point eta = eta_e1(n, t);
                eta[n - 1] += 0.1;
                Eigen::VectorXd g = F_grad(c, d, eta), gf = F_grad_fd(c, d, eta);
                EXPECT_LT((g - gf).norm(), 1e-6 * (1.0 + g.norm())) << n;
            }
        }
    }
}

// Property: along d(eta) the d-derivative vanishes and F is a minimum in d.
TEST(Landscape, ProfileInDimensionThree) {
    ReducedCoefficients c = coeffs(3);
    for (double t : {-0.6, -0.2, 0.0, 0.3}) {
        const Point eta = eta_e1(3, t);
        const double d = d_of_eta(c, eta);
        EXPECT_GT(d, 0.0);
        EXPECT_NEAR(F_grad(c, d, eta)[0], 0.0, 1e-9);
        EXPECT_GT(F_hessian(c, d, eta)(0, 0), 0.0);
        EXPECT_NEAR(F_tilde(c, eta), F_eval(c, d, eta), 1e-12);
    }
}

// Property: scaling Q by a constant rescales the constants but leaves the critical point.
TEST(Landscape, ScalingQLeavesCriticalPoint) {
    for (int n : {3, 4}) {
        Point g(n, 0.0);
        g[0] = 0.5;
        const double k = 3.0;
        ReducedCoefficients a = compute_coefficients(n, Domain::unit_ball(n), Point(n, 0.0),
                                                     CoefficientField::affine(1.0, g));
        Point gk = g;
        gk[0] *= k;
        ReducedCoefficients b = compute_coefficients(n, Domain::unit_ball(n), Point(n, 0.0),
                                                     CoefficientField::affine(k, gk));
        CriticalPoint ca = critical_point(a, a.grad_q, a.q0), cb = critical_point(b, b.grad_q, b.q0);
        EXPECT_NEAR(ca.d0, cb.d0, 1e-9);
        EXPECT_NEAR(ca.eta0[0], cb.eta0[0], 1e-9);
        EXPECT_NEAR(b.c0 / b.scale(), a.c0, 1e-9 * a.c0);  // constants carry Q(xi0)^{-2/(p-1)}
    }
}

TEST(Landscape, ScanFindsTheCriticalPoint) {
    ReducedCoefficients c = coeffs(3);
    ScanResult s = landscape_scan(c, 0.5, 1.5, 21, -0.5, 0.5, 21);
    // the scan axis runs along -grad Q, so t = -eta_1
    EXPECT_DOUBLE_EQ(s.direction[0], -1.0);
    EXPECT_NEAR(s.extremum_t, 0.04896967224887666, 1e-5);
    EXPECT_LT(s.distance_to_critical, 1e-4);
    ReducedCoefficients c4 = coeffs(4);
    ScanResult s4 = landscape_scan(c4, 1.0, 2.5, 31, 0.5, 1.5, 21);
    EXPECT_TRUE(s4.saddle);
    EXPECT_LT(s4.distance_to_critical, 1e-6);
}
