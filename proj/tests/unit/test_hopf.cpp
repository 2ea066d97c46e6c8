#include <gtest/gtest.h>

#include <cmath>

#include "bubblelab/error.hpp"
#include "bubblelab/hopf.hpp"

using namespace bubblelab;

TEST(Algebra, QuaternionUnitsMultiply) {
    const KElement i = KElement::basis(4, 1), j = KElement::basis(4, 2), k = KElement::basis(4, 3);
    KElement ij = k_mul(i, j);
    for (int a = 0; a < 4; ++a) EXPECT_DOUBLE_EQ(ij[a], k[a]);
    KElement ii = k_mul(i, i);
    EXPECT_DOUBLE_EQ(ii[0], -1.0);
    EXPECT_THROW(check_algebra_dim(3), InvalidArgument);
}

// Property: |ab| = |a||b| and a(ab) = (aa)b in every normed division algebra.
TEST(Algebra, NormMultiplicativeAndAlternative) {
    CounterRng rng(3);
    for (int dim : {1, 2, 4, 8}) {
        for (int t = 0; t < 200; ++t) {
            KElement a = random_element(dim, rng), b = random_element(dim, rng);
            EXPECT_NEAR(k_norm(k_mul(a, b)), k_norm(a) * k_norm(b), 1e-12 * (1 + k_norm(a) * k_norm(b)));
            KElement lhs = k_mul(a, k_mul(a, b)), rhs = k_mul(k_mul(a, a), b);
            EXPECT_LT(k_dist(lhs, rhs), 1e-12 * (1 + k_norm(lhs)));
            KElement ca = k_mul(a, k_conj(a));
            EXPECT_NEAR(ca[0], k_norm2(a), 1e-12 * (1 + k_norm2(a)));
        }
    }
}

TEST(Algebra, OctonionsAreNotAssociative) {
    CounterRng rng(4);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        KElement a = random_unit(8, rng), b = random_unit(8, rng), c = random_unit(8, rng);
        worst = std::max(worst, k_dist(k_mul(k_mul(a, b), c), k_mul(a, k_mul(b, c))));
    }
    EXPECT_GT(worst, 1e-3);
}

TEST(HopfMap, RealCase) {
    HopfMapSpec spec{1, 1.0};
    Point x = hopf_map(spec, Point{3.0, 4.0});
    EXPECT_DOUBLE_EQ(x[0], -7.0);
    EXPECT_DOUBLE_EQ(x[1], 24.0);
}

// Property: |h(z)| = s |z|^2.
TEST(HopfMap, NormIdentity) {
    CounterRng rng(5);
    for (int dim : {1, 2, 4, 8}) {
        HopfMapSpec spec{dim, 0.5};
        for (int t = 0; t < 50; ++t) {
            Point z(2 * dim);
            double z2 = 0.0;
            for (auto& v : z) {
                v = 2.0 * rng.uniform() - 1.0;
                z2 += v * v;
            }
            EXPECT_NEAR(norm(hopf_map(spec, z)), 0.5 * z2, 1e-13);
        }
    }
}

TEST(HopfMap, ExponentPair) {
    EXPECT_TRUE(supercritical_exponent(2) == make_rational(5, 1));
    EXPECT_TRUE(supercritical_exponent(4) == make_rational(7, 3));
    EXPECT_TRUE(supercritical_exponent(8) == make_rational(11, 7));
    for (int dim : {2, 4, 8}) EXPECT_TRUE(supercritical_exponent(dim) == critical_exponent(dim + 1));
}

// Property: harmonic, conformal components with lambda^2 = 4 s^2 |z|^2.
TEST(HopfMap, HarmonicMorphism) {
    CounterRng rng(6);
    for (int dim : {2, 4, 8}) {
        HopfMapSpec spec{dim, 0.5};
        for (int t = 0; t < 20; ++t) {
            Point z(2 * dim);
            for (auto& v : z) v = 2.0 * rng.uniform() - 1.0;
            DilationReport r = dilation_check(spec, z);
            EXPECT_EQ(r.max_laplacian, 0.0);
            EXPECT_NEAR(r.lambda2, r.expected_lambda2, 1e-12 * r.expected_lambda2);
            EXPECT_LT(r.conformality_defect, 1e-12 * (1 + r.lambda2));
        }
    }
}

TEST(Transfer, ResidualsMatchAtHalfScale) {
    HopfMapSpec spec{2, 0.5};
    FieldFn u = [](const Point& x) { return 1.0 / (1.0 + x[0] * x[0] + 0.5 * x[1] * x[1] + x[2] * x[2]); };
    CounterRng rng(8);
    std::vector<Point> zs;
    for (int t = 0; t < 16; ++t) {
        Point z(4);
        for (auto& v : z) v = 1.2 * rng.uniform() - 0.6;
        if (norm(z) > 0.2) zs.push_back(z);
    }
    TransferReport r = transfer_residual(spec, u, zs);
    EXPECT_TRUE(r.pass) << r.max_mismatch;
    EXPECT_NEAR(r.mean_factor, 1.0, 1e-3);
    // at s = 1 the nonlinearity carries weight 2 s = 2, so the identity breaks
    HopfMapSpec wrong{2, 1.0};
    TransferReport rw = transfer_residual(wrong, u, zs);
    EXPECT_FALSE(rw.pass);
    EXPECT_NEAR(rw.mean_factor, 2.0, 1e-3);
}

TEST(Meridian, EqualDimensionsTransfer) {
    FieldFn u = [](const Point& x) { return std::exp(-x[0] * x[0] - 2.0 * x[1] * x[1]); };
    CounterRng rng(9);
    std::vector<Point> zs;
    for (int t = 0; t < 24; ++t) zs.push_back({0.2 + 0.6 * rng.uniform(), 0.2 + 0.6 * rng.uniform()});
    MeridianReport eq = meridian_residual({2, 2, 2, 3.0}, u, zs);
    EXPECT_LT(eq.max_residual, 1e-5);
    MeridianReport gen = meridian_residual({1, 3, 2, 3.0}, u, zs);
    EXPECT_GT(gen.median_residual, 1e-3);
    EXPECT_THROW(meridian_residual({0, 2, 2, 3.0}, u, zs), InvalidArgument);
}

TEST(ImageDomainTest, AnnulusImageIsAnnulus) {
    HopfMapSpec spec{2, 0.5};
    ImageDomain img = image_domain(spec, Domain::annulus(Point(4, 0.0), 0.5, 1.0), 500, 1);
    EXPECT_GE(img.r_min(), 0.125 - 1e-12);
    EXPECT_LE(img.r_max(), 0.5 + 1e-12);
    EXPECT_TRUE(img.contains({0.3, 0.0, 0.0}));
    EXPECT_FALSE(img.contains({0.05, 0.0, 0.0}));
    EXPECT_FALSE(img.contains({0.6, 0.0, 0.0}));
    const Point x{0.1, -0.2, 0.15};
    EXPECT_LT(distance(hopf_map(spec, img.lift(x)), x), 1e-12);
}
