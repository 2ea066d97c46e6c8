#include <gtest/gtest.h>

#include <cmath>

#include "bubblelab/error.hpp"
#include "bubblelab/reduction.hpp"
#include "bubblelab/rng.hpp"

using namespace bubblelab;

namespace {

struct Fixture {
    PuncturedDomain pd = puncture(Domain::unit_ball(3), {0.0, 0.0, 0.0}, 0.25);
    GridPtr grid = make_grid(pd, 0.0625);
    Reducer red{pd, grid, CoefficientField::affine(1.0, {0.5, 0.0, 0.0}), SymmetryGroup::trivial()};
};

Fixture& fx() {
    static Fixture f;
    return f;
}

}  // namespace

TEST(Reducer, ScalingOfParameters) {
    const Reducer& r = fx().red;
    EXPECT_EQ(r.n(), 3);
    EXPECT_DOUBLE_EQ(r.p(), 5.0);
    EXPECT_NEAR(r.delta_of(1.0), 0.5, 1e-15);  // d eps^{(n-2)/(n-1)}
    const Point xi = r.xi_of(1.0, {0.2, 0.0, 0.0});
    EXPECT_NEAR(xi[0], 0.2 * 0.5, 1e-15);
}

// Property: Pi is idempotent and its range is A-orthogonal to the kernel fields.
TEST(Reducer, ProjectionIsOrthogonalAndIdempotent) {
    const Reducer& r = fx().red;
    KernelBasis kb = r.kernel_basis(1.0, {0.0, 0.0, 0.0});
    ASSERT_EQ(kb.fields.size(), 4u);
    CounterRng rng(21);
    Vec u(static_cast<Eigen::Index>(r.disc().size()));
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = 2.0 * rng.uniform() - 1.0;
    Vec pu = r.project_orthogonal(u, kb);
    Vec ppu = r.project_orthogonal(pu, kb);
    EXPECT_LT((pu - ppu).norm(), 1e-10 * pu.norm());
    Eigen::VectorXd inner = kb.AB.transpose() * pu;
    for (Eigen::Index j = 0; j < inner.size(); ++j)
        EXPECT_LT(std::abs(inner[j]), 1e-9 * r.norm_A(pu) * std::sqrt(kb.gram(j, j)));
}

TEST(Reducer, CorrectionSolvesProjectedEquation) {
    const Reducer& r = fx().red;
    CorrectionResult c = r.solve_correction(1.0, {0.0, 0.0, 0.0});
    EXPECT_TRUE(c.converged);
    EXPECT_LT(c.orthogonality, 1e-6);
    EXPECT_LT(c.orth_equation_residual, 1e-6);
    // on so coarse a hole the iteration lands on the trivial branch, and says so
    EXPECT_EQ(c.collapsed, c.nonlinear_ratio < r.options().collapse_ratio);
    EXPECT_GT(c.V_norm, 0.0);
}

TEST(Reducer, RejectsUnderResolvedHole) {
    PuncturedDomain pd = puncture(Domain::unit_ball(3), {0.0, 0.0, 0.0}, 0.1);
    GridPtr g = make_grid(pd, 0.0625);
    EXPECT_THROW(Reducer(pd, g, CoefficientField::constant(1.0), SymmetryGroup::trivial()), InvalidArgument);
}

TEST(Inequality, ConstantsAndRandomSweep) {
    EXPECT_DOUBLE_EQ(inequality_constant(2.0), 2.0 * 2.0 + 1.0);
    EXPECT_DOUBLE_EQ(inequality_constant(0.5), 2.0);
    InequalityReport rep = elementary_inequality_test(20000, 5.0, 31);
    EXPECT_TRUE(rep.pass);
    EXPECT_LE(rep.max_ratio_q_ge_1, 1.0);
    EXPECT_LE(rep.max_ratio_q_lt_1, 1.0);
}
