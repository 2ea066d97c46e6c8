#include <gtest/gtest.h>

#include <cmath>

#include "bubblelab/geometry.hpp"
#include "bubblelab/rng.hpp"

using namespace bubblelab;

TEST(Domain, BallMembershipIsStrict) {
    Domain B = Domain::unit_ball(3);
    EXPECT_TRUE(B.contains({0.0, 0.0, 0.0}));
    EXPECT_TRUE(B.contains({0.999, 0.0, 0.0}));
    EXPECT_FALSE(B.contains({1.0, 0.0, 0.0}));
    EXPECT_FALSE(B.contains({0.0, 0.8, 0.8}));
    EXPECT_DOUBLE_EQ(B.boundary_distance({0.25, 0.0, 0.0}), 0.75);
}

TEST(Domain, AnnulusAndBox) {
    Domain A = Domain::annulus({0.0, 0.0}, 0.5, 1.0);
    EXPECT_FALSE(A.contains({0.0, 0.0}));
    EXPECT_FALSE(A.contains({0.5, 0.0}));
    EXPECT_TRUE(A.contains({0.75, 0.0}));
    Domain X = Domain::box({-1.0, 0.0}, {1.0, 2.0});
    EXPECT_TRUE(X.contains({0.0, 1.0}));
    EXPECT_FALSE(X.contains({1.0, 1.0}));
    EXPECT_THROW(Domain::box({0.0, 0.0}, {0.0, 1.0}).validate(), InvalidArgument);
    EXPECT_THROW(Domain::annulus({0.0, 0.0}, 1.0, 0.5).validate(), InvalidArgument);
}

TEST(Puncture, HoleMustFitInside) {
    Domain B = Domain::unit_ball(3);
    PuncturedDomain pd = puncture(B, {0.0, 0.0, 0.0}, 0.1);
    EXPECT_FALSE(pd.contains({0.05, 0.0, 0.0}));
    EXPECT_FALSE(pd.contains({0.1, 0.0, 0.0}));  // on the hole sphere: not interior
    EXPECT_TRUE(pd.contains({0.2, 0.0, 0.0}));
    EXPECT_THROW(puncture(B, {0.95, 0.0, 0.0}, 0.1), InvalidArgument);
    EXPECT_THROW(puncture(B, {0.0, 0.0, 0.0}, 0.0), InvalidArgument);
}

TEST(Grid, NodesOnBoundaryAreNotInterior) {
    GridPtr g = make_grid(puncture(Domain::unit_ball(2), {0.0, 0.0}, 0.25), 0.125);
    for (std::size_t lin = 0; lin < g->num_nodes(); ++lin) {
        Point x = g->coords(lin);
        const double r = norm(x);
        if (std::abs(r - 1.0) < 1e-14) EXPECT_FALSE(g->interior(MaskSelector::Omega, lin));
        if (std::abs(r - 0.25) < 1e-14) EXPECT_FALSE(g->interior(MaskSelector::OmegaEps, lin));
        if (g->interior(MaskSelector::OmegaEps, lin)) EXPECT_TRUE(g->interior(MaskSelector::Omega, lin));
    }
    EXPECT_LT(g->num_dofs(MaskSelector::OmegaEps), g->num_dofs(MaskSelector::Omega));
}

TEST(Grid, DofNumberingRoundTrips) {
    GridPtr g = make_grid(Domain::unit_ball(3), 0.25);
    const auto& dof = g->dof_of_node(MaskSelector::Omega);
    const auto& node = g->node_of_dof(MaskSelector::Omega);
    for (std::size_t k = 0; k < node.size(); ++k) EXPECT_EQ(dof[static_cast<std::size_t>(node[k])], static_cast<int>(k));
}

TEST(Symmetry, ReductionIsIdempotentAndGivesMeridian) {
    SymmetryGroup G = SymmetryGroup::orthogonal_last(2);
    Domain M = symmetry_reduce(Domain::unit_ball(3), G);
    EXPECT_TRUE(M.is_meridian());
    EXPECT_EQ(M.dim, 2);
    EXPECT_EQ(M.ambient_dim(), 3);
    Domain M2 = symmetry_reduce(M, G);
    EXPECT_EQ(M2.dim, M.dim);
    EXPECT_EQ(M2.meridian_m, M.meridian_m);
    EXPECT_EQ(symmetry_reduce(Domain::unit_ball(3), SymmetryGroup::trivial()).dim, 3);
}

TEST(Symmetry, NonInvariantDomainIsRejected) {
    Domain off = Domain::ball({0.0, 0.0, 0.3}, 1.0);
    EXPECT_THROW(symmetry_reduce(off, SymmetryGroup::orthogonal_last(2)), InvalidArgument);
}

TEST(Symmetry, FixedPoints) {
    SymmetryGroup G = SymmetryGroup::orthogonal_last(2);
    EXPECT_TRUE(is_fixed_point(G, {0.4, 0.0, 0.0}));
    EXPECT_FALSE(is_fixed_point(G, {0.4, 0.1, 0.0}));
    EXPECT_TRUE(is_fixed_point(SymmetryGroup::trivial(), {0.4, 0.1, 0.0}));
}

// Property: the symmetrised field is invariant under the lattice subgroup and
// symmetrising twice changes nothing.
TEST(Symmetry, SymmetrizeIsAProjection) {
    GridPtr g = make_grid(Domain::unit_ball(3), 0.125);
    GridField f(g, MaskSelector::Omega);
    CounterRng rng(7);
    for (auto& v : f.values()) v = 2.0 * rng.uniform() - 1.0;
    f.enforce_mask();
    SymmetryGroup G = SymmetryGroup::orthogonal_last(2);
    GridField s1 = symmetrize(f, G);
    GridField s2 = symmetrize(s1, G);
    double diff = 0.0;
    for (std::size_t i = 0; i < s1.values().size(); ++i) diff = std::max(diff, std::abs(s1[i] - s2[i]));
    EXPECT_LT(diff, 1e-14);
    // swap of the last two coordinates maps the field to itself
    int idx[3];
    for (std::size_t lin = 0; lin < g->num_nodes(); ++lin) {
        g->multi_index(lin, idx);
        int sw[3] = {idx[0], idx[2], idx[1]};
        EXPECT_NEAR(s1[lin], s1[g->linear(sw)], 1e-14);
    }
}

TEST(GridField, InterpolationIsExactForLinearFunctions) {
    GridPtr g = make_grid(Domain::box({-1.0, -1.0}, {1.0, 1.0}), 0.125);
    GridField f(g, MaskSelector::Omega);
    for (std::size_t lin = 0; lin < g->num_nodes(); ++lin) {
        Point x = g->coords(lin);
        f.values()[lin] = 2.0 * x[0] - 0.5 * x[1] + 0.25;
    }
    EXPECT_NEAR(f.interpolate({0.3, -0.41}), 2.0 * 0.3 + 0.5 * 0.41 + 0.25, 1e-13);
}
