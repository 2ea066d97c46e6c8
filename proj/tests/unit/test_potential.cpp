#include <gtest/gtest.h>

#include <cmath>

#include "bubblelab/potential.hpp"
#include "bubblelab/quadrature.hpp"

using namespace bubblelab;

TEST(Newtonian, IdentityAgainstFrozenValues) {
    struct Case {
        int n;
        double s;
        double g;
    };
    // alpha_n (1+s^2)^{-(n-2)}, tests/oracles/bubble_oracles.py
    const Case cases[] = {{3, 1.0, 0.658037006476246230409609450899}, {3, 2.0, 0.263214802590498506775200493266},
                          {4, 1.0, 0.707106781186547524400844362105}, {4, 2.0, 0.113137084989847606259273785962},
                          {5, 1.0, 0.952748902789902630525384831335}, {5, 2.0, 0.0609759297785537696229411514819}};
    for (const auto& c : cases) {
        Point eta(c.n, 0.0);
        eta[c.n - 1] = c.s;
        NewtonianReport r = newtonian_identity_check(c.n, eta, 1e-6);
        EXPECT_NEAR(r.g_exact, c.g, 1e-13) << c.n;
        EXPECT_NEAR(r.g, c.g, 1e-6) << c.n << " " << c.s;
        EXPECT_TRUE(r.pass);
    }
}

TEST(Newtonian, OddMomentVanishes) {
    EXPECT_NEAR(zero_moment_integral(3, {1.0, -2.0, 0.5}, 1e-10), 0.0, 1e-8);
}

TEST(RegularPart, BallClosedForm) {
    const Point c{0.0, 0.0, 0.0};
    // H(0, 0) = R^{2-n} on the unit ball
    EXPECT_NEAR(ball_regular_part(c, c, c, 1.0), 1.0, 1e-15);
    EXPECT_NEAR(ball_regular_part(c, c, c, 2.0), 0.5, 1e-15);
    // symmetry H(x, y) = H(y, x)
    const Point x{0.3, -0.2, 0.1}, y{-0.1, 0.4, 0.25};
    EXPECT_NEAR(ball_regular_part(x, y, c, 1.0), ball_regular_part(y, x, c, 1.0), 1e-14);
    // harmonic extension of |x-y|^{2-n}: equal on the sphere
    const Point b{0.6, 0.0, 0.8};
    EXPECT_NEAR(ball_regular_part(b, y, c, 1.0), 1.0 / distance(b, y), 1e-14);
}

TEST(RegularPart, DiscreteHarmonicExtensionConverges) {
    Domain B = Domain::unit_ball(3);
    const Point y{0.2, -0.1, 0.0};
    const double exact = ball_regular_part(y, y, B.center, 1.0);
    double prev = 0.0;
    for (double h : {0.125, 0.0625}) {
        RegularPart rp = greens_regular_part(B, y, make_grid(B, h));
        const double err = std::abs(rp.robin - exact);
        EXPECT_LT(err, 0.02);
        if (prev > 0.0) EXPECT_LT(err, prev);
        prev = err;
    }
}

// Property: second order for a smooth Dirichlet problem on a curved domain.
TEST(Poisson, SecondOrderOnDisc) {
    Domain D = Domain::unit_ball(2);
    auto u = [](const Point& x) { return std::sin(x[0]) * std::exp(x[1]); };  // harmonic
    double errs[2];
    int k = 0;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        PoissonProblem pr;
        pr.grid = make_grid(D, h);
        pr.rhs = GridField(pr.grid, MaskSelector::Omega);
        pr.boundary = u;
        PoissonResult res = poisson_solve(pr, 1e-12);
        double e = 0.0;
        for (std::size_t lin = 0; lin < pr.grid->num_nodes(); ++lin)
            if (pr.grid->interior(MaskSelector::Omega, lin))
                e = std::max(e, std::abs(res.solution[lin] - u(pr.grid->coords(lin))));
        errs[k++] = e;
    }
    EXPECT_GT(std::log2(errs[0] / errs[1]), 1.7);
}

TEST(Project, RejectsUnderResolvedHole) {
    Domain B = Domain::unit_ball(3);
    PuncturedDomain pd = puncture(B, {0.0, 0.0, 0.0}, 0.1);
    GridPtr g = make_grid(pd, 0.125);
    EXPECT_THROW(project(pd, g, make_bubble(3, 0.3, {0.0, 0.0, 0.0})), InvalidArgument);
}

// Property: the projection is nonnegative and below the bubble (maximum principle).
TEST(Project, BoundedByBubble) {
    Domain B = Domain::unit_ball(3);
    PuncturedDomain pd = puncture(B, {0.0, 0.0, 0.0}, 0.25);
    GridPtr g = make_grid(pd, 0.0625);
    BubbleParams b = make_bubble(3, 0.4, {0.0, 0.0, 0.0});
    GridField pu = project(pd, g, b);
    for (std::size_t lin = 0; lin < g->num_nodes(); ++lin) {
        if (!g->interior(MaskSelector::OmegaEps, lin)) continue;
        const double v = bubble_eval(b, g->coords(lin));
        EXPECT_GE(pu[lin], -1e-9);
        EXPECT_LE(pu[lin], v + 1e-9);
    }
}
