#pragma once

#include <memory>

#include "bubblelab/bubbles.hpp"
#include "bubblelab/quadrature.hpp"
#include "bubblelab/solver.hpp"

namespace bubblelab {

struct PoissonProblem {
    GridPtr grid;
    MaskSelector selector = MaskSelector::Omega;
    GridField rhs;          // f in -Delta u = f
    ScalarFn boundary;      // Dirichlet data; empty means zero
};

struct PoissonResult {
    GridField solution;
    IterStats stats;
};

PoissonResult poisson_solve(const PoissonProblem& problem, double tol);

struct RegularPart {
    Domain domain;
    Point pole;
    GridField field;     // H(., pole) on the Omega mask
    double robin = 0.0;  // H(pole, pole), interpolated
    IterStats stats;
};

/// Discrete harmonic extension of |x - y|^{2-n} from the boundary.
RegularPart greens_regular_part(const Domain& domain, const Point& y, const GridPtr& grid,
                                double tol = 1e-10);
/// Method-of-images regular part for a ball of radius R centred at c (ambient coordinates).
double ball_regular_part(const Point& x, const Point& y, const Point& c, double R);

/// Projection P_eps of a bubble onto the punctured domain.
struct ProjectOptions {
    double tol = 1e-10;
    double min_hole_cells = 4.0;  // eps >= min_hole_cells * h
};

GridField project(const PuncturedDomain& pd, const GridPtr& grid, const BubbleParams& params,
                  const ProjectOptions& opts = {});
/// Same, reusing an assembled solver on the grid's Omega_eps mask.
Vec project_dofs(const PoissonSolver& solver, const BubbleParams& params);

struct RemainderReport {
    double delta = 0.0;
    double eps = 0.0;
    Point eta;
    bool regime_ok = false;      // eps < delta < 1
    double sup_R = 0.0;
    double ratio_R = 0.0;        // max |R| / bound over the collar-free region
    double ratio_ddelta = 0.0;
    double ratio_dxi = 0.0;
    double far_dominance = 0.0;  // max over far nodes of |P U - U + a H| / |a H|
    std::size_t nodes_used = 0;
};

struct RemainderOptions {
    double tol = 1e-10;
    bool derivatives = true;
    double collar_cells = 2.0;
    double fd_step_rel = 1e-4;   // parameter step for the derivative estimates, times delta
    double min_hole_cells = 4.0;
};

RemainderReport remainder_report(const PuncturedDomain& pd, const GridPtr& grid, double d,
                                 const Point& eta, const RemainderOptions& opts = {});

}  // namespace bubblelab
