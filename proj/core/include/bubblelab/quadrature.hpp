#pragma once

#include <functional>

#include "bubblelab/geometry.hpp"

namespace bubblelab {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive Gauss-Kronrod on a finite interval. Throws SolverFailure when the
/// error estimate stays above max(tol_abs, tol_rel*|value|).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double tol_abs, double tol_rel = 0.0, unsigned max_depth = 18);

/// int_0^inf f(r) dr through r = tan(theta).
QuadResult integrate_half_line(const std::function<double(double)>& f, double tol_abs,
                               double tol_rel = 0.0);

struct NewtonianReport {
    int n = 3;
    Point eta;
    double g = 0.0;          // quadrature value of g(eta)
    double g_exact = 0.0;    // alpha_n (1+|eta|^2)^{-(n-2)}
    double abs_error = 0.0;
    double rel_error = 0.0;
    double quad_error = 0.0;
    bool pass = false;
};

/// g(eta) = (1+|eta|^2)^{-(n-2)/2} c_n int |y-eta|^{2-n} U^p dy with c_n = 1/((n-2)|S^{n-1}|).
NewtonianReport newtonian_identity_check(int n, const Point& eta, double tol);

/// int_{R^n} <g,y> (1+|y|^2)^{-n} dy by quadrature (vanishes by oddness).
double zero_moment_integral(int n, const Point& g, double tol);

}  // namespace bubblelab
