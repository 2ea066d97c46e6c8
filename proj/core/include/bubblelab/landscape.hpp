#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bubblelab/bubbles.hpp"
#include "bubblelab/geometry.hpp"

namespace bubblelab {

struct ReducedCoefficients {
    int n = 3;
    double c0 = 0.0;
    bool has_alpha = false;  // n == 3 only
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    Point zeta;              // grad Q / Q at xi0, ambient

    // Inputs the constants were assembled from.
    double Ip = 0.0;
    double Ip1 = 0.0;
    double alpha_n = 0.0;
    double robin = 0.0;      // H(xi0, xi0); zero when n >= 4
    double gamma0 = 1.0;
    double q0 = 1.0;
    Point grad_q;

    double scale() const { return gamma0 * gamma0; }  // Q(xi0)^{-2/(p-1)}
};

/// Assemble c0, alpha, beta, gamma. For n = 3 the Robin value comes from a
/// discrete solve when a grid is given, else from the ball closed form.
ReducedCoefficients compute_coefficients(int n, const Domain& domain, const Point& xi0,
                                         const CoefficientField& Q, const GridPtr& grid = nullptr,
                                         double tol = 1e-10, double quad_tol = 1e-10);

double F_eval(const ReducedCoefficients& c, double d, const Point& eta);
/// (F_d, F_eta_1, ..., F_eta_n).
Eigen::VectorXd F_grad(const ReducedCoefficients& c, double d, const Point& eta);
/// Central differences of F_grad, symmetrised.
Eigen::MatrixXd F_hessian(const ReducedCoefficients& c, double d, const Point& eta, double step = 1e-5);
/// Central differences of F_eval.
Eigen::VectorXd F_grad_fd(const ReducedCoefficients& c, double d, const Point& eta, double step = 1e-6);

/// n = 3: the d solving F_d = 0 at fixed eta, and Ftilde(eta) = F(d(eta), eta).
double d_of_eta(const ReducedCoefficients& c, const Point& eta);
double F_tilde(const ReducedCoefficients& c, const Point& eta);

struct CriticalPoint {
    double d0 = 0.0;
    Point eta0;
    double grad_norm = 0.0;     // analytic
    double fd_grad_norm = 0.0;  // finite differences
    Eigen::MatrixXd hessian;
    Eigen::VectorXd eigenvalues;
    bool nondegenerate = false;
};

CriticalPoint critical_point(const ReducedCoefficients& c, const Point& grad_q, double q0,
                             double eig_floor = 1e-8);

struct ExpansionSample {
    double eps = 0.0;
    double J = 0.0;
};

struct ExpansionReport {
    std::vector<double> x;        // eps^{(n-2)/(n-1)}
    std::vector<double> scaled;   // (J - c0) / x
    double target = 0.0;          // Q(xi0)^{-2/(p-1)} F(d, eta)
    double limit = 0.0;           // Richardson: y = L + a x + b x^2 (L + a x for three samples)
    double limit_linear = 0.0;    // y = L + a x
    double rel_error = 0.0;       // |limit - target| / |target|
    bool pass = false;
};

ExpansionReport expansion_validation(const std::vector<ExpansionSample>& sweep,
                                     const ReducedCoefficients& c, double d, const Point& eta,
                                     double rel_tol = 0.05);

/// [limit(eta) + limit(-eta)] / 2 against the eta-even part of the target, relative.
double gamma_term_symmetry_defect(const ReducedCoefficients& c, double d, const Point& eta,
                                  double limit_plus, double limit_minus);

struct ScanResult {
    Point direction;                   // unit vector the eta axis runs along
    std::vector<double> d;
    std::vector<double> t;             // eta = t * direction
    std::vector<double> F;             // row-major, d outer
    double extremum_d = 0.0;
    double extremum_t = 0.0;
    double extremum_F = 0.0;
    bool saddle = false;               // n >= 4: indefinite Hessian at the located point
    double distance_to_critical = 0.0; // against critical_point, in (d, t)
};

/// n = 3: maximise Ftilde along the axis (golden section after the scan).
/// n >= 4: scan, then Newton on the 2D gradient from the smallest |grad F| node.
ScanResult landscape_scan(const ReducedCoefficients& c, double d_lo, double d_hi, int d_count,
                          double t_lo, double t_hi, int t_count);

}  // namespace bubblelab
