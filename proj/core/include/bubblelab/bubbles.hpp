#pragma once

#include <vector>

#include "bubblelab/geometry.hpp"

namespace bubblelab {

struct Rational {
    long num = 0;
    long den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational& o) const { return num * o.den == o.num * den; }
};

Rational make_rational(long num, long den);
/// p = (n+2)/(n-2) in lowest terms.
Rational critical_exponent(int n);
/// alpha_n = [n(n-2)]^{(n-2)/4}.
double alpha_n(int n);
/// Surface area of the unit sphere S^{k-1} in R^k.
double sphere_area(int k);

struct BubbleParams {
    int n = 3;
    double delta = 1.0;
    Point xi;

    void validate() const;
};

BubbleParams make_bubble(int n, double delta, Point xi);

double bubble_eval(const BubbleParams& b, const Point& x);
Point bubble_grad(const BubbleParams& b, const Point& x);
/// Closed-form Laplacian assembled as 4 s G'' + 2 n G' for the radial profile G(s), s = |x-xi|^2.
double bubble_laplacian(const BubbleParams& b, const Point& x);
/// Sum of absolute values of the terms in bubble_laplacian; scale for relative residuals.
double bubble_laplacian_scale(const BubbleParams& b, const Point& x);

/// psi^0 = dU/d delta, psi^j = dU/d xi_j.
double psi_eval(const BubbleParams& b, int j, const Point& x);
double psi_laplacian(const BubbleParams& b, int j, const Point& x);
double psi_laplacian_scale(const BubbleParams& b, int j, const Point& x);

/// W = gamma0 U with gamma0 = Q(xi0)^{-1/(p-1)}.
struct RescaledBubble {
    BubbleParams params;
    double q0 = 1.0;
    double gamma0 = 1.0;

    double eval(const Point& x) const;
    double laplacian(const Point& x) const;
    /// -Delta W - Q(xi0) W^p, from closed forms.
    double residual(const Point& x) const;
};

RescaledBubble rescaled_bubble(const BubbleParams& b, double q_at_xi0);
double gamma0_of(int n, double q_at_xi0);

struct CoefficientField {
    enum class Kind { Constant, InverseHalfNorm, Affine, Polynomial };
    struct Monomial {
        double coef = 0.0;
        std::vector<int> powers;
    };

    Kind kind = Kind::Constant;
    double c0 = 1.0;            // constant value, affine offset
    Point slope;                // affine gradient
    std::vector<Monomial> terms;

    static CoefficientField constant(double c);
    static CoefficientField inverse_half_norm();
    static CoefficientField affine(double c, Point g);
    static CoefficientField polynomial(std::vector<Monomial> terms);

    double eval(const Point& x) const;
    Point gradient(const Point& x) const;
    /// Sampled positivity on the closure of the domain (ambient coordinates).
    void validate_on(const Domain& domain) const;
};

struct BubbleIntegrals {
    int n = 3;
    double Ip = 0.0;
    double Ip1 = 0.0;
    double err_p = 0.0;
    double err_p1 = 0.0;
};

/// I_q = |S^{n-1}| int_0^inf U_{1,0}(r)^q r^{n-1} dr for q = p and p+1, via r = tan(theta).
BubbleIntegrals bubble_integrals(int n, double tol = 1e-10);

}  // namespace bubblelab
