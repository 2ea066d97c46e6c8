#include "bubblelab/bubbles.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "bubblelab/quadrature.hpp"
#include "bubblelab/rng.hpp"

namespace bubblelab {

Rational make_rational(long num, long den) {
    if (den == 0) throw InvalidArgument("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    long g = std::gcd(num, den);
    if (g == 0) g = 1;
    return Rational{num / g, den / g};
}

Rational critical_exponent(int n) {
    if (n < 3) throw InvalidArgument("critical exponent requires n >= 3");
    return make_rational(n + 2, n - 2);
}

double alpha_n(int n) {
    if (n < 3) throw InvalidArgument("alpha_n requires n >= 3");
    return std::pow(static_cast<double>(n) * (n - 2), (n - 2) / 4.0);
}

double sphere_area(int k) {
    if (k < 1) throw InvalidArgument("sphere_area requires k >= 1");
    return 2.0 * std::pow(std::numbers::pi, k / 2.0) / std::tgamma(k / 2.0);
}

void BubbleParams::validate() const {
    if (n < 3) throw InvalidArgument("bubble dimension must be at least 3");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("bubble scale delta must be positive");
    if (static_cast<int>(xi.size()) != n) throw InvalidArgument("bubble centre has wrong dimension");
}

BubbleParams make_bubble(int n, double delta, Point xi) {
    BubbleParams b{n, delta, std::move(xi)};
    b.validate();
    return b;
}

namespace {

struct Local {
    double s;   // |x - xi|^2
    double q;   // delta^2 + s
    double a;   // (n-2)/2
    double C;   // alpha_n delta^a
};

Local local(const BubbleParams& b, const Point& x) {
    double s = 0.0;
    for (int i = 0; i < b.n; ++i) s += (x[i] - b.xi[i]) * (x[i] - b.xi[i]);
    double a = 0.5 * (b.n - 2);
    return Local{s, b.delta * b.delta + s, a, alpha_n(b.n) * std::pow(b.delta, a)};
}

// Radial Laplacian terms 4 s G'' and 2 n G' of U.
void u_terms(const BubbleParams& b, const Point& x, double& t1, double& t2) {
    Local L = local(b, x);
    double g1 = -L.a * L.C * std::pow(L.q, -L.a - 1.0);
    double g2 = L.a * (L.a + 1.0) * L.C * std::pow(L.q, -L.a - 2.0);
    t1 = 4.0 * L.s * g2;
    t2 = 2.0 * b.n * g1;
}

void psi_terms(const BubbleParams& b, int j, const Point& x, double& t1, double& t2) {
    Local L = local(b, x);
    double bb = 0.5 * b.n;
    double d2 = b.delta * b.delta;
    if (j == 0) {
        double K = alpha_n(b.n) * L.a * std::pow(b.delta, L.a - 1.0);
        double g1 = K * (std::pow(L.q, -bb) - bb * (L.s - d2) * std::pow(L.q, -bb - 1.0));
        double g2 = K * (-2.0 * bb * std::pow(L.q, -bb - 1.0) +
                         bb * (bb + 1.0) * (L.s - d2) * std::pow(L.q, -bb - 2.0));
        t1 = 4.0 * L.s * g2;
        t2 = 2.0 * b.n * g1;
    } else {
        double K = alpha_n(b.n) * (b.n - 2) * std::pow(b.delta, L.a);
        double k1 = -bb * K * std::pow(L.q, -bb - 1.0);
        double k2 = bb * (bb + 1.0) * K * std::pow(L.q, -bb - 2.0);
        double y = x[j - 1] - b.xi[j - 1];
        t1 = y * 4.0 * L.s * k2;
        t2 = y * 2.0 * (b.n + 2) * k1;
    }
}

void check_j(const BubbleParams& b, int j) {
    if (j < 0 || j > b.n) throw InvalidArgument("kernel index j out of range 0..n");
}

}  // namespace

double bubble_eval(const BubbleParams& b, const Point& x) {
    Local L = local(b, x);
    return L.C * std::pow(L.q, -L.a);
}

Point bubble_grad(const BubbleParams& b, const Point& x) {
    Local L = local(b, x);
    double g1 = -L.a * L.C * std::pow(L.q, -L.a - 1.0);
    Point g(b.n);
    for (int i = 0; i < b.n; ++i) g[i] = 2.0 * g1 * (x[i] - b.xi[i]);
    return g;
}

double bubble_laplacian(const BubbleParams& b, const Point& x) {
    double t1, t2;
    u_terms(b, x, t1, t2);
    return t1 + t2;
}

double bubble_laplacian_scale(const BubbleParams& b, const Point& x) {
    double t1, t2;
    u_terms(b, x, t1, t2);
    return std::abs(t1) + std::abs(t2);
}

double psi_eval(const BubbleParams& b, int j, const Point& x) {
    check_j(b, j);
    Local L = local(b, x);
    double bb = 0.5 * b.n;
    if (j == 0)
        return alpha_n(b.n) * L.a * std::pow(b.delta, L.a - 1.0) * (L.s - b.delta * b.delta) *
               std::pow(L.q, -bb);
    return alpha_n(b.n) * (b.n - 2) * std::pow(b.delta, L.a) * (x[j - 1] - b.xi[j - 1]) *
           std::pow(L.q, -bb);
}

double psi_laplacian(const BubbleParams& b, int j, const Point& x) {
    check_j(b, j);
    double t1, t2;
    psi_terms(b, j, x, t1, t2);
    return t1 + t2;
}

double psi_laplacian_scale(const BubbleParams& b, int j, const Point& x) {
    check_j(b, j);
    double t1, t2;
    psi_terms(b, j, x, t1, t2);
    return std::abs(t1) + std::abs(t2);
}

double gamma0_of(int n, double q_at_xi0) {
    if (!(q_at_xi0 > 0.0) || !std::isfinite(q_at_xi0))
        throw InvalidArgument("Q(xi0) must be positive");
    return std::pow(q_at_xi0, -1.0 / (critical_exponent(n).value() - 1.0));
}

RescaledBubble rescaled_bubble(const BubbleParams& b, double q_at_xi0) {
    b.validate();
    return RescaledBubble{b, q_at_xi0, gamma0_of(b.n, q_at_xi0)};
}

double RescaledBubble::eval(const Point& x) const { return gamma0 * bubble_eval(params, x); }

double RescaledBubble::laplacian(const Point& x) const {
    return gamma0 * bubble_laplacian(params, x);
}

double RescaledBubble::residual(const Point& x) const {
    double p = critical_exponent(params.n).value();
    return -laplacian(x) - q0 * std::pow(eval(x), p);
}

// ---------------------------------------------------------- coefficients

CoefficientField CoefficientField::constant(double c) {
    CoefficientField q;
    q.kind = Kind::Constant;
    q.c0 = c;
    return q;
}

CoefficientField CoefficientField::inverse_half_norm() {
    CoefficientField q;
    q.kind = Kind::InverseHalfNorm;
    return q;
}

CoefficientField CoefficientField::affine(double c, Point g) {
    CoefficientField q;
    q.kind = Kind::Affine;
    q.c0 = c;
    q.slope = std::move(g);
    return q;
}

CoefficientField CoefficientField::polynomial(std::vector<Monomial> terms) {
    CoefficientField q;
    q.kind = Kind::Polynomial;
    q.terms = std::move(terms);
    return q;
}

double CoefficientField::eval(const Point& x) const {
    switch (kind) {
        case Kind::Constant:
            return c0;
        case Kind::InverseHalfNorm:
            return 0.5 / norm(x);
        case Kind::Affine: {
            double v = c0;
            for (std::size_t i = 0; i < slope.size() && i < x.size(); ++i) v += slope[i] * x[i];
            return v;
        }
        case Kind::Polynomial: {
            double v = 0.0;
            for (const auto& t : terms) {
                double m = t.coef;
                for (std::size_t i = 0; i < t.powers.size() && i < x.size(); ++i)
                    m *= std::pow(x[i], t.powers[i]);
                v += m;
            }
            return v;
        }
    }
    return 0.0;
}

Point CoefficientField::gradient(const Point& x) const {
    Point g(x.size(), 0.0);
    switch (kind) {
        case Kind::Constant:
            break;
        case Kind::InverseHalfNorm: {
            double r = norm(x);
            for (std::size_t i = 0; i < x.size(); ++i) g[i] = -0.5 * x[i] / (r * r * r);
            break;
        }
        case Kind::Affine:
            for (std::size_t i = 0; i < slope.size() && i < x.size(); ++i) g[i] = slope[i];
            break;
        case Kind::Polynomial:
            for (const auto& t : terms)
                for (std::size_t k = 0; k < t.powers.size() && k < x.size(); ++k) {
                    if (t.powers[k] == 0) continue;
                    double m = t.coef * t.powers[k];
                    for (std::size_t i = 0; i < t.powers.size() && i < x.size(); ++i)
                        m *= std::pow(x[i], i == k ? t.powers[i] - 1 : t.powers[i]);
                    g[k] += m;
                }
            break;
    }
    return g;
}

void CoefficientField::validate_on(const Domain& domain) const {
    Point lo, hi;
    domain.bounding_box(lo, hi);
    CounterRng rng(0xc0ef);
    const int n = domain.ambient_dim();
    if (kind == Kind::InverseHalfNorm) {
        Point origin(domain.dim, 0.0);
        if (domain.contains(origin) || domain.boundary_distance(origin) >= 0.0)
            throw InvalidArgument("Q(x)=1/(2|x|) requires the origin outside the closed domain");
    }
    for (int s = 0; s < 20000; ++s) {
        Point x(domain.dim);
        for (int i = 0; i < domain.dim; ++i) x[i] = rng.uniform(lo[i], hi[i]);
        if (!domain.contains(x)) continue;
        Point y = domain.ambient(x);
        y.resize(n, 0.0);
        double v = eval(y);
        if (!(v > 0.0) || !std::isfinite(v)) {
            std::ostringstream os;
            os << "coefficient field is not positive on the domain (Q = " << v << ")";
            throw InvalidArgument(os.str());
        }
    }
}

// ------------------------------------------------------------ integrals

BubbleIntegrals bubble_integrals(int n, double tol) {
    if (n < 3) throw InvalidArgument("bubble integrals require n >= 3");
    const double p = critical_exponent(n).value();
    const double a = 0.5 * (n - 2);
    const double an = alpha_n(n);
    const double omega = sphere_area(n);
    auto integral = [&](double q) {
        auto f = [&](double r) {
            return std::pow(an, q) * std::pow(1.0 + r * r, -a * q) * std::pow(r, n - 1);
        };
        QuadResult res = integrate_half_line(f, tol / omega);
        return QuadResult{omega * res.value, omega * res.error};
    };
    QuadResult ip = integral(p);
    QuadResult ip1 = integral(p + 1.0);
    return BubbleIntegrals{n, ip.value, ip1.value, ip.error, ip1.error};
}

}  // namespace bubblelab
