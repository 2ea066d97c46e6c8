#include "bubblelab/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bubblelab/bubbles.hpp"

namespace bubblelab {

namespace bq = boost::math::quadrature;

namespace {

struct Panel {
    double value, error, l1;
};

Panel kronrod_panel(const std::function<double(double)>& f, double a, double b) {
    double err = 0.0, l1 = 0.0;
    double v = bq::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err, &l1);
    // The single-panel estimate comes back in reference-interval units.
    err *= 0.5 * (b - a);
    err = std::max(err, 2.0 * std::numeric_limits<double>::epsilon() * std::abs(v));
    return Panel{v, err, l1};
}

// Bisection on single Kronrod panels; the per-panel tolerance is split evenly.
Panel adapt(const std::function<double(double)>& f, double a, double b, const Panel& whole,
            double tol, unsigned depth) {
    double floor = 50.0 * std::numeric_limits<double>::epsilon() * whole.l1;
    if (whole.error <= tol || whole.error <= floor || depth == 0) return whole;
    double mid = 0.5 * (a + b);
    Panel left = kronrod_panel(f, a, mid);
    Panel right = kronrod_panel(f, mid, b);
    if (left.error + right.error >= whole.error && depth < 4) return whole;
    left = adapt(f, a, mid, left, 0.5 * tol, depth - 1);
    right = adapt(f, mid, b, right, 0.5 * tol, depth - 1);
    return Panel{left.value + right.value, left.error + right.error, left.l1 + right.l1};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double tol_abs, double tol_rel, unsigned max_depth) {
    Panel whole = kronrod_panel(f, a, b);
    double target = std::max(tol_abs, tol_rel * std::abs(whole.value));
    Panel res = adapt(f, a, b, whole, target, max_depth);
    target = std::max(tol_abs, tol_rel * std::abs(res.value));
    double floor = 50.0 * std::numeric_limits<double>::epsilon() * res.l1;
    if (!std::isfinite(res.value) || (res.error > target && res.error > floor)) {
        std::ostringstream os;
        os << "quadrature tolerance not reached: error estimate " << res.error << " > " << target;
        throw SolverFailure(os.str(), res.error);
    }
    return QuadResult{res.value, res.error};
}

QuadResult integrate_half_line(const std::function<double(double)>& f, double tol_abs,
                               double tol_rel) {
    auto g = [&](double t) {
        double c = std::cos(t);
        double r = std::tan(t);
        return f(r) / (c * c);
    };
    return integrate(g, 0.0, 0.5 * std::numbers::pi, tol_abs, tol_rel);
}

namespace {

// r^{n-1} times the angular integral of |r theta - eta|^{2-n} over S^{n-1}. With the
// polar angle 2u from eta the integrand is smooth; the layer of width ~ d/(2 sqrt(r e))
// near u = 0 is split off geometrically.
double shell_integral(int n, double r, double e, double d) {
    const double omega = sphere_area(n - 1);
    if (e == 0.0) return sphere_area(n) * r;
    auto f = [&](double u) {
        double su = std::sin(u);
        double q = d / su;
        return std::pow(4.0 * r * e + q * q, 0.5 * (2 - n)) * std::pow(2.0, n - 1) *
               std::pow(std::cos(u), n - 2);
    };
    const double top = 0.5 * std::numbers::pi;
    double ustar = d / (2.0 * std::sqrt(r * e));
    double acc = 0.0;
    double a = 0.0;
    double b = std::min(top, std::max(ustar, 1e-300));
    while (true) {
        if (b > a) acc += integrate(f, a, b, 0.0, 1e-13).value;
        if (b >= top) break;
        a = b;
        b = std::min(top, 8.0 * b);
    }
    return std::pow(r, n - 1) * omega * acc;
}

}  // namespace

NewtonianReport newtonian_identity_check(int n, const Point& eta, double tol) {
    if (n < 3) throw InvalidArgument("Newtonian identity requires n >= 3");
    if (static_cast<int>(eta.size()) != n) throw InvalidArgument("eta has wrong dimension");
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    const double p = critical_exponent(n).value();
    const double a = 0.5 * (n - 2);
    const double an = alpha_n(n);
    const double cn = 1.0 / ((n - 2) * sphere_area(n));
    const double e = norm(eta);

    auto radial = [&](double r, double d) {
        if (!(r < 1e30)) return 0.0;  // integrand ~ r^{-n-3}
        double up = std::pow(an, p) * std::pow(1.0 + r * r, -a * p);
        return up * shell_integral(n, r, e, d);
    };
    bq::tanh_sinh<double> ts(12);
    double total = 0.0, err_total = 0.0;
    const double qtol = std::min(tol, 1e-6) * 1e-2;
    if (e > 0.0) {
        double err = 0.0;
        double v = ts.integrate(
            [&](double r, double rc) { return radial(r, rc > 0.0 ? rc : e - r); }, 0.0, e,
            qtol, &err);
        total += v;
        err_total += err;
    }
    {
        // r = e + tan t; the complement argument keeps r - e accurate at both ends.
        double err = 0.0;
        double v = ts.integrate(
            [&](double t, double tc) {
                double d = tc > 0.0 ? 1.0 / std::tan(tc) : std::tan(t);
                if (!(d < 1e30)) return 0.0;
                double c = tc > 0.0 ? std::sin(tc) : std::cos(t);
                return radial(e + d, d) / (c * c);
            },
            0.0, 0.5 * std::numbers::pi, qtol, &err);
        total += v;
        err_total += err;
    }
    NewtonianReport rep;
    rep.n = n;
    rep.eta = eta;
    rep.g = std::pow(1.0 + e * e, -a) * cn * total;
    rep.g_exact = an * std::pow(1.0 + e * e, -(n - 2.0));
    rep.abs_error = std::abs(rep.g - rep.g_exact);
    rep.rel_error = rep.abs_error / rep.g_exact;
    rep.quad_error = std::pow(1.0 + e * e, -a) * cn * err_total;
    rep.pass = rep.abs_error <= tol;
    return rep;
}

double zero_moment_integral(int n, const Point& g, double tol) {
    if (n < 2) throw InvalidArgument("zero moment requires n >= 2");
    double gn = norm(g);
    QuadResult radial = integrate_half_line(
        [&](double r) { return std::pow(r, n) * std::pow(1.0 + r * r, -static_cast<double>(n)); },
        tol);
    QuadResult ang = integrate(
        [&](double w) { return w * std::pow(1.0 - w * w, 0.5 * (n - 3)); }, -1.0, 1.0, tol);
    return gn * sphere_area(n - 1) * ang.value * radial.value;
}

}  // namespace bubblelab
