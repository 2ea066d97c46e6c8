#include "bubblelab/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bubblelab/potential.hpp"

namespace bubblelab {

namespace {

double dot(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void check_args(const ReducedCoefficients& c, double d, const Point& eta) {
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidArgument("d must be positive");
    if (static_cast<int>(eta.size()) != c.n) throw InvalidArgument("eta has wrong dimension");
}

}  // namespace

ReducedCoefficients compute_coefficients(int n, const Domain& domain, const Point& xi0,
                                         const CoefficientField& Q, const GridPtr& grid, double tol,
                                         double quad_tol) {
    domain.validate();
    if (n != domain.ambient_dim()) throw InvalidArgument("n differs from the domain dimension");
    if (n < 3) throw InvalidArgument("n must be at least 3");
    if (static_cast<int>(xi0.size()) != domain.dim) throw InvalidArgument("xi0 has wrong dimension");
    if (!domain.contains(xi0)) throw InvalidArgument("xi0 must be interior to the domain");

    ReducedCoefficients c;
    c.n = n;
    const Point xa = domain.ambient(xi0);
    c.q0 = Q.eval(xa);
    if (!(c.q0 > 0.0)) throw InvalidArgument("Q(xi0) must be positive");
    c.grad_q = Q.gradient(xa);
    c.zeta.resize(n);
    for (int i = 0; i < n; ++i) c.zeta[i] = c.grad_q[i] / c.q0;

    const double p = critical_exponent(n).value();
    BubbleIntegrals I = bubble_integrals(n, quad_tol);
    c.Ip = I.Ip;
    c.Ip1 = I.Ip1;
    c.alpha_n = alpha_n(n);
    c.gamma0 = gamma0_of(n, c.q0);
    c.c0 = c.scale() * (p - 1.0) / (2.0 * (p + 1.0)) * c.Ip1;
    c.beta = 0.5 * c.alpha_n * c.alpha_n * (n - 2) * sphere_area(n);
    c.gamma = c.Ip1 / (p + 1.0);

    if (n == 3) {
        if (grid) {
            c.robin = greens_regular_part(domain, xi0, grid, tol).robin;
        } else if (domain.kind == DomainKind::Ball) {
            c.robin = ball_regular_part(xa, xa, domain.ambient(domain.center), domain.radius);
        } else {
            throw InvalidArgument("no closed-form Robin function for this domain; supply a grid");
        }
        c.has_alpha = true;
        c.alpha = 0.5 * c.alpha_n * c.Ip * c.robin;
        if (!(c.alpha > 0.0)) throw SolverFailure("Robin value is not positive", c.robin);
    }
    return c;
}

double F_eval(const ReducedCoefficients& c, double d, const Point& eta) {
    check_args(c, d, eta);
    const double s = 1.0 + dot(eta, eta);
    const double lin = c.gamma * dot(c.zeta, eta) * d;
    if (c.n == 3) return c.alpha * d + c.beta / (s * d) - lin;
    return c.beta * std::pow(s * d, -(c.n - 2.0)) - lin;
}

Eigen::VectorXd F_grad(const ReducedCoefficients& c, double d, const Point& eta) {
    check_args(c, d, eta);
    const int n = c.n;
    const double s = 1.0 + dot(eta, eta);
    const double ze = dot(c.zeta, eta);
    Eigen::VectorXd g(n + 1);
    if (n == 3) {
        g[0] = c.alpha - c.beta / (s * d * d) - c.gamma * ze;
        const double k = -2.0 * c.beta / (s * s * d);
        for (int i = 0; i < n; ++i) g[i + 1] = k * eta[i] - c.gamma * c.zeta[i] * d;
    } else {
        g[0] = -(n - 2.0) * c.beta * std::pow(s, -(n - 2.0)) * std::pow(d, -(n - 1.0)) - c.gamma * ze;
        const double k = -2.0 * (n - 2.0) * c.beta * std::pow(d, -(n - 2.0)) * std::pow(s, -(n - 1.0));
        for (int i = 0; i < n; ++i) g[i + 1] = k * eta[i] - c.gamma * c.zeta[i] * d;
    }
    return g;
}

Eigen::MatrixXd F_hessian(const ReducedCoefficients& c, double d, const Point& eta, double step) {
    const int m = c.n + 1;
    Eigen::MatrixXd H(m, m);
    for (int j = 0; j < m; ++j) {
        double dp = d, dm = d;
        Point ep = eta, em = eta;
        double hj;
        if (j == 0) {
            hj = step * std::max(1.0, d);
            dp += hj;
            dm -= hj;
        } else {
            hj = step * std::max(1.0, std::abs(eta[j - 1]));
            ep[j - 1] += hj;
            em[j - 1] -= hj;
        }
        H.col(j) = (F_grad(c, dp, ep) - F_grad(c, dm, em)) / (2.0 * hj);
    }
    return 0.5 * (H + H.transpose());
}

Eigen::VectorXd F_grad_fd(const ReducedCoefficients& c, double d, const Point& eta, double step) {
    const int m = c.n + 1;
    Eigen::VectorXd g(m);
    for (int j = 0; j < m; ++j) {
        double dp = d, dm = d;
        Point ep = eta, em = eta;
        double hj;
        if (j == 0) {
            hj = step * std::max(1.0, d);
            dp += hj;
            dm -= hj;
        } else {
            hj = step * std::max(1.0, std::abs(eta[j - 1]));
            ep[j - 1] += hj;
            em[j - 1] -= hj;
        }
        g[j] = (F_eval(c, dp, ep) - F_eval(c, dm, em)) / (2.0 * hj);
    }
    return g;
}

double d_of_eta(const ReducedCoefficients& c, const Point& eta) {
    if (c.n != 3) throw InvalidArgument("d(eta) is defined for n = 3 only");
    if (static_cast<int>(eta.size()) != 3) throw InvalidArgument("eta has wrong dimension");
    const double h = c.alpha - c.gamma * dot(c.zeta, eta);
    if (!(h > 0.0)) throw InvalidArgument("eta lies outside the half-space alpha - gamma<zeta,eta> > 0");
    return std::sqrt(c.beta / ((1.0 + dot(eta, eta)) * h));
}

double F_tilde(const ReducedCoefficients& c, const Point& eta) {
    if (c.n != 3) throw InvalidArgument("Ftilde is defined for n = 3 only");
    if (static_cast<int>(eta.size()) != 3) throw InvalidArgument("eta has wrong dimension");
    const double h = c.alpha - c.gamma * dot(c.zeta, eta);
    if (!(h > 0.0)) throw InvalidArgument("eta lies outside the half-space alpha - gamma<zeta,eta> > 0");
    return 2.0 * std::sqrt(c.beta * h / (1.0 + dot(eta, eta)));
}

CriticalPoint critical_point(const ReducedCoefficients& coeffs, const Point& grad_q, double q0,
                             double eig_floor) {
    const int n = coeffs.n;
    if (static_cast<int>(grad_q.size()) != n) throw InvalidArgument("grad Q has wrong dimension");
    if (!(q0 > 0.0)) throw InvalidArgument("Q(xi0) must be positive");
    ReducedCoefficients c = coeffs;
    c.zeta.assign(n, 0.0);
    for (int i = 0; i < n; ++i) c.zeta[i] = grad_q[i] / q0;
    const double zn = norm(c.zeta);
    if (!(zn > 0.0)) throw InvalidArgument("grad Q(xi0) = 0: no nondegenerate critical point");

    CriticalPoint cp;
    cp.eta0.assign(n, 0.0);
    if (n == 3) {
        // (alpha - sqrt(alpha^2 + g^2)) / (gamma |zeta|^2), written without cancellation.
        const double k = -c.gamma / (c.alpha + std::hypot(c.alpha, c.gamma * zn));
        for (int i = 0; i < n; ++i) cp.eta0[i] = k * c.zeta[i];
        cp.d0 = d_of_eta(c, cp.eta0);
    } else {
        for (int i = 0; i < n; ++i) cp.eta0[i] = -c.zeta[i] / zn;
        cp.d0 = std::pow((n - 2.0) * c.beta / (std::pow(2.0, n - 2.0) * c.gamma * zn), 1.0 / (n - 1.0));
    }
    cp.grad_norm = F_grad(c, cp.d0, cp.eta0).norm();
    cp.fd_grad_norm = F_grad_fd(c, cp.d0, cp.eta0).norm();
    cp.hessian = F_hessian(c, cp.d0, cp.eta0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cp.hessian);
    cp.eigenvalues = es.eigenvalues();
    const double big = std::max(1.0, cp.eigenvalues.cwiseAbs().maxCoeff());
    cp.nondegenerate = cp.eigenvalues.cwiseAbs().minCoeff() >= eig_floor * big;
    return cp;
}

ExpansionReport expansion_validation(const std::vector<ExpansionSample>& sweep,
                                     const ReducedCoefficients& c, double d, const Point& eta,
                                     double rel_tol) {
    if (sweep.size() < 4) throw InvalidArgument("expansion validation needs at least 4 values of eps");
    ExpansionReport rep;
    const double pw = (c.n - 2.0) / (c.n - 1.0);
    const auto m = static_cast<Eigen::Index>(sweep.size());
    Eigen::MatrixXd X2(m, 2), X3(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& s = sweep[static_cast<std::size_t>(i)];
        if (!(s.eps > 0.0)) throw InvalidArgument("eps must be positive");
        double x = std::pow(s.eps, pw);
        rep.x.push_back(x);
        rep.scaled.push_back((s.J - c.c0) / x);
        y[i] = rep.scaled.back();
        X2(i, 0) = X3(i, 0) = 1.0;
        X2(i, 1) = X3(i, 1) = x;
        X3(i, 2) = x * x;
    }
    rep.limit_linear = X2.colPivHouseholderQr().solve(y)[0];
    rep.limit = X3.colPivHouseholderQr().solve(y)[0];
    rep.target = c.scale() * F_eval(c, d, eta);
    rep.rel_error = std::abs(rep.limit - rep.target) / std::abs(rep.target);
    rep.pass = std::isfinite(rep.rel_error) && rep.rel_error <= rel_tol;
    return rep;
}

double gamma_term_symmetry_defect(const ReducedCoefficients& c, double d, const Point& eta,
                                  double limit_plus, double limit_minus) {
    Point neg = eta;
    for (double& v : neg) v = -v;
    const double even = 0.5 * c.scale() * (F_eval(c, d, eta) + F_eval(c, d, neg));
    return std::abs(0.5 * (limit_plus + limit_minus) - even) / std::abs(even);
}

namespace {

// Restriction of F to (d, t) with eta = t * dir.
struct Slice {
    const ReducedCoefficients& c;
    const Point& dir;
    Point eta(double t) const {
        Point e = dir;
        for (double& v : e) v *= t;
        return e;
    }
    double value(double d, double t) const { return F_eval(c, d, eta(t)); }
    Eigen::Vector2d grad(double d, double t) const {
        Eigen::VectorXd g = F_grad(c, d, eta(t));
        Eigen::Vector2d out;
        out[0] = g[0];
        out[1] = 0.0;
        for (std::size_t i = 0; i < dir.size(); ++i) out[1] += g[static_cast<Eigen::Index>(i) + 1] * dir[i];
        return out;
    }
    Eigen::Matrix2d hess(double d, double t) const {
        const double hd = 1e-6 * std::max(1.0, d), ht = 1e-6 * std::max(1.0, std::abs(t));
        Eigen::Matrix2d H;
        H.col(0) = (grad(d + hd, t) - grad(d - hd, t)) / (2.0 * hd);
        H.col(1) = (grad(d, t + ht) - grad(d, t - ht)) / (2.0 * ht);
        return 0.5 * (H + H.transpose());
    }
};

}  // namespace

ScanResult landscape_scan(const ReducedCoefficients& c, double d_lo, double d_hi, int d_count,
                          double t_lo, double t_hi, int t_count) {
    if (!(d_lo > 0.0) || !(d_hi > d_lo) || d_count < 2) throw InvalidArgument("bad d range");
    if (!(t_hi > t_lo) || t_count < 3 || !std::isfinite(t_lo) || !std::isfinite(t_hi))
        throw InvalidArgument("bad eta range");
    const int n = c.n;
    ScanResult r;
    const double zn = norm(c.zeta);
    r.direction.assign(n, 0.0);
    if (zn > 0.0)
        for (int i = 0; i < n; ++i) r.direction[i] = -c.zeta[i] / zn;
    else
        r.direction[0] = 1.0;
    Slice sl{c, r.direction};

    for (int i = 0; i < d_count; ++i) r.d.push_back(d_lo + (d_hi - d_lo) * i / (d_count - 1));
    for (int j = 0; j < t_count; ++j) r.t.push_back(t_lo + (t_hi - t_lo) * j / (t_count - 1));
    for (double d : r.d)
        for (double t : r.t) r.F.push_back(sl.value(d, t));

    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (n == 3) {
        auto ft = [&](double t) {
            Point e = sl.eta(t);
            if (c.alpha - c.gamma * dot(c.zeta, e) <= 0.0) return -std::numeric_limits<double>::infinity();
            return F_tilde(c, e);
        };
        std::size_t best = 0;
        for (std::size_t j = 1; j < r.t.size(); ++j)
            if (ft(r.t[j]) > ft(r.t[best])) best = j;
        double a = r.t[best > 0 ? best - 1 : 0];
        double b = r.t[std::min(best + 1, r.t.size() - 1)];
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = ft(x1), f2 = ft(x2);
        for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = ft(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = ft(x1);
            }
        }
        r.extremum_t = 0.5 * (a + b);
        r.extremum_d = d_of_eta(c, sl.eta(r.extremum_t));
        r.extremum_F = sl.value(r.extremum_d, r.extremum_t);
        r.saddle = false;
    } else {
        double best = INFINITY;
        for (double d : r.d)
            for (double t : r.t) {
                double g = sl.grad(d, t).norm();
                if (g < best) {
                    best = g;
                    r.extremum_d = d;
                    r.extremum_t = t;
                }
            }
        double d = r.extremum_d, t = r.extremum_t;
        for (int it = 0; it < 100; ++it) {
            Eigen::Vector2d g = sl.grad(d, t);
            if (g.norm() < 1e-13 * std::max(1.0, std::abs(sl.value(d, t)))) break;
            Eigen::Vector2d step = sl.hess(d, t).fullPivLu().solve(-g);
            double lam = 1.0;
            while (d + lam * step[0] <= 0.0) lam *= 0.5;
            d += lam * step[0];
            t += lam * step[1];
        }
        r.extremum_d = d;
        r.extremum_t = t;
        r.extremum_F = sl.value(d, t);
        r.saddle = sl.hess(d, t).determinant() < 0.0;
    }

    r.distance_to_critical = nan;
    if (zn > 0.0) {
        CriticalPoint cp = critical_point(c, c.zeta, 1.0);
        double t0 = dot(cp.eta0, r.direction);
        r.distance_to_critical = std::hypot(r.extremum_d - cp.d0, r.extremum_t - t0);
    }
    return r;
}

}  // namespace bubblelab
