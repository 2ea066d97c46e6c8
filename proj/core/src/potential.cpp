#include "bubblelab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bubblelab {

PoissonResult poisson_solve(const PoissonProblem& problem, double tol) {
    if (!problem.grid) throw InvalidArgument("Poisson problem has no grid");
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    PoissonSolver solver(problem.grid, problem.selector, tol, 500);
    const Discretization& disc = solver.disc();
    Vec f = problem.rhs.grid_ptr() ? disc.gather(problem.rhs) : Vec::Zero(disc.size());
    if (!f.allFinite()) throw InvalidArgument("right-hand side has non-finite values");
    Vec b = disc.mass.cwiseProduct(f);
    if (problem.boundary) b += disc.boundary_rhs(problem.boundary);
    PoissonResult res;
    Vec u = solver.solve(b, &res.stats);
    res.solution = disc.scatter(u);
    return res;
}

double ball_regular_part(const Point& x, const Point& y, const Point& c, double R) {
    const int n = static_cast<int>(x.size());
    Point xx(n), yy(n);
    for (int i = 0; i < n; ++i) {
        xx[i] = x[i] - c[i];
        yy[i] = y[i] - c[i];
    }
    double r = norm(yy);
    if (r == 0.0) return std::pow(R, 2.0 - n);
    double s = R * R / (r * r);
    Point ys(n);
    for (int i = 0; i < n; ++i) ys[i] = s * yy[i];
    return std::pow(R / r, n - 2.0) * std::pow(distance(xx, ys), 2.0 - n);
}

RegularPart greens_regular_part(const Domain& domain, const Point& y, const GridPtr& grid,
                                double tol) {
    if (!grid) throw InvalidArgument("greens_regular_part needs a grid");
    if (static_cast<int>(y.size()) != domain.dim) throw InvalidArgument("pole has wrong dimension");
    if (!domain.contains(y)) throw InvalidArgument("pole must be interior to the domain");
    if (domain.is_meridian() && y[domain.dim - 1] != 0.0)
        throw InvalidArgument("pole must lie on the symmetry axis of a meridian domain");
    double clearance = domain.boundary_distance(y);
    if (clearance < 2.0 * grid->h) {
        std::ostringstream os;
        os << "pole too close to the boundary: clearance " << clearance << " < 2h = " << 2.0 * grid->h;
        throw InvalidArgument(os.str());
    }
    const int n = domain.ambient_dim();
    const Point ya = domain.ambient(y);
    PoissonSolver solver(grid, MaskSelector::Omega, tol, 500);
    Vec b = solver.disc().boundary_rhs(
        [&](const Point& x) { return std::pow(distance(x, ya), 2.0 - n); });
    RegularPart rp;
    rp.domain = domain;
    rp.pole = y;
    Vec w = solver.solve(b, &rp.stats);
    rp.field = solver.disc().scatter(w);
    rp.robin = rp.field.interpolate(y);
    return rp;
}

Vec project_dofs(const PoissonSolver& solver, const BubbleParams& params) {
    Vec f = solver.disc().sample([&](const Point& x) { return -bubble_laplacian(params, x); });
    return solver.solve_source(f);
}

namespace {

void check_hole_resolution(const PuncturedDomain& pd, double h, double min_cells) {
    if (pd.eps < min_cells * h) {
        std::ostringstream os;
        os << "hole radius " << pd.eps << " is below " << min_cells << " grid cells (h = " << h << ")";
        throw InvalidArgument(os.str());
    }
}

}  // namespace

GridField project(const PuncturedDomain& pd, const GridPtr& grid, const BubbleParams& params,
                  const ProjectOptions& opts) {
    if (!grid || !grid->punctured) throw InvalidArgument("project needs a punctured grid");
    params.validate();
    if (params.n != pd.base.ambient_dim()) throw InvalidArgument("bubble dimension differs from domain");
    check_hole_resolution(pd, grid->h, opts.min_hole_cells);
    PoissonSolver solver(grid, MaskSelector::OmegaEps, opts.tol, 500);
    return solver.disc().scatter(project_dofs(solver, params));
}

RemainderReport remainder_report(const PuncturedDomain& pd, const GridPtr& grid, double d,
                                 const Point& eta, const RemainderOptions& opts) {
    if (!grid || !grid->punctured) throw InvalidArgument("remainder_report needs a punctured grid");
    if (!(d > 0.0)) throw InvalidArgument("d must be positive");
    check_hole_resolution(pd, grid->h, opts.min_hole_cells);
    const Domain& dom = pd.base;
    const int n = dom.ambient_dim();
    const int D = dom.dim;
    if (static_cast<int>(eta.size()) != n) throw InvalidArgument("eta has wrong dimension");
    if (dom.is_meridian())
        for (int i = D - 1; i < n; ++i)
            if (eta[i] != 0.0) throw InvalidArgument("eta must lie on the symmetry axis");

    const double eps = pd.eps;
    const double a = 0.5 * (n - 2);
    const double an = alpha_n(n);
    const double delta0 = d * std::pow(eps, (n - 2.0) / (n - 1.0));
    const Point xi0a = dom.ambient(pd.xi0);

    PoissonSolver seps(grid, MaskSelector::OmegaEps, opts.tol, 500);
    PoissonSolver somega(grid, MaskSelector::Omega, opts.tol, 500);
    const Discretization& de = seps.disc();
    const std::size_t N = de.size();
    const auto& nodes = grid->node_of_dof(MaskSelector::OmegaEps);
    const auto& omap = grid->dof_of_node(MaskSelector::Omega);

    // R at every Omega_eps node for independent (delta, xi).
    auto remainder = [&](double delta, const Point& xi) {
        BubbleParams b = make_bubble(n, delta, xi);
        Vec pu = project_dofs(seps, b);
        Vec bg = somega.disc().boundary_rhs(
            [&](const Point& x) { return std::pow(distance(x, xi), 2.0 - n); });
        Vec H = somega.solve(bg);
        Point et(n);
        for (int i = 0; i < n; ++i) et[i] = (xi[i] - xi0a[i]) / delta;
        double e2 = 0.0;
        for (double v : et) e2 += v * v;
        double hole_amp = an * std::pow(delta, -a) * std::pow(1.0 + e2, -a) * std::pow(eps, n - 2.0);
        Vec R(static_cast<Eigen::Index>(N)), core(static_cast<Eigen::Index>(N)),
            hterm(static_cast<Eigen::Index>(N));
        for (std::size_t i = 0; i < N; ++i) {
            Point x = de.dof_ambient(i);
            double h = H[omap[static_cast<std::size_t>(nodes[i])]];
            double u = bubble_eval(b, x);
            double aH = an * std::pow(delta, a) * h;
            double hole = hole_amp * std::pow(distance(x, xi0a), 2.0 - n);
            auto k = static_cast<Eigen::Index>(i);
            R[k] = pu[k] - u + aH + hole;
            core[k] = pu[k] - u + aH;
            hterm[k] = aH;
        }
        return std::tuple<Vec, Vec, Vec>{R, core, hterm};
    };

    Point xi(n);
    for (int i = 0; i < n; ++i) xi[i] = xi0a[i] + delta0 * eta[i];
    auto [R, core, hterm] = remainder(delta0, xi);

    const double h = grid->h;
    const double clear_dist = dom.boundary_distance(pd.xi0);
    auto bracket = [&](double r, double dexp) {
        return std::pow(eps, n - 2.0) * (1.0 + eps * std::pow(delta0, dexp)) * std::pow(r, 2.0 - n);
    };
    RemainderReport rep;
    rep.delta = delta0;
    rep.eps = eps;
    rep.eta = eta;
    rep.regime_ok = eps < delta0 && delta0 < 1.0;
    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < N; ++i) {
        Point xg = de.dof_coords(i);
        double r = distance(xg, pd.xi0);
        if (r <= eps + opts.collar_cells * h) continue;
        if (dom.boundary_distance(xg) <= opts.collar_cells * h) continue;
        used.push_back(i);
        auto k = static_cast<Eigen::Index>(i);
        double bound = std::pow(delta0, a) *
                       (bracket(r, 1.0 - n) + delta0 * delta0 + std::pow(eps / delta0, n - 2.0));
        rep.sup_R = std::max(rep.sup_R, std::abs(R[k]));
        rep.ratio_R = std::max(rep.ratio_R, std::abs(R[k]) / bound);
        if (dom.boundary_distance(xg) < 0.25 * clear_dist && std::abs(hterm[k]) > 0.0)
            rep.far_dominance = std::max(rep.far_dominance, std::abs(core[k]) / std::abs(hterm[k]));
    }
    rep.nodes_used = used.size();

    if (opts.derivatives) {
        const double s = opts.fd_step_rel * delta0;
        auto [Rp, c1, h1] = remainder(delta0 + s, xi);
        auto [Rm, c2, h2] = remainder(delta0 - s, xi);
        for (std::size_t i : used) {
            auto k = static_cast<Eigen::Index>(i);
            double r = distance(de.dof_coords(i), pd.xi0);
            double bound = std::pow(delta0, 0.5 * (n - 4)) *
                           (bracket(r, 1.0 - n) + delta0 * delta0 + std::pow(eps / delta0, n - 2.0));
            rep.ratio_ddelta = std::max(rep.ratio_ddelta, std::abs(Rp[k] - Rm[k]) / (2.0 * s) / bound);
        }
        const int ndir = dom.is_meridian() ? D - 1 : n;
        for (int dir = 0; dir < ndir; ++dir) {
            Point xp = xi, xm = xi;
            xp[dir] += s;
            xm[dir] -= s;
            auto [Rxp, c3, h3] = remainder(delta0, xp);
            auto [Rxm, c4, h4] = remainder(delta0, xm);
            for (std::size_t i : used) {
                auto k = static_cast<Eigen::Index>(i);
                double r = distance(de.dof_coords(i), pd.xi0);
                double bound = std::pow(delta0, 0.5 * n) *
                               (bracket(r, -static_cast<double>(n)) + delta0 * delta0 +
                                std::pow(eps, n - 2.0) * std::pow(delta0, 1.0 - n));
                rep.ratio_dxi = std::max(rep.ratio_dxi, std::abs(Rxp[k] - Rxm[k]) / (2.0 * s) / bound);
            }
        }
    }
    return rep;
}

}  // namespace bubblelab
