#include "bubblelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bubblelab/rng.hpp"

namespace bubblelab {

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error([&] {
          std::ostringstream os;
          os << violations.size() << " configuration error(s)";
          for (const auto& v : violations) os << "\n  " << v;
          return os.str();
      }()),
      violations_(std::move(violations)) {}

double norm(const Point& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

namespace {

double sq_dist(const Point& a, const Point& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - c[i]) * (a[i] - c[i]);
    return s;
}

// Segment a->b with a strictly inside the sphere |x-c|=r: first crossing.
double sphere_exit(const Point& a, const Point& b, const Point& c, double r) {
    double dd = 0, fd = 0, ff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = b[i] - a[i], f = a[i] - c[i];
        dd += d * d;
        fd += f * d;
        ff += f * f;
    }
    if (sq_dist(b, c) < r * r || dd == 0.0) return 1.0;
    double c0 = ff - r * r;
    double t = (-fd + std::sqrt(std::max(0.0, fd * fd - dd * c0))) / dd;
    return std::clamp(t, 0.0, 1.0);
}

// Segment a->b with a strictly outside the sphere: first entry, 1 if none.
double sphere_entry(const Point& a, const Point& b, const Point& c, double r) {
    double dd = 0, fd = 0, ff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = b[i] - a[i], f = a[i] - c[i];
        dd += d * d;
        fd += f * d;
        ff += f * f;
    }
    if (dd == 0.0) return 1.0;
    double c0 = ff - r * r;
    double disc = fd * fd - dd * c0;
    if (disc < 0.0) return 1.0;
    double t = (-fd - std::sqrt(disc)) / dd;
    if (t < 0.0 || t > 1.0) return 1.0;
    return t;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
}

}  // namespace

Domain Domain::unit_ball(int n) { return ball(Point(static_cast<std::size_t>(n), 0.0), 1.0); }

Domain Domain::ball(Point c, double r) {
    Domain d;
    d.kind = DomainKind::Ball;
    d.dim = static_cast<int>(c.size());
    d.center = std::move(c);
    d.radius = r;
    d.validate();
    return d;
}

Domain Domain::box(Point lo, Point hi) {
    Domain d;
    d.kind = DomainKind::Box;
    d.dim = static_cast<int>(lo.size());
    require(hi.size() == lo.size(), "box corners differ in dimension");
    d.center.resize(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) d.center[i] = 0.5 * (lo[i] + hi[i]);
    d.lo = std::move(lo);
    d.hi = std::move(hi);
    d.validate();
    return d;
}

Domain Domain::annulus(Point c, double inner_r, double outer_r) {
    Domain d;
    d.kind = DomainKind::Annulus;
    d.dim = static_cast<int>(c.size());
    d.center = std::move(c);
    d.inner = inner_r;
    d.radius = outer_r;
    d.validate();
    return d;
}

void Domain::validate() const {
    require(dim >= 2, "domain dimension must be at least 2");
    require(static_cast<int>(center.size()) == dim, "domain centre has wrong dimension");
    switch (kind) {
        case DomainKind::Ball:
            require(radius > 0.0 && std::isfinite(radius), "ball radius must be positive");
            break;
        case DomainKind::Annulus:
            require(inner > 0.0 && radius > 0.0 && std::isfinite(radius),
                    "annulus radii must be positive");
            require(inner < radius, "annulus inner radius must be smaller than outer radius");
            break;
        case DomainKind::Box:
            require(static_cast<int>(lo.size()) == dim && static_cast<int>(hi.size()) == dim,
                    "box corners have wrong dimension");
            for (int i = 0; i < dim; ++i)
                require(hi[i] > lo[i] && std::isfinite(hi[i] - lo[i]),
                        "box extents must be strictly positive");
            break;
    }
    if (meridian_m > 0) require(center[dim - 1] == 0.0, "meridian domain must be centred on the axis");
}

bool Domain::contains(const Point& x) const {
    if (meridian_m > 0 && x[dim - 1] < 0.0) return false;
    switch (kind) {
        case DomainKind::Ball:
            return sq_dist(x, center) < radius * radius;
        case DomainKind::Annulus: {
            double s = sq_dist(x, center);
            return s < radius * radius && s > inner * inner;
        }
        case DomainKind::Box:
            for (int i = 0; i < dim; ++i)
                if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
            return true;
    }
    return false;
}

double Domain::boundary_distance(const Point& x) const {
    switch (kind) {
        case DomainKind::Ball:
            return radius - distance(x, center);
        case DomainKind::Annulus: {
            double r = distance(x, center);
            return std::min(radius - r, r - inner);
        }
        case DomainKind::Box: {
            double m = INFINITY;
            for (int i = 0; i < dim; ++i) m = std::min({m, x[i] - lo[i], hi[i] - x[i]});
            return m;
        }
    }
    return 0.0;
}

void Domain::bounding_box(Point& lo_out, Point& hi_out) const {
    lo_out.assign(dim, 0.0);
    hi_out.assign(dim, 0.0);
    for (int i = 0; i < dim; ++i) {
        if (kind == DomainKind::Box) {
            lo_out[i] = lo[i];
            hi_out[i] = hi[i];
        } else {
            lo_out[i] = center[i] - radius;
            hi_out[i] = center[i] + radius;
        }
    }
    if (meridian_m > 0) lo_out[dim - 1] = 0.0;
}

Point Domain::anchor() const { return center; }

double Domain::exit_fraction(const Point& a, const Point& b) const {
    switch (kind) {
        case DomainKind::Ball:
            return sphere_exit(a, b, center, radius);
        case DomainKind::Annulus: {
            double t = sphere_exit(a, b, center, radius);
            return std::min(t, sphere_entry(a, b, center, inner));
        }
        case DomainKind::Box: {
            double t = 1.0;
            for (int i = 0; i < dim; ++i) {
                double d = b[i] - a[i];
                if (b[i] > hi[i] && d > 0) t = std::min(t, (hi[i] - a[i]) / d);
                if (b[i] < lo[i] && d < 0) t = std::min(t, (lo[i] - a[i]) / d);
            }
            return std::clamp(t, 0.0, 1.0);
        }
    }
    return 1.0;
}

Point Domain::ambient(const Point& x) const {
    if (meridian_m == 0) return x;
    Point y(static_cast<std::size_t>(ambient_dim()), 0.0);
    for (int i = 0; i < dim; ++i) y[i] = x[i];
    return y;
}

bool PuncturedDomain::contains(const Point& x) const {
    return base.contains(x) && sq_dist(x, xi0) > eps * eps;
}

double PuncturedDomain::exit_fraction(const Point& a, const Point& b) const {
    return std::min(base.exit_fraction(a, b), sphere_entry(a, b, xi0, eps));
}

PuncturedDomain puncture(const Domain& domain, const Point& xi0, double eps) {
    domain.validate();
    require(static_cast<int>(xi0.size()) == domain.dim, "puncture centre has wrong dimension");
    require(eps > 0.0 && std::isfinite(eps), "hole radius must be positive");
    require(domain.contains(xi0), "puncture centre must be interior to the domain");
    if (domain.is_meridian()) require(xi0[domain.dim - 1] == 0.0, "puncture centre must lie on the symmetry axis");
    double clearance = domain.boundary_distance(xi0);
    if (!(eps < clearance)) {
        std::ostringstream os;
        os << "hole radius " << eps << " must be smaller than dist(xi0, boundary) = " << clearance;
        throw InvalidArgument(os.str());
    }
    return PuncturedDomain{domain, xi0, eps};
}

SymmetryGroup SymmetryGroup::orthogonal_last(int m) {
    require(m >= 1, "O(m) requires m >= 1");
    return SymmetryGroup{Kind::OrthogonalLast, m};
}

bool is_fixed_point(const SymmetryGroup& group, const Point& x) {
    if (group.kind == SymmetryGroup::Kind::Trivial) return true;
    int n = static_cast<int>(x.size());
    for (int i = std::max(0, n - group.m); i < n; ++i)
        if (x[i] != 0.0) return false;
    return true;
}

Domain symmetry_reduce(const Domain& domain, const SymmetryGroup& group, std::uint64_t seed) {
    domain.validate();
    if (group.kind == SymmetryGroup::Kind::Trivial) return domain;
    if (domain.is_meridian()) {
        require(domain.meridian_m == group.m, "domain already reduced by a different group");
        return domain;
    }
    const int n = domain.dim, m = group.m, q = n - m;
    require(q >= 1, "O(m) on the last m coordinates requires m < n");

    // Sampled invariance: random points and random orthogonal g on the last m coordinates.
    Point blo, bhi;
    domain.bounding_box(blo, bhi);
    CounterRng rng(seed);
    const int samples = 4000;
    for (int s = 0; s < samples; ++s) {
        Point x(n);
        for (int i = 0; i < n; ++i) {
            double pad = 0.1 * (bhi[i] - blo[i]);
            x[i] = rng.uniform(blo[i] - pad, bhi[i] + pad);
        }
        // Random orthogonal matrix by Gram-Schmidt on Gaussian columns.
        std::vector<std::vector<double>> g(m, std::vector<double>(m));
        for (int c = 0; c < m; ++c) {
            for (int r = 0; r < m; ++r) g[c][r] = rng.normal();
            for (int p = 0; p < c; ++p) {
                double dot = 0;
                for (int r = 0; r < m; ++r) dot += g[c][r] * g[p][r];
                for (int r = 0; r < m; ++r) g[c][r] -= dot * g[p][r];
            }
            double nn = 0;
            for (int r = 0; r < m; ++r) nn += g[c][r] * g[c][r];
            nn = std::sqrt(nn);
            for (int r = 0; r < m; ++r) g[c][r] /= nn;
        }
        Point y = x;
        for (int r = 0; r < m; ++r) {
            double v = 0;
            for (int c = 0; c < m; ++c) v += g[c][r] * x[q + c];
            y[q + r] = v;
        }
        double margin = 1e-9 * (1.0 + norm(x));
        if (std::abs(domain.boundary_distance(x)) < margin ||
            std::abs(domain.boundary_distance(y)) < margin)
            continue;
        if (domain.contains(x) != domain.contains(y))
            throw InvalidArgument("domain is not invariant under O(" + std::to_string(m) +
                                  ") acting on the last coordinates");
    }

    Domain r = domain;
    r.dim = q + 1;
    r.meridian_m = m;
    r.center.resize(q + 1);
    if (r.kind == DomainKind::Box) {
        r.lo.resize(q + 1);
        r.hi.resize(q + 1);
    }
    r.validate();
    return r;
}

// ---------------------------------------------------------------- Grid

std::size_t Grid::linear(const int* idx) const {
    std::size_t lin = 0;
    for (int k = 0; k < dim; ++k) lin += static_cast<std::size_t>(idx[k]) * strides_[k];
    return lin;
}

void Grid::multi_index(std::size_t lin, int* idx) const {
    for (int k = 0; k < dim; ++k) {
        idx[k] = static_cast<int>(lin / strides_[k]);
        lin -= static_cast<std::size_t>(idx[k]) * strides_[k];
    }
}

Point Grid::coords(std::size_t lin) const {
    Point x(dim);
    for (int k = 0; k < dim; ++k) {
        int i = static_cast<int>(lin / strides_[k]);
        lin -= static_cast<std::size_t>(i) * strides_[k];
        x[k] = origin[k] + static_cast<double>(i - anchor_index[k]) * h;
    }
    return x;
}

const std::vector<std::uint8_t>& Grid::mask(MaskSelector sel) const {
    return sel == MaskSelector::Omega ? mask_omega_ : mask_eps_;
}

std::size_t Grid::interior_count(MaskSelector sel) const { return num_dofs(sel); }

const std::vector<std::int32_t>& Grid::dof_of_node(MaskSelector sel) const {
    return sel == MaskSelector::Omega ? dof_omega_ : dof_eps_;
}

const std::vector<std::int64_t>& Grid::node_of_dof(MaskSelector sel) const {
    return sel == MaskSelector::Omega ? node_omega_ : node_eps_;
}

bool Grid::member(MaskSelector sel, const Point& x) const {
    if (sel == MaskSelector::OmegaEps && punctured) return punctured->contains(x);
    return domain.contains(x);
}

double Grid::exit_fraction(MaskSelector sel, const Point& a, const Point& b) const {
    if (sel == MaskSelector::OmegaEps && punctured) return punctured->exit_fraction(a, b);
    return domain.exit_fraction(a, b);
}

Grid build_grid_impl(const Domain& domain, const std::optional<PuncturedDomain>& pd,
                     const Point& anchor, double h) {
    domain.validate();
    require(h > 0.0 && std::isfinite(h), "grid spacing must be positive");
    double narrowest = INFINITY;
    switch (domain.kind) {
        case DomainKind::Ball: narrowest = 2.0 * domain.radius; break;
        case DomainKind::Annulus: narrowest = domain.radius - domain.inner; break;
        case DomainKind::Box:
            for (int i = 0; i < domain.dim; ++i)
                narrowest = std::min(narrowest, domain.hi[i] - domain.lo[i]);
            break;
    }
    if (!(h < narrowest)) {
        std::ostringstream os;
        os << "grid spacing " << h << " is not smaller than the narrowest extent " << narrowest;
        throw InvalidArgument(os.str());
    }

    Grid g;
    const int D = domain.dim;
    g.dim = D;
    g.h = h;
    g.domain = domain;
    g.punctured = pd;
    Point blo, bhi;
    domain.bounding_box(blo, bhi);
    std::vector<long> klo(D), khi(D);
    double est = 1.0;
    for (int k = 0; k < D; ++k) {
        klo[k] = static_cast<long>(std::ceil((anchor[k] - blo[k]) / h)) + 1;
        khi[k] = static_cast<long>(std::ceil((bhi[k] - anchor[k]) / h)) + 1;
        if (domain.is_meridian() && k == D - 1) klo[k] = 0;
        est *= static_cast<double>(klo[k] + khi[k] + 1);
    }
    int L = 0;
    while (L < 12 && est / std::pow(2.0, D * (L + 1)) >= 2000.0) ++L;
    const long mult = 1L << L;
    g.levels_hint = L;
    g.counts.resize(D);
    g.anchor_index.resize(D);
    g.origin = anchor;
    std::size_t total = 1;
    for (int k = 0; k < D; ++k) {
        klo[k] = (klo[k] + mult - 1) / mult * mult;
        khi[k] = (khi[k] + mult - 1) / mult * mult;
        g.counts[k] = static_cast<int>(klo[k] + khi[k] + 1);
        g.anchor_index[k] = static_cast<int>(klo[k]);
        total *= static_cast<std::size_t>(g.counts[k]);
    }
    g.num_nodes_ = total;
    g.strides_.assign(D, 1);
    for (int k = D - 2; k >= 0; --k) g.strides_[k] = g.strides_[k + 1] * g.counts[k + 1];

    g.mask_omega_.assign(total, 0);
    g.mask_eps_.assign(total, 0);
    g.dof_omega_.assign(total, -1);
    g.dof_eps_.assign(total, -1);
    for (std::size_t lin = 0; lin < total; ++lin) {
        Point x = g.coords(lin);
        bool in = domain.contains(x);
        g.mask_omega_[lin] = in;
        g.mask_eps_[lin] = in && (!pd || pd->contains(x));
        if (g.mask_omega_[lin]) {
            g.dof_omega_[lin] = static_cast<std::int32_t>(g.node_omega_.size());
            g.node_omega_.push_back(static_cast<std::int64_t>(lin));
        }
        if (g.mask_eps_[lin]) {
            g.dof_eps_[lin] = static_cast<std::int32_t>(g.node_eps_.size());
            g.node_eps_.push_back(static_cast<std::int64_t>(lin));
        }
    }
    if (g.node_omega_.empty() || g.node_eps_.empty())
        throw InvalidArgument("grid has no interior nodes; spacing too coarse for the domain");
    return g;
}

Grid build_grid(const Domain& domain, double h) {
    return build_grid_impl(domain, std::nullopt, domain.anchor(), h);
}

Grid build_grid(const PuncturedDomain& pd, double h) {
    return build_grid_impl(pd.base, pd, pd.xi0, h);
}

GridPtr make_grid(const Domain& domain, double h) {
    return std::make_shared<const Grid>(build_grid(domain, h));
}

GridPtr make_grid(const PuncturedDomain& pd, double h) {
    return std::make_shared<const Grid>(build_grid(pd, h));
}

// ----------------------------------------------------------- GridField

GridField::GridField(GridPtr grid, MaskSelector sel)
    : grid_(std::move(grid)), sel_(sel), values_(grid_->num_nodes(), 0.0) {}

void GridField::enforce_mask() {
    const auto& m = grid_->mask(sel_);
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!m[i]) values_[i] = 0.0;
}

double GridField::interpolate(const Point& x) const {
    const Grid& g = *grid_;
    const int D = g.dim;
    std::vector<int> base(D);
    std::vector<double> frac(D);
    for (int k = 0; k < D; ++k) {
        double s = (x[k] - g.origin[k]) / g.h + g.anchor_index[k];
        int i = static_cast<int>(std::floor(s));
        i = std::clamp(i, 0, g.counts[k] - 2);
        base[k] = i;
        frac[k] = std::clamp(s - i, 0.0, 1.0);
    }
    double acc = 0.0;
    std::vector<int> idx(D);
    for (int corner = 0; corner < (1 << D); ++corner) {
        double w = 1.0;
        for (int k = 0; k < D; ++k) {
            int bit = (corner >> k) & 1;
            idx[k] = base[k] + bit;
            w *= bit ? frac[k] : 1.0 - frac[k];
        }
        if (w != 0.0) acc += w * values_[g.linear(idx.data())];
    }
    return acc;
}

double GridField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

GridField symmetrize(const GridField& f, const SymmetryGroup& group) {
    if (group.kind == SymmetryGroup::Kind::Trivial || f.grid().is_meridian()) return f;
    const Grid& g = f.grid();
    const int D = g.dim, m = group.m, q = D - m;
    require(q >= 0, "group acts on more coordinates than the grid has");
    for (int k = q; k < D; ++k) {
        require(g.anchor_index[k] * 2 + 1 == g.counts[k] && g.counts[k] == g.counts[q],
                "grid is not symmetric about the anchor in the rotated coordinates");
        require(g.origin[k] == 0.0, "grid anchor is not a fixed point of the group");
    }
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> perms;
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    const int nsign = 1 << m;
    const double weight = 1.0 / static_cast<double>(perms.size() * nsign);

    GridField out(f.grid_ptr(), f.selector());
    std::vector<int> idx(D), img(D);
    for (std::size_t lin = 0; lin < g.num_nodes(); ++lin) {
        if (!g.interior(f.selector(), lin)) continue;
        g.multi_index(lin, idx.data());
        double acc = 0.0;
        for (const auto& p : perms)
            for (int s = 0; s < nsign; ++s) {
                img = idx;
                for (int r = 0; r < m; ++r) {
                    int rel = idx[q + p[r]] - g.anchor_index[q + p[r]];
                    if ((s >> r) & 1) rel = -rel;
                    img[q + r] = g.anchor_index[q + r] + rel;
                }
                acc += f[g.linear(img.data())];
            }
        out.values()[lin] = acc * weight;
    }
    return out;
}

}  // namespace bubblelab
