#include "bubblelab/hopf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bubblelab {

void check_algebra_dim(int dim) {
    if (dim != 1 && dim != 2 && dim != 4 && dim != 8)
        throw InvalidArgument("algebra dimension must be 1, 2, 4 or 8");
}

KElement KElement::zero(int dim) {
    check_algebra_dim(dim);
    KElement e;
    e.dim = dim;
    return e;
}

KElement KElement::unit(int dim) {
    KElement e = zero(dim);
    e.c[0] = 1.0;
    return e;
}

KElement KElement::basis(int dim, int k) {
    KElement e = zero(dim);
    if (k < 0 || k >= dim) throw InvalidArgument("basis index out of range");
    e.c[static_cast<std::size_t>(k)] = 1.0;
    return e;
}

KElement KElement::from(int dim, const double* v) {
    KElement e = zero(dim);
    std::copy(v, v + dim, e.c.begin());
    return e;
}

namespace {

void same_dim(const KElement& a, const KElement& b) {
    check_algebra_dim(a.dim);
    if (a.dim != b.dim) throw InvalidArgument("elements belong to different algebras");
}

void cd_conj(const double* a, double* out, int dim) {
    out[0] = a[0];
    for (int i = 1; i < dim; ++i) out[i] = -a[i];
}

void cd_mul(const double* a, const double* b, double* out, int dim) {
    if (dim == 1) {
        out[0] = a[0] * b[0];
        return;
    }
    const int h = dim / 2;
    const double *a1 = a, *a2 = a + h, *c = b, *d = b + h;
    double dc[4], cc[4], t1[4], t2[4];
    cd_conj(d, dc, h);
    cd_conj(c, cc, h);
    cd_mul(a1, c, t1, h);
    cd_mul(dc, a2, t2, h);
    for (int i = 0; i < h; ++i) out[i] = t1[i] - t2[i];
    cd_mul(d, a1, t1, h);
    cd_mul(a2, cc, t2, h);
    for (int i = 0; i < h; ++i) out[h + i] = t1[i] + t2[i];
}

}  // namespace

KElement k_add(const KElement& a, const KElement& b) {
    same_dim(a, b);
    KElement r = KElement::zero(a.dim);
    for (int i = 0; i < a.dim; ++i) r[i] = a[i] + b[i];
    return r;
}

KElement k_sub(const KElement& a, const KElement& b) {
    same_dim(a, b);
    KElement r = KElement::zero(a.dim);
    for (int i = 0; i < a.dim; ++i) r[i] = a[i] - b[i];
    return r;
}

KElement k_scale(const KElement& a, double s) {
    KElement r = KElement::zero(a.dim);
    for (int i = 0; i < a.dim; ++i) r[i] = s * a[i];
    return r;
}

KElement k_mul(const KElement& a, const KElement& b) {
    same_dim(a, b);
    KElement r = KElement::zero(a.dim);
    cd_mul(a.c.data(), b.c.data(), r.c.data(), a.dim);
    return r;
}

KElement k_conj(const KElement& a) {
    check_algebra_dim(a.dim);
    KElement r = KElement::zero(a.dim);
    cd_conj(a.c.data(), r.c.data(), a.dim);
    return r;
}

double k_norm2(const KElement& a) {
    double s = 0.0;
    for (int i = 0; i < a.dim; ++i) s += a[i] * a[i];
    return s;
}

double k_norm(const KElement& a) { return std::sqrt(k_norm2(a)); }

double k_dist(const KElement& a, const KElement& b) { return k_norm(k_sub(a, b)); }

KElement random_element(int dim, CounterRng& rng) {
    KElement e = KElement::zero(dim);
    for (int i = 0; i < dim; ++i) e[i] = rng.normal();
    return e;
}

KElement random_unit(int dim, CounterRng& rng) {
    for (;;) {
        KElement e = random_element(dim, rng);
        double n = k_norm(e);
        if (n > 1e-8) return k_scale(e, 1.0 / n);
    }
}

void HopfMapSpec::validate() const {
    check_algebra_dim(dim);
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("Hopf scale must be positive");
}

Point hopf_map(const HopfMapSpec& spec, const KElement& z1, const KElement& z2) {
    spec.validate();
    if (z1.dim != spec.dim || z2.dim != spec.dim) throw InvalidArgument("element outside the map's algebra");
    KElement w = k_mul(k_conj(z1), z2);
    Point x(static_cast<std::size_t>(spec.dim + 1));
    x[0] = spec.s * (k_norm2(z1) - k_norm2(z2));
    for (int i = 0; i < spec.dim; ++i) x[static_cast<std::size_t>(i + 1)] = 2.0 * spec.s * w[i];
    return x;
}

Point hopf_map(const HopfMapSpec& spec, const Point& z) {
    spec.validate();
    if (static_cast<int>(z.size()) != spec.source_dim()) throw InvalidArgument("point has wrong dimension");
    return hopf_map(spec, KElement::from(spec.dim, z.data()), KElement::from(spec.dim, z.data() + spec.dim));
}

Rational supercritical_exponent(int dimK) {
    if (dimK < 2) throw InvalidArgument("the supercritical exponent needs dimK >= 2");
    return make_rational(dimK + 3, dimK - 1);
}

DilationReport dilation_check(const HopfMapSpec& spec, const Point& z) {
    spec.validate();
    const int N = spec.source_dim(), T = spec.target_dim();
    if (static_cast<int>(z.size()) != N) throw InvalidArgument("point has wrong dimension");
    // Each component is a quadratic form z^T S_k z; S_k by polarisation on basis vectors.
    auto at = [&](const Point& p) { return hopf_map(spec, p); };
    std::vector<Point> diag(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        Point e(static_cast<std::size_t>(N), 0.0);
        e[static_cast<std::size_t>(i)] = 1.0;
        diag[static_cast<std::size_t>(i)] = at(e);
    }
    DilationReport rep;
    rep.jacobian.assign(static_cast<std::size_t>(T), Point(static_cast<std::size_t>(N), 0.0));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            Point S(static_cast<std::size_t>(T));
            if (i == j) {
                S = diag[static_cast<std::size_t>(i)];
            } else {
                Point e(static_cast<std::size_t>(N), 0.0);
                e[static_cast<std::size_t>(i)] = 1.0;
                e[static_cast<std::size_t>(j)] = 1.0;
                Point hij = at(e);
                for (int k = 0; k < T; ++k)
                    S[static_cast<std::size_t>(k)] =
                        0.5 * (hij[static_cast<std::size_t>(k)] - diag[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] -
                               diag[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
            }
            for (int k = 0; k < T; ++k)
                rep.jacobian[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] +=
                    2.0 * S[static_cast<std::size_t>(k)] * z[static_cast<std::size_t>(j)];
        }
    for (int k = 0; k < T; ++k) {
        double lap = 0.0;
        for (int i = 0; i < N; ++i) lap += 2.0 * diag[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        rep.max_laplacian = std::max(rep.max_laplacian, std::abs(lap));
    }
    double z2 = 0.0;
    for (double v : z) z2 += v * v;
    rep.expected_lambda2 = 4.0 * spec.s * spec.s * z2;
    auto inner = [&](int a, int b) {
        double s = 0.0;
        for (int i = 0; i < N; ++i)
            s += rep.jacobian[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] *
                 rep.jacobian[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)];
        return s;
    };
    rep.lambda2 = inner(0, 0);
    for (int a = 0; a < T; ++a)
        for (int b = 0; b < T; ++b)
            rep.conformality_defect =
                std::max(rep.conformality_defect, std::abs(inner(a, b) - (a == b ? rep.lambda2 : 0.0)));
    return rep;
}

namespace {

double fd_laplacian(const FieldFn& f, const Point& y, double h) {
    const double f0 = f(y);
    double s = 0.0;
    Point p = y;
    for (std::size_t i = 0; i < y.size(); ++i) {
        p[i] = y[i] + h;
        double fp = f(p);
        p[i] = y[i] - h;
        double fm = f(p);
        p[i] = y[i];
        s += (fp - 2.0 * f0 + fm) / (h * h);
    }
    return s;
}

double fd_partial(const FieldFn& f, const Point& y, std::size_t i, double h) {
    Point p = y;
    p[i] = y[i] + h;
    double fp = f(p);
    p[i] = y[i] - h;
    double fm = f(p);
    return (fp - fm) / (2.0 * h);
}

double power_nl(double u, double q) { return std::pow(std::abs(u), q - 1.0) * u; }

bool closure_has_origin(const Domain& D) {
    switch (D.kind) {
        case DomainKind::Ball:
            return norm(D.center) <= D.radius;
        case DomainKind::Annulus: {
            const double r = norm(D.center);
            return r >= D.inner && r <= D.radius;
        }
        case DomainKind::Box:
            for (int i = 0; i < D.dim; ++i)
                if (D.lo[static_cast<std::size_t>(i)] > 0.0 || D.hi[static_cast<std::size_t>(i)] < 0.0) return false;
            return true;
    }
    return true;
}

}  // namespace

TransferReport transfer_residual(const HopfMapSpec& spec, const FieldFn& u,
                                 const std::vector<Point>& z_samples, const TransferOptions& opts) {
    spec.validate();
    if (!u) throw InvalidArgument("transfer needs a function u");
    if (!(opts.fd_step > 0.0)) throw InvalidArgument("FD step must be positive");
    const double q = opts.exponent > 0.0 ? opts.exponent
                                         : (spec.dim >= 2 ? supercritical_exponent(spec.dim).value() : 3.0);
    FieldFn v = [&](const Point& z) { return u(hopf_map(spec, z)); };
    TransferReport rep;
    rep.samples = z_samples.size();
    double fsum = 0.0;
    std::size_t fcount = 0;
    for (const Point& z : z_samples) {
        const Point x = hopf_map(spec, z);
        const double rx = norm(x);
        if (!(rx > 0.0)) throw InvalidArgument("sample maps to the origin, where the weight is singular");
        const double ux = u(x);
        if (!std::isfinite(ux)) throw InvalidArgument("u is not evaluable at a sampled image");
        const double lam2 = dilation_check(spec, z).lambda2;
        const double lap_v = fd_laplacian(v, z, opts.fd_step);
        const double lap_u = fd_laplacian(u, x, opts.fd_step);
        const double Nv = power_nl(v(z), q);
        const double g = -lap_u - power_nl(ux, q) / (2.0 * rx);
        const double r = -lap_v - Nv;
        rep.chain_rule_defect =
            std::max(rep.chain_rule_defect, std::abs(lap_v - lam2 * lap_u) / (std::abs(lap_v) + 1.0));
        rep.max_mismatch = std::max(rep.max_mismatch, std::abs(r - lam2 * g) / (std::abs(lap_v) + std::abs(Nv)));
        if (std::abs(Nv) > 1e-8) {
            double factor = (-lap_v - lam2 * g) / Nv;
            fsum += factor;
            ++fcount;
            rep.max_factor_defect = std::max(rep.max_factor_defect, std::abs(factor - 1.0));
        }
    }
    rep.mean_factor = fcount ? fsum / static_cast<double>(fcount) : 0.0;
    rep.pass = rep.max_mismatch <= opts.tol;
    return rep;
}

void MeridianProblem::validate() const {
    if (k1 < 1 || k2 < 1 || m < 1) throw InvalidArgument("k1, k2 and m must be at least 1");
    if (!(exponent > 0.0)) throw InvalidArgument("exponent must be positive");
}

MeridianReport meridian_residual(const MeridianProblem& mp, const FieldFn& u,
                                 const std::vector<Point>& z_samples, double fd_step, double axis_margin) {
    mp.validate();
    if (!u) throw InvalidArgument("meridian check needs a function u");
    const HopfMapSpec spec{1, 0.5};
    FieldFn v = [&](const Point& z) { return u(hopf_map(spec, z)); };
    std::vector<double> res;
    for (const Point& z : z_samples) {
        if (z.size() != 2) throw InvalidArgument("meridian samples are points of the (z1, z2) plane");
        if (z[0] < axis_margin || z[1] < axis_margin) {
            std::ostringstream os;
            os << "sample (" << z[0] << ", " << z[1] << ") is within " << axis_margin << " of an axis";
            throw InvalidArgument(os.str());
        }
        const Point x = hopf_map(spec, z);
        const double vz = v(z), ux = u(x);
        const double R1 = -fd_laplacian(v, z, fd_step) - (mp.k1 - 1) / z[0] * fd_partial(v, z, 0, fd_step) -
                          (mp.k2 - 1) / z[1] * fd_partial(v, z, 1, fd_step) - power_nl(vz, mp.exponent);
        const double R2 = -fd_laplacian(u, x, fd_step) - (mp.m - 1) / x[1] * fd_partial(u, x, 1, fd_step) -
                          power_nl(ux, mp.exponent) / (2.0 * norm(x));
        res.push_back(std::abs(R1 - (z[0] * z[0] + z[1] * z[1]) * R2));
    }
    MeridianReport rep;
    rep.samples = res.size();
    if (res.empty()) return rep;
    rep.max_residual = *std::max_element(res.begin(), res.end());
    rep.min_residual = *std::min_element(res.begin(), res.end());
    std::vector<double> sorted = res;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    rep.median_residual = sorted[sorted.size() / 2];
    return rep;
}

ImageDomain::ImageDomain(const HopfMapSpec& spec, const Domain& D, std::size_t samples,
                         std::uint64_t seed, int fibre_samples)
    : spec_(spec), D_(D) {
    spec_.validate();
    D_.validate();
    if (D_.is_meridian() || D_.dim != spec_.source_dim())
        throw InvalidArgument("source domain must live in R^{2 dim K}");
    if (closure_has_origin(D_))
        throw InvalidArgument("the closure of the source domain contains the origin");
    if (samples == 0) throw InvalidArgument("need at least one sample");

    CounterRng rng(seed, 0x40bf);
    fibre_.push_back(KElement::unit(spec_.dim));
    for (int i = 1; i < fibre_samples; ++i) fibre_.push_back(random_unit(spec_.dim, rng));

    Point blo, bhi;
    D_.bounding_box(blo, bhi);
    lo_.assign(static_cast<std::size_t>(spec_.target_dim()), INFINITY);
    hi_.assign(static_cast<std::size_t>(spec_.target_dim()), -INFINITY);
    r_min_ = INFINITY;
    r_max_ = 0.0;
    std::size_t tries = 0;
    while (images_.size() < samples) {
        if (++tries > 1000 * samples) throw InvalidArgument("source domain is too thin to sample");
        Point z(static_cast<std::size_t>(D_.dim));
        if (D_.kind == DomainKind::Box) {
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.uniform(blo[i], bhi[i]);
        } else {
            // Uniform in the enclosing ball; box rejection is hopeless in R^16.
            double r2 = 0.0;
            for (auto& v : z) {
                v = rng.normal();
                r2 += v * v;
            }
            const double r = D_.radius * std::pow(rng.uniform(), 1.0 / D_.dim) / std::sqrt(r2);
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = D_.center[i] + r * z[i];
        }
        if (!D_.contains(z)) continue;
        Point x = hopf_map(spec_, z);
        for (std::size_t i = 0; i < x.size(); ++i) {
            lo_[i] = std::min(lo_[i], x[i]);
            hi_[i] = std::max(hi_[i], x[i]);
        }
        double r = norm(x);
        r_min_ = std::min(r_min_, r);
        r_max_ = std::max(r_max_, r);
        images_.push_back(std::move(x));
    }
}

Point ImageDomain::lift(const Point& x) const {
    if (static_cast<int>(x.size()) != spec_.target_dim()) throw InvalidArgument("point has wrong dimension");
    const double r = norm(x), s = spec_.s;
    const int k = spec_.dim;
    Point z(static_cast<std::size_t>(2 * k), 0.0);
    const double r1 = std::sqrt(std::max(0.0, (r + x[0]) / (2.0 * s)));
    if (r1 > 1e-300) {
        z[0] = r1;
        for (int i = 0; i < k; ++i) z[static_cast<std::size_t>(k + i)] = x[static_cast<std::size_t>(i + 1)] / (2.0 * s * r1);
    } else {
        z[static_cast<std::size_t>(k)] = std::sqrt(r / s);
    }
    return z;
}

bool ImageDomain::contains(const Point& x) const {
    if (!(norm(x) > 0.0)) return false;
    const int k = spec_.dim;
    const Point z = lift(x);
    const KElement z1 = KElement::from(k, z.data()), z2 = KElement::from(k, z.data() + k);
    // The fibre over x is {(t z1, t z2) : |t| = 1} for real z1; for O this is
    // still a parametrisation because conj(t z1)(t z2) = |t|^2 conj(z1) z2 when z1 is real.
    for (const KElement& t : fibre_) {
        KElement a = k_mul(t, z1), b = k_mul(t, z2);
        Point p(static_cast<std::size_t>(2 * k));
        for (int i = 0; i < k; ++i) {
            p[static_cast<std::size_t>(i)] = a[i];
            p[static_cast<std::size_t>(k + i)] = b[i];
        }
        if (D_.contains(p)) return true;
    }
    return false;
}

ImageDomain image_domain(const HopfMapSpec& spec, const Domain& D, std::size_t samples, std::uint64_t seed) {
    return ImageDomain(spec, D, samples, seed);
}

}  // namespace bubblelab
