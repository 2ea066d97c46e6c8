#include "bubblelab/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bubblelab/rng.hpp"

namespace bubblelab {

namespace {

double f_pos(double s, double p) { return s > 0.0 ? std::pow(s, p) : 0.0; }
double fprime_pos(double s, double p) { return s > 0.0 ? p * std::pow(s, p - 1.0) : 0.0; }

void check_eta(const Domain& dom, const SymmetryGroup& group, const Point& eta) {
    const int n = dom.ambient_dim();
    if (static_cast<int>(eta.size()) != n) throw InvalidArgument("eta has wrong dimension");
    if (dom.is_meridian()) {
        for (int i = dom.dim - 1; i < n; ++i)
            if (eta[i] != 0.0) throw InvalidArgument("eta must be fixed by the symmetry group");
    } else if (!is_fixed_point(group, eta)) {
        throw InvalidArgument("eta must be fixed by the symmetry group");
    }
}

}  // namespace

const char* to_string(NewtonResult::Status s) {
    switch (s) {
        case NewtonResult::Status::Converged: return "converged";
        case NewtonResult::Status::ZeroSolution: return "basin-escape";
        case NewtonResult::Status::NotConverged: return "not-converged";
    }
    return "unknown";
}

double ReductionConfig::delta() const {
    const int nn = n();
    return d * std::pow(pd.eps, (nn - 2.0) / (nn - 1.0));
}

Point ReductionConfig::xi() const {
    Point x = pd.base.ambient(pd.xi0);
    double dl = delta();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dl * eta[i];
    return x;
}

void ReductionConfig::validate() const {
    if (!grid || !grid->punctured) throw InvalidArgument("reduction needs a punctured grid");
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidArgument("d must be positive");
    check_eta(pd.base, group, eta);
}

// ---------------------------------------------------------------- Reducer

Reducer::Reducer(const PuncturedDomain& pd, GridPtr grid, CoefficientField Q, SymmetryGroup group,
                 ReductionOptions opts)
    : pd_(pd),
      grid_(std::move(grid)),
      Q_(std::move(Q)),
      group_(group),
      opts_(opts),
      solver_((grid_ && grid_->punctured) ? grid_
                                          : throw InvalidArgument("reduction needs a punctured grid"),
              MaskSelector::OmegaEps, opts.poisson_tol, 500) {
    n_ = pd_.base.ambient_dim();
    if (n_ < 3) throw InvalidArgument("reduction requires ambient dimension n >= 3");
    if (pd_.eps < opts_.min_hole_cells * grid_->h) {
        std::ostringstream os;
        os << "hole radius " << pd_.eps << " is below " << opts_.min_hole_cells
           << " grid cells (h = " << grid_->h << ")";
        throw InvalidArgument(os.str());
    }
    Q_.validate_on(pd_.base);
    p_ = critical_exponent(n_).value();
    q0_ = Q_.eval(pd_.base.ambient(pd_.xi0));
    gamma0_ = gamma0_of(n_, q0_);
    qv_ = disc().sample([&](const Point& x) { return Q_.eval(x); });
}

double Reducer::delta_of(double d) const {
    return d * std::pow(pd_.eps, (n_ - 2.0) / (n_ - 1.0));
}

Point Reducer::xi_of(double d, const Point& eta) const {
    check_eta(pd_.base, group_, eta);
    Point x = pd_.base.ambient(pd_.xi0);
    double dl = delta_of(d);
    for (int i = 0; i < n_; ++i) x[i] += dl * eta[i];
    return x;
}

BubbleParams Reducer::bubble(double d, const Point& eta) const {
    if (!(d > 0.0)) throw InvalidArgument("d must be positive");
    return make_bubble(n_, delta_of(d), xi_of(d, eta));
}

Vec Reducer::istar(const Vec& u) const { return solver_.solve_source(u); }

double Reducer::norm_A(const Vec& v) const { return std::sqrt(std::max(0.0, v.dot(disc().A * v))); }

std::vector<int> Reducer::kernel_indices() const {
    int last;
    if (grid_->is_meridian())
        last = grid_->dim - 1;
    else if (group_.kind == SymmetryGroup::Kind::OrthogonalLast)
        last = n_ - group_.m;
    else
        last = n_;
    std::vector<int> idx;
    for (int j = 0; j <= last; ++j) idx.push_back(j);
    return idx;
}

namespace {

Vec symmetrized(const Discretization& disc, const SymmetryGroup& g, const Vec& v) {
    if (g.kind == SymmetryGroup::Kind::Trivial || disc.grid().is_meridian()) return v;
    return disc.gather(symmetrize(disc.scatter(v), g));
}

}  // namespace

KernelBasis Reducer::kernel_basis(double d, const Point& eta) const {
    BubbleParams b = bubble(d, eta);
    KernelBasis kb;
    kb.indices = kernel_indices();
    const std::size_t k = kb.indices.size();
    const Eigen::Index N = static_cast<Eigen::Index>(disc().size());
    kb.AB.resize(N, static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
        int j = kb.indices[c];
        Vec f = disc().sample([&](const Point& x) { return -psi_laplacian(b, j, x); });
        Vec field = symmetrized(disc(), group_, istar(f));
        kb.AB.col(static_cast<Eigen::Index>(c)) = disc().A * field;
        kb.fields.push_back(std::move(field));
    }
    kb.gram.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c)
            kb.gram(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                kb.fields[r].dot(kb.AB.col(static_cast<Eigen::Index>(c)));
    kb.gram = 0.5 * (kb.gram + kb.gram.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kb.gram);
    double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 1e-14 * hi)) throw SolverFailure("kernel Gram matrix is singular", lo);
    kb.condition = hi / lo;
    kb.ill_conditioned = kb.condition > opts_.gram_warn_cond;
    kb.gram_ldlt.compute(kb.gram);
    return kb;
}

Vec Reducer::project_orthogonal(const Vec& u, const KernelBasis& kb) const {
    Vec c = kb.gram_ldlt.solve(kb.AB.transpose() * u);
    Vec out = u;
    for (std::size_t j = 0; j < kb.fields.size(); ++j) out -= c[static_cast<Eigen::Index>(j)] * kb.fields[j];
    return out;
}

Vec Reducer::ansatz(double d, const Point& eta) const {
    return symmetrized(disc(), group_, gamma0_ * project_dofs(solver_, bubble(d, eta)));
}

Vec Reducer::residual_vector(const Vec& u) const {
    Vec F = disc().A * u;
    for (Eigen::Index i = 0; i < u.size(); ++i) F[i] -= disc().mass[i] * qv_[i] * f_pos(u[i], p_);
    return F;
}

CorrectionResult Reducer::solve_correction(double d, const Point& eta) const {
    CorrectionResult res;
    KernelBasis kb = kernel_basis(d, eta);
    res.gram_condition = kb.condition;
    const Eigen::Index N = static_cast<Eigen::Index>(disc().size());
    const Eigen::Index k = static_cast<Eigen::Index>(kb.fields.size());
    const SpMat& A = disc().A;

    res.V = ansatz(d, eta);
    res.V_norm = norm_A(res.V);
    // Chord iteration: the linearisation is frozen at V.
    Vec kd(N);
    for (Eigen::Index i = 0; i < N; ++i) kd[i] = disc().mass[i] * qv_[i] * fprime_pos(res.V[i], p_);

    LinearOp op = [&](const Vec& x, Vec& y) {
        y.resize(N + k);
        Vec xt = x.head(N);
        y.head(N) = A * xt - kd.cwiseProduct(xt) + kb.AB * x.tail(k);
        y.tail(k) = kb.AB.transpose() * xt;
    };
    LinearOp prec = [&](const Vec& r, Vec& z) {
        z.resize(N + k);
        Vec top;
        solver_.mg().apply(r.head(N), top);
        z.head(N) = top;
        z.tail(k) = kb.gram_ldlt.solve(r.tail(k));
    };

    res.phi = Vec::Zero(N);
    double prev = 0.0;
    res.min_rayleigh = INFINITY;
    const double target = opts_.correction_tol * res.V_norm;
    for (int it = 1; it <= opts_.correction_max_iter; ++it) {
        Vec F = residual_vector(res.V + res.phi);
        if (opts_.refresh_jacobian && it > 1) {
            Vec uu = res.V + res.phi;
            for (Eigen::Index i = 0; i < N; ++i) kd[i] = disc().mass[i] * qv_[i] * fprime_pos(uu[i], p_);
        }
        Vec rhs(N + k);
        rhs.head(N) = -F;
        rhs.tail(k) = -(kb.AB.transpose() * res.phi);
        Vec x = Vec::Zero(N + k);
        IterStats st = minres(op, rhs, x, prec, opts_.linear_tol, opts_.linear_max_iter);
        res.linear_iterations += st.iterations;
        if (!st.converged) throw SolverFailure("bordered linear solve did not converge", st.rel_residual);
        Vec delta = x.head(N);
        res.phi = project_orthogonal(res.phi + symmetrized(disc(), group_, delta), kb);
        res.iterations = it;

        Vec Ad = A * delta;
        double dA = delta.dot(Ad);
        double step = std::sqrt(std::max(0.0, dA));
        if (dA > 0.0) {
            double ray = std::abs(dA - delta.dot(kd.cwiseProduct(delta))) / dA;
            res.min_rayleigh = std::min(res.min_rayleigh, ray);
        }
        if (it >= 2 && prev > 0.0) {
            double ratio = step / prev;
            // Ratios at the inner-solve noise floor say nothing about contraction.
            if (step > 100.0 * target) {
                res.kappa = std::max(res.kappa, ratio);
                if (ratio >= 1.0 && it >= 3) {
                    std::ostringstream os;
                    os << "correction iteration is not contracting (step ratio " << ratio << ")";
                    throw SolverFailure(os.str(), ratio);
                }
            }
        }
        prev = step;
        if (step <= target) {
            res.converged = true;
            break;
        }
    }

    res.phi_norm = norm_A(res.phi);
    Vec Aphi = A * res.phi;
    for (std::size_t j = 0; j < kb.fields.size(); ++j) {
        double bn = std::sqrt(std::max(0.0, kb.gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))));
        if (res.phi_norm > 0.0 && bn > 0.0)
            res.orthogonality = std::max(res.orthogonality, std::abs(Aphi.dot(kb.fields[j])) / (res.phi_norm * bn));
    }
    Vec u = res.V + res.phi;
    Vec w = istar(disc().mass.cwiseInverse().cwiseProduct(residual_vector(u)));
    double un = norm_A(u);
    res.fixed_point_residual = norm_A(w) / un;
    res.orth_equation_residual = norm_A(project_orthogonal(w, kb)) / un;
    double nl = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) nl += disc().mass[i] * qv_[i] * f_pos(u[i], p_) * u[i];
    res.nonlinear_ratio = un > 0.0 ? nl / (un * un) : 0.0;
    res.collapsed = res.nonlinear_ratio < opts_.collapse_ratio;
    return res;
}

EnergyValue Reducer::energy(const Vec& u) const {
    if (u.size() != static_cast<Eigen::Index>(disc().size())) throw InvalidArgument("field has wrong size");
    EnergyValue ev;
    double pot = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i)
        pot += disc().mass[i] * qv_[i] * std::pow(std::abs(u[i]), p_ + 1.0);
    ev.value = 0.5 * u.dot(disc().A * u) - pot / (p_ + 1.0);
    Vec w = istar(disc().mass.cwiseInverse().cwiseProduct(residual_vector(u)));
    ev.residual = norm_A(w);
    double un = norm_A(u);
    ev.relative_residual = un > 0.0 ? ev.residual / un : 0.0;
    return ev;
}

double Reducer::reduced_energy(double d, const Point& eta, CorrectionResult* out) const {
    CorrectionResult cr = solve_correction(d, eta);
    double J = energy(cr.V + cr.phi).value;
    if (out) *out = std::move(cr);
    return J;
}

NewtonResult Reducer::newton_solve(const Vec& u0) const {
    const Eigen::Index N = static_cast<Eigen::Index>(disc().size());
    if (u0.size() != N) throw InvalidArgument("initial guess has wrong size");
    NewtonResult res;
    res.u = u0;
    const double n0 = norm_A(u0);
    auto merit = [&](const Vec& u, Vec* Fout) {
        Vec F = residual_vector(u);
        Vec w = istar(disc().mass.cwiseInverse().cwiseProduct(F));
        if (Fout) *Fout = std::move(F);
        return norm_A(w);
    };
    auto finish_zero = [&]() {
        res.status = NewtonResult::Status::ZeroSolution;
        res.residual = 0.0;
        res.min_value = res.u.size() ? res.u.minCoeff() : 0.0;
        return res;
    };
    if (!(n0 > 0.0)) return finish_zero();

    Vec F;
    double m = merit(res.u, &F);
    for (int it = 0;; ++it) {
        double un = norm_A(res.u);
        if (un <= opts_.zero_threshold * n0) return finish_zero();
        double rel = m / un;
        res.residual_history.push_back(rel);
        res.residual = rel;
        if (rel <= opts_.newton_tol) {
            res.status = NewtonResult::Status::Converged;
            break;
        }
        if (it >= opts_.newton_max_iter) break;
        Vec kd(N);
        for (Eigen::Index i = 0; i < N; ++i)
            kd[i] = disc().mass[i] * qv_[i] * fprime_pos(res.u[i], p_);
        LinearOp jac = [&](const Vec& x, Vec& y) { y = disc().A * x - kd.cwiseProduct(x); };
        Vec step = Vec::Zero(N);
        IterStats st = minres(jac, -F, step, solver_.preconditioner(),
                              std::min(1e-2, 0.1 * rel), opts_.linear_max_iter);
        res.linear_iterations += st.iterations;
        if (!st.converged && st.rel_residual > 0.5)
            throw SolverFailure("Newton Jacobian solve failed", st.rel_residual);
        step = symmetrized(disc(), group_, step);
        double t = 1.0;
        Vec trial, Ft;
        double mt = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 12; ++ls, t *= 0.5) {
            trial = res.u + t * step;
            mt = merit(trial, &Ft);
            if (mt < (1.0 - 1e-4 * t) * m) {
                accepted = true;
                break;
            }
        }
        res.iterations = it + 1;
        if (!accepted) break;
        res.u = std::move(trial);
        F = std::move(Ft);
        m = mt;
    }
    res.min_value = res.u.minCoeff();
    res.peak = locate_peak(res.u);
    return res;
}

Peak Reducer::locate_peak(const Vec& u) const {
    if (u.size() == 0) throw InvalidArgument("empty field");
    const Grid& g = *grid_;
    const auto& nodes = g.node_of_dof(MaskSelector::OmegaEps);
    const auto& dofs = g.dof_of_node(MaskSelector::OmegaEps);
    Eigen::Index best = 0;
    u.maxCoeff(&best);
    const std::size_t lin = static_cast<std::size_t>(nodes[static_cast<std::size_t>(best)]);
    std::vector<int> idx(g.dim);
    g.multi_index(lin, idx.data());
    Point loc = g.coords(lin);
    double f0 = u[best];
    double val = f0;
    for (int ax = 0; ax < g.dim; ++ax) {
        auto value_at = [&](int off, double& out) {
            int j = idx[ax] + off;
            if (g.is_meridian() && ax == g.dim - 1 && j < 0) j = -j;  // even reflection at the axis
            if (j < 0 || j >= g.counts[ax]) return false;
            std::vector<int> jj = idx;
            jj[ax] = j;
            std::int32_t dof = dofs[g.linear(jj.data())];
            if (dof < 0) return false;
            out = u[dof];
            return true;
        };
        double fm, fp;
        if (!value_at(-1, fm) || !value_at(1, fp)) continue;
        double curv = fm - 2.0 * f0 + fp;
        if (!(curv < 0.0)) continue;
        double off = std::clamp(0.5 * (fm - fp) / curv, -0.5, 0.5);
        loc[ax] += off * g.h;
        val += -0.25 * (fm - fp) * off + 0.0;
    }
    Peak pk;
    pk.location = g.domain.ambient(loc);
    pk.value = std::max(val, f0);
    return pk;
}

// ---------------------------------------------------------------- free functions

GridField istar(const PuncturedDomain& pd, const GridPtr& grid, const GridField& u, double tol) {
    if (!grid || !grid->punctured) throw InvalidArgument("istar needs a punctured grid");
    (void)pd;
    PoissonSolver s(grid, MaskSelector::OmegaEps, tol, 500);
    return s.disc().scatter(s.solve_source(s.disc().gather(u)));
}

KernelBasis kernel_basis(const ReductionConfig& cfg, const ReductionOptions& opts) {
    cfg.validate();
    Reducer r(cfg.pd, cfg.grid, cfg.Q, cfg.group, opts);
    return r.kernel_basis(cfg.d, cfg.eta);
}

GridField project_orthogonal(const GridField& u, const KernelBasis& kb, const Discretization& disc) {
    Vec v = disc.gather(u);
    Vec c = kb.gram_ldlt.solve(kb.AB.transpose() * v);
    for (std::size_t j = 0; j < kb.fields.size(); ++j) v -= c[static_cast<Eigen::Index>(j)] * kb.fields[j];
    return disc.scatter(v);
}

CorrectionResult solve_correction(const ReductionConfig& cfg, double tol, int max_iter) {
    cfg.validate();
    ReductionOptions o;
    o.correction_tol = tol;
    o.correction_max_iter = max_iter;
    Reducer r(cfg.pd, cfg.grid, cfg.Q, cfg.group, o);
    return r.solve_correction(cfg.d, cfg.eta);
}

EnergyValue energy(const PuncturedDomain& pd, const GridPtr& grid, const CoefficientField& Q,
                   const GridField& u) {
    Reducer r(pd, grid, Q, SymmetryGroup::trivial());
    return r.energy(r.disc().gather(u));
}

double reduced_energy(const ReductionConfig& cfg, double tol) {
    cfg.validate();
    ReductionOptions o;
    o.correction_tol = tol;
    Reducer r(cfg.pd, cfg.grid, cfg.Q, cfg.group, o);
    return r.reduced_energy(cfg.d, cfg.eta);
}

NewtonResult newton_solve(const PuncturedDomain& pd, const GridPtr& grid, const CoefficientField& Q,
                          const GridField& u0, double tol) {
    ReductionOptions o;
    o.newton_tol = tol;
    Reducer r(pd, grid, Q, SymmetryGroup::trivial(), o);
    return r.newton_solve(r.disc().gather(u0));
}

// ---------------------------------------------------------------- elementary inequality

double inequality_constant(double q) {
    if (!(q > 0.0)) throw InvalidArgument("q must be positive");
    return q >= 1.0 ? q * std::pow(2.0, q - 1.0) + 1.0 : 2.0;
}

namespace {

double inequality_ratio(double a, double b, double q) {
    double lhs = std::abs(std::pow(std::abs(a + b), q) - std::pow(a, q));
    double ab = std::abs(b);
    double rhs;
    if (q >= 1.0) {
        rhs = std::pow(a, q - 1.0) * ab + std::pow(ab, q);
    } else {
        rhs = std::pow(ab, q);
        if (a > 0.0) rhs = std::min(rhs, std::pow(a, q - 1.0) * ab);
    }
    rhs *= inequality_constant(q);
    if (rhs == 0.0) return lhs == 0.0 ? 0.0 : INFINITY;
    return lhs / rhs;
}

}  // namespace

InequalityReport elementary_inequality_test(std::size_t samples, double q_max, std::uint64_t seed) {
    if (!(q_max >= 1.0)) throw InvalidArgument("q_max must be at least 1");
    InequalityReport rep;
    rep.samples = samples;
    CounterRng rng(seed, 0x1eaf);
    for (std::size_t i = 0; i < samples; ++i) {
        // Log-uniform magnitudes cover both |b| << a and |b| >> a.
        double a = (i % 16 == 0) ? 0.0 : std::pow(10.0, rng.uniform(-4.0, 4.0));
        double b = std::pow(10.0, rng.uniform(-4.0, 4.0)) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        if (i % 7 == 0) b = -a * rng.uniform(0.0, 2.0);  // near cancellation a + b ~ 0
        double q1 = rng.uniform(1.0, q_max);
        double q0 = rng.uniform(1e-3, 1.0);
        double r1 = inequality_ratio(a, b, q1);
        double r0 = inequality_ratio(a, b, q0);
        if (r1 > rep.max_ratio_q_ge_1) {
            rep.max_ratio_q_ge_1 = r1;
            rep.worst_q_ge_1 = q1;
        }
        if (r0 > rep.max_ratio_q_lt_1) {
            rep.max_ratio_q_lt_1 = r0;
            rep.worst_q_lt_1 = q0;
        }
    }
    rep.pass = rep.max_ratio_q_ge_1 <= 1.0 && rep.max_ratio_q_lt_1 <= 1.0;
    return rep;
}

}  // namespace bubblelab
