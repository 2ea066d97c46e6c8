#include "bubblelab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bubblelab/bubbles.hpp"

namespace bubblelab {

namespace {

constexpr double kMinTheta = 1e-3;

// Meridian node weight: |S^{m-1}| h^q int_cell rho^{m-1} d rho.
double meridian_weight(double rho, double h, int q, int m) {
    double a = std::max(0.0, rho - 0.5 * h);
    double b = rho + 0.5 * h;
    return sphere_area(m) * std::pow(h, q) * (std::pow(b, m) - std::pow(a, m)) / m;
}

}  // namespace

Discretization::Discretization(GridPtr grid, MaskSelector sel) : grid_(std::move(grid)), sel_(sel) {
    const Grid& g = *grid_;
    const int D = g.dim;
    const double h = g.h;
    const bool mer = g.is_meridian();
    const int m = g.meridian_m();
    const int q = D - 1;
    const auto& nodes = g.node_of_dof(sel);
    const auto& dofmap = g.dof_of_node(sel);
    const std::size_t N = nodes.size();

    mass.resize(static_cast<Eigen::Index>(N));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(N * (2 * D + 1));
    std::vector<int> idx(D), nb(D);
    Point xi(D), xn(D);
    for (std::size_t dof = 0; dof < N; ++dof) {
        const std::size_t lin = static_cast<std::size_t>(nodes[dof]);
        g.multi_index(lin, idx.data());
        for (int k = 0; k < D; ++k) xi[k] = g.origin[k] + (idx[k] - g.anchor_index[k]) * h;
        double rho = mer ? xi[D - 1] : 0.0;
        double w = mer ? meridian_weight(rho, h, q, m) : std::pow(h, D);
        mass[static_cast<Eigen::Index>(dof)] = w;
        double diag = 0.0;
        for (int k = 0; k < D; ++k) {
            for (int dir = -1; dir <= 1; dir += 2) {
                int j = idx[k] + dir;
                if (mer && k == D - 1 && j < 0) continue;  // symmetry axis: natural condition
                double c;
                if (!mer) {
                    c = std::pow(h, D - 2);
                } else if (k < D - 1) {
                    c = w / (h * h);
                } else {
                    double rmid = rho + 0.5 * dir * h;
                    c = sphere_area(m) * std::pow(rmid, m - 1) * std::pow(h, q - 1);
                }
                bool inside_array = j >= 0 && j < g.counts[k];
                std::int32_t nd = -1;
                if (inside_array) {
                    nb = idx;
                    nb[k] = j;
                    nd = dofmap[g.linear(nb.data())];
                }
                if (nd >= 0) {
                    trip.emplace_back(static_cast<int>(dof), nd, -c);
                    diag += c;
                } else {
                    xn = xi;
                    xn[k] += dir * h;
                    double theta = std::clamp(g.exit_fraction(sel, xi, xn), kMinTheta, 1.0);
                    Point pb = xi;
                    pb[k] += dir * theta * h;
                    diag += c / theta;
                    links.push_back(BoundaryLink{static_cast<std::int32_t>(dof), c / theta, pb});
                }
            }
        }
        trip.emplace_back(static_cast<int>(dof), static_cast<int>(dof), diag);
    }
    A.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
}

Vec Discretization::boundary_rhs(const ScalarFn& gfun) const {
    Vec b = Vec::Zero(static_cast<Eigen::Index>(size()));
    for (const auto& l : links) b[l.dof] += l.coef * gfun(grid_->domain.ambient(l.point));
    return b;
}

Point Discretization::dof_coords(std::size_t dof) const {
    return grid_->coords(static_cast<std::size_t>(grid_->node_of_dof(sel_)[dof]));
}

Point Discretization::dof_ambient(std::size_t dof) const {
    return grid_->domain.ambient(dof_coords(dof));
}

Vec Discretization::sample(const ScalarFn& f) const {
    Vec v(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) v[static_cast<Eigen::Index>(i)] = f(dof_ambient(i));
    return v;
}

Vec Discretization::gather(const GridField& f) const {
    const auto& nodes = grid_->node_of_dof(sel_);
    Vec v(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = f[static_cast<std::size_t>(nodes[i])];
    return v;
}

GridField Discretization::scatter(const Vec& v) const {
    GridField f(grid_, sel_);
    const auto& nodes = grid_->node_of_dof(sel_);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        f.values()[static_cast<std::size_t>(nodes[i])] = v[static_cast<Eigen::Index>(i)];
    return f;
}

// ------------------------------------------------------------ multigrid

Multigrid::Multigrid(const Discretization& disc, int smooth, std::size_t coarse_max)
    : smooth_(smooth) {
    const Grid& g = disc.grid();
    const int D = g.dim;
    std::vector<int> counts = g.counts;
    // Active lattice nodes of the current level, in increasing linear order.
    std::vector<std::int64_t> active(g.node_of_dof(disc.selector()).begin(),
                                     g.node_of_dof(disc.selector()).end());
    levels_.push_back(Level{disc.A, SpMat(), Vec()});

    auto strides_of = [&](const std::vector<int>& c) {
        std::vector<std::int64_t> s(D, 1);
        for (int k = D - 2; k >= 0; --k) s[k] = s[k + 1] * c[k + 1];
        return s;
    };

    while (static_cast<std::size_t>(levels_.back().A.rows()) > coarse_max) {
        bool ok = true;
        for (int k = 0; k < D; ++k)
            if ((counts[k] - 1) % 2 != 0 || (counts[k] - 1) / 2 < 2) ok = false;
        if (!ok) break;
        std::vector<int> cc(D);
        for (int k = 0; k < D; ++k) cc[k] = (counts[k] - 1) / 2 + 1;
        auto fs = strides_of(counts);
        auto cs = strides_of(cc);
        std::int64_t ctotal = cs[0] * cc[0];

        // Coarse node I is active iff fine node 2I is active.
        std::vector<std::uint8_t> fine_active_flag;
        std::int64_t ftotal = fs[0] * counts[0];
        fine_active_flag.assign(static_cast<std::size_t>(ftotal), 0);
        for (auto lin : active) fine_active_flag[static_cast<std::size_t>(lin)] = 1;
        std::vector<std::int32_t> cdof(static_cast<std::size_t>(ctotal), -1);
        std::vector<std::int64_t> cactive;
        std::vector<int> I(D);
        for (std::int64_t clin = 0; clin < ctotal; ++clin) {
            std::int64_t rem = clin, flin = 0;
            for (int k = 0; k < D; ++k) {
                I[k] = static_cast<int>(rem / cs[k]);
                rem -= I[k] * cs[k];
                flin += 2LL * I[k] * fs[k];
            }
            if (fine_active_flag[static_cast<std::size_t>(flin)]) {
                cdof[static_cast<std::size_t>(clin)] = static_cast<std::int32_t>(cactive.size());
                cactive.push_back(clin);
            }
        }
        if (cactive.empty()) break;

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(active.size() * 4);
        std::vector<int> fi(D);
        for (std::size_t r = 0; r < active.size(); ++r) {
            std::int64_t rem = active[r];
            for (int k = 0; k < D; ++k) {
                fi[k] = static_cast<int>(rem / fs[k]);
                rem -= fi[k] * fs[k];
            }
            for (int corner = 0; corner < (1 << D); ++corner) {
                double w = 1.0;
                std::int64_t clin = 0;
                bool valid = true;
                for (int k = 0; k < D; ++k) {
                    int bit = (corner >> k) & 1;
                    int ck;
                    if (fi[k] % 2 == 0) {
                        if (bit) { valid = false; break; }
                        ck = fi[k] / 2;
                    } else {
                        ck = (fi[k] - 1) / 2 + bit;
                        w *= 0.5;
                    }
                    clin += ck * cs[k];
                }
                if (!valid) continue;
                std::int32_t cd = cdof[static_cast<std::size_t>(clin)];
                if (cd >= 0) trip.emplace_back(static_cast<int>(r), cd, w);
            }
        }
        SpMat P(static_cast<Eigen::Index>(active.size()), static_cast<Eigen::Index>(cactive.size()));
        P.setFromTriplets(trip.begin(), trip.end());
        P.makeCompressed();
        SpMat Pt = P.transpose();
        SpMat AP = levels_.back().A * P;
        SpMat Ac = Pt * AP;
        Ac.makeCompressed();
        levels_.back().P = std::move(P);
        levels_.push_back(Level{std::move(Ac), SpMat(), Vec()});
        counts = cc;
        active = std::move(cactive);
    }
    for (auto& L : levels_) L.inv_diag = L.A.diagonal().cwiseInverse();
    Eigen::SparseMatrix<double> Acol = levels_.back().A;
    coarse_.compute(Acol);
    if (coarse_.info() != Eigen::Success)
        throw SolverFailure("coarse-level factorisation failed", 0.0);
    coarse_n_ = static_cast<std::size_t>(Acol.rows());
}

void Multigrid::gs_forward(const Level& L, const Vec& b, Vec& x) const {
    const SpMat& A = L.A;
    for (Eigen::Index i = 0; i < A.outerSize(); ++i) {
        double s = b[i];
        for (SpMat::InnerIterator it(A, i); it; ++it)
            if (it.col() != i) s -= it.value() * x[it.col()];
        x[i] = s * L.inv_diag[i];
    }
}

void Multigrid::gs_backward(const Level& L, const Vec& b, Vec& x) const {
    const SpMat& A = L.A;
    for (Eigen::Index i = A.outerSize() - 1; i >= 0; --i) {
        double s = b[i];
        for (SpMat::InnerIterator it(A, i); it; ++it)
            if (it.col() != i) s -= it.value() * x[it.col()];
        x[i] = s * L.inv_diag[i];
    }
}

void Multigrid::vcycle(std::size_t l, const Vec& b, Vec& x) const {
    if (l + 1 == levels_.size()) {
        x = coarse_.solve(b);
        return;
    }
    const Level& L = levels_[l];
    x.setZero(b.size());
    for (int s = 0; s < smooth_; ++s) gs_forward(L, b, x);
    Vec r = b - L.A * x;
    Vec rc = L.P.transpose() * r;
    Vec xc;
    vcycle(l + 1, rc, xc);
    x.noalias() += L.P * xc;
    for (int s = 0; s < smooth_; ++s) gs_backward(L, b, x);
}

void Multigrid::apply(const Vec& r, Vec& z) const { vcycle(0, r, z); }

// -------------------------------------------------------- Krylov methods

IterStats pcg(const SpMat& A, const Vec& b, Vec& x, const LinearOp& prec, double tol, int max_iter) {
    IterStats st;
    const double bn = b.norm();
    if (x.size() != b.size()) x = Vec::Zero(b.size());
    if (bn == 0.0) {
        x.setZero();
        st.converged = true;
        return st;
    }
    Vec r = b - A * x;
    Vec z, p, Ap;
    prec(r, z);
    p = z;
    double rz = r.dot(z);
    for (int it = 0; it < max_iter; ++it) {
        st.rel_residual = r.norm() / bn;
        if (st.rel_residual <= tol) {
            st.converged = true;
            st.iterations = it;
            return st;
        }
        Ap = A * p;
        double alpha = rz / p.dot(Ap);
        x.noalias() += alpha * p;
        r.noalias() -= alpha * Ap;
        prec(r, z);
        double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
        st.iterations = it + 1;
    }
    st.rel_residual = (b - A * x).norm() / bn;
    st.converged = st.rel_residual <= tol;
    return st;
}

IterStats minres(const LinearOp& op, const Vec& b, Vec& x, const LinearOp& prec, double tol,
                 int max_iter) {
    IterStats st;
    const Eigen::Index n = b.size();
    if (x.size() != n) x = Vec::Zero(n);
    Vec r1(n), y(n), tmp(n);
    op(x, tmp);
    r1 = b - tmp;
    prec(r1, y);
    double beta1 = r1.dot(y);
    if (beta1 < 0.0) throw SolverFailure("MINRES preconditioner is not positive definite", beta1);
    beta1 = std::sqrt(beta1);
    if (beta1 == 0.0) {
        st.converged = true;
        return st;
    }
    Vec r2 = r1, v(n), w = Vec::Zero(n), w1(n), w2 = Vec::Zero(n);
    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
    double cs = -1.0, sn = 0.0;
    for (int itn = 1; itn <= max_iter; ++itn) {
        v = y / beta;
        op(v, y);
        if (itn >= 2) y -= (beta / oldb) * r1;
        double alfa = v.dot(y);
        y -= (alfa / beta) * r2;
        r1.swap(r2);
        r2 = y;
        prec(r2, y);
        oldb = beta;
        beta = r2.dot(y);
        if (beta < 0.0) throw SolverFailure("MINRES preconditioner is not positive definite", beta);
        beta = std::sqrt(beta);
        double oldeps = epsln;
        double delta = cs * dbar + sn * alfa;
        double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        double gamma = std::max(std::hypot(gbar, beta), 1e-300);
        cs = gbar / gamma;
        sn = beta / gamma;
        double phi = cs * phibar;
        phibar = sn * phibar;
        w1.swap(w2);
        w2.swap(w);
        w = (v - oldeps * w1 - delta * w2) / gamma;
        x.noalias() += phi * w;
        st.iterations = itn;
        st.rel_residual = phibar / beta1;
        if (st.rel_residual <= tol) {
            st.converged = true;
            return st;
        }
        if (beta == 0.0) break;
    }
    st.converged = st.rel_residual <= tol;
    return st;
}

// ---------------------------------------------------------- PoissonSolver

PoissonSolver::PoissonSolver(GridPtr grid, MaskSelector sel, double tol, int max_iter)
    : disc_(std::move(grid), sel), mg_(disc_), tol_(tol), max_iter_(max_iter) {}

LinearOp PoissonSolver::preconditioner() const {
    return [this](const Vec& r, Vec& z) { mg_.apply(r, z); };
}

Vec PoissonSolver::solve(const Vec& rhs, IterStats* stats) const {
    Vec x = Vec::Zero(rhs.size());
    IterStats st = pcg(disc_.A, rhs, x, preconditioner(), tol_, max_iter_);
    if (stats) *stats = st;
    if (!st.converged) {
        std::ostringstream os;
        os << "Poisson solve did not reach tolerance " << tol_ << " in " << st.iterations
           << " iterations (relative residual " << st.rel_residual << ")";
        throw SolverFailure(os.str(), st.rel_residual);
    }
    return x;
}

Vec PoissonSolver::solve_source(const Vec& f, IterStats* stats) const {
    return solve(disc_.mass.cwiseProduct(f), stats);
}

}  // namespace bubblelab
