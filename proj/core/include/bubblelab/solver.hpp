#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <functional>
#include <memory>
#include <vector>

#include "bubblelab/geometry.hpp"

namespace bubblelab {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using LinearOp = std::function<void(const Vec&, Vec&)>;
using ScalarFn = std::function<double(const Point&)>;

/// Edge of an active node whose neighbour lies outside the selected region.
struct BoundaryLink {
    std::int32_t dof;
    double coef;   // c / theta
    Point point;   // boundary intersection, grid coordinates
};

/// Symmetric edge-weighted discretisation of -Laplace with lumped mass,
/// A u = M f + b(g). Curved boundaries enter through the exact crossing
/// fraction theta of each cut edge. Meridian grids carry the rho^{m-1}
/// weight, which makes A and M the full-space quantities.
class Discretization {
public:
    Discretization(GridPtr grid, MaskSelector sel);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    MaskSelector selector() const { return sel_; }
    std::size_t size() const { return static_cast<std::size_t>(A.rows()); }

    SpMat A;
    Vec mass;
    std::vector<BoundaryLink> links;

    /// Boundary contribution for Dirichlet data g (evaluated at ambient points).
    Vec boundary_rhs(const ScalarFn& g) const;
    /// Values of an ambient-space function at the active nodes.
    Vec sample(const ScalarFn& f) const;
    Vec gather(const GridField& f) const;
    GridField scatter(const Vec& v) const;
    Point dof_coords(std::size_t dof) const;
    Point dof_ambient(std::size_t dof) const;
    double energy_inner(const Vec& a, const Vec& b) const { return a.dot(A * b); }

private:
    GridPtr grid_;
    MaskSelector sel_;
};

/// Geometric multigrid V-cycle with Galerkin coarse operators; symmetric
/// (forward Gauss-Seidel before, backward after), so usable as a CG/MINRES preconditioner.
class Multigrid {
public:
    explicit Multigrid(const Discretization& disc, int smooth = 2, std::size_t coarse_max = 4000);

    void apply(const Vec& r, Vec& z) const;
    int num_levels() const { return static_cast<int>(levels_.size()); }
    std::size_t coarse_size() const { return coarse_n_; }

private:
    struct Level {
        SpMat A;
        SpMat P;  // prolongation to this level from the next coarser one
        Vec inv_diag;
    };
    void vcycle(std::size_t l, const Vec& b, Vec& x) const;
    void gs_forward(const Level& L, const Vec& b, Vec& x) const;
    void gs_backward(const Level& L, const Vec& b, Vec& x) const;

    std::vector<Level> levels_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> coarse_;
    std::size_t coarse_n_ = 0;
    int smooth_;
};

struct IterStats {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

IterStats pcg(const SpMat& A, const Vec& b, Vec& x, const LinearOp& prec, double tol, int max_iter);
/// Preconditioned MINRES for symmetric (possibly indefinite) operators; SPD preconditioner.
/// Stops on the preconditioned residual norm relative to its initial value.
IterStats minres(const LinearOp& op, const Vec& b, Vec& x, const LinearOp& prec, double tol,
                 int max_iter);

/// Reusable Poisson solver on one masked region.
class PoissonSolver {
public:
    PoissonSolver(GridPtr grid, MaskSelector sel, double tol = 1e-10, int max_iter = 400);

    const Discretization& disc() const { return disc_; }
    const Multigrid& mg() const { return mg_; }
    double tol() const { return tol_; }

    /// Solve A u = rhs. Throws SolverFailure on budget exhaustion.
    Vec solve(const Vec& rhs, IterStats* stats = nullptr) const;
    /// Solve -Delta u = f with zero boundary: A u = M f.
    Vec solve_source(const Vec& f_at_dofs, IterStats* stats = nullptr) const;
    LinearOp preconditioner() const;

private:
    Discretization disc_;
    Multigrid mg_;
    double tol_;
    int max_iter_;
};

}  // namespace bubblelab
