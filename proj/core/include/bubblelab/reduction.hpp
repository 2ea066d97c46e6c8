#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "bubblelab/bubbles.hpp"
#include "bubblelab/potential.hpp"

namespace bubblelab {

struct ReductionOptions {
    double poisson_tol = 1e-10;
    double correction_tol = 1e-8;  // on ||phi_{k+1} - phi_k|| relative to ||V||
    int correction_max_iter = 40;
    double linear_tol = 1e-7;      // inner MINRES, relative
    int linear_max_iter = 2000;
    double newton_tol = 1e-9;      // on ||u - istar(Q f(u))|| relative to ||u||
    int newton_max_iter = 25;
    double zero_threshold = 1e-8;  // ||u|| below this counts as the trivial solution
    double min_hole_cells = 4.0;
    double gram_warn_cond = 1e8;
    bool refresh_jacobian = false;  // false: the contraction T with L frozen at V
    double collapse_ratio = 0.5;    // int Q f(u) u / |u|^2 below this flags the trivial branch
};

struct ReductionConfig {
    PuncturedDomain pd;
    GridPtr grid;
    CoefficientField Q;
    SymmetryGroup group;
    double d = 1.0;
    Point eta;  // ambient coordinates

    int n() const { return pd.base.ambient_dim(); }
    double delta() const;
    Point xi() const;  // ambient
    void validate() const;
};

struct KernelBasis {
    std::vector<int> indices;      // kernel function indices j that were kept
    std::vector<Vec> fields;       // P_eps psi^j on the Omega_eps dofs
    Eigen::MatrixXd AB;            // A * fields, columnwise
    Eigen::MatrixXd gram;          // fields^T A fields
    Eigen::LDLT<Eigen::MatrixXd> gram_ldlt;
    double condition = 1.0;
    bool ill_conditioned = false;
};

struct CorrectionResult {
    Vec V;
    Vec phi;
    int iterations = 0;
    int linear_iterations = 0;
    double kappa = 0.0;              // largest observed step ratio
    double phi_norm = 0.0;           // discrete H^1_0 norm
    double V_norm = 0.0;
    double orthogonality = 0.0;      // max_j |(phi, B_j)| / (|phi| |B_j|)
    double orth_equation_residual = 0.0;
    double fixed_point_residual = 0.0;
    double min_rayleigh = 0.0;       // smallest |<K0 x, x>| / <A x, x> over the steps
    double gram_condition = 0.0;
    double nonlinear_ratio = 0.0;    // int Q f(u) u / |u|^2 at u = V + phi; 1 at a solution
    bool collapsed = false;          // the iteration settled on u ~ Pi V, not a bubble
    bool converged = false;
};

struct EnergyValue {
    double value = 0.0;
    double residual = 0.0;           // ||u - istar(Q f(u))||
    double relative_residual = 0.0;  // residual / ||u||
};

struct Peak {
    Point location;  // ambient
    double value = 0.0;
};

struct NewtonResult {
    enum class Status { Converged, ZeroSolution, NotConverged };
    Status status = Status::NotConverged;
    Vec u;
    int iterations = 0;
    int linear_iterations = 0;
    std::vector<double> residual_history;  // relative fixed-point residuals
    double residual = 0.0;
    double min_value = 0.0;
    Peak peak;
};

const char* to_string(NewtonResult::Status s);

/// Cached operators for one punctured grid; (d, eta) evaluations are independent and const.
class Reducer {
public:
    Reducer(const PuncturedDomain& pd, GridPtr grid, CoefficientField Q, SymmetryGroup group,
            ReductionOptions opts = {});

    const PoissonSolver& solver() const { return solver_; }
    const Discretization& disc() const { return solver_.disc(); }
    const ReductionOptions& options() const { return opts_; }
    const PuncturedDomain& punctured() const { return pd_; }
    int n() const { return n_; }
    double p() const { return p_; }
    double gamma0() const { return gamma0_; }
    double q0() const { return q0_; }
    const Vec& q_values() const { return qv_; }

    double delta_of(double d) const;
    Point xi_of(double d, const Point& eta) const;
    BubbleParams bubble(double d, const Point& eta) const;

    Vec istar(const Vec& u) const;
    double norm_A(const Vec& v) const;
    std::vector<int> kernel_indices() const;
    KernelBasis kernel_basis(double d, const Point& eta) const;
    Vec project_orthogonal(const Vec& u, const KernelBasis& basis) const;
    Vec ansatz(double d, const Point& eta) const;  // V = gamma0 P_eps U
    CorrectionResult solve_correction(double d, const Point& eta) const;
    EnergyValue energy(const Vec& u) const;
    double reduced_energy(double d, const Point& eta, CorrectionResult* out = nullptr) const;
    NewtonResult newton_solve(const Vec& u0) const;
    Peak locate_peak(const Vec& u) const;

    /// F(u) = A u - M Q f(u).
    Vec residual_vector(const Vec& u) const;

private:
    PuncturedDomain pd_;
    GridPtr grid_;
    CoefficientField Q_;
    SymmetryGroup group_;
    ReductionOptions opts_;
    PoissonSolver solver_;
    int n_;
    double p_;
    double q0_;
    double gamma0_;
    Vec qv_;
};

// Free-function forms over a configuration.
GridField istar(const PuncturedDomain& pd, const GridPtr& grid, const GridField& u,
                double tol = 1e-10);
KernelBasis kernel_basis(const ReductionConfig& cfg, const ReductionOptions& opts = {});
GridField project_orthogonal(const GridField& u, const KernelBasis& basis, const Discretization& disc);
CorrectionResult solve_correction(const ReductionConfig& cfg, double tol, int max_iter);
EnergyValue energy(const PuncturedDomain& pd, const GridPtr& grid, const CoefficientField& Q,
                   const GridField& u);
double reduced_energy(const ReductionConfig& cfg, double tol);
NewtonResult newton_solve(const PuncturedDomain& pd, const GridPtr& grid, const CoefficientField& Q,
                          const GridField& u0, double tol);

struct InequalityReport {
    std::size_t samples = 0;
    double max_ratio_q_ge_1 = 0.0;  // ratio to c (a^{q-1}|b| + |b|^q), c = q 2^{q-1} + 1
    double max_ratio_q_lt_1 = 0.0;  // ratio to c min{|b|^q, a^{q-1}|b|}, c = 2
    double worst_q_ge_1 = 0.0;
    double worst_q_lt_1 = 0.0;
    bool pass = false;
};

double inequality_constant(double q);
InequalityReport elementary_inequality_test(std::size_t samples, double q_max, std::uint64_t seed);

}  // namespace bubblelab
