#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "bubblelab/bubbles.hpp"
#include "bubblelab/geometry.hpp"
#include "bubblelab/rng.hpp"

namespace bubblelab {

/// Element of R, C, H or O (dim 1, 2, 4, 8); coordinate 0 is the real part.
struct KElement {
    int dim = 1;
    std::array<double, 8> c{};

    static KElement zero(int dim);
    static KElement unit(int dim);                  // the multiplicative identity
    static KElement basis(int dim, int k);          // e_k
    static KElement from(int dim, const double* v);

    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
};

void check_algebra_dim(int dim);

KElement k_add(const KElement& a, const KElement& b);
KElement k_sub(const KElement& a, const KElement& b);
KElement k_scale(const KElement& a, double s);
/// Cayley-Dickson product (a,b)(c,d) = (ac - conj(d) b, d a + b conj(c)).
KElement k_mul(const KElement& a, const KElement& b);
KElement k_conj(const KElement& a);
double k_norm2(const KElement& a);
double k_norm(const KElement& a);
double k_dist(const KElement& a, const KElement& b);

KElement random_element(int dim, CounterRng& rng);
KElement random_unit(int dim, CounterRng& rng);

struct HopfMapSpec {
    int dim = 2;     // algebra dimension
    double s = 0.5;  // scale: h = s (|z1|^2 - |z2|^2, 2 conj(z1) z2)

    int source_dim() const { return 2 * dim; }
    int target_dim() const { return dim + 1; }
    void validate() const;
};

Point hopf_map(const HopfMapSpec& spec, const KElement& z1, const KElement& z2);
/// Same map on z = (z1, z2) packed in R^{2 dim}.
Point hopf_map(const HopfMapSpec& spec, const Point& z);

/// Exponent (dimK + 3)/(dimK - 1) of the problem upstairs; equals the critical
/// exponent of dimension dimK + 1 downstairs. dimK >= 2.
Rational supercritical_exponent(int dimK);

struct DilationReport {
    double lambda2 = 0.0;            // common squared row norm of the Jacobian
    double expected_lambda2 = 0.0;   // 4 s^2 |z|^2
    double conformality_defect = 0.0;// max |<grad h_i, grad h_j> - lambda2 delta_ij|
    double max_laplacian = 0.0;      // max |Delta h_i|
    std::vector<Point> jacobian;     // rows
};

/// Exact polynomial Jacobian and Laplacians of the quadratic components.
DilationReport dilation_check(const HopfMapSpec& spec, const Point& z);

using FieldFn = std::function<double(const Point&)>;

struct TransferOptions {
    double exponent = 0.0;  // power q in N(u) = |u|^{q-1} u; 0 selects the supercritical exponent
    double fd_step = 1e-4;
    double tol = 1e-5;
};

struct TransferReport {
    std::size_t samples = 0;
    double chain_rule_defect = 0.0;   // max |Delta(u o h) - lambda2 (Delta u)(h)|
    double max_mismatch = 0.0;        // max |r(z) - lambda2 g(h(z))|, r and g the two residuals
    double mean_factor = 0.0;         // mean of the weight that N(v) actually carries
    double max_factor_defect = 0.0;   // max |factor - 1|
    bool pass = false;
};

/// r(z) = -Delta v - N(v) with v = u o h, against lambda2(z) g(h(z)) where
/// g(x) = -Delta u - N(u)/(2|x|). Laplacians by central differences.
TransferReport transfer_residual(const HopfMapSpec& spec, const FieldFn& u,
                                 const std::vector<Point>& z_samples, const TransferOptions& opts = {});

struct MeridianProblem {
    int k1 = 1;
    int k2 = 1;
    int m = 1;
    double exponent = 3.0;  // f(s) = |s|^{q-1} s
    void validate() const;
};

struct MeridianReport {
    std::size_t samples = 0;
    double max_residual = 0.0;
    double median_residual = 0.0;
    double min_residual = 0.0;
};

/// Residual of v = u o h_R (s = 1/2) in the (k1, k2) meridian equation, minus
/// |z|^2 times the residual of u in the m meridian equation at h_R(z).
MeridianReport meridian_residual(const MeridianProblem& mp, const FieldFn& u_meridian,
                                 const std::vector<Point>& z_samples, double fd_step = 1e-4,
                                 double axis_margin = 1e-2);

/// U = h(D) described by pushed-forward samples and a fibre-sampling membership oracle.
class ImageDomain {
public:
    ImageDomain(const HopfMapSpec& spec, const Domain& D, std::size_t samples, std::uint64_t seed,
                int fibre_samples = 64);

    const std::vector<Point>& images() const { return images_; }
    const Point& lo() const { return lo_; }
    const Point& hi() const { return hi_; }
    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }
    /// A preimage point with real z1.
    Point lift(const Point& x) const;
    bool contains(const Point& x) const;

private:
    HopfMapSpec spec_;
    Domain D_;
    std::vector<Point> images_;
    std::vector<KElement> fibre_;
    Point lo_, hi_;
    double r_min_ = 0.0, r_max_ = 0.0;
};

ImageDomain image_domain(const HopfMapSpec& spec, const Domain& D, std::size_t samples,
                         std::uint64_t seed);

}  // namespace bubblelab
