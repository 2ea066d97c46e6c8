#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bubblelab/bubbles.hpp"
#include "bubblelab/geometry.hpp"
#include "bubblelab/reduction.hpp"

namespace bubblelab::io {

enum class ExperimentKind {
    VerifyBubble,
    Greens,
    Project,
    CorrectionSweep,
    ReducedEnergySweep,
    Landscape,
    CriticalPoint,
    NewtonContinuation,
    HopfCheck,
    MeridianCheck
};

const char* to_string(ExperimentKind k);
std::optional<ExperimentKind> parse_kind(const std::string& s);
const std::vector<std::string>& kind_names();

/// Acceptance thresholds each experiment judges itself against.
struct Tolerances {
    double identity = 1e-12;       // closed-form residuals, relative
    double order_target = 2.0;     // discrete Laplacian convergence order
    double order_band = 0.2;
    double greens = 1e-3;          // sup |H_h - H| and |H(pole,pole) - H|
    double newtonian = 1e-6;
    double remainder_ratio = 10.0; // |R| / bound
    double slope = 0.10;           // relative, log-log slopes
    double expansion = 0.05;
    double grad = 1e-10;
    double grad_fd = 1e-6;
    double multiplicativity = 1e-12;
    double dilation = 1e-10;
    double transfer = 1e-5;
    double factor = 0.05;          // |mean factor - 2 s| at the comparison scale
    double meridian_equal = 1e-5;
    double meridian_generic = 1e-3;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::VerifyBubble;

    // Problem.
    int n = 3;
    std::string domain = "ball";  // ball | box | annulus
    Point domain_center;          // default: origin
    double domain_radius = 1.0;
    double domain_inner = 0.5;
    Point domain_lo, domain_hi;
    std::string group = "trivial";  // trivial | orthogonal
    int group_m = 0;
    bool meridian = false;          // solve on the rho-meridian section
    std::string q = "constant";     // constant | affine | inverse_half_norm
    double q_c = 1.0;
    Point q_slope;                  // zero-padded to n entries
    Point xi0;                      // default: domain centre

    // Discretisation and sweep.
    double h = 1.0 / 32.0;
    std::vector<double> h_list{1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0};
    std::vector<double> eps;
    std::vector<double> d{1.0};
    std::vector<Point> eta;         // default: one zero vector
    bool use_critical_point = true; // newton-continuation: (d0, eta0) from the landscape
    double eps_min = 0.0;           // effective lower end is max(eps_min, min_hole_cells h)
    double eps_max_factor = 0.1;    // upper end is eps_max_factor dist(xi0, boundary)

    ReductionOptions reduction;
    double quad_tol = 1e-10;
    double fd_step_rel = 1e-4;
    double collar_cells = 2.0;
    double eig_floor = 1e-8;
    double hessian_step = 1e-5;
    double fd_grad_step = 1e-6;

    // verify-bubble.
    std::vector<std::string> checks{"identities", "kernel", "laplacian"};
    std::vector<int> n_list{3, 4, 5, 6};
    std::vector<double> newtonian_t{0.0, 1.0, 2.0};  // eta = t e_1
    double inequality_q_max = 4.0;

    // greens.
    std::vector<Point> poles;  // default: domain centre

    // landscape.
    double scan_d_lo = 0.25, scan_d_hi = 3.0;
    int scan_d_count = 56;
    double scan_t_lo = -1.0, scan_t_hi = 1.0;
    int scan_t_count = 41;

    // hopf-check and meridian-check.
    std::vector<int> hopf_dims{1, 2, 4, 8};
    double hopf_s = 0.5;
    double hopf_compare_s = 1.0;
    double hopf_exponent = 0.0;  // 0: supercritical exponent of the algebra (3 for R)
    double fd_step = 1e-4;
    int hopf_samples = 64;
    int meridian_k_max = 3;
    double meridian_exponent = 3.0;
    int meridian_samples = 48;
    double axis_margin = 1e-2;

    std::size_t samples = 10000;
    std::size_t pairs = 100000;
    std::uint64_t seed = 0x5eed;

    Tolerances tol;

    Domain make_domain() const;          // the full domain in R^n
    Domain solve_domain() const;         // meridian section when requested
    SymmetryGroup make_group() const;
    CoefficientField make_q() const;
    /// q.slope is zero-padded to dim entries.
    CoefficientField make_q(int dim) const;
    Point effective_xi0() const;         // ambient
    std::vector<Point> effective_eta() const;
};

/// Parse key = value text. Throws ConfigError listing every violation.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Every key with its canonical value, sorted; the config hash is taken over this.
std::string canonical_text(const ExperimentConfig& cfg);
/// Table of all keys with defaults and one-line descriptions.
std::string help_config();
std::vector<std::string> known_keys();

std::size_t edit_distance(const std::string& a, const std::string& b);
/// Nearest known key by edit distance (ties: alphabetical).
std::string suggest_key(const std::string& unknown);

}  // namespace bubblelab::io
