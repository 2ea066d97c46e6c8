#include "bubblelab/io/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <type_traits>

namespace bubblelab::io {

namespace {

const std::vector<std::pair<ExperimentKind, std::string>>& kind_table() {
    static const std::vector<std::pair<ExperimentKind, std::string>> t{
        {ExperimentKind::VerifyBubble, "verify-bubble"},
        {ExperimentKind::Greens, "greens"},
        {ExperimentKind::Project, "project"},
        {ExperimentKind::CorrectionSweep, "correction-sweep"},
        {ExperimentKind::ReducedEnergySweep, "reduced-energy-sweep"},
        {ExperimentKind::Landscape, "landscape"},
        {ExperimentKind::CriticalPoint, "critical-point"},
        {ExperimentKind::NewtonContinuation, "newton-continuation"},
        {ExperimentKind::HopfCheck, "hopf-check"},
        {ExperimentKind::MeridianCheck, "meridian-check"},
    };
    return t;
}

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Parsers return an error message, empty on success.
std::string parse_real(const std::string& s, double& out) {
    if (s.empty()) return "empty value";
    char* end = nullptr;
    errno = 0;
    out = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(out))
        return "'" + s + "' is not a finite number";
    return "";
}

std::string parse_int(const std::string& s, long& out) {
    if (s.empty()) return "empty value";
    char* end = nullptr;
    errno = 0;
    out = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE) return "'" + s + "' is not an integer";
    return "";
}

std::string parse_u64(const std::string& s, std::uint64_t& out) {
    if (s.empty() || s[0] == '-') return "'" + s + "' is not an unsigned 64-bit integer";
    char* end = nullptr;
    errno = 0;
    out = std::strtoull(s.c_str(), &end, 0);
    if (end != s.c_str() + s.size() || errno == ERANGE) return "'" + s + "' is not an unsigned 64-bit integer";
    return "";
}

std::string parse_bool(const std::string& s, bool& out) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
        out = true;
        return "";
    }
    if (s == "false" || s == "0" || s == "no" || s == "off") {
        out = false;
        return "";
    }
    return "'" + s + "' is not a boolean";
}

std::string parse_reals(const std::string& s, std::vector<double>& out) {
    out.clear();
    if (trim(s).empty()) return "";
    auto parts = split(s, ',');
    for (std::size_t i = 0; i < parts.size(); ++i) {
        double v = 0.0;
        std::string e = parse_real(parts[i], v);
        if (!e.empty()) return "entry " + std::to_string(i) + ": " + e;
        out.push_back(v);
    }
    return "";
}

std::string parse_points(const std::string& s, std::vector<Point>& out) {
    out.clear();
    if (trim(s).empty()) return "";
    auto parts = split(s, ';');
    for (std::size_t i = 0; i < parts.size(); ++i) {
        Point p;
        std::string e = parse_reals(parts[i], p);
        if (!e.empty()) return "point " + std::to_string(i) + ", " + e;
        if (p.empty()) return "point " + std::to_string(i) + " is empty";
        out.push_back(std::move(p));
    }
    return "";
}

std::string join_reals(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_real(v[i]);
    return s;
}

std::string join_points(const std::vector<Point>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + join_reals(v[i]);
    return s;
}

struct KeySpec {
    std::string name;
    std::string doc;
    std::function<std::string(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <class Get>
KeySpec real_key(std::string name, std::string doc, Get field) {
    return {std::move(name), std::move(doc),
            [field](ExperimentConfig& c, const std::string& v) { return parse_real(v, field(c)); },
            [field](const ExperimentConfig& c) { return fmt_real(field(const_cast<ExperimentConfig&>(c))); }};
}

template <class Get>
KeySpec int_key(std::string name, std::string doc, Get field) {
    return {std::move(name), std::move(doc),
            [field](ExperimentConfig& c, const std::string& v) {
                long x = 0;
                using T = std::remove_reference_t<decltype(field(c))>;
                std::string e = parse_int(v, x);
                if (e.empty() && std::is_unsigned_v<T> && x < 0) e = "'" + v + "' must be nonnegative";
                if (e.empty()) field(c) = static_cast<T>(x);
                return e;
            },
            [field](const ExperimentConfig& c) {
                return std::to_string(field(const_cast<ExperimentConfig&>(c)));
            }};
}

template <class Get>
KeySpec bool_key(std::string name, std::string doc, Get field) {
    return {std::move(name), std::move(doc),
            [field](ExperimentConfig& c, const std::string& v) { return parse_bool(v, field(c)); },
            [field](const ExperimentConfig& c) {
                return std::string(field(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
            }};
}

template <class Get>
KeySpec reals_key(std::string name, std::string doc, Get field) {
    return {std::move(name), std::move(doc),
            [field](ExperimentConfig& c, const std::string& v) { return parse_reals(v, field(c)); },
            [field](const ExperimentConfig& c) { return join_reals(field(const_cast<ExperimentConfig&>(c))); }};
}

template <class Get>
KeySpec ints_key(std::string name, std::string doc, Get field) {
    return {std::move(name), std::move(doc),
            [field](ExperimentConfig& c, const std::string& v) -> std::string {
                std::vector<int>& out = field(c);
                out.clear();
                if (trim(v).empty()) return "";
                auto parts = split(v, ',');
                for (std::size_t i = 0; i < parts.size(); ++i) {
                    long x = 0;
                    std::string e = parse_int(parts[i], x);
                    if (!e.empty()) return "entry " + std::to_string(i) + ": " + e;
                    out.push_back(static_cast<int>(x));
                }
                return "";
            },
            [field](const ExperimentConfig& c) {
                std::string s;
                const auto& v = field(const_cast<ExperimentConfig&>(c));
                for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
                return s;
            }};
}

template <class Get>
KeySpec string_key(std::string name, std::string doc, std::vector<std::string> allowed, Get field) {
    return {std::move(name), std::move(doc),
            [field, allowed](ExperimentConfig& c, const std::string& v) -> std::string {
                if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
                    std::string s = "'" + v + "' is not one of";
                    for (const auto& a : allowed) s += " " + a;
                    return s;
                }
                field(c) = v;
                return "";
            },
            [field](const ExperimentConfig& c) { return field(const_cast<ExperimentConfig&>(c)); }};
}

template <class Get>
KeySpec point_key(std::string name, std::string doc, Get field) {
    return {std::move(name), std::move(doc),
            [field](ExperimentConfig& c, const std::string& v) { return parse_reals(v, field(c)); },
            [field](const ExperimentConfig& c) { return join_reals(field(const_cast<ExperimentConfig&>(c))); }};
}

template <class Get>
KeySpec points_key(std::string name, std::string doc, Get field) {
    return {std::move(name), std::move(doc),
            [field](ExperimentConfig& c, const std::string& v) { return parse_points(v, field(c)); },
            [field](const ExperimentConfig& c) { return join_points(field(const_cast<ExperimentConfig&>(c))); }};
}

#define F(expr) [](ExperimentConfig& c) -> auto& { return expr; }

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> t = [] {
        std::vector<KeySpec> k;
        k.push_back({"experiment", "experiment kind (required)",
                     [](ExperimentConfig& c, const std::string& v) -> std::string {
                         auto kind = parse_kind(v);
                         if (!kind) {
                             std::string s = "'" + v + "' is not one of";
                             for (const auto& n : kind_names()) s += " " + n;
                             return s;
                         }
                         c.kind = *kind;
                         return "";
                     },
                     [](const ExperimentConfig& c) { return std::string(to_string(c.kind)); }});
        k.push_back(int_key("n", "ambient dimension (>= 3)", F(c.n)));
        k.push_back(string_key("domain", "base domain", {"ball", "box", "annulus"}, F(c.domain)));
        k.push_back(point_key("domain.center", "ball/annulus centre; default origin", F(c.domain_center)));
        k.push_back(real_key("domain.radius", "ball radius, annulus outer radius", F(c.domain_radius)));
        k.push_back(real_key("domain.inner", "annulus inner radius", F(c.domain_inner)));
        k.push_back(point_key("domain.lo", "box lower corner", F(c.domain_lo)));
        k.push_back(point_key("domain.hi", "box upper corner", F(c.domain_hi)));
        k.push_back(string_key("group", "symmetry group", {"trivial", "orthogonal"}, F(c.group)));
        k.push_back(int_key("group.m", "O(m) acts on the last m coordinates", F(c.group_m)));
        k.push_back(bool_key("meridian", "solve on the rho-meridian section (needs group = orthogonal)",
                             F(c.meridian)));
        k.push_back(string_key("q", "coefficient field Q", {"constant", "affine", "inverse_half_norm"}, F(c.q)));
        k.push_back(real_key("q.c", "constant value / affine offset", F(c.q_c)));
        k.push_back(point_key("q.slope", "affine gradient; default zero", F(c.q_slope)));
        k.push_back(point_key("xi0", "hole centre (ambient); default domain centre", F(c.xi0)));
        k.push_back(real_key("h", "grid spacing", F(c.h)));
        k.push_back(reals_key("h_list", "grid spacings for convergence orders", F(c.h_list)));
        k.push_back(reals_key("eps", "hole radii", F(c.eps)));
        k.push_back(reals_key("d", "scale parameters d (paired with eta)", F(c.d)));
        k.push_back(points_key("eta", "drift vectors, ';'-separated (ambient); default zero", F(c.eta)));
        k.push_back(bool_key("use_critical_point", "newton-continuation: use (d0, eta0) of the landscape",
                             F(c.use_critical_point)));
        k.push_back(real_key("eps_min", "lower end of the asymptotic regime", F(c.eps_min)));
        k.push_back(real_key("eps_max_factor", "upper end of the regime, times dist(xi0, boundary)",
                             F(c.eps_max_factor)));
        k.push_back(real_key("reduction.poisson_tol", "Poisson solves, relative residual", F(c.reduction.poisson_tol)));
        k.push_back(real_key("reduction.correction_tol", "correction step, relative to |V|",
                             F(c.reduction.correction_tol)));
        k.push_back(int_key("reduction.correction_max_iter", "correction iterations", F(c.reduction.correction_max_iter)));
        k.push_back(real_key("reduction.linear_tol", "bordered MINRES, relative", F(c.reduction.linear_tol)));
        k.push_back(int_key("reduction.linear_max_iter", "bordered MINRES iterations", F(c.reduction.linear_max_iter)));
        k.push_back(real_key("reduction.newton_tol", "Newton, relative fixed-point residual", F(c.reduction.newton_tol)));
        k.push_back(int_key("reduction.newton_max_iter", "Newton iterations", F(c.reduction.newton_max_iter)));
        k.push_back(real_key("reduction.zero_threshold", "relative norm that counts as the trivial solution",
                             F(c.reduction.zero_threshold)));
        k.push_back(real_key("reduction.min_hole_cells", "eps >= this many cells", F(c.reduction.min_hole_cells)));
        k.push_back(real_key("reduction.gram_warn_cond", "Gram condition flagged as ill-conditioned",
                             F(c.reduction.gram_warn_cond)));
        k.push_back(bool_key("reduction.refresh_jacobian", "re-linearise at each correction step",
                             F(c.reduction.refresh_jacobian)));
        k.push_back(real_key("reduction.collapse_ratio", "nonlinear ratio below which the branch collapsed",
                             F(c.reduction.collapse_ratio)));
        k.push_back(real_key("quad_tol", "radial quadrature absolute tolerance", F(c.quad_tol)));
        k.push_back(real_key("fd_step_rel", "remainder parameter-derivative step, times delta", F(c.fd_step_rel)));
        k.push_back(real_key("collar_cells", "collar excluded around hole and boundary, in cells", F(c.collar_cells)));
        k.push_back(real_key("eig_floor", "Hessian nondegeneracy floor, relative to the largest eigenvalue",
                             F(c.eig_floor)));
        k.push_back(real_key("hessian_step", "Hessian finite-difference step", F(c.hessian_step)));
        k.push_back(real_key("fd_grad_step", "gradient cross-check step", F(c.fd_grad_step)));
        k.push_back({"checks", "verify-bubble: comma list of identities,kernel,laplacian,newtonian,inequality",
                     [](ExperimentConfig& c, const std::string& v) -> std::string {
                         static const std::vector<std::string> allowed{"identities", "kernel", "laplacian",
                                                                       "newtonian", "inequality"};
                         c.checks.clear();
                         for (const auto& s : split(v, ',')) {
                             if (std::find(allowed.begin(), allowed.end(), s) == allowed.end())
                                 return "'" + s + "' is not a known check";
                             c.checks.push_back(s);
                         }
                         return "";
                     },
                     [](const ExperimentConfig& c) {
                         std::string s;
                         for (std::size_t i = 0; i < c.checks.size(); ++i) s += (i ? "," : "") + c.checks[i];
                         return s;
                     }});
        k.push_back(ints_key("n_list", "dimensions sampled by verify-bubble and critical-point", F(c.n_list)));
        k.push_back(reals_key("newtonian.t", "Newtonian identity at eta = t e_1", F(c.newtonian_t)));
        k.push_back(real_key("inequality.q_max", "largest exponent in the elementary inequality test",
                             F(c.inequality_q_max)));
        k.push_back(points_key("poles", "greens: poles y (ambient); default domain centre", F(c.poles)));
        k.push_back(real_key("scan.d_lo", "landscape d range", F(c.scan_d_lo)));
        k.push_back(real_key("scan.d_hi", "landscape d range", F(c.scan_d_hi)));
        k.push_back(int_key("scan.d_count", "landscape d nodes", F(c.scan_d_count)));
        k.push_back(real_key("scan.t_lo", "landscape t range along -zeta", F(c.scan_t_lo)));
        k.push_back(real_key("scan.t_hi", "landscape t range along -zeta", F(c.scan_t_hi)));
        k.push_back(int_key("scan.t_count", "landscape t nodes", F(c.scan_t_count)));
        k.push_back(ints_key("hopf.dims", "algebra dimensions to check (1,2,4,8)", F(c.hopf_dims)));
        k.push_back(real_key("hopf.s", "Hopf map scale under test", F(c.hopf_s)));
        k.push_back(real_key("hopf.compare_s", "scale expected to break the transfer identity", F(c.hopf_compare_s)));
        k.push_back(real_key("hopf.exponent", "nonlinearity exponent; 0 selects (dimK+3)/(dimK-1)", F(c.hopf_exponent)));
        k.push_back(real_key("fd_step", "central-difference step for pointwise checks", F(c.fd_step)));
        k.push_back(int_key("hopf.samples", "points per algebra for dilation and transfer", F(c.hopf_samples)));
        k.push_back(int_key("meridian.k_max", "k1, k2, m range over 1..k_max", F(c.meridian_k_max)));
        k.push_back(real_key("meridian.exponent", "nonlinearity exponent", F(c.meridian_exponent)));
        k.push_back(int_key("meridian.samples", "sample points in the open quadrant", F(c.meridian_samples)));
        k.push_back(real_key("axis_margin", "minimum distance of meridian samples to the axes", F(c.axis_margin)));
        k.push_back(int_key("samples", "random samples for identity checks", F(c.samples)));
        k.push_back(int_key("pairs", "random pairs for norm multiplicativity", F(c.pairs)));
        k.push_back({"seed", "64-bit seed of the counter-based generator",
                     [](ExperimentConfig& c, const std::string& v) { return parse_u64(v, c.seed); },
                     [](const ExperimentConfig& c) { return std::to_string(c.seed); }});
        k.push_back(real_key("tol.identity", "closed-form identities, relative", F(c.tol.identity)));
        k.push_back(real_key("tol.order_target", "expected Laplacian convergence order", F(c.tol.order_target)));
        k.push_back(real_key("tol.order_band", "allowed deviation of the order", F(c.tol.order_band)));
        k.push_back(real_key("tol.greens", "regular part sup error and Robin value", F(c.tol.greens)));
        k.push_back(real_key("tol.newtonian", "Newtonian identity, absolute", F(c.tol.newtonian)));
        k.push_back(real_key("tol.remainder_ratio", "largest accepted |R| / bound", F(c.tol.remainder_ratio)));
        k.push_back(real_key("tol.slope", "log-log slopes, relative", F(c.tol.slope)));
        k.push_back(real_key("tol.expansion", "energy expansion limit, relative", F(c.tol.expansion)));
        k.push_back(real_key("tol.grad", "critical point gradient, analytic", F(c.tol.grad)));
        k.push_back(real_key("tol.grad_fd", "critical point gradient, finite differences", F(c.tol.grad_fd)));
        k.push_back(real_key("tol.multiplicativity", "|ab| = |a||b|", F(c.tol.multiplicativity)));
        k.push_back(real_key("tol.dilation", "lambda^2 = 4 s^2 |z|^2, relative", F(c.tol.dilation)));
        k.push_back(real_key("tol.transfer", "transfer identity, relative", F(c.tol.transfer)));
        k.push_back(real_key("tol.factor", "mismatch factor at the comparison scale, absolute", F(c.tol.factor)));
        k.push_back(real_key("tol.meridian_equal", "meridian residual when k1 = k2 = m", F(c.tol.meridian_equal)));
        k.push_back(real_key("tol.meridian_generic", "meridian residual floor otherwise", F(c.tol.meridian_generic)));
        std::sort(k.begin(), k.end(), [](const KeySpec& a, const KeySpec& b) { return a.name < b.name; });
        return k;
    }();
    return t;
}

#undef F

const KeySpec* find_key(const std::string& name) {
    for (const auto& k : key_table())
        if (k.name == name) return &k;
    return nullptr;
}

bool is_sweep(ExperimentKind k) {
    return k == ExperimentKind::Project || k == ExperimentKind::CorrectionSweep ||
           k == ExperimentKind::ReducedEnergySweep || k == ExperimentKind::NewtonContinuation;
}

bool needs_domain(ExperimentKind k) {
    return is_sweep(k) || k == ExperimentKind::Greens || k == ExperimentKind::Landscape ||
           k == ExperimentKind::CriticalPoint;
}

void validate(const ExperimentConfig& c, std::vector<std::string>& errs) {
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) errs.push_back(msg);
    };
    auto pos = [&](double v, const std::string& name) { need(v > 0.0, name + " must be positive"); };

    need(c.n >= 3 && c.n <= 12, "n must be in 3..12");
    pos(c.h, "h");
    for (std::size_t i = 0; i < c.h_list.size(); ++i)
        need(c.h_list[i] > 0.0, "h_list[" + std::to_string(i) + "] = " + fmt_real(c.h_list[i]) + " must be positive");
    for (std::size_t i = 0; i < c.eps.size(); ++i)
        need(c.eps[i] > 0.0, "eps[" + std::to_string(i) + "] = " + fmt_real(c.eps[i]) + " must be positive");
    for (std::size_t i = 0; i < c.d.size(); ++i)
        need(c.d[i] > 0.0, "d[" + std::to_string(i) + "] = " + fmt_real(c.d[i]) + " must be positive");
    pos(c.eps_max_factor, "eps_max_factor");
    need(c.eps_min >= 0.0, "eps_min must be nonnegative");
    pos(c.reduction.poisson_tol, "reduction.poisson_tol");
    pos(c.reduction.correction_tol, "reduction.correction_tol");
    pos(c.reduction.linear_tol, "reduction.linear_tol");
    pos(c.reduction.newton_tol, "reduction.newton_tol");
    pos(c.reduction.zero_threshold, "reduction.zero_threshold");
    need(c.reduction.correction_max_iter >= 1, "reduction.correction_max_iter must be >= 1");
    need(c.reduction.linear_max_iter >= 1, "reduction.linear_max_iter must be >= 1");
    need(c.reduction.newton_max_iter >= 1, "reduction.newton_max_iter must be >= 1");
    need(c.reduction.min_hole_cells >= 1.0, "reduction.min_hole_cells must be >= 1");
    pos(c.quad_tol, "quad_tol");
    pos(c.fd_step_rel, "fd_step_rel");
    need(c.collar_cells >= 0.0, "collar_cells must be nonnegative");
    pos(c.eig_floor, "eig_floor");
    pos(c.fd_step, "fd_step");
    need(c.samples >= 1, "samples must be >= 1");
    need(c.pairs >= 1, "pairs must be >= 1");

    if (c.domain == "ball" || c.domain == "annulus") {
        pos(c.domain_radius, "domain.radius");
        need(c.domain_center.empty() || static_cast<int>(c.domain_center.size()) == c.n,
             "domain.center must have n entries");
        if (c.domain == "annulus")
            need(c.domain_inner > 0.0 && c.domain_inner < c.domain_radius,
                 "domain.inner must lie in (0, domain.radius)");
    } else {
        need(static_cast<int>(c.domain_lo.size()) == c.n && static_cast<int>(c.domain_hi.size()) == c.n,
             "box domain needs domain.lo and domain.hi with n entries");
        for (std::size_t i = 0; i < std::min(c.domain_lo.size(), c.domain_hi.size()); ++i)
            need(c.domain_lo[i] < c.domain_hi[i], "domain.lo must be below domain.hi in every coordinate");
    }
    if (c.group == "orthogonal")
        need(c.group_m >= 1 && c.group_m < c.n, "group.m must be in 1..n-1");
    if (c.meridian) {
        need(c.group == "orthogonal", "meridian = true needs group = orthogonal");
        need(c.domain != "box", "the meridian section needs a rotation-invariant domain (ball or annulus)");
    }
    need(static_cast<int>(c.q_slope.size()) <= c.n, "q.slope has more than n entries");
    need(c.xi0.empty() || static_cast<int>(c.xi0.size()) == c.n, "xi0 must have n entries");
    for (std::size_t i = 0; i < c.eta.size(); ++i)
        need(static_cast<int>(c.eta[i].size()) == c.n, "eta[" + std::to_string(i) + "] must have n entries");
    need(c.eta.size() <= 1 || c.eta.size() == c.d.size(), "eta needs one entry or one per d");
    for (std::size_t i = 0; i < c.poles.size(); ++i)
        need(static_cast<int>(c.poles[i].size()) == c.n, "poles[" + std::to_string(i) + "] must have n entries");

    switch (c.kind) {
        case ExperimentKind::VerifyBubble:
            need(!c.checks.empty(), "checks must name at least one check");
            for (int n : c.n_list) need(n >= 3 && n <= 12, "n_list entries must be in 3..12");
            for (std::size_t i = 0; i + 1 < c.h_list.size(); ++i)
                need(c.h_list[i + 1] < c.h_list[i], "h_list must be decreasing");
            if (std::find(c.checks.begin(), c.checks.end(), "laplacian") != c.checks.end())
                need(c.h_list.size() >= 2, "laplacian check needs at least two entries in h_list");
            pos(c.inequality_q_max, "inequality.q_max");
            break;
        case ExperimentKind::Greens:
            break;
        case ExperimentKind::Project:
        case ExperimentKind::CorrectionSweep:
        case ExperimentKind::ReducedEnergySweep:
        case ExperimentKind::NewtonContinuation:
            need(!c.eps.empty(), "eps must list at least one hole radius");
            need(!c.d.empty(), "d must list at least one value");
            if (c.kind == ExperimentKind::CorrectionSweep || c.kind == ExperimentKind::NewtonContinuation)
                need(c.eps.size() >= 2, "a sweep needs at least two eps values");
            if (c.kind == ExperimentKind::ReducedEnergySweep)
                need(c.eps.size() >= 4, "expansion validation needs at least four eps values");
            if (c.kind == ExperimentKind::NewtonContinuation && c.use_critical_point)
                need(c.q == "affine" || c.n >= 4,
                     "the critical point for n = 3 needs a nonconstant affine Q (zeta != 0)");
            break;
        case ExperimentKind::Landscape:
            need(c.scan_d_lo > 0.0 && c.scan_d_lo < c.scan_d_hi, "scan.d_lo must be in (0, scan.d_hi)");
            need(c.scan_t_lo < c.scan_t_hi, "scan.t_lo must be below scan.t_hi");
            need(c.scan_d_count >= 3 && c.scan_t_count >= 3, "scan counts must be >= 3");
            break;
        case ExperimentKind::CriticalPoint:
            need(!c.n_list.empty(), "n_list must be nonempty");
            for (int n : c.n_list) need(n >= 3 && n <= 12, "n_list entries must be in 3..12");
            need(c.domain == "ball", "critical-point uses the closed-form Robin function of a ball");
            for (int n : c.n_list)
                need(static_cast<int>(c.q_slope.size()) <= n, "q.slope is longer than an entry of n_list");
            break;
        case ExperimentKind::HopfCheck:
            need(!c.hopf_dims.empty(), "hopf.dims must be nonempty");
            for (int k : c.hopf_dims) need(k == 1 || k == 2 || k == 4 || k == 8, "hopf.dims entries must be 1, 2, 4 or 8");
            pos(c.hopf_s, "hopf.s");
            pos(c.hopf_compare_s, "hopf.compare_s");
            need(c.hopf_exponent >= 0.0, "hopf.exponent must be nonnegative");
            need(c.hopf_samples >= 1, "hopf.samples must be >= 1");
            break;
        case ExperimentKind::MeridianCheck:
            need(c.meridian_k_max >= 1 && c.meridian_k_max <= 8, "meridian.k_max must be in 1..8");
            need(c.meridian_samples >= 1, "meridian.samples must be >= 1");
            pos(c.meridian_exponent, "meridian.exponent");
            need(c.axis_margin > 0.0 && c.axis_margin < 0.5, "axis_margin must be in (0, 0.5)");
            break;
    }

    if (needs_domain(c.kind) && errs.empty()) {
        try {
            Domain D = c.solve_domain();
            Point x = c.effective_xi0();
            // greens only falls back on xi0 when no poles are given
            const bool uses_xi0 = !(c.kind == ExperimentKind::Greens && !c.poles.empty());
            if (uses_xi0) need(c.make_domain().contains(x), "xi0 must lie inside the domain");
            if (uses_xi0 && c.group == "orthogonal") {
                for (int i = c.n - c.group_m; i < c.n; ++i)
                    need(x[static_cast<std::size_t>(i)] == 0.0, "xi0 must be fixed by the symmetry group");
            }
            c.make_q().validate_on(c.make_domain());
            if (c.kind == ExperimentKind::Greens) {
                for (std::size_t i = 0; i < c.poles.size(); ++i)
                    need(c.make_domain().contains(c.poles[i]), "poles[" + std::to_string(i) + "] must lie inside the domain");
            }
            if (is_sweep(c.kind)) {
                double dist = c.make_domain().boundary_distance(x);
                for (std::size_t i = 0; i < c.eps.size(); ++i)
                    need(c.eps[i] < dist, "eps[" + std::to_string(i) + "] = " + fmt_real(c.eps[i]) +
                                              " does not fit inside the domain around xi0");
            }
            (void)D;
        } catch (const Error& e) {
            errs.push_back(e.what());
        }
    }
}

}  // namespace

const char* to_string(ExperimentKind k) {
    for (const auto& [kind, name] : kind_table())
        if (kind == k) return name.c_str();
    return "unknown";
}

std::optional<ExperimentKind> parse_kind(const std::string& s) {
    for (const auto& [kind, name] : kind_table())
        if (name == s) return kind;
    return std::nullopt;
}

const std::vector<std::string>& kind_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& kn : kind_table()) v.push_back(kn.second);
        return v;
    }();
    return names;
}

Domain ExperimentConfig::make_domain() const {
    Point c = domain_center.empty() ? Point(static_cast<std::size_t>(n), 0.0) : domain_center;
    if (domain == "ball") return Domain::ball(c, domain_radius);
    if (domain == "annulus") return Domain::annulus(c, domain_inner, domain_radius);
    return Domain::box(domain_lo, domain_hi);
}

Domain ExperimentConfig::solve_domain() const {
    Domain D = make_domain();
    if (!meridian) return D;
    return symmetry_reduce(D, make_group(), seed);
}

SymmetryGroup ExperimentConfig::make_group() const {
    if (group == "orthogonal") return SymmetryGroup::orthogonal_last(group_m);
    return SymmetryGroup::trivial();
}

CoefficientField ExperimentConfig::make_q() const { return make_q(n); }

CoefficientField ExperimentConfig::make_q(int dim) const {
    if (q == "affine") {
        Point g(static_cast<std::size_t>(dim), 0.0);
        for (std::size_t i = 0; i < std::min(g.size(), q_slope.size()); ++i) g[i] = q_slope[i];
        return CoefficientField::affine(q_c, g);
    }
    if (q == "inverse_half_norm") return CoefficientField::inverse_half_norm();
    return CoefficientField::constant(q_c);
}

Point ExperimentConfig::effective_xi0() const {
    if (!xi0.empty()) return xi0;
    if (domain == "box") {
        Point c(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (domain_lo[i] + domain_hi[i]);
        return c;
    }
    return domain_center.empty() ? Point(static_cast<std::size_t>(n), 0.0) : domain_center;
}

std::vector<Point> ExperimentConfig::effective_eta() const {
    std::vector<Point> out;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (eta.empty())
            out.emplace_back(static_cast<std::size_t>(n), 0.0);
        else
            out.push_back(eta.size() == 1 ? eta[0] : eta[i]);
    }
    return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::vector<std::string> known_keys() {
    std::vector<std::string> v;
    for (const auto& k : key_table()) v.push_back(k.name);
    return v;
}

std::string suggest_key(const std::string& unknown) {
    std::string best;
    std::size_t best_d = std::string::npos;
    for (const auto& k : key_table()) {  // sorted, so ties resolve alphabetically
        std::size_t d = edit_distance(unknown, k.name);
        if (d < best_d) {
            best_d = d;
            best = k.name;
        }
    }
    return best;
}

ExperimentConfig parse_config(const std::string& text) {
    std::vector<std::string> errs;
    std::map<std::string, std::pair<std::string, int>> values;
    std::string section;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') {
                errs.push_back(where + "unterminated section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            errs.push_back(where + "expected 'key = value'");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!section.empty()) key = section + "." + key;
        if (!find_key(key)) {
            errs.push_back(where + "unknown key '" + key + "' (did you mean '" + suggest_key(key) + "'?)");
            continue;
        }
        if (values.count(key)) {
            errs.push_back(where + "duplicate key '" + key + "' (first on line " +
                           std::to_string(values[key].second) + ")");
            continue;
        }
        values[key] = {val, lineno};
    }
    if (!values.count("experiment")) errs.push_back("missing required key 'experiment'");

    ExperimentConfig cfg;
    // experiment first so later keys may depend on it; n before vectors sized by n.
    for (const auto& [key, vl] : values) {
        std::string e = find_key(key)->set(cfg, vl.first);
        if (!e.empty()) errs.push_back("line " + std::to_string(vl.second) + ": " + key + ": " + e);
    }
    if (errs.empty()) validate(cfg, errs);
    if (!errs.empty()) throw ConfigError(errs);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string canonical_text(const ExperimentConfig& cfg) {
    std::string s;
    for (const auto& k : key_table()) s += k.name + " = " + k.get(cfg) + "\n";
    return s;
}

std::string help_config() {
    ExperimentConfig def;
    std::string s;
    for (const auto& k : key_table()) {
        std::string v = k.get(def);
        if (k.name == "experiment") v = "<required>";
        s += k.name + " = " + v + "\n    " + k.doc + "\n";
    }
    return s;
}

}  // namespace bubblelab::io
