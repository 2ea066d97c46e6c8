#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "bubblelab/error.hpp"

namespace bubblelab {

using Point = std::vector<double>;

double norm(const Point& x);
double distance(const Point& a, const Point& b);

enum class DomainKind { Ball, Box, Annulus };

/// Bounded domain. When meridian_m > 0 the coordinates are (x_1..x_q, rho)
/// with rho = |zeta| >= 0, zeta in R^m, and the represented set is the
/// O(m)-invariant domain in R^{q+m} whose section is this one.
struct Domain {
    DomainKind kind = DomainKind::Ball;
    int dim = 0;
    Point center;
    double radius = 0.0;  // ball radius, annulus outer radius
    double inner = 0.0;   // annulus inner radius
    Point lo, hi;         // box corners
    int meridian_m = 0;

    static Domain unit_ball(int n);
    static Domain ball(Point c, double r);
    static Domain box(Point lo, Point hi);
    static Domain annulus(Point c, double inner, double outer);

    int ambient_dim() const { return meridian_m > 0 ? dim - 1 + meridian_m : dim; }
    bool is_meridian() const { return meridian_m > 0; }

    void validate() const;
    /// Open-set membership (strict inequalities). Meridian domains accept rho >= 0.
    bool contains(const Point& x) const;
    /// Distance from an interior point to the boundary (the symmetry axis of a
    /// meridian domain is not boundary).
    double boundary_distance(const Point& x) const;
    void bounding_box(Point& lo_out, Point& hi_out) const;
    /// Reference point used to anchor grids.
    Point anchor() const;
    /// For a inside, the fraction t in (0,1] along a->b where the segment
    /// first meets the boundary. Returns 1 if b is not strictly outside.
    double exit_fraction(const Point& a, const Point& b) const;
    /// Map coordinates to a point of R^{ambient_dim}; the identity unless meridian.
    Point ambient(const Point& x) const;
};

struct PuncturedDomain {
    Domain base;
    Point xi0;
    double eps = 0.0;

    bool contains(const Point& x) const;
    double exit_fraction(const Point& a, const Point& b) const;
};

PuncturedDomain puncture(const Domain& domain, const Point& xi0, double eps);

struct SymmetryGroup {
    enum class Kind { Trivial, OrthogonalLast };
    Kind kind = Kind::Trivial;
    int m = 0;

    static SymmetryGroup trivial() { return {}; }
    static SymmetryGroup orthogonal_last(int m);
};

bool is_fixed_point(const SymmetryGroup& group, const Point& x);

/// Meridian reduction. Idempotent; the trivial group returns the input.
Domain symmetry_reduce(const Domain& domain, const SymmetryGroup& group,
                       std::uint64_t seed = 0x5eed);

enum class MaskSelector { Omega, OmegaEps };

/// Uniform grid with node masks for the base domain and the punctured domain.
class Grid {
public:
    int dim = 0;
    double h = 0.0;
    Point origin;
    std::vector<int> counts;
    std::vector<int> anchor_index;
    int levels_hint = 0;
    Domain domain;
    std::optional<PuncturedDomain> punctured;

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t linear(const int* idx) const;
    void multi_index(std::size_t lin, int* idx) const;
    Point coords(std::size_t lin) const;
    Point ambient_coords(std::size_t lin) const { return domain.ambient(coords(lin)); }
    std::size_t stride(int axis) const { return strides_[axis]; }

    bool is_meridian() const { return domain.is_meridian(); }
    int meridian_m() const { return domain.meridian_m; }

    const std::vector<std::uint8_t>& mask(MaskSelector sel) const;
    bool interior(MaskSelector sel, std::size_t lin) const { return mask(sel)[lin] != 0; }
    std::size_t interior_count(MaskSelector sel) const;

    /// Active-node numbering: dof_of_node is -1 for masked-out nodes.
    const std::vector<std::int32_t>& dof_of_node(MaskSelector sel) const;
    const std::vector<std::int64_t>& node_of_dof(MaskSelector sel) const;
    std::size_t num_dofs(MaskSelector sel) const { return node_of_dof(sel).size(); }

    /// Domain membership for the selector, evaluated from coordinates.
    bool member(MaskSelector sel, const Point& x) const;
    double exit_fraction(MaskSelector sel, const Point& a, const Point& b) const;

private:
    friend Grid build_grid_impl(const Domain&, const std::optional<PuncturedDomain>&,
                                const Point&, double);
    std::size_t num_nodes_ = 0;
    std::vector<std::size_t> strides_;
    std::vector<std::uint8_t> mask_omega_, mask_eps_;
    std::vector<std::int32_t> dof_omega_, dof_eps_;
    std::vector<std::int64_t> node_omega_, node_eps_;
};

using GridPtr = std::shared_ptr<const Grid>;

Grid build_grid(const Domain& domain, double h);
/// Grid anchored at xi0 carrying both the Omega and Omega_eps masks.
Grid build_grid(const PuncturedDomain& pd, double h);
GridPtr make_grid(const Domain& domain, double h);
GridPtr make_grid(const PuncturedDomain& pd, double h);

/// Node values on a grid; zero outside the selected mask.
class GridField {
public:
    GridField() = default;
    GridField(GridPtr grid, MaskSelector sel);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    MaskSelector selector() const { return sel_; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t lin) const { return values_[lin]; }

    /// Zero every node outside the mask.
    void enforce_mask();
    /// Multilinear interpolation in grid coordinates.
    double interpolate(const Point& x) const;
    double max_abs() const;

private:
    GridPtr grid_;
    MaskSelector sel_ = MaskSelector::Omega;
    std::vector<double> values_;
};

/// Average over the lattice-preserving subgroup (signed permutations of the
/// last m coordinates about the anchor). No-op on meridian grids.
GridField symmetrize(const GridField& f, const SymmetryGroup& group);

}  // namespace bubblelab
