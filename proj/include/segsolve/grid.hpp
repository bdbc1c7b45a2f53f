#ifndef SEGSOLVE_GRID_HPP
#define SEGSOLVE_GRID_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace segsolve {

/// Thrown for malformed problem/config data (degenerate grids, bad parameters).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown when a numerical procedure fails to converge.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class GridShape { rectangle, disk };

struct GridSpec {
    int nx = 0;
    int ny = 0;
    double extent = 1.0;  // length of the x side; spacing is extent/(nx-1) on both axes
    GridShape shape = GridShape::rectangle;
    double disk_radius = -1.0;  // <0: extent/2
    double disk_cx = -1.0;      // <0: extent/2
    double disk_cy = -1.0;
};

// Node value marking "not defined here" (masked-out or non-interior results).
inline constexpr double undefined_value = std::numeric_limits<double>::quiet_NaN();
inline bool is_defined(double v) { return v == v; }

/// Rectangular node lattice with interior/boundary masks and an optional disk mask.
/// Node (i,j) sits at (origin + i*h, origin + j*h); linear index j*nx + i.
/// Cells are indexed by their SW corner; a cell enters quadrature only when all
/// four corners are masked in (disk rim cells are dropped).
class Grid {
public:
    static Grid build(const GridSpec& spec);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double h() const { return h_; }
    GridShape shape() const { return shape_; }
    double extent_x() const { return h_ * (nx_ - 1); }
    double extent_y() const { return h_ * (ny_ - 1); }
    double disk_radius() const { return radius_; }
    double disk_cx() const { return cx_; }
    double disk_cy() const { return cy_; }
    std::uint64_t id() const { return id_; }

    int num_nodes() const { return nx_ * ny_; }
    int node(int i, int j) const { return j * nx_ + i; }
    int node_i(int n) const { return n % nx_; }
    int node_j(int n) const { return n / nx_; }
    double x(int n) const { return h_ * (n % nx_); }
    double y(int n) const { return h_ * (n / nx_); }

    bool masked_in(int n) const { return mask_[n] != 0; }
    bool interior(int n) const { return mask_[n] == 2; }
    bool boundary(int n) const { return mask_[n] == 1; }

    const std::vector<int>& interior_nodes() const { return interior_; }
    const std::vector<int>& boundary_nodes() const { return bdry_; }

    int num_cells() const { return (nx_ - 1) * (ny_ - 1); }
    int cell(int ci, int cj) const { return cj * (nx_ - 1) + ci; }
    bool cell_active(int c) const { return cell_active_[c] != 0; }
    /// Linear node indices of active cells' SW corners, for quadrature loops.
    const std::vector<int>& active_cells() const { return active_cells_; }

    /// Quadrature weight of a node: (#incident active cells) * h^2 / 4.
    double node_weight(int n) const { return node_weight_[n]; }

    /// Distance from a point to the domain boundary (0 outside).
    double distance_to_boundary(double px, double py) const;

private:
    int nx_ = 0, ny_ = 0;
    double h_ = 0;
    GridShape shape_ = GridShape::rectangle;
    double radius_ = 0, cx_ = 0, cy_ = 0;
    std::uint64_t id_ = 0;
    std::vector<std::uint8_t> mask_;        // 0 out, 1 boundary, 2 interior
    std::vector<std::uint8_t> cell_active_;
    std::vector<int> interior_, bdry_, active_cells_;
    std::vector<double> node_weight_;
};

/// One scalar value per node; undefined_value at masked-out nodes.
struct Field {
    std::vector<double> v;
    std::uint64_t grid_id = 0;

    Field() = default;
    Field(const Grid& g, double init = 0.0);

    double& operator[](int n) { return v[n]; }
    double operator[](int n) const { return v[n]; }
    int size() const { return static_cast<int>(v.size()); }
};

void require_same_grid(const Grid& g, const Field& f);
void require_same_grid(const Field& a, const Field& b);

Grid build_grid(const GridSpec& spec);

/// 5-point Laplacian at interior nodes; undefined elsewhere.
Field laplacian5(const Grid& g, const Field& f);

/// Per-cell d^2-weighted squared gradient times cell area:
/// avg(d^2 over corners) * ((f_SE-f_SW)^2 + (f_NW-f_SW)^2)  (the h's cancel).
/// Inactive cells carry 0. Summing gives twice the Dirichlet part of the energy.
std::vector<double> gradient_energy_density(const Grid& g, const Field& f, const Field& d);
std::vector<double> gradient_energy_density(const Grid& g, const Field& f);  // d == 1

/// Cell-sum quadrature: sum over active cells of h^2 * mean of the 4 corners.
double integrate(const Grid& g, const Field& f);

/// Sum of unit-d cell gradient energies over cells whose centers lie in B((x0,y0), r).
double ball_dirichlet_integral(const Grid& g, const Field& f, double x0, double y0, double r);

}  // namespace segsolve

#endif
