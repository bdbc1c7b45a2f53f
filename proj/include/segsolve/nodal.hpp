#ifndef SEGSOLVE_NODAL_HPP
#define SEGSOLVE_NODAL_HPP

#include <array>
#include <span>
#include <vector>

#include "segsolve/segregation.hpp"

namespace segsolve {

struct Polyline {
    int label_a = -1, label_b = -1;  // density indices (0-based), a < b
    std::vector<std::array<double, 2>> points;
    bool closed = false;
};

struct MultiplePoint {
    double x = 0, y = 0;
    int multiplicity = 0;
    std::vector<double> sector_angles;  // radians, sum to 2*pi
    double exponent = 0;
    double theta0 = 0;
    std::vector<std::array<double, 2>> gradient_decay;  // (radius, max |grad U| on annulus)
};

struct NodalReport {
    std::vector<Polyline> interfaces;
    std::vector<MultiplePoint> multiple_points;
    std::vector<std::vector<int>> zero_regions;  // connected node sets with all u_i <= tol
    std::vector<char> support_nonempty;
};

/// Locates sub-cell interface crossings of u_i - u_j on cells where exactly the
/// pair (i,j) is locally active, chains them into polylines, and collects the
/// zero regions. Polylines stop one cell short of the domain boundary.
NodalReport extract_interfaces(const Grid& g, const State& s, double tol);

/// Clusters interface endpoints within `radius` into candidate multiple points;
/// keeps clusters where at least three densities are active nearby.
void locate_multiple_points(NodalReport& report, const Grid& g, const State& s, double radius,
                            double tol);

struct JunctionAnalysis {
    std::vector<double> sector_angles;
    double exponent = 0;
    double theta0 = 0;                                  // phase of the |cos| profile
    std::vector<std::array<double, 2>> gradient_decay;  // per radius, max |grad U| on annulus
};

/// Fits the radial power and angular structure of U = sum u_i around a multiple
/// point: sector angles on the largest circle, log-log slope of circle means,
/// best-phase |cos((h/2)(theta + theta0))| fit, and gradient decay per annulus.
JunctionAnalysis junction_analysis(const Grid& g, const State& s, double x0, double y0,
                                   int multiplicity, std::span<const double> radii);

struct AdjacencyGraph {
    struct Edge {
        int i = -1, j = -1;
        std::vector<int> polylines;  // indices into the report's interface list
    };
    std::vector<int> vertices;            // densities with nonempty support
    std::vector<Edge> edges;
    std::vector<int> support_components;  // per density, 4-adjacency component count
};

AdjacencyGraph adjacency_graph(const NodalReport& report, const Grid& g, const State& s,
                               double tol);

/// Number of 4-adjacency connected components of {u_i > tol}.
int support_connectedness(const Grid& g, const State& s, int i, double tol);

/// Bilinear interpolation of a field at an arbitrary point inside the lattice.
double bilinear(const Grid& g, const Field& f, double x, double y);

}  // namespace segsolve

#endif
