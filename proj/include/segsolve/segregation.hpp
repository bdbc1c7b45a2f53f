#ifndef SEGSOLVE_SEGREGATION_HPP
#define SEGSOLVE_SEGREGATION_HPP

#include <vector>

#include "segsolve/problem.hpp"

namespace segsolve {

/// k nonnegative densities on one grid, boundary nodes pinned to the traces.
struct State {
    std::vector<Field> u;
    int k() const { return static_cast<int>(u.size()); }
};

/// u_i minus the sum of all other densities, node-wise.
Field hat(const Grid& g, const State& s, int i);

/// v_i = (w_i - sum_{j != i} w_j)^+ after clamping inputs at 0; output has at most
/// one strictly positive component per node and boundary nodes re-pinned to phi.
State project_segregated(const Grid& g, const std::vector<Field>& w, const BoundaryData& bd);

struct SegregationCheck {
    bool segregated = true;
    int worst_node = -1;
    double worst_value = 0;  // largest second-biggest component over nodes
};

SegregationCheck is_segregated(const Grid& g, const State& s, double tol);

/// m(x) = number of densities with a node above tol inside B(x, r); r >= 2h required.
std::vector<int> multiplicity_map(const Grid& g, const State& s, double r, double tol);

/// Nodes of multiplicity >= h.
std::vector<int> multiplicity_level_set(const Grid& g, const std::vector<int>& m, int h);

void pin_boundary(const Grid& g, State& s, const BoundaryData& bd);

}  // namespace segsolve

#endif
