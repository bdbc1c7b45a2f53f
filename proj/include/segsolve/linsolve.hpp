#ifndef SEGSOLVE_LINSOLVE_HPP
#define SEGSOLVE_LINSOLVE_HPP

#include <functional>
#include <vector>

#include "segsolve/grid.hpp"
#include "segsolve/problem.hpp"

namespace segsolve {

/// Per-cell average of d^2 over the four corners; the coefficient the energy
/// operator and the CG solves share. Inactive cells carry 0.
std::vector<double> cell_d2(const Grid& g, const Diffusion& d);
std::vector<double> cell_d2_unit(const Grid& g);

/// y += exact gradient of the cell Dirichlet energy  1/2 * sum_c d2_c (forward diffs)^2.
/// Touches every node of every active cell; caller zeroes/masks afterwards as needed.
void add_dirichlet_energy_gradient(const Grid& g, const std::vector<double>& d2,
                                   const std::vector<double>& u, std::vector<double>& y);

/// Solves the linear system arising from the quadratic form
///   1/2 sum_c d2_c |grad u|^2 - 1/2 sum_p alpha_p m_p u_p^2  =  <source, u>_m
/// over the unknown set (free[p] != 0), i.e.  A u = m .* source  with
///   (A u)_p = (energy-gradient u)_p - alpha_p m_p u_p.
/// x enters holding Dirichlet values at non-free nodes (and an initial guess at
/// free ones) and leaves holding the solution. alpha may be empty (== 0).
/// Returns CG iterations; throws NumericError if it fails to reach rtol.
int cg_solve(const Grid& g, const std::vector<double>& d2, const std::vector<double>& alpha,
             const std::vector<std::uint8_t>& free_mask, Field& x,
             const std::vector<double>& source, double rtol = 1e-12, int max_iters = -1);

/// Damped Picard iteration for -div(d^2 grad u) = f(u) with Dirichlet data in x.
/// The linear part of f is folded into the operator; purely linear reactions
/// finish in one solve. Throws NumericError on divergence.
struct SemilinearResult {
    int picard_iters = 0;
    int cg_iters = 0;
};
SemilinearResult solve_semilinear(const Grid& g, const std::vector<double>& d2,
                                  const Reaction& reaction,
                                  const std::vector<std::uint8_t>& free_mask, Field& x,
                                  double damping = 0.5, int max_iters = 500,
                                  double tol = 1e-13);

/// Discrete harmonic extension: solves the unit-coefficient Laplace problem with
/// the given boundary values (x pinned at boundary nodes, solved at interior).
Field harmonic_extension(const Grid& g, const Field& boundary_values);

/// Free mask covering all interior nodes.
std::vector<std::uint8_t> interior_mask(const Grid& g);

}  // namespace segsolve

#endif
