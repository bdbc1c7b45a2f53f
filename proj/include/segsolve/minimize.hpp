#ifndef SEGSOLVE_MINIMIZE_HPP
#define SEGSOLVE_MINIMIZE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "segsolve/segregation.hpp"

namespace segsolve {

/// Raised when solve() refuses to run because a precondition check fails
/// (inadmissible boundary data, coercivity violated).
class SolveRefused : public std::runtime_error {
public:
    SolveRefused(std::string check_name, const std::string& msg)
        : std::runtime_error(msg), check(std::move(check_name)) {}
    std::string check;
};

enum class InitKind { zero_interior, harmonic_blend, random };

struct SolveOptions {
    double step = 0.25;          // dimensionless trial step (the gradient carries h^2)
    int max_iters = 40000;
    double energy_tol = 1e-10;   // relative decrease over the convergence window
    std::uint64_t rng_seed = 1;
    InitKind init = InitKind::harmonic_blend;
    bool polish = true;          // block-coordinate exact solves after descent stalls
    int window = 10;
};

struct Solution {
    State state;
    std::vector<double> energy_trace;  // accepted steps only; nonincreasing
    int iters = 0;
    bool converged = false;
    double final_gradient_norm = 0;
    double energy() const { return energy_trace.empty() ? 0.0 : energy_trace.back(); }
};

/// J(U) = sum_i [ 1/2 int d_i^2 |grad u_i|^2 - int F_i(u_i) ] on the cell quadrature.
double energy(const State& s, const Problem& p);

/// Exact gradient of the discrete energy wrt interior node values; 0 at boundary nodes.
std::vector<Field> energy_gradient(const State& s, const Problem& p);

/// One projected step: w_i = (u_i - tau*g_i)^+, project, accept iff the energy strictly
/// decreased; tau is halved up to 20 times before giving up (state returned unchanged).
std::pair<State, bool> descent_step(const State& s, const Problem& p, double tau);

Solution solve(const Problem& p, const SolveOptions& opts);

State initial_state(const Problem& p, const SolveOptions& opts);

struct MultiStartReport {
    std::vector<Solution> solutions;
    double max_pairwise_distance = 0;  // node-wise L2 over all densities
    double energy_spread = 0;          // max J - min J
    double state_scale = 0;            // largest L2 norm among the solutions
};

MultiStartReport multi_start(const Problem& p, std::span<const std::uint64_t> seeds,
                             const SolveOptions& opts);

struct PerturbationRow {
    double eps = 0;
    double distance = 0;  // H1 surrogate: grids' gradient + value norm of the difference
    double ratio = 0;     // distance / eps
};

struct PerturbationTable {
    std::vector<PerturbationRow> rows;
    double base_norm = 0;  // H1 surrogate norm of the unperturbed solution
};

/// Scales all traces by (1+eps), re-solves, and reports solution distances.
PerturbationTable perturbation_study(const Problem& p, std::span<const double> eps_list,
                                     const SolveOptions& opts);

/// L2 (mass-weighted) distance between two states on the same grid.
double state_distance_l2(const Grid& g, const State& a, const State& b);
double state_norm_l2(const Grid& g, const State& s);
double state_distance_h1(const Grid& g, const State& a, const State& b);
double state_norm_h1(const Grid& g, const State& s);

}  // namespace segsolve

#endif
