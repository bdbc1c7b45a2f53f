// Problem builders shared by the unit and acceptance suites. These mirror the
// shipped preset configs; test_cli_io cross-checks config parsing against them.
#ifndef SEGSOLVE_TESTS_FIXTURES_HPP
#define SEGSOLVE_TESTS_FIXTURES_HPP

#include <cmath>

#include "segsolve/minimize.hpp"
#include "segsolve/problem.hpp"

namespace fixtures {

using namespace segsolve;

inline Grid unit_square(int n) {
    GridSpec s;
    s.nx = s.ny = n;
    s.extent = 1.0;
    return build_grid(s);
}

inline Grid unit_disk(int n) {
    GridSpec s;
    s.nx = s.ny = n;
    s.extent = 2.0;
    s.shape = GridShape::disk;
    s.disk_radius = 1.0;
    return build_grid(s);
}

// k = 2, f = 0, traces of ((x-1/2))^{+/-}: interface on the x = 1/2 grid line.
inline Problem two_phase(int n) {
    Grid g = unit_square(n);
    Problem p;
    p.grid = g;
    p.k = 2;
    p.reactions = {Reaction(ReactionTerm::zero()), Reaction(ReactionTerm::zero())};
    p.diffusions = {Diffusion::constant(1.0), Diffusion::constant(1.0)};
    p.boundary.phi.assign(2, Field(g, 0.0));
    for (int b : g.boundary_nodes()) {
        p.boundary.phi[0][b] = std::max(g.x(b) - 0.5, 0.0);
        p.boundary.phi[1][b] = std::max(0.5 - g.x(b), 0.0);
    }
    return p;
}

// Same problem rotated 45 degrees: interface along x + y = 1, not grid aligned.
inline Problem two_phase_diag(int n) {
    Grid g = unit_square(n);
    Problem p;
    p.grid = g;
    p.k = 2;
    p.reactions = {Reaction(ReactionTerm::zero()), Reaction(ReactionTerm::zero())};
    p.diffusions = {Diffusion::constant(1.0), Diffusion::constant(1.0)};
    p.boundary.phi.assign(2, Field(g, 0.0));
    const double s2 = std::sqrt(2.0);
    for (int b : g.boundary_nodes()) {
        const double t = (g.x(b) + g.y(b) - 1.0) / s2;
        p.boundary.phi[0][b] = std::max(t, 0.0);
        p.boundary.phi[1][b] = std::max(-t, 0.0);
    }
    return p;
}

inline double sector_field(double r, double theta, int k) {
    return std::pow(r, k / 2.0) * std::abs(std::cos(k / 2.0 * theta));
}

inline int sector_index(double theta, int k) {
    // sector 0 is centered at theta = 0 with width 2*pi/k
    const double w = 2.0 * M_PI / k;
    double t = theta + w / 2;
    while (t < 0) t += 2 * M_PI;
    return static_cast<int>(std::floor(t / w)) % k;
}

// k = 3 on the unit disk, f = 0, traces of r^{3/2}|cos(3 theta/2)| per 120-degree arc.
inline Problem triple_junction(int n) {
    Grid g = unit_disk(n);
    Problem p;
    p.grid = g;
    p.k = 3;
    p.reactions.assign(3, Reaction(ReactionTerm::zero()));
    p.diffusions.assign(3, Diffusion::constant(1.0));
    p.boundary.phi.assign(3, Field(g, 0.0));
    for (int b : g.boundary_nodes()) {
        const double dx = g.x(b) - g.disk_cx(), dy = g.y(b) - g.disk_cy();
        const double r = std::hypot(dx, dy), th = std::atan2(dy, dx);
        p.boundary.phi[sector_index(th, 3)][b] = sector_field(r, th, 3);
    }
    return p;
}

// k = 2, f_i(s) = -2*c*s with c = 0.5, piecewise-constant traces on the left/right edges.
inline Problem concave_uniqueness(int n) {
    Grid g = unit_square(n);
    Problem p;
    p.grid = g;
    p.k = 2;
    p.reactions.assign(2, Reaction(ReactionTerm::concave_quadratic(0.5)));
    p.diffusions.assign(2, Diffusion::constant(1.0));
    p.boundary.phi.assign(2, Field(g, 0.0));
    for (int b : g.boundary_nodes()) {
        if (g.node_i(b) == g.nx() - 1) p.boundary.phi[0][b] = 1.0;
        if (g.node_i(b) == 0) p.boundary.phi[1][b] = 1.0;
    }
    return p;
}

// two_phase with a nodal diffusion whose normal derivative vanishes on the boundary.
inline Problem variable_diffusion(int n) {
    Problem p = two_phase(n);
    const Grid& g = p.grid;
    Field d(g, 1.0);
    for (int q = 0; q < g.num_nodes(); ++q)
        if (g.masked_in(q)) {
            const double sx = std::sin(M_PI * g.x(q)), sy = std::sin(M_PI * g.y(q));
            d[q] = 1.0 + 0.25 * sx * sx * sy * sy;
        }
    p.diffusions = {Diffusion::nodal(d), Diffusion::nodal(d)};
    return p;
}

// k = 2, zero traces, f(s) = min(lambda*s, s^(1/3)) with lambda above the first
// Dirichlet eigenvalue: the declared growth bound defeats the coercivity check.
inline Problem supercritical_growth(int n, double lambda = 25.0) {
    Grid g = unit_square(n);
    Problem p;
    p.grid = g;
    p.k = 2;
    p.reactions.assign(2, Reaction(ReactionTerm::capped_linear(lambda)));
    p.diffusions.assign(2, Diffusion::constant(1.0));
    p.boundary.phi.assign(2, Field(g, 0.0));
    return p;
}

}  // namespace fixtures

#endif
