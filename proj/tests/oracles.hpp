// Test-only reference implementations, independent of the library's solver paths.
#ifndef SEGSOLVE_TESTS_ORACLES_HPP
#define SEGSOLVE_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "segsolve/grid.hpp"
#include "segsolve/minimize.hpp"

namespace oracles {

// SOR sweep solver for the 5-point Laplace problem with Dirichlet data.
// Completely separate from the library's CG path.
inline segsolve::Field sor_laplace(const segsolve::Grid& g, const segsolve::Field& bdry,
                                   double tol = 1e-12, int max_sweeps = 200000) {
    segsolve::Field u(g, 0.0);
    for (int b : g.boundary_nodes()) u[b] = bdry[b];
    const int nx = g.nx();
    const double omega = 2.0 / (1.0 + std::sin(M_PI / std::max(g.nx(), g.ny())));
    double scale = 1.0;
    for (int b : g.boundary_nodes()) scale = std::max(scale, std::abs(bdry[b]));
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double maxchange = 0.0;
        for (int color = 0; color < 2; ++color)
            for (int p : g.interior_nodes()) {
                if (((p % nx) + (p / nx)) % 2 != color) continue;
                const double gs = 0.25 * (u[p - 1] + u[p + 1] + u[p - nx] + u[p + nx]);
                const double next = u[p] + omega * (gs - u[p]);
                maxchange = std::max(maxchange, std::abs(next - u[p]));
                u[p] = next;
            }
        if (maxchange < tol * scale) break;
    }
    return u;
}

// Forward power iteration for the smallest eigenvalue of the Dirichlet form
// sum(d^2 |grad w|^2 - b w^2) over interior fields: runs on C = c*I - M^-1 A
// assembled explicitly from the 5-point stencil (d == 1 only).
inline double min_eig_plain_form(const segsolve::Grid& g, double b, int iters = 6000) {
    const int nx = g.nx();
    const double h2 = g.h() * g.h();
    const auto& in = g.interior_nodes();
    std::vector<int> pos(g.num_nodes(), -1);
    for (size_t q = 0; q < in.size(); ++q) pos[in[q]] = static_cast<int>(q);

    auto apply = [&](const std::vector<double>& w, std::vector<double>& out) {
        for (size_t q = 0; q < in.size(); ++q) {
            const int p = in[q];
            double acc = 4.0 * w[q];
            for (int nb : {p - 1, p + 1, p - nx, p + nx})
                if (pos[nb] >= 0) acc -= w[pos[nb]];
            out[q] = acc / h2 - b * w[q];
        }
    };

    const double cshift = 8.0 / h2 + std::abs(b) + 1.0;  // Gershgorin bound
    std::vector<double> w(in.size(), 1.0), t(in.size());
    double lam = 0;
    for (int it = 0; it < iters; ++it) {
        apply(w, t);
        double nrm = 0;
        for (size_t q = 0; q < w.size(); ++q) {
            t[q] = cshift * w[q] - t[q];
            nrm += t[q] * t[q];
        }
        nrm = std::sqrt(nrm);
        for (size_t q = 0; q < w.size(); ++q) w[q] = t[q] / nrm;
        if (it == iters - 1) {
            apply(w, t);
            double num = 0, den = 0;
            for (size_t q = 0; q < w.size(); ++q) {
                num += w[q] * t[q];
                den += w[q] * w[q];
            }
            lam = num / den;
        }
    }
    return lam;
}

// Central finite difference of the energy along a direction in state space.
inline double fd_directional(const segsolve::Problem& p, const segsolve::State& s,
                             const std::vector<segsolve::Field>& dir, double eps) {
    auto shifted = [&](double sign) {
        segsolve::State t = s;
        for (int i = 0; i < p.k; ++i)
            for (int q : p.grid.interior_nodes()) t.u[i][q] += sign * eps * dir[i][q];
        return segsolve::energy(t, p);
    };
    return (shifted(1.0) - shifted(-1.0)) / (2.0 * eps);
}

inline std::vector<segsolve::Field> random_direction(const segsolve::Problem& p,
                                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<segsolve::Field> dir;
    for (int i = 0; i < p.k; ++i) {
        segsolve::Field f(p.grid, 0.0);
        for (int q : p.grid.interior_nodes()) f[q] = dist(rng);
        dir.push_back(std::move(f));
    }
    return dir;
}

// Samples a closed-form function onto the grid nodes.
inline segsolve::Field sample(const segsolve::Grid& g,
                              const std::function<double(double, double)>& fn) {
    segsolve::Field f(g, 0.0);
    for (int n = 0; n < g.num_nodes(); ++n)
        if (g.masked_in(n)) f[n] = fn(g.x(n), g.y(n));
    return f;
}

}  // namespace oracles

#endif
