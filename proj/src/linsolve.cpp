#include "segsolve/linsolve.hpp"

#include <cmath>
#include <cstring>

namespace segsolve {

std::vector<double> cell_d2(const Grid& g, const Diffusion& d) {
    std::vector<double> out(g.num_cells(), 0.0);
    const int nx = g.nx();
    if (d.is_constant()) {
        const double v = d.constant_value() * d.constant_value();
        for (int sw : g.active_cells()) out[g.cell(sw % nx, sw / nx)] = v;
        return out;
    }
    const Field& dv = d.nodal_values();
    for (int sw : g.active_cells()) {
        const double v = (dv[sw] * dv[sw] + dv[sw + 1] * dv[sw + 1] + dv[sw + nx] * dv[sw + nx] +
                          dv[sw + nx + 1] * dv[sw + nx + 1]) / 4.0;
        out[g.cell(sw % nx, sw / nx)] = v;
    }
    return out;
}

std::vector<double> cell_d2_unit(const Grid& g) {
    std::vector<double> out(g.num_cells(), 0.0);
    const int nx = g.nx();
    for (int sw : g.active_cells()) out[g.cell(sw % nx, sw / nx)] = 1.0;
    return out;
}

void add_dirichlet_energy_gradient(const Grid& g, const std::vector<double>& d2,
                                   const std::vector<double>& u, std::vector<double>& y) {
    const int nx = g.nx();
    for (int sw : g.active_cells()) {
        const double w = d2[g.cell(sw % nx, sw / nx)];
        const double gx = u[sw + 1] - u[sw];
        const double gy = u[sw + nx] - u[sw];
        y[sw] -= w * (gx + gy);
        y[sw + 1] += w * gx;
        y[sw + nx] += w * gy;
    }
}

namespace {

// (A u)_p = (energy gradient)_p - alpha_p m_p u_p at free nodes, 0 elsewhere.
void apply_op(const Grid& g, const std::vector<double>& d2, const std::vector<double>& alpha,
              const std::vector<std::uint8_t>& free_mask, const std::vector<double>& u,
              std::vector<double>& y) {
    std::fill(y.begin(), y.end(), 0.0);
    add_dirichlet_energy_gradient(g, d2, u, y);
    const int n = g.num_nodes();
    if (!alpha.empty())
        for (int p = 0; p < n; ++p)
            if (free_mask[p]) y[p] -= alpha[p] * g.node_weight(p) * u[p];
    for (int p = 0; p < n; ++p)
        if (!free_mask[p]) y[p] = 0.0;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

int cg_solve(const Grid& g, const std::vector<double>& d2, const std::vector<double>& alpha,
             const std::vector<std::uint8_t>& free_mask, Field& x,
             const std::vector<double>& source, double rtol, int max_iters) {
    require_same_grid(g, x);
    const int n = g.num_nodes();
    if (max_iters < 0) max_iters = 20 * (g.nx() + g.ny()) + 200;

    // b = m .* source restricted to free nodes, minus operator action of the fixed part
    std::vector<double> work(x.v);
    for (int p = 0; p < n; ++p)
        if (!is_defined(work[p])) work[p] = 0.0;

    std::vector<double> r(n, 0.0), z(n, 0.0);
    apply_op(g, d2, alpha, free_mask, work, r);
    for (int p = 0; p < n; ++p)
        r[p] = free_mask[p] ? (source.empty() ? 0.0 : source[p] * g.node_weight(p)) - r[p] : 0.0;

    double rr = dot(r, r);
    const double rr0 = rr;
    if (rr0 == 0.0) return 0;

    std::vector<double> p_dir(r);
    int it = 0;
    for (; it < max_iters; ++it) {
        apply_op(g, d2, alpha, free_mask, p_dir, z);
        const double pAp = dot(p_dir, z);
        if (!(pAp > 0))
            throw NumericError("cg_solve: operator not positive definite (pAp <= 0)");
        const double a = rr / pAp;
        for (int q = 0; q < n; ++q)
            if (free_mask[q]) work[q] += a * p_dir[q];
        for (int q = 0; q < n; ++q) r[q] -= a * z[q];
        const double rr_new = dot(r, r);
        if (rr_new <= rtol * rtol * rr0) {
            ++it;
            break;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (int q = 0; q < n; ++q) p_dir[q] = r[q] + beta * p_dir[q];
    }
    if (dot(r, r) > rtol * rtol * rr0 * 1e4)
        throw NumericError("cg_solve: no convergence after " + std::to_string(it) + " iterations");

    for (int q = 0; q < n; ++q)
        if (free_mask[q]) x[q] = work[q];
    return it;
}

SemilinearResult solve_semilinear(const Grid& g, const std::vector<double>& d2,
                                  const Reaction& reaction,
                                  const std::vector<std::uint8_t>& free_mask, Field& x,
                                  double damping, int max_iters, double tol) {
    const int n = g.num_nodes();
    std::vector<double> alpha(n, 0.0);
    for (int p = 0; p < n; ++p)
        if (free_mask[p]) alpha[p] = reaction.linear_part_at(p);

    SemilinearResult res;
    std::vector<double> source(n, 0.0);
    if (reaction.is_linear()) {
        res.cg_iters = cg_solve(g, d2, alpha, free_mask, x, source);
        res.picard_iters = 1;
        return res;
    }

    double scale = 1.0;
    for (int p = 0; p < n; ++p)
        if (free_mask[p] && is_defined(x[p])) scale = std::max(scale, std::abs(x[p]));

    Field prev = x;
    for (int m = 0; m < max_iters; ++m) {
        // nonlinear remainder of f, with the linear part folded into the operator
        for (int p = 0; p < n; ++p)
            if (free_mask[p]) source[p] = reaction.eval(p, prev[p]) - alpha[p] * prev[p];
        Field next = prev;
        res.cg_iters += cg_solve(g, d2, alpha, free_mask, next, source);
        double change = 0.0;
        for (int p = 0; p < n; ++p)
            if (free_mask[p]) {
                const double blended = (1.0 - damping) * prev[p] + damping * next[p];
                change = std::max(change, std::abs(blended - prev[p]));
                prev[p] = blended;
            }
        ++res.picard_iters;
        if (change <= tol * scale) {
            x = prev;
            return res;
        }
        if (!std::isfinite(change) || change > 1e8 * scale)
            throw NumericError("solve_semilinear: Picard iteration diverged");
    }
    throw NumericError("solve_semilinear: Picard did not converge in " +
                       std::to_string(max_iters) + " iterations");
}

Field harmonic_extension(const Grid& g, const Field& boundary_values) {
    require_same_grid(g, boundary_values);
    Field x(g, 0.0);
    for (int b : g.boundary_nodes()) x[b] = boundary_values[b];
    cg_solve(g, cell_d2_unit(g), {}, interior_mask(g), x, {});
    return x;
}

std::vector<std::uint8_t> interior_mask(const Grid& g) {
    std::vector<std::uint8_t> m(g.num_nodes(), 0);
    for (int p : g.interior_nodes()) m[p] = 1;
    return m;
}

}  // namespace segsolve
