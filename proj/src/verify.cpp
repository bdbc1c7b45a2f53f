#include "segsolve/verify.hpp"

#include <algorithm>
#include <cmath>

#include "segsolve/linsolve.hpp"

namespace segsolve {

namespace {

void require_unit_diffusion(const Problem& p, const char* who) {
    if (!p.unit_diffusion())
        throw std::invalid_argument(std::string(who) +
                                    ": requires unit diffusion; rescale the problem first");
}

// hat f at a node, given the frozen state: f_i(u_i) on supp u_i, -f_j(u_j) on
// supp u_j, 0 where every density vanishes.
double hat_source(const Problem& p, const State& s, int i, int q) {
    if (s.u[i][q] > 0) return p.reactions[i].eval(q, s.u[i][q]);
    for (int j = 0; j < p.k; ++j)
        if (j != i && s.u[j][q] > 0) return -p.reactions[j].eval(q, s.u[j][q]);
    return 0.0;
}

}  // namespace

std::vector<int> active_labels(const Grid& g, const State& s, double tol) {
    std::vector<int> lab(g.num_nodes(), 0);
    for (int q = 0; q < g.num_nodes(); ++q) {
        if (!g.masked_in(q)) continue;
        int best = 0;
        double top = tol;
        for (int i = 0; i < s.k(); ++i)
            if (s.u[i][q] > top) {
                top = s.u[i][q];
                best = i + 1;
            }
        lab[q] = best;
    }
    return lab;
}

double ExtremalityReport::max_sub() const {
    double m = 0;
    for (const auto& r : rows) m = std::max(m, r.sup_sub);
    return m;
}

double ExtremalityReport::max_hat() const {
    double m = 0;
    for (const auto& r : rows) m = std::max(m, r.sup_hat);
    return m;
}

ExtremalityReport extremality_residuals(const State& s, const Problem& p) {
    require_unit_diffusion(p, "extremality_residuals");
    const Grid& g = p.grid;
    ExtremalityReport rep;
    rep.tol_band = extremality_band_c * g.h();
    rep.rows.resize(p.k);

    // nodes whose 5x5 node block carries a single label are "far" from interfaces
    std::vector<int> lab = active_labels(g, s, 0.0);
    std::vector<std::uint8_t> far(g.num_nodes(), 0);
    const int nx = g.nx(), ny = g.ny();
    for (int q : g.interior_nodes()) {
        const int i0 = q % nx, j0 = q / nx;
        int seen = lab[q];
        bool uniform = true;
        for (int dj = -2; dj <= 2 && uniform; ++dj)
            for (int di = -2; di <= 2 && uniform; ++di) {
                const int i = i0 + di, j = j0 + dj;
                if (i < 0 || i >= nx || j < 0 || j >= ny) continue;
                const int nb = g.node(i, j);
                if (!g.masked_in(nb)) continue;
                if (lab[nb] != seen) uniform = false;
            }
        far[q] = uniform ? 1 : 0;
    }

    // gated sups skip the contact ring of multiple points and nodes whose
    // quadrature stencil is truncated by the domain rim (inner approximation)
    std::vector<int> mult = multiplicity_map(g, s, 3 * g.h(), 0.0);
    std::vector<std::uint8_t> junction(g.num_nodes(), 0);
    const double full_weight = g.h() * g.h() * (1.0 - 1e-12);
    for (int q : g.interior_nodes()) {
        if (mult[q] >= 3) {
            junction[q] = 1;
            ++rep.junction_nodes;
        } else if (g.node_weight(q) < full_weight) {
            junction[q] = 1;
        }
    }

    for (int i = 0; i < p.k; ++i) {
        Field lap_u = laplacian5(g, s.u[i]);
        Field hat_i = hat(g, s, i);
        Field lap_hat = laplacian5(g, hat_i);
        auto& row = rep.rows[i];
        for (int q : g.interior_nodes()) {
            const double sub = std::max(-lap_u[q] - p.reactions[i].eval(q, s.u[i][q]), 0.0);
            const double hatres = std::max(hat_source(p, s, i, q) + lap_hat[q], 0.0);
            row.sup_sub_all = std::max(row.sup_sub_all, sub);
            row.sup_hat_all = std::max(row.sup_hat_all, hatres);
            if (!junction[q]) {
                if (sub > row.sup_sub) {
                    row.sup_sub = sub;
                    row.worst_sub_node = q;
                }
                if (hatres > row.sup_hat) {
                    row.sup_hat = hatres;
                    row.worst_hat_node = q;
                }
            }
            if (far[q]) {
                row.sup_sub_far = std::max(row.sup_sub_far, sub);
                row.sup_hat_far = std::max(row.sup_hat_far, hatres);
            }
        }
    }
    return rep;
}

double MonotonicityTrace::max_value() const {
    double m = 0;
    for (double v : values) m = std::max(m, v);
    return m;
}

MonotonicityTrace acf_product(const State& s, const Problem& p, double x0, double y0,
                              std::span<const double> radii,
                              const std::vector<std::vector<int>>& phases) {
    require_unit_diffusion(p, "acf_product");
    const Grid& g = p.grid;
    if (phases.size() < 2) throw std::invalid_argument("acf_product: need at least two phases");
    for (const auto& grp : phases)
        for (int i : grp)
            if (i < 0 || i >= p.k) throw std::invalid_argument("acf_product: phase index");
    for (double r : radii)
        if (g.distance_to_boundary(x0, y0) + 1e-12 < r)
            throw std::invalid_argument("acf_product: ball exits the domain");

    // normalize so -lap w <= 1 (scale by the largest reaction magnitude seen)
    double m_bound = 1.0;
    for (int i = 0; i < p.k; ++i)
        for (int q : g.interior_nodes())
            m_bound = std::max(m_bound, std::abs(p.reactions[i].eval(q, s.u[i][q])));

    const int h = static_cast<int>(phases.size());
    std::vector<Field> w;
    for (const auto& grp : phases) {
        Field f(g, 0.0);
        for (int q = 0; q < g.num_nodes(); ++q) {
            if (!g.masked_in(q)) continue;
            double acc = 0;
            for (int i : grp) acc += s.u[i][q];
            f[q] = acc / m_bound;
        }
        w.push_back(std::move(f));
    }

    MonotonicityTrace tr;
    tr.x0 = x0;
    tr.y0 = y0;
    tr.phases = phases;
    tr.radii.assign(radii.begin(), radii.end());
    for (double r : radii) {
        double prod = 1.0;
        const double rh = std::pow(r, h);
        for (const Field& f : w) prod *= ball_dirichlet_integral(g, f, x0, y0, r) / rh;
        tr.values.push_back(prod);
    }
    for (size_t j = 1; j < tr.values.size(); ++j)
        tr.max_violation = std::max(tr.max_violation, tr.values[j - 1] - tr.values[j]);
    return tr;
}

LipschitzReport lipschitz_report(const State& s, const Problem& p, double delta) {
    const Grid& g = p.grid;
    if (delta < 2 * g.h() - 1e-12)
        throw std::invalid_argument("lipschitz_report: delta must be at least 2h");

    std::vector<std::uint8_t> inside(g.num_nodes(), 0);
    int count = 0;
    for (int q = 0; q < g.num_nodes(); ++q)
        if (g.masked_in(q) && g.distance_to_boundary(g.x(q), g.y(q)) >= delta) {
            inside[q] = 1;
            ++count;
        }
    if (count == 0) throw std::invalid_argument("lipschitz_report: empty subdomain");

    LipschitzReport rep;
    rep.l_i.assign(p.k, 0.0);
    const int nx = g.nx();
    for (int q = 0; q < g.num_nodes(); ++q) {
        if (!inside[q]) continue;
        for (int nb : {q + 1, q + nx}) {
            if (nb >= g.num_nodes() || !inside[nb]) continue;
            ++rep.pairs;
            double total_q = 0, total_nb = 0;
            for (int i = 0; i < p.k; ++i) {
                rep.l_i[i] = std::max(rep.l_i[i], std::abs(s.u[i][nb] - s.u[i][q]) / g.h());
                total_q += s.u[i][q];
                total_nb += s.u[i][nb];
            }
            rep.l_max = std::max(rep.l_max, std::abs(total_nb - total_q) / g.h());
        }
    }
    return rep;
}

BarrierPair compute_barriers(const Problem& p, const State& s) {
    const Grid& g = p.grid;
    // the comparison argument needs one diffusion operator for the hat solve
    std::vector<double> d2 = cell_d2(g, p.diffusions[0]);
    for (int i = 1; i < p.k; ++i)
        if (cell_d2(g, p.diffusions[i]) != d2)
            throw std::invalid_argument(
                "compute_barriers: densities carry different diffusions; rescale first");
    const std::vector<std::uint8_t> free = interior_mask(g);

    BarrierPair out;
    for (int i = 0; i < p.k; ++i) {
        // upper barrier: semilinear problem with the density's own trace
        Field phi(g, 0.0);
        for (int b : g.boundary_nodes()) phi[b] = p.boundary.phi[i][b];
        for (int q : g.interior_nodes()) phi[q] = s.u[i][q];  // warm start
        try {
            solve_semilinear(g, d2, p.reactions[i], free, phi, 0.5, 500);
        } catch (const NumericError& e) {
            throw NumericError("compute_barriers: upper barrier for density " +
                               std::to_string(i + 1) + ": " + e.what());
        }
        out.upper.push_back(phi);

        // lower barrier: one linear solve against the frozen hat source
        Field psi(g, 0.0);
        for (int b : g.boundary_nodes()) {
            double tr = p.boundary.phi[i][b];
            for (int j = 0; j < p.k; ++j)
                if (j != i) tr -= p.boundary.phi[j][b];
            psi[b] = tr;
        }
        std::vector<double> src(g.num_nodes(), 0.0);
        for (int q : g.interior_nodes()) src[q] = hat_source(p, s, i, q);
        cg_solve(g, d2, {}, free, psi, src);
        out.lower.push_back(psi);
    }

    for (int i = 0; i < p.k; ++i)
        for (int q = 0; q < g.num_nodes(); ++q) {
            if (!g.masked_in(q)) continue;
            const double lo = std::max(out.lower[i][q], 0.0) - s.u[i][q];
            if (lo > p.tol.residual_tol)
                out.violations.push_back({BarrierViolation::below_lower, i, q, lo});
            const double hi = s.u[i][q] - out.upper[i][q];
            if (hi > p.tol.residual_tol)
                out.violations.push_back({BarrierViolation::above_upper, i, q, hi});
            out.max_violation = std::max({out.max_violation, lo, hi});
        }
    return out;
}

}  // namespace segsolve
