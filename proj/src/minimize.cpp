#include "segsolve/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "segsolve/linsolve.hpp"

namespace segsolve {

namespace {

// Dirichlet part evaluated through the hat fields,
//   sum_i 1/2 int d_i^2 grad(u_i) . grad(hat u_i),
// which coincides with sum_i 1/2 int d_i^2 |grad u_i|^2 on disjoint supports but
// charges cell-level interpenetration back to the scalar energy of the difference.
struct EnergyModel {
    const Problem& p;
    std::vector<std::vector<double>> d2;       // per density, per cell
    std::vector<std::vector<double>> pair_d2;  // (d_i^2 + d_j^2)/2 per pair i<j
    bool equal_diffusion = true;

    explicit EnergyModel(const Problem& prob) : p(prob) {
        d2.reserve(p.k);
        for (int i = 0; i < p.k; ++i) d2.push_back(cell_d2(p.grid, p.diffusions[i]));
        for (int i = 1; i < p.k; ++i)
            if (d2[i] != d2[0]) equal_diffusion = false;
        for (int i = 0; i < p.k; ++i)
            for (int j = i + 1; j < p.k; ++j) {
                std::vector<double> w(d2[i].size());
                for (size_t c = 0; c < w.size(); ++c) w[c] = 0.5 * (d2[i][c] + d2[j][c]);
                pair_d2.push_back(std::move(w));
            }
    }

    const std::vector<double>& pair_weight(int i, int j) const {
        if (i > j) std::swap(i, j);
        return pair_d2[i * (2 * p.k - i - 1) / 2 + (j - i - 1)];
    }

    double eval(const State& s) const {
        const Grid& g = p.grid;
        const int nx = g.nx();
        const double cw = g.h() * g.h() / 4.0;
        double dir = 0, pot = 0;
        std::vector<double> gx(p.k), gy(p.k);
        for (int sw : g.active_cells()) {
            const int c = g.cell(sw % nx, sw / nx);
            for (int i = 0; i < p.k; ++i) {
                const Field& u = s.u[i];
                gx[i] = u[sw + 1] - u[sw];
                gy[i] = u[sw + nx] - u[sw];
                dir += d2[i][c] * (gx[i] * gx[i] + gy[i] * gy[i]);
            }
            for (int i = 0; i < p.k; ++i)
                for (int j = i + 1; j < p.k; ++j)
                    dir -= (d2[i][c] + d2[j][c]) * (gx[i] * gx[j] + gy[i] * gy[j]);
        }
        for (int i = 0; i < p.k; ++i) {
            const Field& u = s.u[i];
            const Reaction& f = p.reactions[i];
            for (int sw : g.active_cells())
                pot += f.potential(sw, u[sw]) + f.potential(sw + 1, u[sw + 1]) +
                       f.potential(sw + nx, u[sw + nx]) + f.potential(sw + nx + 1, u[sw + nx + 1]);
        }
        return 0.5 * dir - cw * pot;
    }

    // gradient wrt interior values, 0 at boundary nodes, NaN outside
    void gradient(const State& s, std::vector<Field>& out) const {
        const Grid& g = p.grid;
        out.assign(p.k, Field(g, 0.0));
        std::vector<double> tmp(g.num_nodes());
        for (int i = 0; i < p.k; ++i) {
            add_dirichlet_energy_gradient(g, d2[i], s.u[i].v, out[i].v);
            for (int j = 0; j < p.k; ++j) {
                if (j == i) continue;
                std::fill(tmp.begin(), tmp.end(), 0.0);
                add_dirichlet_energy_gradient(g, pair_weight(i, j), s.u[j].v, tmp);
                for (int q : g.interior_nodes()) out[i][q] -= tmp[q];
            }
            for (int q : g.interior_nodes())
                out[i][q] -= g.node_weight(q) * p.reactions[i].eval(q, s.u[i][q]);
            for (int b : g.boundary_nodes()) out[i][b] = 0.0;
        }
    }
};

State step_candidate(const Problem& p, const State& s, const std::vector<Field>& grad,
                     double tau) {
    std::vector<Field> w(s.u);
    for (int i = 0; i < p.k; ++i)
        for (int q : p.grid.interior_nodes()) w[i][q] = std::max(0.0, w[i][q] - tau * grad[i][q]);
    return project_segregated(p.grid, w, p.boundary);
}

double grad_norm(const Grid& g, const std::vector<Field>& grad) {
    double s = 0;
    for (const Field& f : grad)
        for (int q : g.interior_nodes()) s += f[q] * f[q];
    return std::sqrt(s);
}

// ---- polish: block-coordinate exact solves, gated on strict energy decrease ----

// Per-density solve on the complement of the other supports. With equal
// diffusions the correct block problem for the hat energy is the solve for
// z = hat u_i: Dirichlet -sum u_j at blocked nodes, hat trace on the boundary.
bool polish_complement(const EnergyModel& em, State& s, double& j_cur) {
    const Problem& p = em.p;
    const Grid& g = p.grid;
    std::vector<Field> w(s.u);
    for (int i = 0; i < p.k; ++i) {
        std::vector<std::uint8_t> free(g.num_nodes(), 0);
        Field others(g, 0.0);
        for (int q : g.interior_nodes()) {
            double sum = 0;
            for (int j = 0; j < p.k; ++j)
                if (j != i) sum += s.u[j][q];
            others[q] = sum;
            free[q] = sum > 0 ? 0 : 1;
        }
        Field x = s.u[i];
        if (em.equal_diffusion) {
            for (int q : g.interior_nodes())
                if (!free[q]) x[q] = -others[q];
            for (int b : g.boundary_nodes()) {
                double tr = p.boundary.phi[i][b];
                for (int j = 0; j < p.k; ++j)
                    if (j != i) tr -= p.boundary.phi[j][b];
                x[b] = tr;
            }
        } else {
            for (int q : g.interior_nodes())
                if (!free[q]) x[q] = 0.0;
            for (int b : g.boundary_nodes()) x[b] = p.boundary.phi[i][b];
        }
        try {
            solve_semilinear(g, em.d2[i], p.reactions[i], free, x, 0.8, 200);
        } catch (const NumericError&) {
            return false;
        }
        for (int q : g.interior_nodes()) x[q] = std::max(x[q], 0.0);
        w[i] = x;
    }
    State cand = project_segregated(g, w, p.boundary);
    const double j_new = em.eval(cand);
    if (j_new < j_cur) {
        s = std::move(cand);
        j_cur = j_new;
        return true;
    }
    return false;
}

// k == 2 with equal diffusions: solve for the signed difference in one shot.
bool polish_signed_difference(const EnergyModel& em, State& s, double& j_cur) {
    const Problem& p = em.p;
    if (p.k != 2 || em.d2[0] != em.d2[1]) return false;
    const Grid& g = p.grid;

    const Reaction& f1 = p.reactions[0];
    const Reaction& f2 = p.reactions[1];
    auto f_diff = [&](int q, double v) { return v >= 0 ? f1.eval(q, v) : f2.eval(q, v); };

    Field v(g, 0.0);
    for (int q : g.interior_nodes()) v[q] = s.u[0][q] - s.u[1][q];
    for (int b : g.boundary_nodes()) v[b] = p.boundary.phi[0][b] - p.boundary.phi[1][b];

    const std::vector<std::uint8_t> free = interior_mask(g);
    const int n = g.num_nodes();
    bool linear_match = f1.is_linear() && f2.is_linear();
    std::vector<double> alpha(n, 0.0), source(n, 0.0);
    if (linear_match)
        for (int q : g.interior_nodes()) {
            alpha[q] = f1.linear_part_at(q);
            if (alpha[q] != f2.linear_part_at(q)) {
                linear_match = false;
                break;
            }
        }

    try {
        if (linear_match) {
            cg_solve(g, em.d2[0], alpha, free, v, source);
        } else {
            double scale = 1.0;
            for (int q : g.interior_nodes()) scale = std::max(scale, std::abs(v[q]));
            for (int m = 0; m < 200; ++m) {
                for (int q : g.interior_nodes()) source[q] = f_diff(q, v[q]);
                Field next = v;
                cg_solve(g, em.d2[0], {}, free, next, source);
                double change = 0;
                for (int q : g.interior_nodes()) {
                    const double blended = 0.5 * v[q] + 0.5 * next[q];
                    change = std::max(change, std::abs(blended - v[q]));
                    v[q] = blended;
                }
                if (change <= 1e-13 * scale) break;
                if (!std::isfinite(change) || change > 1e8 * scale) return false;
            }
        }
    } catch (const NumericError&) {
        return false;
    }

    std::vector<Field> w{Field(g, 0.0), Field(g, 0.0)};
    for (int q = 0; q < n; ++q) {
        if (!g.masked_in(q)) continue;
        w[0][q] = std::max(v[q], 0.0);
        w[1][q] = std::max(-v[q], 0.0);
    }
    State cand = project_segregated(g, w, p.boundary);
    const double j_new = em.eval(cand);
    if (j_new < j_cur) {
        s = std::move(cand);
        j_cur = j_new;
        return true;
    }
    return false;
}

}  // namespace

double energy(const State& s, const Problem& p) { return EnergyModel(p).eval(s); }

std::vector<Field> energy_gradient(const State& s, const Problem& p) {
    std::vector<Field> g;
    EnergyModel(p).gradient(s, g);
    return g;
}

std::pair<State, bool> descent_step(const State& s, const Problem& p, double tau) {
    if (!(tau > 0)) throw std::invalid_argument("descent_step: tau must be > 0");
    EnergyModel em(p);
    std::vector<Field> grad;
    em.gradient(s, grad);
    const double j0 = em.eval(s);
    double t = tau;
    for (int attempt = 0; attempt <= 20; ++attempt, t /= 2) {
        State cand = step_candidate(p, s, grad, t);
        if (em.eval(cand) < j0) return {std::move(cand), true};
    }
    return {s, false};
}

State initial_state(const Problem& p, const SolveOptions& opts) {
    const Grid& g = p.grid;
    std::vector<Field> w;
    w.reserve(p.k);
    switch (opts.init) {
        case InitKind::zero_interior:
            for (int i = 0; i < p.k; ++i) w.emplace_back(g, 0.0);
            break;
        case InitKind::harmonic_blend:
            for (int i = 0; i < p.k; ++i) w.push_back(harmonic_extension(g, p.boundary.phi[i]));
            break;
        case InitKind::random: {
            std::mt19937_64 rng(opts.rng_seed);
            const double hi = std::max(p.max_boundary_value(), 1.0);
            std::uniform_real_distribution<double> dist(0.0, hi);
            for (int i = 0; i < p.k; ++i) {
                Field f(g, 0.0);
                for (int q : g.interior_nodes()) f[q] = dist(rng);
                w.push_back(std::move(f));
            }
            break;
        }
    }
    for (int i = 0; i < p.k; ++i)
        for (int b : g.boundary_nodes()) w[i][b] = p.boundary.phi[i][b];
    return project_segregated(g, w, p.boundary);
}

Solution solve(const Problem& p, const SolveOptions& opts) {
    p.validate();
    if (!(opts.step > 0) || opts.max_iters < 1)
        throw std::invalid_argument("solve: step must be > 0 and max_iters >= 1");

    const Grid& g = p.grid;
    AdmissibilityReport adm = validate_admissible(g, p.boundary, p.tol.residual_tol);
    if (!adm.admissible())
        throw SolveRefused("admissibility", "solve: boundary data is not admissible (" +
                                                std::to_string(adm.issues.size()) + " issues)");
    for (int i = 0; i < p.k; ++i) {
        bool zero_growth = true;
        for (int q : g.interior_nodes())
            if (p.reactions[i].growth_at(q) != 0.0) {
                zero_growth = false;
                break;
            }
        if (zero_growth) continue;  // form is a sum of squares
        CoercivityResult c = check_coercivity(p, i);
        if (!c.holds)
            throw SolveRefused("coercivity",
                               "solve: energy form is not coercive for density " +
                                   std::to_string(i + 1) +
                                   " (min eigenvalue = " + std::to_string(c.min_eigenvalue) + ")");
    }

    EnergyModel em(p);
    Solution sol;
    sol.state = initial_state(p, opts);
    double j_cur = em.eval(sol.state);
    sol.energy_trace.push_back(j_cur);

    std::vector<Field> grad;
    em.gradient(sol.state, grad);

    const double tau0 = opts.step;
    double tau_trial = tau0;
    std::vector<double> prev_u, prev_g;
    auto flatten = [&](const std::vector<Field>& fs, std::vector<double>& out) {
        out.clear();
        for (const Field& f : fs)
            for (int q : g.interior_nodes()) out.push_back(f[q]);
    };

    const int checkpoint = 500;  // hand control to the polish phase periodically
    bool converged = false;

    while (sol.iters < opts.max_iters && !converged) {
        // gradient phase: ends on window convergence, stall, checkpoint or budget
        enum class PhaseEnd { window, stall, checkpoint, budget };
        PhaseEnd ended = PhaseEnd::budget;
        int phase_iters = 0;
        while (sol.iters < opts.max_iters) {
            std::vector<double> cur_u, cur_g;
            flatten(sol.state.u, cur_u);
            flatten(grad, cur_g);
            if (!prev_u.empty()) {
                double ss = 0, sy = 0;
                for (size_t q = 0; q < cur_u.size(); ++q) {
                    const double sd = cur_u[q] - prev_u[q];
                    ss += sd * sd;
                    sy += sd * (cur_g[q] - prev_g[q]);
                }
                tau_trial = sy > 0 ? std::clamp(ss / sy, 1e-3 * tau0, 1e3 * tau0) : tau0;
            }

            bool accepted = false;
            double t = tau_trial;
            for (int attempt = 0; attempt <= 20; ++attempt, t /= 2) {
                State cand = step_candidate(p, sol.state, grad, t);
                const double j_new = em.eval(cand);
                if (j_new < j_cur) {
                    prev_u.swap(cur_u);
                    prev_g.swap(cur_g);
                    sol.state = std::move(cand);
                    j_cur = j_new;
                    sol.energy_trace.push_back(j_cur);
                    ++sol.iters;
                    ++phase_iters;
                    em.gradient(sol.state, grad);
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {  // stationary up to projection: no step decreases J
                ended = PhaseEnd::stall;
                break;
            }
            const int n_tr = static_cast<int>(sol.energy_trace.size());
            if (n_tr > opts.window) {
                const double drop = sol.energy_trace[n_tr - 1 - opts.window] - j_cur;
                if (drop <= opts.energy_tol * std::max(1.0, std::abs(j_cur))) {
                    ended = PhaseEnd::window;
                    break;
                }
            }
            if (opts.polish && phase_iters >= checkpoint) {
                ended = PhaseEnd::checkpoint;
                break;
            }
        }

        if (ended == PhaseEnd::budget) break;
        if (!opts.polish) {
            converged = ended != PhaseEnd::budget;
            break;
        }

        bool any = false;
        for (int round = 0; round < 60; ++round) {
            bool improved = polish_signed_difference(em, sol.state, j_cur);
            if (polish_complement(em, sol.state, j_cur)) improved = true;
            if (!improved) break;
            sol.energy_trace.push_back(j_cur);
            ++sol.iters;
            any = true;
        }
        if (any) {
            em.gradient(sol.state, grad);
            prev_u.clear();
            prev_g.clear();
            continue;
        }
        // polish is a fixed point; done unless we only paused at a checkpoint
        if (ended == PhaseEnd::window || ended == PhaseEnd::stall) converged = true;
    }

    sol.final_gradient_norm = grad_norm(g, grad);
    sol.converged = converged;
    return sol;
}

double state_distance_l2(const Grid& g, const State& a, const State& b) {
    double s = 0;
    for (int i = 0; i < a.k(); ++i)
        for (int q = 0; q < g.num_nodes(); ++q)
            if (g.masked_in(q)) {
                const double d = a.u[i][q] - b.u[i][q];
                s += g.node_weight(q) * d * d;
            }
    return std::sqrt(s);
}

double state_norm_l2(const Grid& g, const State& s) {
    double acc = 0;
    for (int i = 0; i < s.k(); ++i)
        for (int q = 0; q < g.num_nodes(); ++q)
            if (g.masked_in(q)) acc += g.node_weight(q) * s.u[i][q] * s.u[i][q];
    return std::sqrt(acc);
}

namespace {
double h1_accum(const Grid& g, const Field& f) {
    double acc = 0;
    const int nx = g.nx();
    for (int sw : g.active_cells()) {
        const double gx = f[sw + 1] - f[sw];
        const double gy = f[sw + nx] - f[sw];
        acc += gx * gx + gy * gy;
    }
    for (int q = 0; q < g.num_nodes(); ++q)
        if (g.masked_in(q)) acc += g.node_weight(q) * f[q] * f[q];
    return acc;
}
}  // namespace

double state_distance_h1(const Grid& g, const State& a, const State& b) {
    double acc = 0;
    for (int i = 0; i < a.k(); ++i) {
        Field d(g, 0.0);
        for (int q = 0; q < g.num_nodes(); ++q)
            if (g.masked_in(q)) d[q] = a.u[i][q] - b.u[i][q];
        acc += h1_accum(g, d);
    }
    return std::sqrt(acc);
}

double state_norm_h1(const Grid& g, const State& s) {
    double acc = 0;
    for (int i = 0; i < s.k(); ++i) acc += h1_accum(g, s.u[i]);
    return std::sqrt(acc);
}

MultiStartReport multi_start(const Problem& p, std::span<const std::uint64_t> seeds,
                             const SolveOptions& opts) {
    if (seeds.size() < 2) throw std::invalid_argument("multi_start: need at least 2 seeds");
    MultiStartReport rep;
    for (std::uint64_t sd : seeds) {
        SolveOptions o = opts;
        o.init = InitKind::random;
        o.rng_seed = sd;
        rep.solutions.push_back(solve(p, o));
    }
    double emin = 1e300, emax = -1e300;
    for (const Solution& s : rep.solutions) {
        rep.state_scale = std::max(rep.state_scale, state_norm_l2(p.grid, s.state));
        emin = std::min(emin, s.energy());
        emax = std::max(emax, s.energy());
    }
    rep.energy_spread = emax - emin;
    for (size_t a = 0; a < rep.solutions.size(); ++a)
        for (size_t b = a + 1; b < rep.solutions.size(); ++b)
            rep.max_pairwise_distance =
                std::max(rep.max_pairwise_distance,
                         state_distance_l2(p.grid, rep.solutions[a].state, rep.solutions[b].state));
    return rep;
}

PerturbationTable perturbation_study(const Problem& p, std::span<const double> eps_list,
                                     const SolveOptions& opts) {
    Solution base = solve(p, opts);
    PerturbationTable table;
    table.base_norm = state_norm_h1(p.grid, base.state);
    for (double eps : eps_list) {
        Problem q = p;
        for (int i = 0; i < p.k; ++i)
            for (int b : p.grid.boundary_nodes()) q.boundary.phi[i][b] *= (1.0 + eps);
        AdmissibilityReport adm = validate_admissible(q.grid, q.boundary, q.tol.residual_tol);
        if (!adm.admissible())
            throw SolveRefused("admissibility", "perturbation_study: perturbed data inadmissible");
        Solution pert = solve(q, opts);
        PerturbationRow row;
        row.eps = eps;
        row.distance = state_distance_h1(p.grid, base.state, pert.state);
        row.ratio = eps != 0.0 ? row.distance / eps : 0.0;
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace segsolve
