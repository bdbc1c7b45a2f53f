#include "segsolve/problem.hpp"

#include <algorithm>
#include <cmath>

#include "segsolve/linsolve.hpp"

namespace segsolve {

namespace {

double raw_eval(ReactionKind k, double p, double s) {
    switch (k) {
        case ReactionKind::zero: return 0.0;
        case ReactionKind::linear: return p * s;
        case ReactionKind::concave_quadratic: return -2.0 * p * s;
        case ReactionKind::logistic: return s <= p ? s * (p - s) : 0.0;
        case ReactionKind::capped_linear: return std::min(p * s, std::cbrt(s));
    }
    return 0.0;
}

double raw_potential(ReactionKind k, double p, double s) {
    switch (k) {
        case ReactionKind::zero: return 0.0;
        case ReactionKind::linear: return p * s * s / 2.0;
        case ReactionKind::concave_quadratic: return -p * s * s;
        case ReactionKind::logistic:
            if (s <= p) return p * s * s / 2.0 - s * s * s / 3.0;
            return p * p * p / 6.0;
        case ReactionKind::capped_linear: {
            const double sc = std::pow(p, -1.5);  // lambda*s == s^(1/3) here
            if (s <= sc) return p * s * s / 2.0;
            return p * sc * sc / 2.0 + 0.75 * (std::pow(s, 4.0 / 3.0) - std::pow(sc, 4.0 / 3.0));
        }
    }
    return 0.0;
}

}  // namespace

ReactionTerm::ReactionTerm(ReactionKind k, double p) : kind_(k), param_(p) {
    switch (k) {
        case ReactionKind::zero:
            break;
        case ReactionKind::linear:
            lipschitz_ = growth_ = std::abs(p);
            curvature_ = linear_part_ = p;
            break;
        case ReactionKind::concave_quadratic:
            lipschitz_ = growth_ = 2.0 * p;
            curvature_ = linear_part_ = -2.0 * p;
            break;
        case ReactionKind::logistic:
            lipschitz_ = growth_ = curvature_ = linear_part_ = p;
            break;
        case ReactionKind::capped_linear:
            lipschitz_ = growth_ = curvature_ = linear_part_ = p;
            break;
    }
}

ReactionTerm ReactionTerm::zero() { return ReactionTerm(ReactionKind::zero, 0.0); }

ReactionTerm ReactionTerm::linear(double lambda) {
    return ReactionTerm(ReactionKind::linear, lambda);
}

ReactionTerm ReactionTerm::concave_quadratic(double c) {
    if (c < 0) throw ConfigError("reaction concave: coefficient must be >= 0");
    return ReactionTerm(ReactionKind::concave_quadratic, c);
}

ReactionTerm ReactionTerm::logistic(double a) {
    if (!(a > 0)) throw ConfigError("reaction logistic: parameter must be > 0");
    return ReactionTerm(ReactionKind::logistic, a);
}

ReactionTerm ReactionTerm::capped_linear(double lambda) {
    if (!(lambda > 0)) throw ConfigError("reaction capped_linear: slope must be > 0");
    return ReactionTerm(ReactionKind::capped_linear, lambda);
}

double ReactionTerm::eval(double s) const {
    return s >= 0 ? raw_eval(kind_, param_, s) : -raw_eval(kind_, param_, -s);
}

double ReactionTerm::potential(double s) const { return raw_potential(kind_, param_, std::abs(s)); }

double reaction_eval(const ReactionTerm& t, double s) { return t.eval(s); }
double potential_eval(const ReactionTerm& t, double s) { return t.potential(s); }

double Reaction::eval(int node, double s) const {
    if (!rescale_) return base_.eval(s);
    const double d = rescale_->d[node];
    return base_.eval(s / d) / d - rescale_->lap_over_d[node] * s;
}

double Reaction::potential(int node, double s) const {
    if (!rescale_) return base_.potential(s);
    const double d = rescale_->d[node];
    return base_.potential(s / d) - 0.5 * rescale_->lap_over_d[node] * s * s;
}

double Reaction::growth_at(int node) const {
    if (!rescale_) return base_.growth_bound();
    const double d = rescale_->d[node];
    return base_.growth_bound() / (d * d) + std::abs(rescale_->lap_over_d[node]);
}

double Reaction::linear_part_at(int node) const {
    if (!rescale_) return base_.linear_part();
    const double d = rescale_->d[node];
    return base_.linear_part() / (d * d) - rescale_->lap_over_d[node];
}

Diffusion Diffusion::constant(double d) {
    if (!(d > 0)) throw ConfigError("diffusion: constant must be > 0");
    Diffusion out;
    out.c_ = d;
    return out;
}

Diffusion Diffusion::nodal(Field values) {
    Diffusion out;
    out.nodal_ = std::move(values);
    return out;
}

void Diffusion::validate_positive(const Grid& g) const {
    if (is_constant()) return;
    require_same_grid(g, *nodal_);
    for (int n = 0; n < g.num_nodes(); ++n)
        if (g.masked_in(n) && !((*nodal_)[n] > 0))
            throw ConfigError("diffusion: nodal values must be strictly positive");
}

AdmissibilityReport validate_admissible(const Grid& g, const BoundaryData& bd, double tol) {
    AdmissibilityReport rep;
    for (const Field& f : bd.phi) require_same_grid(g, f);
    for (int b : g.boundary_nodes()) {
        for (int i = 0; i < bd.k(); ++i) {
            const double vi = bd.phi[i][b];
            if (vi < -tol)
                rep.issues.push_back({AdmissibilityIssue::negative, b, i, -1, vi});
            for (int j = i + 1; j < bd.k(); ++j) {
                const double prod = vi * bd.phi[j][b];
                if (std::abs(prod) > tol * tol + tol)
                    rep.issues.push_back({AdmissibilityIssue::overlap, b, i, j, prod});
            }
        }
    }
    return rep;
}

void Problem::validate() const {
    if (k < 2) throw ConfigError("problem: k >= 2 required");
    if (static_cast<int>(reactions.size()) != k || static_cast<int>(diffusions.size()) != k ||
        boundary.k() != k)
        throw ConfigError("problem: per-density data must all have length k");
    for (const Field& f : boundary.phi) require_same_grid(grid, f);
    for (const Diffusion& d : diffusions) d.validate_positive(grid);
}

double Problem::max_boundary_value() const {
    double m = 0;
    for (const Field& f : boundary.phi)
        for (int b : grid.boundary_nodes()) m = std::max(m, f[b]);
    return m;
}

double Problem::segregation_tol() const {
    if (tol.segregation_tol >= 0) return tol.segregation_tol;
    return 10.0 * grid.h() * max_boundary_value();
}

bool Problem::unit_diffusion() const {
    for (const Diffusion& d : diffusions)
        if (!d.is_constant() || d.constant_value() != 1.0) return false;
    return true;
}

CoercivityResult check_coercivity(const Problem& p, int i) {
    if (i < 0 || i >= p.k) throw std::invalid_argument("check_coercivity: density index");
    const Grid& g = p.grid;
    const int n = g.num_nodes();
    std::vector<double> d2 = cell_d2(g, p.diffusions[i]);
    std::vector<std::uint8_t> free = interior_mask(g);

    std::vector<double> b(n, 0.0);
    double bmax = 0.0;
    for (int q : g.interior_nodes()) {
        b[q] = p.reactions[i].growth_at(q);
        bmax = std::max(bmax, std::abs(b[q]));
    }

    // quadratic form and mass, over fields vanishing at non-free nodes
    auto form = [&](const Field& w) {
        double q = 0;
        const int nx = g.nx();
        for (int sw : g.active_cells()) {
            const double gx = w[sw + 1] - w[sw];
            const double gy = w[sw + nx] - w[sw];
            q += d2[g.cell(sw % nx, sw / nx)] * (gx * gx + gy * gy);
        }
        for (int q2 : g.interior_nodes()) q -= b[q2] * g.node_weight(q2) * w[q2] * w[q2];
        return q;
    };
    auto mass = [&](const Field& w) {
        double m = 0;
        for (int q : g.interior_nodes()) m += g.node_weight(q) * w[q] * w[q];
        return m;
    };

    const double shift = -(bmax + 1.0);  // below the smallest eigenvalue, keeps solves SPD
    std::vector<double> alpha(n, 0.0);
    for (int q : g.interior_nodes()) alpha[q] = b[q] + shift;

    Field y(g, 0.0);
    for (int q : g.interior_nodes()) y[q] = 1.0;
    double mu = 0, mu_prev = 1e300;
    const int max_outer = 300;
    CoercivityResult out;
    for (int it = 0; it < max_outer; ++it) {
        const double m = std::sqrt(mass(y));
        for (int q : g.interior_nodes()) y[q] /= m;
        Field x(g, 0.0);
        std::vector<double> src(n, 0.0);
        for (int q : g.interior_nodes()) src[q] = y[q];
        cg_solve(g, d2, alpha, free, x, src, 1e-12);
        y = x;
        mu = form(y) / mass(y);
        out.iterations = it + 1;
        if (std::abs(mu - mu_prev) <= 1e-10 * std::max(1.0, std::abs(mu))) break;
        mu_prev = mu;
        if (it == max_outer - 1)
            throw NumericError("check_coercivity: inverse power iteration did not settle");
    }
    out.min_eigenvalue = mu;
    out.holds = mu > 0;
    return out;
}

namespace {

// lap5(d)/d at interior; rim nodes copy the nearest defined neighbor, others 0.
Field laplacian_ratio(const Grid& g, const Field& d) {
    Field lap = laplacian5(g, d);
    Field out(g, 0.0);
    for (int q : g.interior_nodes()) out[q] = lap[q] / d[q];
    const int nx = g.nx();
    for (int bnode : g.boundary_nodes()) {
        const int nbrs[4] = {bnode - 1, bnode + 1, bnode - nx, bnode + nx};
        double v = 0;
        bool found = false;
        for (int nb : nbrs) {
            if (nb < 0 || nb >= g.num_nodes()) continue;
            if (g.interior(nb)) {
                v = out[nb];
                found = true;
                break;
            }
        }
        out[bnode] = found ? v : 0.0;
    }
    return out;
}

}  // namespace

Field RescaledProblem::forward(const Field& u, int i) const {
    Field v = u;
    for (size_t q = 0; q < v.v.size(); ++q)
        if (is_defined(v[static_cast<int>(q)])) v[static_cast<int>(q)] *= d_values[i][static_cast<int>(q)];
    return v;
}

Field RescaledProblem::backward(const Field& v, int i) const {
    Field u = v;
    for (size_t q = 0; q < u.v.size(); ++q)
        if (is_defined(u[static_cast<int>(q)])) u[static_cast<int>(q)] /= d_values[i][static_cast<int>(q)];
    return u;
}

RescaledProblem rescale_to_unit_diffusion(const Problem& p) {
    p.validate();
    const Grid& g = p.grid;
    RescaledProblem out;
    out.problem = p;
    out.d_values.reserve(p.k);

    for (int i = 0; i < p.k; ++i) {
        const Diffusion& d = p.diffusions[i];
        Field dv(g, 1.0);
        if (d.is_constant()) {
            for (int q = 0; q < g.num_nodes(); ++q)
                if (g.masked_in(q)) dv[q] = d.constant_value();
        } else {
            dv = d.nodal_values();
        }
        out.d_values.push_back(dv);

        if (d.is_constant() && d.constant_value() == 1.0) {
            out.problem.reactions[i] = p.reactions[i];
        } else {
            if (!p.reactions[i].is_plain())
                throw std::invalid_argument("rescale_to_unit_diffusion: already rescaled");
            auto data = std::make_shared<RescaleNodeData>();
            data->d = dv;
            data->lap_over_d = laplacian_ratio(g, dv);
            out.problem.reactions[i] = Reaction(p.reactions[i].term(), std::move(data));
        }
        out.problem.diffusions[i] = Diffusion::constant(1.0);

        // traces transform with the state: phi_v = d * phi_u
        for (int b : g.boundary_nodes()) out.problem.boundary.phi[i][b] *= dv[b];

        // boundary term of the change of variables: 1/2 int phi^2 d dd/dnu ds,
        // with a one-sided second-order normal derivative
        const int nx = g.nx();
        for (int b : g.boundary_nodes()) {
            const double phi = p.boundary.phi[i][b];
            if (phi == 0.0) continue;
            int inward = 0;
            for (int step : {1, -1, nx, -nx}) {
                const int n1 = b + step, n2 = b + 2 * step;
                if (n1 >= 0 && n1 < g.num_nodes() && n2 >= 0 && n2 < g.num_nodes() &&
                    g.interior(n1) && g.masked_in(n2)) {
                    inward = step;
                    break;
                }
            }
            if (inward == 0) continue;
            const double dnu =
                (3 * dv[b] - 4 * dv[b + inward] + dv[b + 2 * inward]) / (2 * g.h());
            out.additive_constant += 0.5 * phi * phi * dv[b] * dnu * g.h();
        }
    }
    return out;
}

UniquenessCondition uniqueness_condition_check(const Problem& p, const Field& d_candidate) {
    p.validate();
    const Grid& g = p.grid;
    require_same_grid(g, d_candidate);
    for (int q = 0; q < g.num_nodes(); ++q)
        if (g.masked_in(q) && !(d_candidate[q] > 0))
            throw std::invalid_argument("uniqueness_condition_check: candidate must be positive");

    Field lap_cand = laplacian5(g, d_candidate);
    UniquenessCondition out;
    out.residual = Field(g, undefined_value);
    out.holds = true;

    std::vector<Field> ratios;
    ratios.reserve(p.k);
    for (int i = 0; i < p.k; ++i) {
        if (p.diffusions[i].is_constant())
            ratios.emplace_back(g, 0.0);
        else
            ratios.push_back(laplacian_ratio(g, p.diffusions[i].nodal_values()));
    }

    for (int q : g.interior_nodes()) {
        double worst = 1e300;
        for (int i = 0; i < p.k; ++i) {
            const double di = p.diffusions[i].at(q);
            const double bi = p.reactions[i].term().curvature_sup();
            const double lhs = -lap_cand[q] + (ratios[i][q] - bi / (2.0 * di * di)) * d_candidate[q];
            worst = std::min(worst, lhs);
        }
        out.residual[q] = worst;
        if (worst < -p.tol.residual_tol) out.holds = false;
    }
    return out;
}

}  // namespace segsolve
