#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "segsolve/linsolve.hpp"
#include "segsolve/verify.hpp"

using namespace segsolve;

namespace {

// the exact discrete minimizer of the aligned two-phase problem
State oracle_state(const Problem& p) {
    Field bd(p.grid, 0.0);
    for (int b : p.grid.boundary_nodes()) bd[b] = p.boundary.phi[0][b] - p.boundary.phi[1][b];
    Field H = oracles::sor_laplace(p.grid, bd);
    State s;
    s.u.assign(2, Field(p.grid, 0.0));
    for (int q = 0; q < p.grid.num_nodes(); ++q) {
        if (!p.grid.masked_in(q)) continue;
        s.u[0][q] = std::max(H[q], 0.0);
        s.u[1][q] = std::max(-H[q], 0.0);
    }
    return s;
}

}  // namespace

TEST_CASE("extremality: zero state has zero residuals") {
    Problem p = fixtures::two_phase(17);
    p.reactions.assign(2, Reaction(ReactionTerm::logistic(1.0)));
    State z;
    z.u.assign(2, Field(p.grid, 0.0));
    ExtremalityReport rep = extremality_residuals(z, p);
    CHECK(rep.max_sub() == 0.0);
    CHECK(rep.max_hat() == 0.0);
}

TEST_CASE("extremality: two-phase oracle state") {
    Problem p = fixtures::two_phase(65);
    State s = oracle_state(p);
    ExtremalityReport rep = extremality_residuals(s, p);
    for (const auto& row : rep.rows) {
        CHECK(row.sup_sub_far <= 1e-8);
        CHECK(row.sup_hat_far <= 1e-8);
        CHECK(row.sup_sub <= rep.tol_band);
        CHECK(row.sup_hat <= rep.tol_band);
    }
}

TEST_CASE("extremality: detects a corrupted state") {
    Problem p = fixtures::two_phase(65);
    State s = oracle_state(p);
    // a smooth bump inside supp(u_1)
    for (int q : p.grid.interior_nodes()) {
        const double x = p.grid.x(q), y = p.grid.y(q);
        const double r2 = (x - 0.75) * (x - 0.75) + (y - 0.5) * (y - 0.5);
        if (s.u[0][q] > 0) s.u[0][q] += 0.2 * std::exp(-r2 / 0.01);
    }
    ExtremalityReport rep = extremality_residuals(s, p);
    CHECK(rep.rows[0].sup_sub > rep.tol_band);
    const int worst = rep.rows[0].worst_sub_node;
    CHECK(std::abs(p.grid.x(worst) - 0.75) < 0.15);
    CHECK(std::abs(p.grid.y(worst) - 0.5) < 0.15);
}

TEST_CASE("extremality requires unit diffusion") {
    Problem p = fixtures::variable_diffusion(17);
    State z;
    z.u.assign(2, Field(p.grid, 0.0));
    CHECK_THROWS_AS(extremality_residuals(z, p), std::invalid_argument);
}

TEST_CASE("acf_product: zero state and analytic pair") {
    Problem p = fixtures::two_phase(65);
    const double h = p.grid.h();
    const std::vector<double> radii{4 * h, 8 * h, 16 * h, 32 * h};

    State z;
    z.u.assign(2, Field(p.grid, 0.0));
    MonotonicityTrace t0 = acf_product(z, p, 0.5, 0.5, radii, {{0}, {1}});
    for (double v : t0.values) CHECK(v == 0.0);
    CHECK(t0.nondecreasing(0.0));

    // w1 = (x-1/2)^+, w2 = (1/2-x)^-: each factor is (half ball area)/r^2 = pi/2
    State s = oracle_state(p);  // the harmonic split IS x-1/2 here
    MonotonicityTrace tr = acf_product(s, p, 0.5, 0.5, radii, {{0}, {1}});
    const double expected = (M_PI / 2) * (M_PI / 2);
    for (double v : tr.values) CHECK(std::abs(v - expected) <= 0.1 * expected);
    CHECK(tr.nondecreasing(1e-6 * tr.max_value()));

    // symmetric under swapping the two phases
    MonotonicityTrace sw = acf_product(s, p, 0.5, 0.5, radii, {{1}, {0}});
    for (size_t i = 0; i < tr.values.size(); ++i) CHECK(sw.values[i] == tr.values[i]);

    CHECK_THROWS_AS(acf_product(s, p, 0.95, 0.5, radii, {{0}, {1}}), std::invalid_argument);
}

TEST_CASE("lipschitz_report") {
    Problem p = fixtures::two_phase(65);
    const Grid& g = p.grid;

    State lin;
    lin.u.push_back(oracles::sample(g, [](double x, double) { return x; }));
    lin.u.push_back(Field(g, 0.0));
    LipschitzReport r1 = lipschitz_report(lin, p, 4 * g.h());
    CHECK(r1.l_max == doctest::Approx(1.0).epsilon(1e-12));

    State s = oracle_state(p);
    LipschitzReport r2 = lipschitz_report(s, p, 4 * g.h());
    CHECK(std::abs(r2.l_max - 1.0) <= 0.02);

    CHECK_THROWS_AS(lipschitz_report(s, p, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(lipschitz_report(s, p, 0.5 * g.h()), std::invalid_argument);
}

TEST_CASE("barriers: oracle identities") {
    Problem p = fixtures::two_phase(65);
    State s = oracle_state(p);
    BarrierPair bp = compute_barriers(p, s);
    CHECK(bp.max_violation <= p.tol.residual_tol);
    CHECK(bp.violations.empty());

    // Psi_1 is the harmonic extension of phi_1 - phi_2, so Psi_1^+ = u_1
    double sup = 0;
    for (int q = 0; q < p.grid.num_nodes(); ++q)
        if (p.grid.masked_in(q))
            sup = std::max(sup, std::abs(std::max(bp.lower[0][q], 0.0) - s.u[0][q]));
    CHECK(sup <= 5e-3);

    // upper barriers dominate: harmonic extensions of each trace
    for (int i = 0; i < 2; ++i) {
        Field ext = harmonic_extension(p.grid, p.boundary.phi[i]);
        for (int q : p.grid.interior_nodes())
            CHECK(bp.upper[i][q] == doctest::Approx(ext[q]).epsilon(1e-8));
    }
}

TEST_CASE("barriers: zero data with concave reaction is tight") {
    Problem p = fixtures::two_phase(33);
    p.reactions.assign(2, Reaction(ReactionTerm::concave_quadratic(0.5)));
    for (Field& f : p.boundary.phi) f = Field(p.grid, 0.0);
    State z;
    z.u.assign(2, Field(p.grid, 0.0));
    BarrierPair bp = compute_barriers(p, z);
    CHECK(bp.max_violation == 0.0);
    for (int i = 0; i < 2; ++i)
        for (int q : p.grid.interior_nodes()) {
            CHECK(std::abs(bp.upper[i][q]) <= 1e-12);
            CHECK(std::abs(bp.lower[i][q]) <= 1e-12);
        }
}

TEST_CASE("barriers hold on a solved logistic problem") {
    Problem p = fixtures::two_phase(33);
    p.reactions.assign(2, Reaction(ReactionTerm::logistic(1.0)));
    SolveOptions o;
    Solution sol = solve(p, o);
    REQUIRE(sol.converged);
    BarrierPair bp = compute_barriers(p, sol.state);
    CHECK(bp.max_violation <= p.tol.residual_tol);
}
