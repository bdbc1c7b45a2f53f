#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "segsolve/linsolve.hpp"
#include "segsolve/problem.hpp"

using namespace segsolve;

namespace {

Grid unit_square(int n) {
    GridSpec s;
    s.nx = s.ny = n;
    s.extent = 1.0;
    return build_grid(s);
}

BoundaryData split_x_data(const Grid& g) {
    BoundaryData bd;
    bd.phi.assign(2, Field(g, 0.0));
    for (int b : g.boundary_nodes()) {
        bd.phi[0][b] = std::max(g.x(b) - 0.5, 0.0);
        bd.phi[1][b] = std::max(0.5 - g.x(b), 0.0);
    }
    return bd;
}

Problem plain_problem(const Grid& g, ReactionTerm f1, ReactionTerm f2) {
    Problem p;
    p.grid = g;
    p.k = 2;
    p.reactions = {Reaction(f1), Reaction(f2)};
    p.diffusions = {Diffusion::constant(1.0), Diffusion::constant(1.0)};
    p.boundary = split_x_data(g);
    return p;
}

std::vector<ReactionTerm> all_terms() {
    return {ReactionTerm::zero(), ReactionTerm::linear(1.3), ReactionTerm::linear(-0.8),
            ReactionTerm::concave_quadratic(0.6), ReactionTerm::logistic(1.5),
            ReactionTerm::capped_linear(2.0)};
}

}  // namespace

TEST_CASE("reaction terms: point values and extensions") {
    ReactionTerm lin = ReactionTerm::linear(1.0);
    CHECK(lin.eval(2.0) == doctest::Approx(2.0));
    CHECK(lin.potential(2.0) == doctest::Approx(2.0));
    CHECK(lin.eval(-2.0) == doctest::Approx(-2.0));   // odd extension
    CHECK(lin.potential(-2.0) == doctest::Approx(2.0));  // even extension

    for (const ReactionTerm& t : all_terms()) {
        CHECK(t.eval(0.0) == 0.0);
        CHECK(t.potential(0.0) == 0.0);
    }
}

TEST_CASE("reaction terms: Lipschitz and growth bounds hold on samples") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-6.0, 6.0);
    for (const ReactionTerm& t : all_terms()) {
        for (int it = 0; it < 400; ++it) {
            const double s1 = dist(rng), s2 = dist(rng);
            CHECK(std::abs(t.eval(s1) - t.eval(s2)) <=
                  t.lipschitz_bound() * std::abs(s1 - s2) + 1e-12);
        }
        std::uniform_real_distribution<double> pos(1.0, 50.0);  // growth required for s >= 1
        for (int it = 0; it < 400; ++it) {
            const double s = pos(rng);
            CHECK(std::abs(t.eval(s)) <= t.growth_bound() * s + 1e-12);
        }
    }
}

TEST_CASE("potential derivative matches reaction (gradient check)") {
    const double eps = 1e-6;
    for (const ReactionTerm& t : all_terms()) {
        for (double s = -3.0; s <= 3.0; s += 0.37) {  // off the clamp kinks
            const double fd = (t.potential(s + eps) - t.potential(s - eps)) / (2 * eps);
            CHECK(fd == doctest::Approx(t.eval(s)).epsilon(1e-6));
        }
    }
}

TEST_CASE("validate_admissible") {
    Grid g = unit_square(9);
    BoundaryData bd;
    bd.phi.assign(2, Field(g, 0.0));
    for (int b : g.boundary_nodes()) {
        if (g.node_i(b) == 0) bd.phi[0][b] = 1.0;
        if (g.node_i(b) == g.nx() - 1) bd.phi[1][b] = 1.0;
    }
    CHECK(validate_admissible(g, bd, 1e-12).admissible());

    BoundaryData shared = bd;
    const int corner = g.node(0, 0);
    shared.phi[1][corner] = 1.0;  // overlaps phi_1 there
    auto rep = validate_admissible(g, shared, 1e-12);
    REQUIRE_FALSE(rep.admissible());
    CHECK(rep.issues[0].kind == AdmissibilityIssue::overlap);
    CHECK(rep.issues[0].node == corner);

    BoundaryData neg = bd;
    neg.phi[0][g.node(0, 4)] = -0.1;
    auto rep2 = validate_admissible(g, neg, 1e-12);
    REQUIRE_FALSE(rep2.admissible());
    bool has_negative = false;
    for (const auto& is : rep2.issues)
        if (is.kind == AdmissibilityIssue::negative) has_negative = true;
    CHECK(has_negative);
}

TEST_CASE("coercivity check against power-iteration oracle") {
    Grid g = unit_square(65);

    Problem p0 = plain_problem(g, ReactionTerm::zero(), ReactionTerm::zero());
    CoercivityResult r0 = check_coercivity(p0, 0);
    CHECK(r0.holds);
    const double mu_oracle = oracles::min_eig_plain_form(g, 0.0);
    CHECK(std::abs(r0.min_eigenvalue - 2 * M_PI * M_PI) < 0.05 * 2 * M_PI * M_PI);
    CHECK(r0.min_eigenvalue == doctest::Approx(mu_oracle).epsilon(1e-4));

    // b = 30 > 2*pi^2: the form goes indefinite
    Problem p30 = plain_problem(g, ReactionTerm::linear(30.0), ReactionTerm::zero());
    CoercivityResult r30 = check_coercivity(p30, 0);
    CHECK_FALSE(r30.holds);
    CHECK(r30.min_eigenvalue == doctest::Approx(oracles::min_eig_plain_form(g, 30.0)).epsilon(1e-3));

    // zero growth holds for any positive diffusion
    Problem pv = plain_problem(g, ReactionTerm::zero(), ReactionTerm::zero());
    pv.diffusions[0] = Diffusion::nodal(
        oracles::sample(g, [](double x, double y) { return 1.0 + 0.5 * x + 0.25 * y; }));
    CHECK(check_coercivity(pv, 0).holds);
}

TEST_CASE("coercivity is monotone in the growth bound") {
    Grid g = unit_square(33);
    double prev = 1e300;
    for (double b : {0.0, 5.0, 10.0, 18.0}) {
        Problem p = plain_problem(g, b == 0 ? ReactionTerm::zero() : ReactionTerm::linear(b),
                                  ReactionTerm::zero());
        const double mu = check_coercivity(p, 0).min_eigenvalue;
        CHECK(mu <= prev + 1e-9);
        prev = mu;
    }
}

TEST_CASE("rescale_to_unit_diffusion: identity and constant scaling") {
    Grid g = unit_square(17);
    Problem p = plain_problem(g, ReactionTerm::zero(), ReactionTerm::zero());
    RescaledProblem same = rescale_to_unit_diffusion(p);
    CHECK(same.problem.unit_diffusion());
    CHECK(same.additive_constant == doctest::Approx(0.0));

    Problem p2 = plain_problem(g, ReactionTerm::zero(), ReactionTerm::zero());
    p2.diffusions = {Diffusion::constant(2.0), Diffusion::constant(2.0)};
    RescaledProblem r = rescale_to_unit_diffusion(p2);
    Field u = oracles::sample(g, [](double, double) { return 3.0; });
    Field v = r.forward(u, 0);
    for (int q : g.interior_nodes()) CHECK(v[q] == doctest::Approx(6.0));
    Field back = r.backward(v, 0);
    for (int q : g.interior_nodes()) CHECK(back[q] == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("rescale round trip is the identity") {
    Grid g = unit_square(17);
    Problem p = plain_problem(g, ReactionTerm::logistic(1.0), ReactionTerm::zero());
    p.diffusions[0] = Diffusion::nodal(oracles::sample(
        g, [](double x, double y) { return 1.0 + 0.3 * std::sin(M_PI * x) * std::sin(M_PI * y); }));
    RescaledProblem r = rescale_to_unit_diffusion(p);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(0.0, 2.0);
    Field u(g, 0.0);
    for (int q = 0; q < g.num_nodes(); ++q)
        if (g.masked_in(q)) u[q] = dist(rng);
    Field rt = r.backward(r.forward(u, 0), 0);
    for (int q = 0; q < g.num_nodes(); ++q)
        if (g.masked_in(q)) CHECK(rt[q] == doctest::Approx(u[q]).epsilon(1e-12));
}

TEST_CASE("rescale rejects nonpositive diffusion") {
    Grid g = unit_square(9);
    Field d = oracles::sample(g, [](double x, double) { return x - 0.3; });  // sign change
    CHECK_THROWS(Diffusion::nodal(d).validate_positive(g));
}

TEST_CASE("uniqueness condition: constants") {
    Grid g = unit_square(17);
    Field one = oracles::sample(g, [](double, double) { return 1.0; });

    Problem concave = plain_problem(g, ReactionTerm::concave_quadratic(0.5),
                                    ReactionTerm::concave_quadratic(0.5));
    UniquenessCondition ok = uniqueness_condition_check(concave, one);
    CHECK(ok.holds);
    for (int q : g.interior_nodes()) CHECK(ok.residual[q] == doctest::Approx(0.5));

    Problem hot = plain_problem(g, ReactionTerm::linear(4.0), ReactionTerm::linear(4.0));
    UniquenessCondition bad = uniqueness_condition_check(hot, one);
    CHECK_FALSE(bad.holds);
    for (int q : g.interior_nodes()) CHECK(bad.residual[q] == doctest::Approx(-2.0));

    Field neg = oracles::sample(g, [](double x, double) { return x - 0.5; });
    CHECK_THROWS_AS(uniqueness_condition_check(hot, neg), std::invalid_argument);
}

TEST_CASE("uniqueness condition flips as the domain grows") {
    // b = 4: a positive supersolution of -lap d >= 2 d exists iff lambda_1 > ~2,
    // i.e. squares smaller than side ~pi.
    auto holds_on_square = [&](double side) {
        GridSpec s;
        s.nx = s.ny = 65;
        s.extent = side;
        Grid g = build_grid(s);
        Problem p = plain_problem(g, ReactionTerm::linear(4.0), ReactionTerm::linear(4.0));
        p.boundary = split_x_data(g);
        const double delta = 0.01 * std::pow(std::sin(M_PI * g.h() / side), 2);
        Field cand = oracles::sample(g, [&](double x, double y) {
            return std::sin(M_PI * x / side) * std::sin(M_PI * y / side) + delta;
        });
        return uniqueness_condition_check(p, cand).holds;
    };
    CHECK(holds_on_square(2.0));
    CHECK(holds_on_square(3.0));
    CHECK_FALSE(holds_on_square(3.5));
}

TEST_CASE("problem validation") {
    Grid g = unit_square(9);
    Problem p = plain_problem(g, ReactionTerm::zero(), ReactionTerm::zero());
    CHECK_NOTHROW(p.validate());
    p.k = 1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}
