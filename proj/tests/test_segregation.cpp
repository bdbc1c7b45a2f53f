#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "segsolve/segregation.hpp"

using namespace segsolve;

namespace {

Grid unit_square(int n) {
    GridSpec s;
    s.nx = s.ny = n;
    s.extent = 1.0;
    return build_grid(s);
}

BoundaryData zero_bd(const Grid& g, int k) {
    BoundaryData bd;
    bd.phi.assign(k, Field(g, 0.0));
    return bd;
}

State random_tuple(const Grid& g, int k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.0, 2.0);
    State s;
    for (int i = 0; i < k; ++i) {
        Field f(g, 0.0);
        for (int q = 0; q < g.num_nodes(); ++q)
            if (g.masked_in(q)) f[q] = dist(rng);
        s.u.push_back(std::move(f));
    }
    return s;
}

}  // namespace

TEST_CASE("hat: node-wise values") {
    Grid g = unit_square(5);
    State s;
    s.u.assign(3, Field(g, 0.0));
    for (int q = 0; q < g.num_nodes(); ++q)
        if (g.masked_in(q)) s.u[0][q] = 1.7;

    Field h1 = hat(g, s, 0), h2 = hat(g, s, 1), h3 = hat(g, s, 2);
    for (int q = 0; q < g.num_nodes(); ++q) {
        if (!g.masked_in(q)) continue;
        CHECK(h1[q] == doctest::Approx(1.7));
        CHECK(h2[q] == doctest::Approx(-1.7));
        CHECK(h3[q] == doctest::Approx(-1.7));
    }

    // (1,1) at a node: hat vanishes there
    State t;
    t.u.assign(2, Field(g, 0.0));
    t.u[0][g.node(2, 2)] = 1.0;
    t.u[1][g.node(2, 2)] = 1.0;
    CHECK(hat(g, t, 0)[g.node(2, 2)] == doctest::Approx(0.0));

    CHECK_THROWS_AS(hat(g, s, 5), std::invalid_argument);
}

TEST_CASE("project_segregated: node arithmetic") {
    Grid g = unit_square(5);
    std::vector<Field> w(2, Field(g, 0.0));
    const int p = g.node(2, 2);
    w[0][p] = 3.0;
    w[1][p] = 1.0;
    State s = project_segregated(g, w, zero_bd(g, 2));
    CHECK(s.u[0][p] == doctest::Approx(2.0));
    CHECK(s.u[1][p] == doctest::Approx(0.0));

    w[0][p] = 1.0;  // tie annihilates
    State t = project_segregated(g, w, zero_bd(g, 2));
    CHECK(t.u[0][p] == 0.0);
    CHECK(t.u[1][p] == 0.0);
}

TEST_CASE("projection properties on random tuples") {
    std::mt19937_64 rng(19);
    Grid g = unit_square(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 3);
        State w = random_tuple(g, k, rng);
        State v = project_segregated(g, w.u, zero_bd(g, k));

        // exact segregation: at most one strictly positive per node
        for (int q = 0; q < g.num_nodes(); ++q) {
            if (!g.masked_in(q)) continue;
            int positive = 0;
            for (int i = 0; i < k; ++i)
                if (v.u[i][q] > 0) ++positive;
            CHECK(positive <= 1);
        }
        // order: v_i <= w_i
        for (int i = 0; i < k; ++i)
            for (int q : g.interior_nodes()) CHECK(v.u[i][q] <= w.u[i][q] + 1e-15);

        // idempotence, exact node-wise
        State vv = project_segregated(g, v.u, zero_bd(g, k));
        for (int i = 0; i < k; ++i)
            for (int q = 0; q < g.num_nodes(); ++q)
                if (g.masked_in(q)) CHECK(vv.u[i][q] == v.u[i][q]);

        // hat/positive-part consistency on the segregated output
        for (int i = 0; i < k; ++i) {
            Field hi = hat(g, v, i);
            for (int q : g.interior_nodes()) CHECK(std::max(hi[q], 0.0) == v.u[i][q]);
        }
    }
}

TEST_CASE("segregated fixed points project to themselves") {
    std::mt19937_64 rng(23);
    Grid g = unit_square(9);
    std::uniform_real_distribution<double> dist(0.0, 3.0);
    State s;
    s.u.assign(3, Field(g, 0.0));
    for (int q : g.interior_nodes()) s.u[rng() % 3][q] = dist(rng);  // one component per node
    REQUIRE(is_segregated(g, s, 0.0).segregated);
    State v = project_segregated(g, s.u, zero_bd(g, 3));
    for (int i = 0; i < 3; ++i)
        for (int q = 0; q < g.num_nodes(); ++q)
            if (g.masked_in(q)) CHECK(v.u[i][q] == s.u[i][q]);
}

TEST_CASE("is_segregated reports the worst node") {
    Grid g = unit_square(5);
    State s;
    s.u.assign(3, Field(g, 0.0));
    CHECK(is_segregated(g, s, 0.0).segregated);  // zero state

    const int p = g.node(1, 2);
    s.u[0][p] = 1.0;
    s.u[1][p] = 1.0;
    SegregationCheck chk = is_segregated(g, s, 0.5);
    CHECK_FALSE(chk.segregated);
    CHECK(chk.worst_node == p);
    CHECK(chk.worst_value == doctest::Approx(1.0));
}

TEST_CASE("multiplicity_map") {
    Grid g = unit_square(65);
    const double h = g.h();

    State zero;
    zero.u.assign(2, Field(g, 0.0));
    auto m0 = multiplicity_map(g, zero, 3 * h, 1e-12);
    for (int q = 0; q < g.num_nodes(); ++q)
        if (g.masked_in(q)) CHECK(m0[q] == 0);

    // the split-harmonic state: interface on the x = 1/2 node column
    State s;
    s.u.push_back(oracles::sample(g, [](double x, double) { return std::max(x - 0.5, 0.0); }));
    s.u.push_back(oracles::sample(g, [](double x, double) { return std::max(0.5 - x, 0.0); }));
    auto m = multiplicity_map(g, s, 2.5 * h, 1e-12);
    for (int q = 0; q < g.num_nodes(); ++q) {
        if (!g.masked_in(q)) continue;
        const double d = std::abs(g.x(q) - 0.5);
        if (d < 1e-12) CHECK(m[q] == 2);
        if (d > 4 * h) CHECK(m[q] == 1);
    }
    auto z2 = multiplicity_level_set(g, m, 2);
    CHECK(z2.size() >= 65);

    // monotone in r
    auto m_small = multiplicity_map(g, s, 2 * h, 1e-12);
    auto m_big = multiplicity_map(g, s, 6 * h, 1e-12);
    for (int q = 0; q < g.num_nodes(); ++q)
        if (g.masked_in(q)) CHECK(m_big[q] >= m_small[q]);

    CHECK_THROWS_AS(multiplicity_map(g, s, 1.2 * h, 1e-12), std::invalid_argument);
}
