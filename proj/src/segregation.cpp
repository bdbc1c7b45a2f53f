#include "segsolve/segregation.hpp"

#include <algorithm>
#include <cmath>

namespace segsolve {

Field hat(const Grid& g, const State& s, int i) {
    if (i < 0 || i >= s.k()) throw std::invalid_argument("hat: density index out of range");
    for (const Field& f : s.u) require_same_grid(g, f);
    Field out(g, 0.0);
    for (int n = 0; n < g.num_nodes(); ++n) {
        if (!g.masked_in(n)) continue;
        double acc = s.u[i][n];
        for (int j = 0; j < s.k(); ++j)
            if (j != i) acc -= s.u[j][n];
        out[n] = acc;
    }
    return out;
}

void pin_boundary(const Grid& g, State& s, const BoundaryData& bd) {
    for (int i = 0; i < s.k(); ++i)
        for (int b : g.boundary_nodes()) s.u[i][b] = bd.phi[i][b];
}

State project_segregated(const Grid& g, const std::vector<Field>& w, const BoundaryData& bd) {
    const int k = static_cast<int>(w.size());
    for (const Field& f : w) require_same_grid(g, f);
    State out;
    out.u.assign(k, Field(g, 0.0));
    std::vector<double> wp(k);
    for (int n = 0; n < g.num_nodes(); ++n) {
        if (!g.masked_in(n)) continue;
        double total = 0;
        for (int i = 0; i < k; ++i) {
            wp[i] = std::max(w[i][n], 0.0);
            total += wp[i];
        }
        for (int i = 0; i < k; ++i) out.u[i][n] = std::max(wp[i] - (total - wp[i]), 0.0);
    }
    pin_boundary(g, out, bd);
    return out;
}

SegregationCheck is_segregated(const Grid& g, const State& s, double tol) {
    SegregationCheck res;
    for (int n = 0; n < g.num_nodes(); ++n) {
        if (!g.masked_in(n)) continue;
        double top = 0, second = 0;
        for (int i = 0; i < s.k(); ++i) {
            const double v = s.u[i][n];
            if (v > top) {
                second = top;
                top = v;
            } else if (v > second) {
                second = v;
            }
        }
        if (second > res.worst_value) {
            res.worst_value = second;
            res.worst_node = n;
        }
    }
    res.segregated = res.worst_value <= tol;
    return res;
}

std::vector<int> multiplicity_map(const Grid& g, const State& s, double r, double tol) {
    if (r < 2.0 * g.h() - 1e-12)
        throw std::invalid_argument("multiplicity_map: radius must be at least 2h");
    for (const Field& f : s.u) require_same_grid(g, f);

    // stencil of node offsets within the ball
    const int reach = static_cast<int>(std::floor(r / g.h() + 1e-9));
    std::vector<std::pair<int, int>> offs;
    for (int dj = -reach; dj <= reach; ++dj)
        for (int di = -reach; di <= reach; ++di)
            if (g.h() * std::hypot(di, dj) <= r + 1e-12) offs.emplace_back(di, dj);

    std::vector<int> m(g.num_nodes(), 0);
    const int nx = g.nx(), ny = g.ny();
    for (int n = 0; n < g.num_nodes(); ++n) {
        if (!g.masked_in(n)) continue;
        const int i0 = n % nx, j0 = n / nx;
        int count = 0;
        for (int c = 0; c < s.k(); ++c) {
            bool seen = false;
            for (auto [di, dj] : offs) {
                const int i = i0 + di, j = j0 + dj;
                if (i < 0 || i >= nx || j < 0 || j >= ny) continue;
                const int q = g.node(i, j);
                if (g.masked_in(q) && s.u[c][q] > tol) {
                    seen = true;
                    break;
                }
            }
            if (seen) ++count;
        }
        m[n] = count;
    }
    return m;
}

std::vector<int> multiplicity_level_set(const Grid& g, const std::vector<int>& m, int h) {
    std::vector<int> nodes;
    for (int n = 0; n < g.num_nodes(); ++n)
        if (g.masked_in(n) && m[n] >= h) nodes.push_back(n);
    return nodes;
}

}  // namespace segsolve
