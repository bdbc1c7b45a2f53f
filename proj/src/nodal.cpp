#include "segsolve/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "segsolve/verify.hpp"

namespace segsolve {

double bilinear(const Grid& g, const Field& f, double x, double y) {
    const double h = g.h();
    int ci = static_cast<int>(std::floor(x / h));
    int cj = static_cast<int>(std::floor(y / h));
    ci = std::clamp(ci, 0, g.nx() - 2);
    cj = std::clamp(cj, 0, g.ny() - 2);
    const double tx = std::clamp(x / h - ci, 0.0, 1.0);
    const double ty = std::clamp(y / h - cj, 0.0, 1.0);
    const int sw = g.node(ci, cj);
    auto val = [&](int n) { return is_defined(f[n]) ? f[n] : 0.0; };
    return (1 - tx) * (1 - ty) * val(sw) + tx * (1 - ty) * val(sw + 1) +
           (1 - tx) * ty * val(sw + g.nx()) + tx * ty * val(sw + g.nx() + 1);
}

namespace {

constexpr double sign_eps = 1e-300;  // nudges exact zeros onto the positive side

// edge keys: 2*node for the horizontal edge (node, node+1), 2*node+1 for vertical
long edge_key_h(int node) { return 2L * node; }
long edge_key_v(int node) { return 2L * node + 1; }

struct Segment {
    long e1, e2;
    std::array<double, 2> p1, p2;
};

std::array<double, 2> edge_cross(const Grid& g, int na, int nb, double ga, double gb) {
    const double t = ga / (ga - gb);
    return {g.x(na) + t * (g.x(nb) - g.x(na)), g.y(na) + t * (g.y(nb) - g.y(na))};
}

// marching squares on phi = u_i - u_j over the given cells
std::vector<Segment> trace_segments(const Grid& g, const Field& ui, const Field& uj,
                                    const std::vector<int>& cells) {
    std::vector<Segment> segs;
    const int nx = g.nx();
    for (int sw : cells) {
        const int se = sw + 1, nw = sw + nx, ne = sw + nx + 1;
        double v[4] = {ui[sw] - uj[sw], ui[se] - uj[se], ui[ne] - uj[ne], ui[nw] - uj[nw]};
        for (double& x : v)
            if (x == 0.0) x = sign_eps;
        const bool s0 = v[0] > 0, s1 = v[1] > 0, s2 = v[2] > 0, s3 = v[3] > 0;
        if (s0 == s1 && s1 == s2 && s2 == s3) continue;

        struct Hit {
            long key;
            std::array<double, 2> pt;
        };
        std::vector<Hit> hits;
        if (s0 != s1) hits.push_back({edge_key_h(sw), edge_cross(g, sw, se, v[0], v[1])});
        if (s1 != s2) hits.push_back({edge_key_v(se), edge_cross(g, se, ne, v[1], v[2])});
        if (s3 != s2) hits.push_back({edge_key_h(nw), edge_cross(g, nw, ne, v[3], v[2])});
        if (s0 != s3) hits.push_back({edge_key_v(sw), edge_cross(g, sw, nw, v[0], v[3])});

        if (hits.size() == 2) {
            segs.push_back({hits[0].key, hits[1].key, hits[0].pt, hits[1].pt});
        } else if (hits.size() == 4) {
            // saddle: use the cell-center sign to pair the crossings
            const double center = (v[0] + v[1] + v[2] + v[3]) / 4;
            // hits order: bottom, right, top, left
            if ((center > 0) == s0) {
                segs.push_back({hits[0].key, hits[1].key, hits[0].pt, hits[1].pt});
                segs.push_back({hits[2].key, hits[3].key, hits[2].pt, hits[3].pt});
            } else {
                segs.push_back({hits[0].key, hits[3].key, hits[0].pt, hits[3].pt});
                segs.push_back({hits[1].key, hits[2].key, hits[1].pt, hits[2].pt});
            }
        }
    }
    return segs;
}

std::vector<Polyline> chain_polylines(const std::vector<Segment>& segs, int la, int lb) {
    std::multimap<long, size_t> by_edge;
    for (size_t s = 0; s < segs.size(); ++s) {
        by_edge.insert({segs[s].e1, s});
        by_edge.insert({segs[s].e2, s});
    }
    std::vector<char> used(segs.size(), 0);
    std::vector<Polyline> out;

    auto walk = [&](size_t start, long from_edge) {
        Polyline pl;
        pl.label_a = la;
        pl.label_b = lb;
        long cur_edge = from_edge;
        size_t cur = start;
        pl.points.push_back(segs[cur].e1 == cur_edge ? segs[cur].p1 : segs[cur].p2);
        while (true) {
            used[cur] = 1;
            const long next_edge = segs[cur].e1 == cur_edge ? segs[cur].e2 : segs[cur].e1;
            pl.points.push_back(segs[cur].e1 == cur_edge ? segs[cur].p2 : segs[cur].p1);
            size_t next = cur;
            auto [lo, hi] = by_edge.equal_range(next_edge);
            for (auto it = lo; it != hi; ++it)
                if (!used[it->second]) next = it->second;
            if (next == cur) {
                pl.closed = next_edge == from_edge && pl.points.size() > 3;
                break;
            }
            cur = next;
            cur_edge = next_edge;
        }
        return pl;
    };

    // open chains first: start at edges of degree 1
    std::map<long, int> degree;
    for (const Segment& s : segs) {
        degree[s.e1]++;
        degree[s.e2]++;
    }
    for (size_t s = 0; s < segs.size(); ++s) {
        if (used[s]) continue;
        if (degree[segs[s].e1] == 1)
            out.push_back(walk(s, segs[s].e1));
        else if (degree[segs[s].e2] == 1)
            out.push_back(walk(s, segs[s].e2));
    }
    for (size_t s = 0; s < segs.size(); ++s)
        if (!used[s]) out.push_back(walk(s, segs[s].e1));  // remaining loops
    return out;
}

std::vector<std::vector<int>> connected_components(const Grid& g,
                                                   const std::vector<std::uint8_t>& in_set) {
    std::vector<std::vector<int>> comps;
    std::vector<char> seen(g.num_nodes(), 0);
    const int nx = g.nx();
    for (int start = 0; start < g.num_nodes(); ++start) {
        if (!in_set[start] || seen[start]) continue;
        comps.emplace_back();
        std::queue<int> bfs;
        bfs.push(start);
        seen[start] = 1;
        while (!bfs.empty()) {
            const int q = bfs.front();
            bfs.pop();
            comps.back().push_back(q);
            for (int nb : {q - 1, q + 1, q - nx, q + nx}) {
                if (nb < 0 || nb >= g.num_nodes()) continue;
                const bool row_jump = std::abs(nb - q) == 1 && nb / nx != q / nx;
                if (row_jump || seen[nb] || !in_set[nb]) continue;
                seen[nb] = 1;
                bfs.push(nb);
            }
        }
    }
    return comps;
}

}  // namespace

NodalReport extract_interfaces(const Grid& g, const State& s, double tol) {
    NodalReport rep;
    rep.support_nonempty.assign(s.k(), 0);
    for (int i = 0; i < s.k(); ++i)
        for (int q = 0; q < g.num_nodes(); ++q)
            if (g.masked_in(q) && s.u[i][q] > tol) {
                rep.support_nonempty[i] = 1;
                break;
            }
    if (s.k() == 0) return rep;

    const std::vector<int> lab = active_labels(g, s, tol);
    const int nx = g.nx(), ny = g.ny();

    // cells eligible at all: active with every corner interior (one-cell boundary margin)
    std::vector<int> eligible;
    for (int sw : g.active_cells()) {
        if (g.interior(sw) && g.interior(sw + 1) && g.interior(sw + nx) &&
            g.interior(sw + nx + 1))
            eligible.push_back(sw);
    }

    for (int i = 0; i < s.k(); ++i)
        for (int j = i + 1; j < s.k(); ++j) {
            std::vector<int> cells;
            for (int sw : eligible) {
                bool only_pair = true;
                bool seen_i = false, seen_j = false;
                for (int c : {sw, sw + 1, sw + nx, sw + nx + 1}) {
                    if (lab[c] != 0 && lab[c] != i + 1 && lab[c] != j + 1) only_pair = false;
                    if (lab[c] == i + 1) seen_i = true;
                    if (lab[c] == j + 1) seen_j = true;
                }
                if (!only_pair) continue;
                if (!seen_i || !seen_j) {
                    // look one ring out for the missing label
                    const int ci = sw % nx, cj = sw / nx;
                    for (int dj = -1; dj <= 2 && !(seen_i && seen_j); ++dj)
                        for (int di = -1; di <= 2; ++di) {
                            const int ii = ci + di, jj = cj + dj;
                            if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) continue;
                            const int q = g.node(ii, jj);
                            if (lab[q] == i + 1) seen_i = true;
                            if (lab[q] == j + 1) seen_j = true;
                        }
                }
                if (seen_i && seen_j) cells.push_back(sw);
            }
            if (cells.empty()) continue;
            auto segs = trace_segments(g, s.u[i], s.u[j], cells);
            auto lines = chain_polylines(segs, i, j);
            for (Polyline& pl : lines)
                if (pl.points.size() >= 2) rep.interfaces.push_back(std::move(pl));
        }

    // zero regions: all densities at or below tol
    std::vector<std::uint8_t> zero(g.num_nodes(), 0);
    for (int q = 0; q < g.num_nodes(); ++q) {
        if (!g.masked_in(q)) continue;
        bool all_zero = true;
        for (int i = 0; i < s.k(); ++i)
            if (s.u[i][q] > tol) all_zero = false;
        zero[q] = all_zero ? 1 : 0;
    }
    rep.zero_regions = connected_components(g, zero);
    return rep;
}

void locate_multiple_points(NodalReport& report, const Grid& g, const State& s, double radius,
                            double tol) {
    report.multiple_points.clear();

    struct Endpoint {
        double x, y;
    };
    std::vector<Endpoint> eps;
    const double margin = 2.5 * g.h();
    for (const Polyline& pl : report.interfaces) {
        if (pl.closed || pl.points.empty()) continue;
        for (const auto& pt : {pl.points.front(), pl.points.back()})
            if (g.distance_to_boundary(pt[0], pt[1]) > margin) eps.push_back({pt[0], pt[1]});
    }
    if (eps.empty()) return;

    // single-linkage clustering within `radius`
    std::vector<int> parent(eps.size());
    for (size_t a = 0; a < eps.size(); ++a) parent[a] = static_cast<int>(a);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (size_t a = 0; a < eps.size(); ++a)
        for (size_t b = a + 1; b < eps.size(); ++b)
            if (std::hypot(eps[a].x - eps[b].x, eps[a].y - eps[b].y) <= radius)
                parent[find(static_cast<int>(a))] = find(static_cast<int>(b));

    std::map<int, std::vector<size_t>> clusters;
    for (size_t a = 0; a < eps.size(); ++a) clusters[find(static_cast<int>(a))].push_back(a);

    for (const auto& [root, members] : clusters) {
        if (members.size() < 2) continue;
        double cx = 0, cy = 0;
        for (size_t m : members) {
            cx += eps[m].x;
            cy += eps[m].y;
        }
        cx /= members.size();
        cy /= members.size();

        // count labels active within the radius of the centroid
        int active = 0;
        const int reach = static_cast<int>(std::ceil(radius / g.h())) + 1;
        const int ci = static_cast<int>(std::round(cx / g.h()));
        const int cj = static_cast<int>(std::round(cy / g.h()));
        for (int i = 0; i < s.k(); ++i) {
            bool seen = false;
            for (int dj = -reach; dj <= reach && !seen; ++dj)
                for (int di = -reach; di <= reach; ++di) {
                    const int ii = ci + di, jj = cj + dj;
                    if (ii < 0 || ii >= g.nx() || jj < 0 || jj >= g.ny()) continue;
                    const int q = g.node(ii, jj);
                    if (!g.masked_in(q)) continue;
                    if (std::hypot(g.x(q) - cx, g.y(q) - cy) > radius) continue;
                    if (s.u[i][q] > tol) {
                        seen = true;
                        break;
                    }
                }
            if (seen) ++active;
        }
        if (active >= 3) {
            MultiplePoint mp;
            mp.x = cx;
            mp.y = cy;
            mp.multiplicity = active;
            report.multiple_points.push_back(mp);
        }
    }
}

JunctionAnalysis junction_analysis(const Grid& g, const State& s, double x0, double y0,
                                   int multiplicity, std::span<const double> radii) {
    if (multiplicity < 3) throw std::invalid_argument("junction_analysis: multiplicity < 3");
    if (radii.empty()) throw std::invalid_argument("junction_analysis: no radii");
    double r_max = 0;
    for (double r : radii) {
        r_max = std::max(r_max, r);
        if (g.distance_to_boundary(x0, y0) + 1e-12 < r)
            throw std::invalid_argument("junction_analysis: annulus leaves the domain");
    }

    JunctionAnalysis out;
    const int M = 1440;
    auto sample_u = [&](double r, double th) {
        double tot = 0;
        for (int i = 0; i < s.k(); ++i)
            tot += std::max(bilinear(g, s.u[i], x0 + r * std::cos(th), y0 + r * std::sin(th)), 0.0);
        return tot;
    };
    auto label_at = [&](double r, double th) {
        int best = -1;
        double top = 0;
        for (int i = 0; i < s.k(); ++i) {
            const double v = bilinear(g, s.u[i], x0 + r * std::cos(th), y0 + r * std::sin(th));
            if (v > top) {
                top = v;
                best = i;
            }
        }
        return best;
    };

    // (a) sector angles on the largest circle: crossings of consecutive labels
    std::vector<double> crossings;
    int prev_lab = -1;
    double prev_th = 0;
    for (int m = 0; m <= M; ++m) {
        const double th = -M_PI + 2 * M_PI * m / M;
        const int l = label_at(r_max, th);
        if (l < 0) continue;
        if (prev_lab >= 0 && l != prev_lab) {
            // refine the crossing of u_prev - u_l by bisection
            double lo = prev_th, hi = th;
            for (int it = 0; it < 60; ++it) {
                const double mid = (lo + hi) / 2;
                const double diff =
                    bilinear(g, s.u[prev_lab], x0 + r_max * std::cos(mid), y0 + r_max * std::sin(mid)) -
                    bilinear(g, s.u[l], x0 + r_max * std::cos(mid), y0 + r_max * std::sin(mid));
                (diff > 0 ? lo : hi) = mid;
            }
            crossings.push_back((lo + hi) / 2);
        }
        prev_lab = l;
        prev_th = th;
    }
    for (size_t c = 1; c < crossings.size(); ++c)
        out.sector_angles.push_back(crossings[c] - crossings[c - 1]);
    if (crossings.size() >= 2)
        out.sector_angles.push_back(2 * M_PI - (crossings.back() - crossings.front()));

    // (b) exponent: log-log slope of circle means
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int np = 0;
    for (double r : radii) {
        double mean = 0;
        for (int m = 0; m < M; ++m) mean += sample_u(r, -M_PI + 2 * M_PI * m / M);
        mean /= M;
        if (mean <= 0) continue;
        const double lx = std::log(r), ly = std::log(mean);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++np;
    }
    if (np >= 2) out.exponent = (np * sxy - sx * sy) / (np * sxx - sx * sx);

    // (c) phase: maximize correlation with |cos((h/2)(theta + theta0))|
    const double period = 2 * M_PI / multiplicity;
    std::vector<double> profile(M);
    for (int m = 0; m < M; ++m) profile[m] = sample_u(r_max, -M_PI + 2 * M_PI * m / M);
    auto corr = [&](double th0) {
        double c = 0;
        for (int m = 0; m < M; ++m) {
            const double th = -M_PI + 2 * M_PI * m / M;
            c += profile[m] * std::abs(std::cos(multiplicity * 0.5 * (th + th0)));
        }
        return c;
    };
    double best_th0 = 0, best_c = -1;
    const int scan = 2000;
    for (int m = 0; m < scan; ++m) {
        const double th0 = period * m / scan;
        const double c = corr(th0);
        if (c > best_c) {
            best_c = c;
            best_th0 = th0;
        }
    }
    double lo = best_th0 - period / scan, hi = best_th0 + period / scan;
    for (int it = 0; it < 50; ++it) {
        const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (corr(m1) < corr(m2)) lo = m1;
        else hi = m2;
    }
    out.theta0 = (lo + hi) / 2;

    // (d) gradient decay: max centered-difference gradient per annulus
    const int nx = g.nx();
    for (double r : radii) {
        double mx = 0;
        for (int q : g.interior_nodes()) {
            const double d = std::hypot(g.x(q) - x0, g.y(q) - y0);
            if (d <= r / 2 || d > r) continue;
            if (!g.masked_in(q - 1) || !g.masked_in(q + 1) || !g.masked_in(q - nx) ||
                !g.masked_in(q + nx))
                continue;
            double tot_e = 0, tot_w = 0, tot_n = 0, tot_s = 0;
            for (int i = 0; i < s.k(); ++i) {
                tot_e += s.u[i][q + 1];
                tot_w += s.u[i][q - 1];
                tot_n += s.u[i][q + nx];
                tot_s += s.u[i][q - nx];
            }
            const double gx = (tot_e - tot_w) / (2 * g.h());
            const double gy = (tot_n - tot_s) / (2 * g.h());
            mx = std::max(mx, std::hypot(gx, gy));
        }
        out.gradient_decay.push_back({r, mx});
    }
    return out;
}

AdjacencyGraph adjacency_graph(const NodalReport& report, const Grid& g, const State& s,
                               double tol) {
    AdjacencyGraph out;
    for (int i = 0; i < s.k(); ++i) {
        bool nonempty = false;
        for (int q = 0; q < g.num_nodes(); ++q)
            if (g.masked_in(q) && s.u[i][q] > tol) {
                nonempty = true;
                break;
            }
        if (nonempty) out.vertices.push_back(i);
        out.support_components.push_back(nonempty ? support_connectedness(g, s, i, tol) : 0);
    }
    std::map<std::pair<int, int>, std::vector<int>> edges;
    for (size_t l = 0; l < report.interfaces.size(); ++l) {
        const Polyline& pl = report.interfaces[l];
        edges[{pl.label_a, pl.label_b}].push_back(static_cast<int>(l));
    }
    for (const auto& [pair, lines] : edges)
        out.edges.push_back({pair.first, pair.second, lines});
    return out;
}

int support_connectedness(const Grid& g, const State& s, int i, double tol) {
    if (i < 0 || i >= s.k()) throw std::invalid_argument("support_connectedness: density index");
    std::vector<std::uint8_t> in_set(g.num_nodes(), 0);
    for (int q = 0; q < g.num_nodes(); ++q)
        if (g.masked_in(q) && s.u[i][q] > tol) in_set[q] = 1;
    return static_cast<int>(connected_components(g, in_set).size());
}

}  // namespace segsolve
