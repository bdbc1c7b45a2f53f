#include "segsolve/grid.hpp"

#include <atomic>
#include <cmath>

namespace segsolve {

namespace {
std::atomic<std::uint64_t> next_grid_id{1};
}

Grid Grid::build(const GridSpec& spec) {
    if (spec.nx < 3 || spec.ny < 3)
        throw ConfigError("grid: nx and ny must be >= 3 (got " + std::to_string(spec.nx) +
                          "x" + std::to_string(spec.ny) + ")");
    if (!(spec.extent > 0.0))
        throw ConfigError("grid: extent must be > 0");

    Grid g;
    g.nx_ = spec.nx;
    g.ny_ = spec.ny;
    g.h_ = spec.extent / (spec.nx - 1);
    g.shape_ = spec.shape;
    g.id_ = next_grid_id.fetch_add(1);

    const int n = g.nx_ * g.ny_;
    g.mask_.assign(n, 0);

    if (spec.shape == GridShape::disk) {
        g.cx_ = spec.disk_cx >= 0 ? spec.disk_cx : spec.extent / 2;
        g.cy_ = spec.disk_cy >= 0 ? spec.disk_cy : g.h_ * (g.ny_ - 1) / 2;
        g.radius_ = spec.disk_radius >= 0 ? spec.disk_radius : spec.extent / 2;
        if (!(g.radius_ > 0))
            throw ConfigError("grid: disk radius must be > 0");
    }

    auto inside = [&](int i, int j) -> bool {
        if (spec.shape == GridShape::rectangle) return true;
        const double dx = g.h_ * i - g.cx_;
        const double dy = g.h_ * j - g.cy_;
        return dx * dx + dy * dy < g.radius_ * g.radius_;
    };

    for (int j = 0; j < g.ny_; ++j)
        for (int i = 0; i < g.nx_; ++i)
            if (inside(i, j)) g.mask_[g.node(i, j)] = 1;

    // interior = masked-in with all four neighbors masked-in (lattice edge counts as out)
    for (int j = 0; j < g.ny_; ++j)
        for (int i = 0; i < g.nx_; ++i) {
            const int p = g.node(i, j);
            if (!g.mask_[p]) continue;
            if (i == 0 || i == g.nx_ - 1 || j == 0 || j == g.ny_ - 1) continue;
            if (g.mask_[p - 1] && g.mask_[p + 1] && g.mask_[p - g.nx_] && g.mask_[p + g.nx_])
                g.mask_[p] = 2;
        }

    for (int p = 0; p < n; ++p) {
        if (g.mask_[p] == 2) g.interior_.push_back(p);
        else if (g.mask_[p] == 1) g.bdry_.push_back(p);
    }
    if (g.interior_.empty())
        throw ConfigError("grid: no interior nodes (domain degenerate at this resolution)");

    g.cell_active_.assign(g.num_cells(), 0);
    g.node_weight_.assign(n, 0.0);
    const double cw = g.h_ * g.h_ / 4.0;
    for (int cj = 0; cj < g.ny_ - 1; ++cj)
        for (int ci = 0; ci < g.nx_ - 1; ++ci) {
            const int sw = g.node(ci, cj);
            if (g.mask_[sw] && g.mask_[sw + 1] && g.mask_[sw + g.nx_] && g.mask_[sw + g.nx_ + 1]) {
                g.cell_active_[g.cell(ci, cj)] = 1;
                g.active_cells_.push_back(sw);
                g.node_weight_[sw] += cw;
                g.node_weight_[sw + 1] += cw;
                g.node_weight_[sw + g.nx_] += cw;
                g.node_weight_[sw + g.nx_ + 1] += cw;
            }
        }
    return g;
}

double Grid::distance_to_boundary(double px, double py) const {
    if (shape_ == GridShape::rectangle) {
        const double d = std::min(std::min(px, extent_x() - px), std::min(py, extent_y() - py));
        return std::max(d, 0.0);
    }
    const double r = std::hypot(px - cx_, py - cy_);
    return std::max(radius_ - r, 0.0);
}

Field::Field(const Grid& g, double init) : v(g.num_nodes()), grid_id(g.id()) {
    for (int n = 0; n < g.num_nodes(); ++n) v[n] = g.masked_in(n) ? init : undefined_value;
}

void require_same_grid(const Grid& g, const Field& f) {
    if (f.grid_id != g.id() || f.size() != g.num_nodes())
        throw std::invalid_argument("field is not bound to this grid");
}

void require_same_grid(const Field& a, const Field& b) {
    if (a.grid_id != b.grid_id || a.size() != b.size())
        throw std::invalid_argument("fields live on different grids");
}

Grid build_grid(const GridSpec& spec) { return Grid::build(spec); }

Field laplacian5(const Grid& g, const Field& f) {
    require_same_grid(g, f);
    Field out(g, undefined_value);
    const double inv_h2 = 1.0 / (g.h() * g.h());
    const int nx = g.nx();
    for (int p : g.interior_nodes())
        out[p] = (f[p - 1] + f[p + 1] + f[p - nx] + f[p + nx] - 4.0 * f[p]) * inv_h2;
    return out;
}

std::vector<double> gradient_energy_density(const Grid& g, const Field& f, const Field& d) {
    require_same_grid(g, f);
    require_same_grid(g, d);
    for (int n = 0; n < g.num_nodes(); ++n)
        if (g.masked_in(n) && !(d[n] > 0.0))
            throw std::invalid_argument("gradient_energy_density: d must be positive");

    std::vector<double> cells(g.num_cells(), 0.0);
    const int nx = g.nx();
    for (int sw : g.active_cells()) {
        const double gx = f[sw + 1] - f[sw];
        const double gy = f[sw + nx] - f[sw];
        const double d2 = (d[sw] * d[sw] + d[sw + 1] * d[sw + 1] + d[sw + nx] * d[sw + nx] +
                           d[sw + nx + 1] * d[sw + nx + 1]) / 4.0;
        const int ci = sw % nx, cj = sw / nx;
        cells[g.cell(ci, cj)] = d2 * (gx * gx + gy * gy);
    }
    return cells;
}

std::vector<double> gradient_energy_density(const Grid& g, const Field& f) {
    require_same_grid(g, f);
    std::vector<double> cells(g.num_cells(), 0.0);
    const int nx = g.nx();
    for (int sw : g.active_cells()) {
        const double gx = f[sw + 1] - f[sw];
        const double gy = f[sw + nx] - f[sw];
        cells[g.cell(sw % nx, sw / nx)] = gx * gx + gy * gy;
    }
    return cells;
}

double integrate(const Grid& g, const Field& f) {
    require_same_grid(g, f);
    const int nx = g.nx();
    const double cw = g.h() * g.h() / 4.0;
    double total = 0.0;
    for (int sw : g.active_cells())
        total += cw * (f[sw] + f[sw + 1] + f[sw + nx] + f[sw + nx + 1]);
    return total;
}

namespace {

// area of [x0,x1] x [y0,y1] intersected with the disk of radius r about the origin
double box_disk_overlap(double x0, double x1, double y0, double y1, double r) {
    x0 = std::clamp(x0, -r, r);
    x1 = std::clamp(x1, -r, r);
    if (x1 <= x0) return 0.0;

    auto seg = [&](double t) {  // antiderivative of sqrt(r^2 - x^2)
        t = std::clamp(t / r, -1.0, 1.0);
        return 0.5 * r * r * (t * std::sqrt(std::max(1.0 - t * t, 0.0)) + std::asin(t));
    };

    // breakpoints where the circle crosses the horizontal box edges
    double cuts[8];
    int ncuts = 0;
    cuts[ncuts++] = x0;
    cuts[ncuts++] = x1;
    for (double yl : {y0, y1}) {
        const double s2 = r * r - yl * yl;
        if (s2 > 0) {
            const double s = std::sqrt(s2);
            if (s > x0 && s < x1) cuts[ncuts++] = s;
            if (-s > x0 && -s < x1) cuts[ncuts++] = -s;
        }
    }
    std::sort(cuts, cuts + ncuts);

    double area = 0.0;
    for (int c = 0; c + 1 < ncuts; ++c) {
        const double a = cuts[c], b = cuts[c + 1];
        if (b - a <= 0) continue;
        const double xm = 0.5 * (a + b);
        const double s = std::sqrt(std::max(r * r - xm * xm, 0.0));
        const bool top_circle = s < y1;   // upper limit on this piece
        const bool bot_circle = -s > y0;  // lower limit on this piece
        const double hi_mid = top_circle ? s : y1;
        const double lo_mid = bot_circle ? -s : y0;
        if (hi_mid <= lo_mid) continue;
        double piece = 0.0;
        piece += top_circle ? seg(b) - seg(a) : y1 * (b - a);
        piece -= bot_circle ? -(seg(b) - seg(a)) : y0 * (b - a);
        area += piece;
    }
    return area;
}

}  // namespace

double ball_dirichlet_integral(const Grid& g, const Field& f, double x0, double y0, double r) {
    require_same_grid(g, f);
    if (!(r > 0)) throw std::invalid_argument("ball_dirichlet_integral: r must be > 0");
    if (g.distance_to_boundary(x0, y0) + 1e-12 < r)
        throw std::invalid_argument("ball_dirichlet_integral: ball exits the domain");

    const int nx = g.nx();
    const double h = g.h();
    double total = 0.0;
    for (int sw : g.active_cells()) {
        const double ax = h * (sw % nx) - x0;
        const double ay = h * (sw / nx) - y0;
        // quick reject/accept by corner distances
        const double dx = std::max({ax, -(ax + h), 0.0});
        const double dy = std::max({ay, -(ay + h), 0.0});
        if (dx * dx + dy * dy >= r * r) continue;
        const double gx = f[sw + 1] - f[sw];
        const double gy = f[sw + nx] - f[sw];
        if (gx == 0.0 && gy == 0.0) continue;
        const double fx = std::max(std::abs(ax), std::abs(ax + h));
        const double fy = std::max(std::abs(ay), std::abs(ay + h));
        const double overlap = (fx * fx + fy * fy <= r * r)
                                   ? h * h
                                   : box_disk_overlap(ax, ax + h, ay, ay + h, r);
        total += (gx * gx + gy * gy) * overlap / (h * h);
    }
    return total;
}

}  // namespace segsolve
