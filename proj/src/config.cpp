#include "segsolve/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace segsolve {

namespace {

struct Entry {
    int line;
    std::string key, value;
};

using Sections = std::vector<std::pair<std::string, std::vector<Entry>>>;

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Sections tokenize(const std::string& text) {
    Sections out;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header");
            out.emplace_back(trim(s.substr(1, s.size() - 2)), std::vector<Entry>{});
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value'");
        if (out.empty()) fail(line, "key outside any section");
        out.back().second.push_back({line, trim(s.substr(0, eq)), trim(s.substr(eq + 1))});
    }
    return out;
}

double parse_real(const Entry& e) {
    char* end = nullptr;
    const double v = std::strtod(e.value.c_str(), &end);
    if (end == e.value.c_str() || *end != '\0')
        fail(e.line, "field '" + e.key + "': expected a real, got '" + e.value + "'");
    return v;
}

int parse_int(const Entry& e) {
    char* end = nullptr;
    const long v = std::strtol(e.value.c_str(), &end, 10);
    if (end == e.value.c_str() || *end != '\0')
        fail(e.line, "field '" + e.key + "': expected an integer, got '" + e.value + "'");
    return static_cast<int>(v);
}

bool parse_bool(const Entry& e) {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    fail(e.line, "field '" + e.key + "': expected true or false, got '" + e.value + "'");
}

std::vector<std::string> words(const std::string& v) {
    std::istringstream in(v);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

void parse_density(const std::vector<Entry>& entries, DensityConfig& dc) {
    for (const Entry& e : entries) {
        if (e.key == "reaction") {
            const auto w = words(e.value);
            if (w.empty()) fail(e.line, "reaction: empty value");
            auto need_param = [&](ReactionKind kind) {
                if (w.size() != 2) fail(e.line, "reaction " + w[0] + ": expected one parameter");
                dc.reaction = kind;
                dc.reaction_param = std::strtod(w[1].c_str(), nullptr);
            };
            if (w[0] == "zero") {
                if (w.size() != 1) fail(e.line, "reaction zero takes no parameter");
                dc.reaction = ReactionKind::zero;
            } else if (w[0] == "linear") {
                need_param(ReactionKind::linear);
            } else if (w[0] == "concave") {
                need_param(ReactionKind::concave_quadratic);
            } else if (w[0] == "logistic") {
                need_param(ReactionKind::logistic);
            } else if (w[0] == "capped_linear") {
                need_param(ReactionKind::capped_linear);
            } else {
                fail(e.line, "unknown reaction '" + w[0] + "'");
            }
        } else if (e.key == "diffusion") {
            const auto w = words(e.value);
            if (w.size() == 2 && w[0] == "constant") {
                dc.diffusion_constant = true;
                dc.diffusion_value = std::strtod(w[1].c_str(), nullptr);
            } else if (w.size() == 2 && w[0] == "bump") {
                dc.diffusion_constant = false;
                dc.diffusion_bump = std::strtod(w[1].c_str(), nullptr);
            } else {
                fail(e.line, "diffusion: expected 'constant <d>' or 'bump <amplitude>'");
            }
        } else {
            fail(e.line, "unknown key '" + e.key + "' in a density section");
        }
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    Sections secs = tokenize(text);

    // first pass: find k so density sections can be validated
    for (const auto& [name, entries] : secs)
        if (name == "problem")
            for (const Entry& e : entries)
                if (e.key == "k") cfg.k = parse_int(e);
    if (cfg.k < 2) {
        int line = 0;
        for (const auto& [name, entries] : secs)
            if (name == "problem")
                for (const Entry& e : entries)
                    if (e.key == "k") line = e.line;
        fail(line, "k >= 2 is required");
    }
    cfg.densities.assign(cfg.k, DensityConfig{});
    std::vector<bool> density_seen(cfg.k, false);

    for (const auto& [name, entries] : secs) {
        if (name == "domain") {
            for (const Entry& e : entries) {
                if (e.key == "shape") {
                    if (e.value == "rectangle") cfg.shape = GridShape::rectangle;
                    else if (e.value == "disk") cfg.shape = GridShape::disk;
                    else fail(e.line, "shape must be rectangle or disk");
                } else if (e.key == "extent") cfg.extent = parse_real(e);
                else if (e.key == "grid") cfg.grid_n = parse_int(e);
                else if (e.key == "ny") cfg.grid_ny = parse_int(e);
                else if (e.key == "radius") cfg.disk_radius = parse_real(e);
                else if (e.key == "center_x") cfg.disk_cx = parse_real(e);
                else if (e.key == "center_y") cfg.disk_cy = parse_real(e);
                else fail(e.line, "unknown key '" + e.key + "' in [domain]");
            }
        } else if (name == "problem") {
            for (const Entry& e : entries) {
                if (e.key == "k") continue;  // handled above
                else if (e.key == "segregation_tol")
                    cfg.segregation_tol = e.value == "auto" ? -1.0 : parse_real(e);
                else if (e.key == "residual_tol") cfg.residual_tol = parse_real(e);
                else fail(e.line, "unknown key '" + e.key + "' in [problem]");
            }
        } else if (name.rfind("density.", 0) == 0) {
            const std::string idx = name.substr(8);
            char* end = nullptr;
            const long i = std::strtol(idx.c_str(), &end, 10);
            const int line = entries.empty() ? 0 : entries.front().line;
            if (*end != '\0' || i < 1 || i > cfg.k)
                fail(line, "density index '" + idx + "' out of range 1.." + std::to_string(cfg.k));
            parse_density(entries, cfg.densities[i - 1]);
            density_seen[i - 1] = true;
        } else if (name == "boundary") {
            for (const Entry& e : entries) {
                if (e.key == "preset") {
                    if (e.value == "zero") cfg.boundary = BoundaryPreset::zero;
                    else if (e.value == "split_x") cfg.boundary = BoundaryPreset::split_x;
                    else if (e.value == "split_diag") cfg.boundary = BoundaryPreset::split_diag;
                    else if (e.value == "sectors") cfg.boundary = BoundaryPreset::sectors;
                    else if (e.value == "edges") cfg.boundary = BoundaryPreset::edges;
                    else fail(e.line, "unknown boundary preset '" + e.value + "'");
                } else if (e.key.rfind("arc.", 0) == 0) {
                    const auto w = words(e.value);
                    if (w.size() != 4) fail(e.line, "arc: expected '<density> <t0> <t1> <value>'");
                    ArcSpec a;
                    a.density = static_cast<int>(std::strtol(w[0].c_str(), nullptr, 10)) - 1;
                    a.t0 = std::strtod(w[1].c_str(), nullptr);
                    a.t1 = std::strtod(w[2].c_str(), nullptr);
                    a.value = std::strtod(w[3].c_str(), nullptr);
                    if (a.density < 0 || a.density >= cfg.k) fail(e.line, "arc density out of range");
                    if (!(a.t0 >= 0 && a.t1 <= 1 && a.t0 < a.t1)) fail(e.line, "arc range invalid");
                    cfg.arcs.push_back(a);
                } else {
                    fail(e.line, "unknown key '" + e.key + "' in [boundary]");
                }
            }
        } else if (name == "solve") {
            for (const Entry& e : entries) {
                if (e.key == "step") cfg.solve.step = parse_real(e);
                else if (e.key == "max_iters") cfg.solve.max_iters = parse_int(e);
                else if (e.key == "energy_tol") cfg.solve.energy_tol = parse_real(e);
                else if (e.key == "seed") cfg.solve.rng_seed = static_cast<std::uint64_t>(parse_int(e));
                else if (e.key == "polish") cfg.solve.polish = parse_bool(e);
                else if (e.key == "init") {
                    if (e.value == "zero_interior") cfg.solve.init = InitKind::zero_interior;
                    else if (e.value == "harmonic_blend") cfg.solve.init = InitKind::harmonic_blend;
                    else if (e.value == "random") cfg.solve.init = InitKind::random;
                    else fail(e.line, "unknown init '" + e.value + "'");
                } else fail(e.line, "unknown key '" + e.key + "' in [solve]");
            }
        } else if (name == "verify") {
            for (const Entry& e : entries) {
                if (e.key == "segregation") cfg.verify.segregation = parse_bool(e);
                else if (e.key == "extremality") cfg.verify.extremality = parse_bool(e);
                else if (e.key == "monotonicity") cfg.verify.monotonicity = parse_bool(e);
                else if (e.key == "barriers") cfg.verify.barriers = parse_bool(e);
                else if (e.key == "lipschitz") cfg.verify.lipschitz = parse_bool(e);
                else fail(e.line, "unknown key '" + e.key + "' in [verify]");
            }
        } else if (name == "sweep") {
            for (const Entry& e : entries) {
                if (e.key == "grids") {
                    for (const std::string& w : words(e.value))
                        cfg.sweep_grids.push_back(static_cast<int>(std::strtol(w.c_str(), nullptr, 10)));
                } else if (e.key == "eps") {
                    for (const std::string& w : words(e.value))
                        cfg.sweep_eps.push_back(std::strtod(w.c_str(), nullptr));
                } else if (e.key == "seeds") {
                    for (const std::string& w : words(e.value))
                        cfg.sweep_seeds.push_back(
                            static_cast<std::uint64_t>(std::strtoll(w.c_str(), nullptr, 10)));
                } else fail(e.line, "unknown key '" + e.key + "' in [sweep]");
            }
        } else if (name == "output") {
            for (const Entry& e : entries) {
                if (e.key == "dir") cfg.out_dir = e.value;
                else fail(e.line, "unknown key '" + e.key + "' in [output]");
            }
        } else {
            const int line = entries.empty() ? 0 : entries.front().line;
            fail(line, "unknown section [" + name + "]");
        }
    }

    // semantic checks beyond per-field syntax
    if (cfg.grid_n < 3) throw ConfigError("config: grid must be >= 3");
    if (cfg.extent <= 0) throw ConfigError("config: extent must be > 0");
    if (cfg.boundary == BoundaryPreset::sectors && cfg.shape != GridShape::disk)
        throw ConfigError("config: boundary preset 'sectors' requires shape = disk");
    if (cfg.boundary == BoundaryPreset::edges && cfg.arcs.empty())
        throw ConfigError("config: boundary preset 'edges' requires at least one arc");
    (void)density_seen;
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

std::string canonical_config(const RunConfig& cfg) {
    std::ostringstream o;
    o << "[domain]\n";
    o << "shape = " << (cfg.shape == GridShape::disk ? "disk" : "rectangle") << "\n";
    o << "extent = " << fmt(cfg.extent) << "\n";
    o << "grid = " << cfg.grid_n << "\n";
    o << "ny = " << (cfg.grid_ny > 0 ? cfg.grid_ny : cfg.grid_n) << "\n";
    if (cfg.shape == GridShape::disk) {
        o << "radius = " << fmt(cfg.disk_radius) << "\n";
        o << "center_x = " << fmt(cfg.disk_cx) << "\n";
        o << "center_y = " << fmt(cfg.disk_cy) << "\n";
    }
    o << "\n[problem]\n";
    o << "k = " << cfg.k << "\n";
    if (cfg.segregation_tol < 0) o << "segregation_tol = auto\n";
    else o << "segregation_tol = " << fmt(cfg.segregation_tol) << "\n";
    o << "residual_tol = " << fmt(cfg.residual_tol) << "\n";
    for (int i = 0; i < cfg.k; ++i) {
        const DensityConfig& d = cfg.densities[i];
        o << "\n[density." << (i + 1) << "]\n";
        o << "reaction = ";
        switch (d.reaction) {
            case ReactionKind::zero: o << "zero"; break;
            case ReactionKind::linear: o << "linear " << fmt(d.reaction_param); break;
            case ReactionKind::concave_quadratic: o << "concave " << fmt(d.reaction_param); break;
            case ReactionKind::logistic: o << "logistic " << fmt(d.reaction_param); break;
            case ReactionKind::capped_linear: o << "capped_linear " << fmt(d.reaction_param); break;
        }
        o << "\n";
        if (d.diffusion_constant) o << "diffusion = constant " << fmt(d.diffusion_value) << "\n";
        else o << "diffusion = bump " << fmt(d.diffusion_bump) << "\n";
    }
    o << "\n[boundary]\n";
    o << "preset = ";
    switch (cfg.boundary) {
        case BoundaryPreset::zero: o << "zero"; break;
        case BoundaryPreset::split_x: o << "split_x"; break;
        case BoundaryPreset::split_diag: o << "split_diag"; break;
        case BoundaryPreset::sectors: o << "sectors"; break;
        case BoundaryPreset::edges: o << "edges"; break;
    }
    o << "\n";
    for (size_t a = 0; a < cfg.arcs.size(); ++a)
        o << "arc." << (a + 1) << " = " << (cfg.arcs[a].density + 1) << " " << fmt(cfg.arcs[a].t0)
          << " " << fmt(cfg.arcs[a].t1) << " " << fmt(cfg.arcs[a].value) << "\n";
    o << "\n[solve]\n";
    o << "step = " << fmt(cfg.solve.step) << "\n";
    o << "max_iters = " << cfg.solve.max_iters << "\n";
    o << "energy_tol = " << fmt(cfg.solve.energy_tol) << "\n";
    o << "seed = " << cfg.solve.rng_seed << "\n";
    o << "init = "
      << (cfg.solve.init == InitKind::zero_interior
              ? "zero_interior"
              : cfg.solve.init == InitKind::harmonic_blend ? "harmonic_blend" : "random")
      << "\n";
    o << "polish = " << (cfg.solve.polish ? "true" : "false") << "\n";
    o << "\n[verify]\n";
    o << "segregation = " << (cfg.verify.segregation ? "true" : "false") << "\n";
    o << "extremality = " << (cfg.verify.extremality ? "true" : "false") << "\n";
    o << "monotonicity = " << (cfg.verify.monotonicity ? "true" : "false") << "\n";
    o << "barriers = " << (cfg.verify.barriers ? "true" : "false") << "\n";
    o << "lipschitz = " << (cfg.verify.lipschitz ? "true" : "false") << "\n";
    if (!cfg.sweep_grids.empty() || !cfg.sweep_eps.empty() || !cfg.sweep_seeds.empty()) {
        o << "\n[sweep]\n";
        if (!cfg.sweep_grids.empty()) {
            o << "grids =";
            for (int gk : cfg.sweep_grids) o << " " << gk;
            o << "\n";
        }
        if (!cfg.sweep_eps.empty()) {
            o << "eps =";
            for (double e : cfg.sweep_eps) o << " " << fmt(e);
            o << "\n";
        }
        if (!cfg.sweep_seeds.empty()) {
            o << "seeds =";
            for (std::uint64_t sd : cfg.sweep_seeds) o << " " << sd;
            o << "\n";
        }
    }
    o << "\n[output]\n";
    o << "dir = " << cfg.out_dir << "\n";
    return o.str();
}

std::string config_digest(const RunConfig& cfg) {
    RunConfig normalized = cfg;
    normalized.out_dir = "out";  // the destination does not change what is computed
    const std::string canon = canonical_config(normalized);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Grid build_grid(const RunConfig& cfg) {
    GridSpec s;
    s.nx = cfg.grid_n;
    s.ny = cfg.grid_ny > 0 ? cfg.grid_ny : cfg.grid_n;
    s.extent = cfg.extent;
    s.shape = cfg.shape;
    s.disk_radius = cfg.disk_radius;
    s.disk_cx = cfg.disk_cx;
    s.disk_cy = cfg.disk_cy;
    return Grid::build(s);
}

namespace {

// perimeter parameter in [0,1): rectangle runs counterclockwise from the origin,
// the disk uses the polar angle
double perimeter_t(const Grid& g, int b) {
    if (g.shape() == GridShape::disk) {
        const double th = std::atan2(g.y(b) - g.disk_cy(), g.x(b) - g.disk_cx());
        return (th + M_PI) / (2 * M_PI);
    }
    const double lx = g.extent_x(), ly = g.extent_y();
    const double per = 2 * (lx + ly);
    const int i = g.node_i(b), j = g.node_j(b);
    if (j == 0) return g.x(b) / per;
    if (i == g.nx() - 1) return (lx + g.y(b)) / per;
    if (j == g.ny() - 1) return (lx + ly + (lx - g.x(b))) / per;
    return (2 * lx + ly + (ly - g.y(b))) / per;
}

}  // namespace

Problem build_problem(const RunConfig& cfg) {
    Grid g = build_grid(cfg);
    Problem p;
    p.grid = g;
    p.k = cfg.k;
    p.tol.segregation_tol = cfg.segregation_tol;
    p.tol.residual_tol = cfg.residual_tol;

    for (int i = 0; i < cfg.k; ++i) {
        const DensityConfig& d = cfg.densities[i];
        ReactionTerm t = ReactionTerm::zero();
        switch (d.reaction) {
            case ReactionKind::zero: break;
            case ReactionKind::linear: t = ReactionTerm::linear(d.reaction_param); break;
            case ReactionKind::concave_quadratic:
                t = ReactionTerm::concave_quadratic(d.reaction_param);
                break;
            case ReactionKind::logistic: t = ReactionTerm::logistic(d.reaction_param); break;
            case ReactionKind::capped_linear:
                t = ReactionTerm::capped_linear(d.reaction_param);
                break;
        }
        p.reactions.emplace_back(t);

        if (d.diffusion_constant) {
            p.diffusions.push_back(Diffusion::constant(d.diffusion_value));
        } else {
            Field dv(g, 1.0);
            for (int q = 0; q < g.num_nodes(); ++q)
                if (g.masked_in(q)) {
                    const double sx = std::sin(M_PI * g.x(q) / g.extent_x());
                    const double sy = std::sin(M_PI * g.y(q) / g.extent_y());
                    dv[q] = 1.0 + d.diffusion_bump * sx * sx * sy * sy;
                }
            p.diffusions.push_back(Diffusion::nodal(dv));
        }
    }

    p.boundary.phi.assign(cfg.k, Field(g, 0.0));
    switch (cfg.boundary) {
        case BoundaryPreset::zero:
            break;
        case BoundaryPreset::split_x: {
            const double mid = g.extent_x() / 2;
            for (int b : g.boundary_nodes()) {
                p.boundary.phi[0][b] = std::max(g.x(b) - mid, 0.0);
                p.boundary.phi[1][b] = std::max(mid - g.x(b), 0.0);
            }
            break;
        }
        case BoundaryPreset::split_diag: {
            const double s2 = std::sqrt(2.0);
            const double c = (g.extent_x() + g.extent_y()) / 2;
            for (int b : g.boundary_nodes()) {
                const double t = (g.x(b) + g.y(b) - c) / s2;
                p.boundary.phi[0][b] = std::max(t, 0.0);
                p.boundary.phi[1][b] = std::max(-t, 0.0);
            }
            break;
        }
        case BoundaryPreset::sectors: {
            const double w = 2 * M_PI / cfg.k;
            for (int b : g.boundary_nodes()) {
                const double dx = g.x(b) - g.disk_cx(), dy = g.y(b) - g.disk_cy();
                const double r = std::hypot(dx, dy), th = std::atan2(dy, dx);
                double t = th + w / 2;
                while (t < 0) t += 2 * M_PI;
                const int sector = static_cast<int>(std::floor(t / w)) % cfg.k;
                p.boundary.phi[sector][b] =
                    std::pow(r, cfg.k / 2.0) * std::abs(std::cos(cfg.k / 2.0 * th));
            }
            break;
        }
        case BoundaryPreset::edges:
            for (int b : g.boundary_nodes()) {
                const double t = perimeter_t(g, b);
                for (const ArcSpec& a : cfg.arcs)
                    if (t >= a.t0 && t < a.t1) p.boundary.phi[a.density][b] = a.value;
            }
            break;
    }
    p.validate();
    return p;
}

}  // namespace segsolve
