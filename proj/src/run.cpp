#include "segsolve/run.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "segsolve/io.hpp"
#include "segsolve/verify.hpp"

namespace segsolve {

namespace {

using nlohmann::json;

json grid_json(const Grid& g) {
    return {{"nx", g.nx()}, {"ny", g.ny()}, {"h", g.h()},
            {"shape", g.shape() == GridShape::disk ? "disk" : "rectangle"}};
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

// interface sample points for the monotonicity check: ends and middle of the
// longest polyline, pulled to positions where all radii fit in the domain
std::vector<std::pair<std::array<double, 2>, std::pair<int, int>>> monotonicity_points(
    const Grid& g, const NodalReport& rep, double r_need) {
    std::vector<std::pair<std::array<double, 2>, std::pair<int, int>>> pts;
    const Polyline* longest = nullptr;
    for (const Polyline& pl : rep.interfaces)
        if (!longest || pl.points.size() > longest->points.size()) longest = &pl;
    if (!longest) return pts;
    for (double frac : {0.25, 0.5, 0.75}) {
        const auto& pt = longest->points[static_cast<size_t>(frac * (longest->points.size() - 1))];
        if (g.distance_to_boundary(pt[0], pt[1]) + 1e-9 >= r_need)
            pts.push_back({pt, {longest->label_a, longest->label_b}});
    }
    return pts;
}

struct CheckSet {
    json summary = json::object();
    std::vector<std::string> failures;

    void record(const std::string& name, bool pass, json details) {
        details["pass"] = pass;
        summary[name] = std::move(details);
        if (!pass) failures.push_back(name);
    }
};

// runs the enabled verifier checks; the Laplacian-based checks (extremality,
// monotonicity) see the unit-diffusion rescaling, the rest run on the original
void run_checks(const VerifyToggles& toggles, const Problem& p_orig, const State& s_orig,
                CheckSet& out) {
    const bool rescaled = !p_orig.unit_diffusion();
    Problem p = p_orig;
    State s = s_orig;
    if (rescaled) {
        RescaledProblem r = rescale_to_unit_diffusion(p_orig);
        p = r.problem;
        for (int i = 0; i < p.k; ++i) s.u[i] = r.forward(s_orig.u[i], i);
    }
    const Grid& g = p.grid;
    out.summary["rescaled"] = rescaled;

    if (toggles.segregation) {
        SegregationCheck chk = is_segregated(g, s_orig, 0.0);
        out.record("segregation", chk.segregated,
                   {{"worst_value", chk.worst_value}, {"worst_node", chk.worst_node}});
    }
    if (toggles.extremality) {
        ExtremalityReport rep = extremality_residuals(s, p);
        const bool pass = rep.max_sub() <= rep.tol_band && rep.max_hat() <= rep.tol_band;
        out.record("extremality", pass,
                   {{"sup_sub", rep.max_sub()},
                    {"sup_hat", rep.max_hat()},
                    {"tol_band", rep.tol_band}});
    }
    NodalReport nodal;
    if (toggles.monotonicity || toggles.lipschitz) nodal = extract_interfaces(g, s, 0.0);
    if (toggles.monotonicity) {
        const double h = g.h();
        const std::vector<double> dyadic{4 * h, 8 * h, 16 * h, 32 * h};
        bool pass = true;
        json traces = json::array();
        for (const auto& [pt, labels] : monotonicity_points(g, nodal, 2 * dyadic.front())) {
            std::vector<double> radii;
            for (double r : dyadic)
                if (g.distance_to_boundary(pt[0], pt[1]) + 1e-9 >= r) radii.push_back(r);
            if (radii.size() < 2) continue;
            MonotonicityTrace tr = acf_product(s, p, pt[0], pt[1], radii,
                                               {{labels.first}, {labels.second}});
            // quadrature on non-aligned interfaces wobbles by O(h/r)
            const double eps = tr.max_value() * std::max(1e-6, 4 * h / radii.front());
            const bool ok = tr.nondecreasing(eps);
            pass = pass && ok;
            traces.push_back({{"x", pt[0]},
                              {"y", pt[1]},
                              {"values", tr.values},
                              {"max_violation", tr.max_violation},
                              {"pass", ok}});
        }
        out.record("monotonicity", pass, {{"traces", traces}});
    }
    if (toggles.barriers) {
        BarrierPair bp = compute_barriers(p_orig, s_orig);
        out.record("barriers", bp.max_violation <= p.tol.residual_tol,
                   {{"max_violation", bp.max_violation},
                    {"violations", bp.violations.size()},
                    {"residual_tol", p.tol.residual_tol}});
    }
    if (toggles.lipschitz) {
        const double delta = std::max(2 * g.h(), 0.02 * g.extent_x());
        LipschitzReport lr = lipschitz_report(s_orig, p_orig, delta);
        out.record("lipschitz", std::isfinite(lr.l_max),
                   {{"l_max", lr.l_max}, {"delta", delta}, {"l_i", lr.l_i}});
    }
}

std::vector<double> junction_radii(const Grid& g, double x0, double y0) {
    const double r_out = 0.8 * g.distance_to_boundary(x0, y0);
    std::vector<double> radii;
    for (double r = std::max(4 * g.h(), r_out / 16); r <= r_out; r *= 2) radii.push_back(r);
    if (radii.empty()) radii.push_back(4 * g.h());
    return radii;
}

int sweep_threads() {
    const char* env = std::getenv("SEGSOLVE_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return n > 0 ? n : 1;
}

RunResult finish(CheckSet& checks, json& doc, const std::string& path) {
    doc["checks"] = checks.summary;
    doc["failures"] = checks.failures;
    write_json(doc, path);
    RunResult res;
    res.failures = checks.failures;
    res.exit_code = checks.failures.empty() ? exit_pass : exit_check_failure;
    return res;
}

}  // namespace

RunResult run(const std::string& subcommand, RunConfig cfg, const RunOverrides& ov) {
    if (ov.seed) cfg.solve.rng_seed = *ov.seed;
    if (ov.grid) {
        cfg.grid_n = *ov.grid;
        cfg.grid_ny = -1;
    }
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;

    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const auto t_start = std::chrono::steady_clock::now();
    auto wall_ms = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - t_start)
            .count();
    };

    Problem p = build_problem(cfg);

    if (ov.check_only || subcommand == "solve") {
        // precondition gates, reported as named checks
        CheckSet gates;
        AdmissibilityReport adm = validate_admissible(p.grid, p.boundary, p.tol.residual_tol);
        gates.record("admissibility", adm.admissible(), {{"issues", adm.issues.size()}});
        bool coercive = true;
        json mus = json::array();
        for (int i = 0; i < p.k && coercive; ++i) {
            bool zero_growth = true;
            for (int q : p.grid.interior_nodes())
                if (p.reactions[i].growth_at(q) != 0.0) {
                    zero_growth = false;
                    break;
                }
            if (zero_growth) {
                mus.push_back(nullptr);
                continue;
            }
            CoercivityResult c = check_coercivity(p, i);
            mus.push_back(c.min_eigenvalue);
            coercive = c.holds;
        }
        gates.record("coercivity", coercive, {{"min_eigenvalues", mus}});

        if (ov.check_only || !gates.failures.empty()) {
            json doc{{"config_digest", config_digest(cfg)},
                     {"version", version_string},
                     {"grid", grid_json(p.grid)},
                     {"k", p.k},
                     {"wall_ms", wall_ms()}};
            RunResult res = finish(gates, doc, cfg.out_dir + "/manifest.json");
            res.message = res.failures.empty() ? "checks passed" : "gate check failed";
            return res;
        }
    }

    if (subcommand == "solve") {
        Solution sol = solve(p, cfg.solve);
        write_fields(p.grid, sol.state, cfg.out_dir + "/fields.csv");

        CheckSet checks;
        run_checks(cfg.verify, p, sol.state, checks);
        json doc{{"config_digest", config_digest(cfg)},
                 {"version", version_string},
                 {"grid", grid_json(p.grid)},
                 {"k", p.k},
                 {"final_energy", sol.energy()},
                 {"iters", sol.iters},
                 {"converged", sol.converged},
                 {"final_gradient_norm", sol.final_gradient_norm},
                 {"wall_ms", wall_ms()}};
        return finish(checks, doc, cfg.out_dir + "/manifest.json");
    }

    if (subcommand == "verify") {
        State s = read_fields(p.grid, cfg.out_dir + "/fields.csv");
        CheckSet checks;
        run_checks(cfg.verify, p, s, checks);
        json doc{{"config_digest", config_digest(cfg)},
                 {"version", version_string},
                 {"grid", grid_json(p.grid)},
                 {"wall_ms", wall_ms()}};
        return finish(checks, doc, cfg.out_dir + "/verify.json");
    }

    if (subcommand == "analyze") {
        State s = read_fields(p.grid, cfg.out_dir + "/fields.csv");
        const Grid& g = p.grid;
        NodalReport rep = extract_interfaces(g, s, 0.0);
        locate_multiple_points(rep, g, s, 3 * g.h(), 0.0);
        for (MultiplePoint& mp : rep.multiple_points) {
            const auto radii = junction_radii(g, mp.x, mp.y);
            JunctionAnalysis ja = junction_analysis(g, s, mp.x, mp.y, mp.multiplicity, radii);
            mp.sector_angles = ja.sector_angles;
            mp.exponent = ja.exponent;
            mp.theta0 = ja.theta0;
            mp.gradient_decay = ja.gradient_decay;
        }
        AdjacencyGraph graph = adjacency_graph(rep, g, s, p.segregation_tol());

        json jlines = json::array();
        for (const Polyline& pl : rep.interfaces) {
            json pts = json::array();
            for (const auto& pt : pl.points) pts.push_back({pt[0], pt[1]});
            jlines.push_back({{"label_a", pl.label_a + 1},
                              {"label_b", pl.label_b + 1},
                              {"closed", pl.closed},
                              {"points", pts}});
        }
        json jpts = json::array();
        for (const MultiplePoint& mp : rep.multiple_points)
            jpts.push_back({{"x", mp.x},
                            {"y", mp.y},
                            {"multiplicity", mp.multiplicity},
                            {"sector_angles", mp.sector_angles},
                            {"exponent", mp.exponent},
                            {"theta0", mp.theta0},
                            {"gradient_decay", mp.gradient_decay}});
        json jedges = json::array();
        for (const auto& e : graph.edges)
            jedges.push_back({{"i", e.i + 1}, {"j", e.j + 1}, {"polylines", e.polylines}});
        json jzero = json::array();
        for (const auto& region : rep.zero_regions) jzero.push_back(region.size());

        json doc{{"config_digest", config_digest(cfg)},
                 {"version", version_string},
                 {"grid", grid_json(p.grid)},
                 {"interfaces", jlines},
                 {"multiple_points", jpts},
                 {"adjacency", {{"vertices", graph.vertices}, {"edges", jedges},
                                {"support_components", graph.support_components}}},
                 {"zero_region_sizes", jzero},
                 {"wall_ms", wall_ms()}};
        write_json(doc, cfg.out_dir + "/report.json");
        write_ppm(render_partition(g, s, rep), cfg.out_dir + "/partition.ppm");
        return {};
    }

    if (subcommand == "sweep") {
        std::vector<int> grids = cfg.sweep_grids;
        if (grids.empty()) grids = {65, 129, 257};

        struct Row {
            int n = 0;
            double energy = 0, l_max = 0, sup_sub = 0, sup_hat = 0;
        };
        std::vector<Row> rows(grids.size());
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t idx = next.fetch_add(1); idx < grids.size(); idx = next.fetch_add(1)) {
                RunConfig sub = cfg;
                sub.grid_n = grids[idx];
                sub.grid_ny = -1;
                Problem ps = build_problem(sub);
                Solution sol = solve(ps, sub.solve);
                Row& row = rows[idx];
                row.n = grids[idx];
                row.energy = sol.energy();
                row.l_max =
                    lipschitz_report(sol.state, ps, std::max(2 * ps.grid.h(), 0.02 * ps.grid.extent_x()))
                        .l_max;
                if (ps.unit_diffusion()) {
                    ExtremalityReport er = extremality_residuals(sol.state, ps);
                    row.sup_sub = er.max_sub();
                    row.sup_hat = er.max_hat();
                }
            }
        };
        const int nthreads = std::min<int>(sweep_threads(), static_cast<int>(grids.size()));
        if (nthreads > 1) {
            std::vector<std::thread> pool;
            for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        } else {
            worker();
        }

        json jrows = json::array();
        std::printf("  n      energy        L_max      sup_sub      sup_hat\n");
        for (const Row& r : rows) {
            jrows.push_back({{"n", r.n},
                             {"energy", r.energy},
                             {"l_max", r.l_max},
                             {"sup_sub", r.sup_sub},
                             {"sup_hat", r.sup_hat}});
            std::printf("%4d  %12.8f  %9.5f  %11.4e  %11.4e\n", r.n, r.energy, r.l_max, r.sup_sub,
                        r.sup_hat);
        }

        json jpert = json::array();
        if (!cfg.sweep_eps.empty()) {
            PerturbationTable t = perturbation_study(p, cfg.sweep_eps, cfg.solve);
            std::printf("\n  eps        distance       ratio\n");
            for (const PerturbationRow& r : t.rows) {
                jpert.push_back({{"eps", r.eps}, {"distance", r.distance}, {"ratio", r.ratio}});
                std::printf("%8.1e  %12.6e  %10.4f\n", r.eps, r.distance, r.ratio);
            }
        }

        json jstarts = json::object();
        if (!cfg.sweep_seeds.empty()) {
            MultiStartReport ms = multi_start(p, cfg.sweep_seeds, cfg.solve);
            jstarts = {{"seeds", cfg.sweep_seeds.size()},
                       {"max_pairwise_distance", ms.max_pairwise_distance},
                       {"energy_spread", ms.energy_spread},
                       {"state_scale", ms.state_scale}};
            std::printf("\n%zu starts: max pairwise distance %.3e, energy spread %.3e\n",
                        cfg.sweep_seeds.size(), ms.max_pairwise_distance, ms.energy_spread);
        }

        json doc{{"config_digest", config_digest(cfg)},
                 {"version", version_string},
                 {"refinement", jrows},
                 {"perturbation", jpert},
                 {"multi_start", jstarts},
                 {"wall_ms", wall_ms()}};
        write_json(doc, cfg.out_dir + "/sweep.json");
        return {};
    }

    throw ConfigError("unknown subcommand '" + subcommand + "'");
}

}  // namespace segsolve
