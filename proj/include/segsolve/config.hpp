#ifndef SEGSOLVE_CONFIG_HPP
#define SEGSOLVE_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "segsolve/minimize.hpp"

namespace segsolve {

enum class BoundaryPreset { zero, split_x, split_diag, sectors, edges };

struct ArcSpec {
    int density = 0;   // 1-based in the config, stored 0-based
    double t0 = 0, t1 = 0;  // perimeter parameter in [0,1)
    double value = 0;
};

struct DensityConfig {
    ReactionKind reaction = ReactionKind::zero;
    double reaction_param = 0;
    bool diffusion_constant = true;
    double diffusion_value = 1.0;   // constant case
    double diffusion_bump = 0.0;    // nodal case: d = 1 + bump*sin^2(pi x/Lx)*sin^2(pi y/Ly)
};

struct VerifyToggles {
    bool segregation = true;
    bool extremality = true;
    bool monotonicity = true;
    bool barriers = true;
    bool lipschitz = true;
};

struct RunConfig {
    // [domain]
    GridShape shape = GridShape::rectangle;
    double extent = 1.0;
    int grid_n = 65;
    int grid_ny = -1;       // -1: same as grid_n
    double disk_radius = -1;
    double disk_cx = -1, disk_cy = -1;
    // [problem]
    int k = 2;
    double segregation_tol = -1;  // -1 = auto
    double residual_tol = 1e-6;
    // [density.i]
    std::vector<DensityConfig> densities;
    // [boundary]
    BoundaryPreset boundary = BoundaryPreset::zero;
    std::vector<ArcSpec> arcs;
    // [solve]
    SolveOptions solve;
    // [verify]
    VerifyToggles verify;
    // [sweep]
    std::vector<int> sweep_grids;
    std::vector<double> sweep_eps;
    std::vector<std::uint64_t> sweep_seeds;  // multi-start spread study
    // [output]
    std::string out_dir = "out";
};

/// Parses the strict key-value config dialect. Unknown sections or keys, malformed
/// scalars and semantic violations throw ConfigError carrying the line number.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Canonical emission: fixed section/key order, every value explicit. Idempotent.
std::string canonical_config(const RunConfig& cfg);

/// FNV-1a 64-bit digest of the canonical form, as a hex string.
std::string config_digest(const RunConfig& cfg);

Grid build_grid(const RunConfig& cfg);
Problem build_problem(const RunConfig& cfg);

}  // namespace segsolve

#endif
