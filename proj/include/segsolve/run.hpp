#ifndef SEGSOLVE_RUN_HPP
#define SEGSOLVE_RUN_HPP

#include <optional>
#include <string>

#include "segsolve/config.hpp"

namespace segsolve {

inline constexpr const char* version_string = "segsolve 0.1.0";

// exit codes: 0 pass, 1 check failure, 2 config error, 3 runtime error
inline constexpr int exit_pass = 0;
inline constexpr int exit_check_failure = 1;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_runtime_error = 3;

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> grid;
    std::optional<std::string> out_dir;
    bool check_only = false;
};

struct RunResult {
    int exit_code = exit_pass;
    std::vector<std::string> failures;  // names of failed checks
    std::string message;
};

/// Executes one pipeline: solve | verify | analyze | sweep. Writes artifacts
/// under the output directory and returns the process exit status.
RunResult run(const std::string& subcommand, RunConfig cfg, const RunOverrides& ov);

}  // namespace segsolve

#endif
