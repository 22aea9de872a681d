#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace declab::subprocess {

struct RunOptions {
    std::optional<std::filesystem::path> cwd;
    double timeout_secs = 60.0;
};

struct RunResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string out;
    std::string err;
};

// Executes argv[0] with the given argument vector (no shell), capturing
// stdout/stderr. On timeout the process group is killed and timed_out set.
// Throws Error(external_tool) only when the process cannot be spawned.
RunResult run_command(const std::vector<std::string>& argv, const RunOptions& opts = {});

} // namespace declab::subprocess
