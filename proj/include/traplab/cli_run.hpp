#pragma once

#include <optional>
#include <string>

#include "traplab/config.hpp"

namespace traplab {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

// Validates the config for the problem, executes it and writes result files
// plus a manifest under out_dir. Throws Error (whose code maps to the exit
// status) on any failure; no manifest is written in that case.
void run_subcommand(const std::string& problem, const std::string& config_path,
                    const std::string& out_dir, const RunOverrides& overrides = {});

// Dry run: schema + physical-precondition diagnostics, no compute.
std::vector<Diagnostic> validate_subcommand(const std::string& problem,
                                            const std::string& config_path);

}  // namespace traplab
