#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "traplab/common.hpp"
#include "traplab/grid.hpp"
#include "traplab/potentials.hpp"

namespace traplab {

// Run configuration: line-oriented key-value with [sections] (or the same
// structure as a JSON object of objects). The schema is closed: unknown
// sections or keys are rejected before any compute.
struct ConfigData {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& sec, const std::string& key) const;
    std::string get(const std::string& sec, const std::string& key,
                    const std::string& fallback) const;
    std::string require(const std::string& sec, const std::string& key) const;
    double get_num(const std::string& sec, const std::string& key, double fallback) const;
    long get_int(const std::string& sec, const std::string& key, long fallback) const;
    bool get_bool(const std::string& sec, const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& sec, const std::string& key) const;

    // canonical serialization (sorted sections/keys) used for the config hash
    std::string canonical_text() const;
};

ConfigData parse_config_text(const std::string& text);
ConfigData parse_config_file(const std::string& path);

struct Diagnostic {
    std::string where;
    std::string message;
};

// Schema plus physical-precondition checks for the given problem; empty
// result means the config is runnable.
std::vector<Diagnostic> validate_config(const ConfigData& cfg, const std::string& problem);

const std::vector<std::string>& known_problems();

// Typed builders used by the CLI (after validation).
Grid grid_from_config(const ConfigData& cfg);
TrapPotential trap_from_config(const ConfigData& cfg);
PairPotential pair_from_config(const ConfigData& cfg);

std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace traplab
