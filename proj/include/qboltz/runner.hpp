#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace qboltz::runner {

inline constexpr const char* tool_version = "qboltz 0.1.0";

inline constexpr const char* experiment_names[] = {"entropy-suite", "coleman-hepp", "avalanche", "anosov", "histories"};

struct RunConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    int dense_cap = 3;
    unsigned workers = 1;
    nlohmann::json params = nlohmann::json::object();

    nlohmann::json to_json() const;
};

/// Reads the top-level fields. Throws ConfigInvalid when a field has the
/// wrong type; the experiment-specific params are checked by validate().
RunConfig parse_config(const nlohmann::json& j);

/// Empty iff the config can run. Each entry names the violated invariant.
std::vector<std::string> validate(const RunConfig& config);

struct Artifact {
    std::string name;
    std::string sha256;
};

struct RunManifest {
    nlohmann::json config;
    std::vector<Artifact> files;
    std::vector<std::string> engines;
    double wall_time = 0.0;
    std::string version = tool_version;
    /// Numerical-contract violations found during the run.
    std::vector<std::string> violations;

    nlohmann::json to_json() const;
};

/// Artifacts of a run, file name to content. Nothing touches the disk.
struct RunResult {
    std::map<std::string, std::string> files;
    std::vector<std::string> engines;
    std::vector<std::string> violations;
};

/// Computes every artifact. Throws ConfigInvalid when validate() is not
/// empty and lets library errors (caps, invalid states) propagate.
RunResult execute(const RunConfig& config);

/// execute(), then writes the artifacts and manifest.json into output_dir.
RunManifest run(const RunConfig& config);

/// 0 on success, 3 when the manifest lists contract violations.
int exit_code(const RunManifest& manifest);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// %.12g, the fixed CSV number format.
std::string format_number(double v);

}  // namespace qboltz::runner
