#ifndef SATRACK_CONFIG_HPP
#define SATRACK_CONFIG_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "satrack/experiments.hpp"

namespace satrack {

/// Tuning for the `mixing` subcommand.
struct MixingSettings {
    double r = 4.0;
    std::size_t tau_max = 256;
    std::size_t clc_pairs = 256;
    std::size_t clc_histories = 256;
    std::size_t forgetting_k_max = 60;
    std::size_t forgetting_histories = 4096;
    std::vector<Vector> theta_grid;  // empty means {theta0}
    std::vector<std::size_t> blocks = {64, 128, 256, 512, 1024, 2048, 4096};
    std::size_t trials = 400;
};

struct RunConfig {
    ExperimentConfig experiment;
    MixingSettings mixing;
    bool full_scale = false;  // the full_scale overrides were applied
};

/**
 * Strict JSON config reader. Unknown keys and wrongly typed values raise
 * ValidationError naming the key path; malformed JSON raises ParseError
 * with 1-based line and column.
 */
RunConfig parse_config(std::string_view text, bool full_scale = false);

/// Reads and parses a config file; IoError when it cannot be read.
RunConfig load_config(const std::filesystem::path& path, bool full_scale = false);

/// Resolved config as canonical JSON text (two-space indent).
std::string echo_config(const RunConfig& cfg);

}  // namespace satrack

#endif  // SATRACK_CONFIG_HPP
