#ifndef SATRACK_CLI_HPP
#define SATRACK_CLI_HPP

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "satrack/config.hpp"

namespace satrack {

enum class Subcommand { run, rate, mixing, fixed_point, validate };

struct RunManifest {
    std::filesystem::path config_path;
    std::filesystem::path output_dir;
    bool full_scale = false;
    unsigned workers = 0;  // 0 = hardware concurrency
    RunConfig resolved;
};

/// Loads and validates the config before anything runs. The output
/// directory is `out`, else $SATRACK_OUT, else the working directory.
RunManifest make_manifest(const std::filesystem::path& config_path,
                          const std::optional<std::filesystem::path>& out, bool full_scale, unsigned workers,
                          std::optional<std::uint64_t> seed_override);

/// Executes one subcommand. Results are computed in full before any file
/// is written. Throws satrack::Error on failure.
void run_command(Subcommand cmd, const RunManifest& manifest, std::ostream& out);

/// One-line machine-readable error record.
std::string error_json(const std::exception& e);

/// Exit status for an exception: the category code, 1 for foreign exceptions.
int exit_code(const std::exception& e);

/// Full command-line entry point.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace satrack

#endif  // SATRACK_CLI_HPP
