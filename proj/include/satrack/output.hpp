#ifndef SATRACK_OUTPUT_HPP
#define SATRACK_OUTPUT_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "satrack/experiments.hpp"
#include "satrack/mixing.hpp"

namespace satrack {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Writes `content` to a sibling temp file and renames it over `path`, so
/// readers see either the old file or the complete new one. Creates the
/// parent directory. Throws IoError.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// lambda,mean_abs_error,stderr,paths,horizon
std::string curve_csv(const ErrorCurve& curve);

std::string gap_csv(const TrackingGapReport& report);
std::string mixing_profile_csv(const MixingProfile& profile);
std::string clc_csv(const ClcReport& report);
std::string forgetting_csv(const ForgettingReport& report);
std::string maximal_csv(const MaximalInequalityReport& report);

}  // namespace satrack

#endif  // SATRACK_OUTPUT_HPP
