#include "satrack/output.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "satrack/errors.hpp"

namespace satrack {

namespace fs = std::filesystem;

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_atomic(const fs::path& path, std::string_view content)
{
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
        }
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp, ec);
            throw IoError("write to '" + tmp.string() + "' failed");
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
    }
}

std::string curve_csv(const ErrorCurve& curve)
{
    std::string out = "lambda,mean_abs_error,stderr,paths,horizon\n";
    for (const CurveRow& r : curve.rows) {
        out += format_double(r.lambda) + ',' + format_double(r.mean_abs_error) + ',' + format_double(r.stderr_) +
               ',' + std::to_string(r.paths) + ',' + std::to_string(r.horizon) + '\n';
    }
    return out;
}

std::string gap_csv(const TrackingGapReport& report)
{
    std::string out = "lambda,t,mean_gap,stderr\n";
    for (const GapCurve& c : report.curves) {
        for (const GapRow& r : c.rows) {
            out += format_double(c.lambda) + ',' + std::to_string(r.t) + ',' + format_double(r.mean_gap) + ',' +
                   format_double(r.stderr_) + '\n';
        }
    }
    return out;
}

std::string mixing_profile_csv(const MixingProfile& profile)
{
    std::string out = "tau,gamma\n";
    for (std::size_t i = 0; i < profile.gamma_sequence.size(); ++i) {
        out += std::to_string(i + 1) + ',' + format_double(profile.gamma_sequence[i]) + '\n';
    }
    return out;
}

std::string clc_csv(const ClcReport& report)
{
    return "k_hat,mean_ratio,pairs_tested,pairs_skipped\n" + format_double(report.k_hat) + ',' +
           format_double(report.mean_ratio) + ',' + std::to_string(report.pairs_tested) + ',' +
           std::to_string(report.pairs_skipped) + '\n';
}

std::string forgetting_csv(const ForgettingReport& report)
{
    std::string out = "k,term,partial_sum\n";
    for (std::size_t k = 0; k < report.terms.size(); ++k) {
        out += std::to_string(k) + ',' + format_double(report.terms[k]) + ',' +
               format_double(report.partial_sums[k]) + '\n';
    }
    return out;
}

std::string maximal_csv(const MaximalInequalityReport& report)
{
    std::string out = "block,moment,ratio\n";
    for (const MaximalRow& r : report.rows) {
        out += std::to_string(r.block) + ',' + format_double(r.moment) + ',' + format_double(r.ratio) + '\n';
    }
    return out;
}

}  // namespace satrack
