#include "satrack/cli.hpp"

#include <cstdlib>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "satrack/errors.hpp"
#include "satrack/mixing.hpp"
#include "satrack/output.hpp"

namespace satrack {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json reference_json(const ReferenceValue& ref)
{
    json j;
    j["theta"] = vec_json(ref.theta);
    j["stderr"] = vec_json(ref.stderr_);
    j["residual"] = ref.residual ? json(*ref.residual) : json(nullptr);
    j["method"] = ref.method;
    j["iterations"] = ref.iterations;
    return j;
}

json curve_meta(const RunManifest& m, const ErrorCurve& curve)
{
    json j;
    j["config"] = json::parse(echo_config(m.resolved));
    j["error_functional"] = "mean over paths of the Euclidean distance |theta_T - theta*| at the final time T";
    j["streams"] = "path p at grid index i uses stream hash64(i, p) under the config seed";
    j["reference"] = reference_json(curve.reference);
    if (curve.slope_fit) {
        j["slope"] = curve.slope_fit->slope;
        j["intercept"] = curve.slope_fit->intercept;
        j["fit_residual_norm"] = curve.slope_fit->residual_norm;
    } else {
        j["slope"] = nullptr;
        j["intercept"] = nullptr;
        j["fit_residual_norm"] = nullptr;
    }
    std::size_t exits = 0;
    json rows = json::array();
    for (const CurveRow& r : curve.rows) {
        exits += r.exits;
        rows.push_back({{"lambda", r.lambda},
                        {"exits", r.exits},
                        {"mean_theta", vec_json(r.mean_theta)},
                        {"theta_stderr", vec_json(r.theta_stderr)}});
    }
    j["rows"] = rows;
    j["exits_total"] = exits;
    return j;
}

fs::path out_file(const RunManifest& m, const std::string& suffix)
{
    return m.output_dir / (m.resolved.experiment.name + suffix);
}

void do_run(const RunManifest& m, std::ostream& out, bool rate_only)
{
    const ErrorCurve curve = run_error_curve(m.resolved.experiment, m.workers);
    const std::string meta = curve_meta(m, curve).dump(2) + "\n";
    if (rate_only) {
        write_atomic(out_file(m, "_meta.json"), meta);
        if (curve.slope_fit) {
            out << "slope " << format_double(curve.slope_fit->slope) << " intercept "
                << format_double(curve.slope_fit->intercept) << " points " << curve.rows.size() << "\n";
        } else {
            out << "slope undefined: a single gain gives no rate\n";
        }
        return;
    }
    write_atomic(out_file(m, "_curve.csv"), curve_csv(curve));
    write_atomic(out_file(m, "_meta.json"), meta);
    out << "wrote " << out_file(m, "_curve.csv").string() << "\n";
}

void do_mixing(const RunManifest& m, std::ostream& out)
{
    const ExperimentConfig& cfg = m.resolved.experiment;
    const MixingSettings& s = m.resolved.mixing;
    const auto* spec = std::get_if<LinearProcessSpec>(&cfg.signal);
    if (!spec) {
        throw ConfigError("mixing: needs a Gaussian linear signal (geometric, power_decay or finite)");
    }
    Vector theta = cfg.theta0;
    if (std::holds_alternative<Analytic>(cfg.reference) && has_closed_form(cfg.field, cfg.signal)) {
        theta = reference_value(cfg, m.workers).theta;
    }
    const std::vector<Vector> grid = s.theta_grid.empty() ? std::vector<Vector>{theta} : s.theta_grid;
    const RngState root(cfg.base_seed, hash64(0x6d6978ULL, 0));

    const MixingProfile profile = gamma_total(*spec, s.r, s.tau_max);
    const ClcReport clc = estimate_clc(cfg.field, *spec, cfg.domain, s.clc_pairs, s.clc_histories,
                                       root.derive(1), m.workers);
    const ForgettingReport forget = forgetting_partial_sum(cfg.field, *spec, s.forgetting_k_max, grid,
                                                           s.forgetting_histories, root.derive(2), m.workers);
    const MaximalInequalityReport maxi =
        check_maximal_inequality(*spec, cfg.field, theta, s.r, s.blocks, s.trials, root.derive(3), 1.0, m.workers);

    json meta;
    meta["config"] = json::parse(echo_config(m.resolved));
    meta["profile"] = {{"order_r", profile.order_r},
                       {"m_r", profile.m_r},
                       {"gamma_total", profile.gamma_total},
                       {"tail_bound", profile.tail_bound},
                       {"exact", profile.exact}};
    meta["clc"] = {{"k_hat", clc.k_hat},
                   {"mean_ratio", clc.mean_ratio},
                   {"note", "maximum over sampled pairs and histories: a lower estimate of K"}};
    if (clc.pairs_tested > 0) {
        meta["clc"]["worst_pair"] = {vec_json(clc.worst_pair.first), vec_json(clc.worst_pair.second)};
    }
    meta["forgetting"] = {{"k_max", forget.k_max},
                          {"theta_grid_size", forget.theta_grid_size},
                          {"total", forget.partial_sums.back()}};
    meta["maximal"] = {{"theta", vec_json(theta)},
                       {"m_hat", maxi.m_hat},
                       {"gamma_hat", maxi.gamma_hat},
                       {"trend_slope", maxi.trend.slope}};

    write_atomic(out_file(m, "_mixing_profile.csv"), mixing_profile_csv(profile));
    write_atomic(out_file(m, "_clc.csv"), clc_csv(clc));
    write_atomic(out_file(m, "_forgetting.csv"), forgetting_csv(forget));
    write_atomic(out_file(m, "_maximal.csv"), maximal_csv(maxi));
    write_atomic(out_file(m, "_mixing_meta.json"), meta.dump(2) + "\n");
    out << "gamma_total " << format_double(profile.gamma_total) << " k_hat " << format_double(clc.k_hat)
        << " forgetting " << format_double(forget.partial_sums.back()) << "\n";
}

void do_fixed_point(const RunManifest& m, std::ostream& out)
{
    ExperimentConfig cfg = m.resolved.experiment;
    cfg.reference = Analytic{};
    const ReferenceValue ref = reference_value(cfg, m.workers);
    out << reference_json(ref).dump() << "\n";
}

}  // namespace

RunManifest make_manifest(const fs::path& config_path, const std::optional<fs::path>& out, bool full_scale,
                          unsigned workers, std::optional<std::uint64_t> seed_override)
{
    RunManifest m;
    m.config_path = config_path;
    m.full_scale = full_scale;
    m.workers = workers;
    if (out) {
        m.output_dir = *out;
    } else if (const char* env = std::getenv("SATRACK_OUT"); env && *env) {
        m.output_dir = env;
    } else {
        m.output_dir = ".";
    }
    m.resolved = load_config(config_path, full_scale);
    if (seed_override) {
        m.resolved.experiment.base_seed = *seed_override;
    }
    return m;
}

void run_command(Subcommand cmd, const RunManifest& manifest, std::ostream& out)
{
    switch (cmd) {
    case Subcommand::run: do_run(manifest, out, false); break;
    case Subcommand::rate: do_run(manifest, out, true); break;
    case Subcommand::mixing: do_mixing(manifest, out); break;
    case Subcommand::fixed_point: do_fixed_point(manifest, out); break;
    case Subcommand::validate: out << echo_config(manifest.resolved) << "\n"; break;
    }
}

int exit_code(const std::exception& e)
{
    if (const auto* se = dynamic_cast<const Error*>(&e)) {
        return static_cast<int>(se->category());
    }
    return static_cast<int>(ErrorCategory::internal);
}

std::string error_json(const std::exception& e)
{
    json err;
    ErrorCategory cat = ErrorCategory::internal;
    if (const auto* se = dynamic_cast<const Error*>(&e)) {
        cat = se->category();
    }
    err["category"] = category_name(cat);
    err["code"] = static_cast<int>(cat);
    err["message"] = e.what();
    if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
        err["line"] = pe->line();
        err["column"] = pe->column();
    }
    if (const auto* ve = dynamic_cast<const ValidationError*>(&e)) {
        err["key"] = ve->key();
    }
    if (const auto* ne = dynamic_cast<const NonConvergenceError*>(&e)) {
        err["last_iterate"] = vec_json(ne->last_iterate());
        err["last_residual"] = ne->last_residual();
    }
    return json{{"error", err}}.dump();
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Fixed-gain stochastic approximation experiments"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    bool full_scale = false;
    unsigned workers = 0;
    std::uint64_t seed = 0;

    struct Entry {
        const char* name;
        Subcommand cmd;
        const char* help;
    };
    const Entry entries[] = {
        {"run", Subcommand::run, "error curve CSV and metadata"},
        {"rate", Subcommand::rate, "fitted rate slope"},
        {"mixing", Subcommand::mixing, "mixing profile, CLC and forgetting reports"},
        {"fixed-point", Subcommand::fixed_point, "analytic reference theta*"},
        {"validate", Subcommand::validate, "check and echo a config"},
    };
    std::vector<std::pair<CLI::App*, Subcommand>> subs;
    std::vector<CLI::Option*> out_opts;
    std::vector<CLI::Option*> seed_opts;
    for (const Entry& e : entries) {
        CLI::App* sub = app.add_subcommand(e.name, e.help);
        sub->add_option("--config", config, "JSON config file")->required();
        out_opts.push_back(sub->add_option("--out", out_dir, "output directory (default $SATRACK_OUT or .)"));
        sub->add_flag("--full-scale", full_scale, "apply the config's full_scale overrides");
        sub->add_option("--workers", workers, "worker threads, 0 = all cores");
        seed_opts.push_back(sub->add_option("--seed-override", seed, "replace the config seed"));
        subs.emplace_back(sub, e.cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << error_json(InputError(std::string("usage: ") + e.what())) << "\n";
        return static_cast<int>(ErrorCategory::input);
    }

    try {
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (!subs[i].first->parsed()) {
                continue;
            }
            std::optional<fs::path> out_path;
            if (out_opts[i]->count() > 0) {
                out_path = out_dir;
            }
            std::optional<std::uint64_t> seed_override;
            if (seed_opts[i]->count() > 0) {
                seed_override = seed;
            }
            const RunManifest manifest = make_manifest(config, out_path, full_scale, workers, seed_override);
            run_command(subs[i].second, manifest, out);
        }
    } catch (const std::exception& e) {
        err << error_json(e) << "\n";
        return exit_code(e);
    }
    return 0;
}

}  // namespace satrack
