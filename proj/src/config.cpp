#include "satrack/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "satrack/errors.hpp"

namespace satrack {

namespace {

using nlohmann::json;

std::string join(std::string_view path, std::string_view key)
{
    return path.empty() ? std::string(key) : std::string(path) + "." + std::string(key);
}

const json& require_object(const json& j, const std::string& path)
{
    if (!j.is_object()) {
        throw ValidationError(path, path + " must be an object");
    }
    return j;
}

void allow_keys(const json& obj, std::string_view path, std::initializer_list<std::string_view> keys)
{
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (std::string_view k : keys) {
            known = known || key == k;
        }
        if (!known) {
            const std::string full = join(path, key);
            throw ValidationError(full, "unknown key '" + full + "'");
        }
    }
}

const json& member(const json& obj, std::string_view path, const char* key)
{
    if (!obj.contains(key)) {
        const std::string full = join(path, key);
        throw ValidationError(full, "missing required key '" + full + "'");
    }
    return obj.at(key);
}

double as_number(const json& j, const std::string& key)
{
    if (!j.is_number()) {
        throw ValidationError(key, key + " must be a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw ValidationError(key, key + " must be finite");
    }
    return v;
}

std::size_t as_count(const json& j, const std::string& key)
{
    if (!j.is_number_unsigned()) {
        throw ValidationError(key, key + " must be a non-negative integer");
    }
    return j.get<std::size_t>();
}

std::vector<double> as_numbers(const json& j, const std::string& key)
{
    if (!j.is_array()) {
        throw ValidationError(key, key + " must be an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_number(j[i], key + "[" + std::to_string(i) + "]"));
    }
    return out;
}

// A number or an array of numbers.
Vector as_vector(const json& j, const std::string& key)
{
    if (j.is_number()) {
        return Vector::Constant(1, as_number(j, key));
    }
    const std::vector<double> v = as_numbers(j, key);
    if (v.empty()) {
        throw ValidationError(key, key + " must not be empty");
    }
    return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

LinearProcessSpec parse_linear(const json& j, const std::string& path);

SignalSpec parse_signal(const json& j, const std::string& path)
{
    require_object(j, path);
    allow_keys(j, path, {"kind", "params"});
    const json& kind_j = member(j, path, "kind");
    if (!kind_j.is_string()) {
        throw ValidationError(join(path, "kind"), join(path, "kind") + " must be a string");
    }
    const std::string kind = kind_j.get<std::string>();
    const json params = j.contains("params") ? j.at("params") : json::object();
    const std::string pp = join(path, "params");
    require_object(params, pp);

    if (kind == "geometric" || kind == "power_decay" || kind == "finite") {
        return parse_linear(j, path);
    }
    if (kind == "uniform") {
        allow_keys(params, pp, {});
        return UniformIid{};
    }
    if (kind == "arctan") {
        allow_keys(params, pp, {"inner"});
        return ArctanLinear{parse_linear(member(params, pp, "inner"), join(pp, "inner"))};
    }
    if (kind == "random_env") {
        allow_keys(params, pp, {"kappa", "rho", "h1_bound", "h2_bound", "environment"});
        RandomEnvChainSpec s;
        s.kappa = as_number(member(params, pp, "kappa"), join(pp, "kappa"));
        s.rho = as_number(member(params, pp, "rho"), join(pp, "rho"));
        s.h1_bound = as_number(member(params, pp, "h1_bound"), join(pp, "h1_bound"));
        s.h2_bound = as_number(member(params, pp, "h2_bound"), join(pp, "h2_bound"));
        s.environment = parse_linear(member(params, pp, "environment"), join(pp, "environment"));
        if (!(std::abs(s.kappa) < 1.0)) {
            throw ValidationError(join(pp, "kappa"), join(pp, "kappa") + " must satisfy |kappa| < 1");
        }
        if (!(std::abs(s.rho) <= 1.0)) {
            throw ValidationError(join(pp, "rho"), join(pp, "rho") + " must lie in [-1, 1]");
        }
        if (!(s.h1_bound >= 0.0) || !(s.h2_bound >= 0.0)) {
            throw ValidationError(pp, pp + " clamp bounds must be non-negative");
        }
        return s;
    }
    throw ValidationError(join(path, "kind"), "unknown signal kind '" + kind + "'");
}

LinearProcessSpec parse_linear(const json& j, const std::string& path)
{
    require_object(j, path);
    allow_keys(j, path, {"kind", "params"});
    const json& kind_j = member(j, path, "kind");
    const std::string kind = kind_j.is_string() ? kind_j.get<std::string>() : std::string();
    const std::string pp = join(path, "params");
    const json& params = require_object(member(j, path, "params"), pp);

    LinearProcessSpec spec;
    if (kind == "geometric") {
        allow_keys(params, pp, {"alpha", "tail_cutoff"});
        const double alpha = as_number(member(params, pp, "alpha"), join(pp, "alpha"));
        if (!(std::abs(alpha) < 1.0)) {
            throw ValidationError(join(pp, "alpha"), join(pp, "alpha") + " must satisfy |alpha| < 1");
        }
        spec = LinearProcessSpec::geometric(alpha);
    } else if (kind == "power_decay") {
        allow_keys(params, pp, {"beta", "tail_cutoff"});
        const double beta = as_number(member(params, pp, "beta"), join(pp, "beta"));
        if (!(beta > 0.5)) {
            throw ValidationError(join(pp, "beta"), join(pp, "beta") + " must exceed 1/2");
        }
        spec = LinearProcessSpec::power_decay(beta);
    } else if (kind == "finite") {
        allow_keys(params, pp, {"coefficients", "tail_cutoff"});
        std::vector<double> a = as_numbers(member(params, pp, "coefficients"), join(pp, "coefficients"));
        if (a.empty()) {
            throw ValidationError(join(pp, "coefficients"), join(pp, "coefficients") + " must not be empty");
        }
        spec = LinearProcessSpec::finite(std::move(a));
    } else {
        throw ValidationError(join(path, "kind"), join(path, "kind") + " must name a linear process "
                                                                       "(geometric, power_decay or finite)");
    }
    if (params.contains("tail_cutoff")) {
        const std::string key = join(pp, "tail_cutoff");
        const std::size_t cut = as_count(params.at("tail_cutoff"), key);
        if (cut > 1000000) {
            throw ValidationError(key, key + " is unreasonably large");
        }
        spec.tail_cutoff = static_cast<int>(cut);
    }
    return spec;
}

UpdateField parse_field(const json& j, const std::string& path)
{
    require_object(j, path);
    allow_keys(j, path, {"kind", "params"});
    const json& kind_j = member(j, path, "kind");
    const std::string kind = kind_j.is_string() ? kind_j.get<std::string>() : std::string();
    const std::string pp = join(path, "params");
    const json params = j.contains("params") ? j.at("params") : json::object();
    require_object(params, pp);
    if (kind == "quantile") {
        allow_keys(params, pp, {"q"});
        const double q = as_number(member(params, pp, "q"), join(pp, "q"));
        if (!(q > 0.0 && q < 1.0)) {
            throw ValidationError(join(pp, "q"), join(pp, "q") + " must lie in (0, 1)");
        }
        return QuantilePinball{q};
    }
    if (kind == "kohonen") {
        allow_keys(params, pp, {"cells"});
        const std::size_t cells = as_count(member(params, pp, "cells"), join(pp, "cells"));
        if (cells < 1) {
            throw ValidationError(join(pp, "cells"), join(pp, "cells") + " must be at least 1");
        }
        return Kohonen{static_cast<Index>(cells)};
    }
    throw ValidationError(join(path, "kind"), join(path, "kind") + " must be 'quantile' or 'kohonen'");
}

HorizonRule parse_horizon(const json& j, const std::string& path)
{
    require_object(j, path);
    allow_keys(j, path, {"per_gain", "fixed"});
    if (j.size() != 1) {
        throw ValidationError(path, path + " must hold exactly one of 'per_gain' or 'fixed'");
    }
    if (j.contains("fixed")) {
        return FixedHorizon{as_count(j.at("fixed"), join(path, "fixed"))};
    }
    return PerGain{as_number(j.at("per_gain"), join(path, "per_gain"))};
}

ReferenceRule parse_reference(const json& j, const std::string& path)
{
    if (j.is_string() && j.get<std::string>() == "analytic") {
        return Analytic{};
    }
    if (j.is_object()) {
        allow_keys(j, path, {"self_referential"});
        return SelfReferential{as_number(member(j, path, "self_referential"), join(path, "self_referential"))};
    }
    throw ValidationError(path, path + " must be \"analytic\" or {\"self_referential\": lambda_ref}");
}

// Fields shared by the top level and the full_scale override block.
void apply_scale_keys(const json& j, const std::string& path, ExperimentConfig& cfg)
{
    if (j.contains("lambda_grid")) {
        cfg.lambda_grid = as_numbers(j.at("lambda_grid"), join(path, "lambda_grid"));
    }
    if (j.contains("horizon")) {
        cfg.horizon = parse_horizon(j.at("horizon"), join(path, "horizon"));
    }
    if (j.contains("paths")) {
        cfg.paths = as_count(j.at("paths"), join(path, "paths"));
    }
    if (j.contains("reference")) {
        cfg.reference = parse_reference(j.at("reference"), join(path, "reference"));
    }
}

MixingSettings parse_mixing(const json& j, const std::string& path, Index dim)
{
    require_object(j, path);
    allow_keys(j, path,
               {"r", "tau_max", "clc_pairs", "clc_histories", "forgetting_k_max", "forgetting_histories",
                "theta_grid", "blocks", "trials"});
    MixingSettings m;
    auto count = [&](const char* key, std::size_t& dst) {
        if (j.contains(key)) {
            dst = as_count(j.at(key), join(path, key));
        }
    };
    if (j.contains("r")) {
        m.r = as_number(j.at("r"), join(path, "r"));
    }
    count("tau_max", m.tau_max);
    count("clc_pairs", m.clc_pairs);
    count("clc_histories", m.clc_histories);
    count("forgetting_k_max", m.forgetting_k_max);
    count("forgetting_histories", m.forgetting_histories);
    count("trials", m.trials);
    if (j.contains("theta_grid")) {
        const json& g = j.at("theta_grid");
        const std::string key = join(path, "theta_grid");
        if (!g.is_array() || g.empty()) {
            throw ValidationError(key, key + " must be a non-empty array");
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            Vector t = as_vector(g[i], key + "[" + std::to_string(i) + "]");
            if (t.size() != dim) {
                throw ValidationError(key, key + " points must match the dimension of theta0");
            }
            m.theta_grid.push_back(std::move(t));
        }
    }
    if (j.contains("blocks")) {
        const std::string key = join(path, "blocks");
        const json& b = j.at("blocks");
        if (!b.is_array() || b.empty()) {
            throw ValidationError(key, key + " must be a non-empty array");
        }
        m.blocks.clear();
        for (std::size_t i = 0; i < b.size(); ++i) {
            const std::size_t v = as_count(b[i], key + "[" + std::to_string(i) + "]");
            if (v < 1) {
                throw ValidationError(key, key + " entries must be positive");
            }
            m.blocks.push_back(v);
        }
    }
    return m;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t end = std::min(text.size(), byte > 0 ? byte - 1 : 0);
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

json linear_to_json(const LinearProcessSpec& s)
{
    json params;
    std::string kind;
    if (const auto* g = std::get_if<Geometric>(&s.rule)) {
        kind = "geometric";
        params["alpha"] = g->alpha;
    } else if (const auto* p = std::get_if<PowerDecay>(&s.rule)) {
        kind = "power_decay";
        params["beta"] = p->beta;
    } else {
        kind = "finite";
        params["coefficients"] = std::get<Finite>(s.rule).coefficients;
    }
    params["tail_cutoff"] = s.tail_cutoff;
    return {{"kind", kind}, {"params", params}};
}

json signal_to_json(const SignalSpec& s)
{
    if (const auto* lin = std::get_if<LinearProcessSpec>(&s)) {
        return linear_to_json(*lin);
    }
    if (const auto* at = std::get_if<ArctanLinear>(&s)) {
        return {{"kind", "arctan"}, {"params", {{"inner", linear_to_json(at->inner)}}}};
    }
    if (const auto* re = std::get_if<RandomEnvChainSpec>(&s)) {
        return {{"kind", "random_env"},
                {"params",
                 {{"kappa", re->kappa},
                  {"rho", re->rho},
                  {"h1_bound", re->h1_bound},
                  {"h2_bound", re->h2_bound},
                  {"environment", linear_to_json(re->environment)}}}};
    }
    return {{"kind", "uniform"}, {"params", json::object()}};
}

json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

RunConfig parse_config(std::string_view text, bool full_scale)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col) +
                             ": " + e.what(),
                         line, col);
    }
    require_object(doc, "config");
    allow_keys(doc, "",
               {"name", "signal", "field", "theta0", "domain", "domain_policy", "lambda_grid", "horizon", "paths",
                "seed", "reference", "full_scale", "mixing"});

    RunConfig rc;
    ExperimentConfig& cfg = rc.experiment;
    const json& name = member(doc, "", "name");
    if (!name.is_string()) {
        throw ValidationError("name", "name must be a string");
    }
    cfg.name = name.get<std::string>();
    cfg.signal = parse_signal(member(doc, "", "signal"), "signal");
    cfg.field = parse_field(member(doc, "", "field"), "field");
    cfg.theta0 = as_vector(member(doc, "", "theta0"), "theta0");

    const json& dom = require_object(member(doc, "", "domain"), "domain");
    allow_keys(dom, "domain", {"lower", "upper"});
    for (const char* side : {"lower", "upper"}) {
        const std::string key = join("domain", side);
        Vector v = as_vector(member(dom, "domain", side), key);
        if (v.size() == 1 && cfg.theta0.size() > 1) {
            v = Vector::Constant(cfg.theta0.size(), v[0]);
        }
        (std::string_view(side) == "lower" ? cfg.domain.lower : cfg.domain.upper) = v;
    }
    if (doc.contains("domain_policy")) {
        const json& p = doc.at("domain_policy");
        if (p == "none") {
            cfg.domain_policy = DomainPolicy::none;
        } else if (p == "clamp") {
            cfg.domain_policy = DomainPolicy::clamp;
        } else {
            throw ValidationError("domain_policy", "domain_policy must be \"none\" or \"clamp\"");
        }
    }
    member(doc, "", "lambda_grid");
    member(doc, "", "paths");
    apply_scale_keys(doc, "", cfg);

    const json& seed = member(doc, "", "seed");
    if (!seed.is_number_unsigned()) {
        throw ValidationError("seed", "seed must be a non-negative 64-bit integer");
    }
    cfg.base_seed = seed.get<std::uint64_t>();

    if (doc.contains("full_scale")) {
        const json& fs = require_object(doc.at("full_scale"), "full_scale");
        allow_keys(fs, "full_scale", {"lambda_grid", "horizon", "paths", "reference"});
        if (full_scale) {
            apply_scale_keys(fs, "full_scale", cfg);
            rc.full_scale = true;
        } else {
            ExperimentConfig scratch = cfg;  // still type-check the block
            apply_scale_keys(fs, "full_scale", scratch);
        }
    }
    if (doc.contains("mixing")) {
        rc.mixing = parse_mixing(doc.at("mixing"), "mixing", cfg.theta0.size());
    }
    validate(cfg);
    return rc;
}

RunConfig load_config(const std::filesystem::path& path, bool full_scale)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read config file '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), full_scale);
}

std::string echo_config(const RunConfig& rc)
{
    const ExperimentConfig& cfg = rc.experiment;
    json j;
    j["name"] = cfg.name;
    j["signal"] = signal_to_json(cfg.signal);
    if (const auto* p = std::get_if<QuantilePinball>(&cfg.field)) {
        j["field"] = {{"kind", "quantile"}, {"params", {{"q", p->q}}}};
    } else if (const auto* k = std::get_if<Kohonen>(&cfg.field)) {
        j["field"] = {{"kind", "kohonen"}, {"params", {{"cells", k->cells}}}};
    } else {
        j["field"] = {{"kind", "piecewise"}};
    }
    j["theta0"] = vector_to_json(cfg.theta0);
    j["domain"] = {{"lower", vector_to_json(cfg.domain.lower)}, {"upper", vector_to_json(cfg.domain.upper)}};
    j["domain_policy"] = cfg.domain_policy == DomainPolicy::clamp ? "clamp" : "none";
    j["lambda_grid"] = cfg.lambda_grid;
    if (const auto* f = std::get_if<FixedHorizon>(&cfg.horizon)) {
        j["horizon"] = {{"fixed", f->steps}};
    } else {
        j["horizon"] = {{"per_gain", std::get<PerGain>(cfg.horizon).c}};
    }
    j["paths"] = cfg.paths;
    j["seed"] = cfg.base_seed;
    if (const auto* sr = std::get_if<SelfReferential>(&cfg.reference)) {
        j["reference"] = {{"self_referential", sr->lambda_ref}};
    } else {
        j["reference"] = "analytic";
    }
    j["full_scale_applied"] = rc.full_scale;
    return j.dump(2);
}

}  // namespace satrack
