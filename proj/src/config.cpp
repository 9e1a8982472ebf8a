#include "cycsig/config.hpp"

#include <fstream>

#include "cycsig/errors.hpp"

namespace cycsig::config {

namespace {

std::string tangent_name(systems::TangentMode m) {
    return m == systems::TangentMode::VectorField ? "vector_field" : "finite_difference";
}

systems::TangentMode parse_tangent(const std::string& s) {
    if (s == "vector_field") return systems::TangentMode::VectorField;
    if (s == "finite_difference") return systems::TangentMode::FiniteDifference;
    throw ConfigError("unknown tangent mode '" + s + "'");
}

std::string post_name(systems::PostTransform p) {
    return p == systems::PostTransform::None ? "none" : "dadras_rescale";
}

systems::PostTransform parse_post(const std::string& s) {
    if (s == "none") return systems::PostTransform::None;
    if (s == "dadras_rescale") return systems::PostTransform::DadrasRescale;
    throw ConfigError("unknown post transform '" + s + "'");
}

std::string scheme_name(systems::SdeScheme s) { return s == systems::SdeScheme::Sra1 ? "sra1" : "euler_maruyama"; }

systems::SdeScheme parse_scheme(const std::string& s) {
    if (s == "sra1") return systems::SdeScheme::Sra1;
    if (s == "euler_maruyama") return systems::SdeScheme::EulerMaruyama;
    throw ConfigError("unknown SDE scheme '" + s + "'");
}

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

nlohmann::json spec_json(const systems::SystemSpec& s) {
    return {{"name", systems::to_string(s.name)},
            {"params", s.params},
            {"noise", s.noise},
            {"x0", s.x0},
            {"h_max", s.h_max},
            {"tangents", tangent_name(s.tangent_mode)},
            {"post", post_name(s.post)},
            {"jacobian_tangents", s.jacobian_tangents},
            {"emit_after_transform", s.emit_after_transform},
            {"dt", s.dt},
            {"thin", s.thin},
            {"scheme", scheme_name(s.scheme)}};
}

systems::SystemSpec spec_from_json(const nlohmann::json& j) {
    auto s = systems::default_spec(systems::parse_system_name(j.at("name").get<std::string>()));
    read_opt(j, "params", s.params);
    read_opt(j, "noise", s.noise);
    read_opt(j, "x0", s.x0);
    read_opt(j, "h_max", s.h_max);
    if (j.contains("tangents")) s.tangent_mode = parse_tangent(j.at("tangents").get<std::string>());
    if (j.contains("post")) s.post = parse_post(j.at("post").get<std::string>());
    read_opt(j, "jacobian_tangents", s.jacobian_tangents);
    read_opt(j, "emit_after_transform", s.emit_after_transform);
    read_opt(j, "dt", s.dt);
    read_opt(j, "thin", s.thin);
    if (j.contains("scheme")) s.scheme = parse_scheme(j.at("scheme").get<std::string>());
    return s;
}

void PipelineConfig::validate() const {
    run.spec.validate();
    auto g = run.grid;
    g.dim = run.spec.dim();
    g.validate();
    run.plan.validate();
    for (double r : run.plan.radii)
        if (r > g.r) throw ConfigError("evaluation radius " + std::to_string(r) + " exceeds grid box size");
    if (run.n_points < run.plan.lengths.back())
        throw ConfigError("series is shorter than the longest segment length");
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in (0, 1]");
}

PipelineConfig default_config(systems::SystemName name) {
    PipelineConfig c;
    auto& r = c.run;
    r.label = systems::to_string(name);
    r.spec = systems::default_spec(name);
    r.n_points = 200'000;
    r.transient = 1000;
    r.data_seed = 1;
    r.plan.lengths = experiments::ExperimentPlan::length_grid(10, 500);
    r.plan.per_length = 200;
    r.plan.seed = 7;
    switch (name) {
        case systems::SystemName::Lorenz:
            r.grid = {8.0, 3, 0};
            r.plan.radii = {5.0};
            break;
        case systems::SystemName::DoubleWell:
            r.grid = {0.2, 3, 0};
            r.plan.radii = {0.18};
            break;
        case systems::SystemName::Dadras:
            r.grid = {4.0, 3, 0};
            r.plan.radii = {1.5};
            break;
    }
    r.grid.dim = r.spec.dim();
    c.output = "out/" + r.label;
    return c;
}

PipelineConfig from_json(const nlohmann::json& j) {
    try {
        if (j.contains("format") && j.at("format").get<std::string>() != kFormat)
            throw ConfigError("unsupported config format '" + j.at("format").get<std::string>() + "'");
        const auto& sys = j.at("system");
        const auto name = systems::parse_system_name(sys.at("name").get<std::string>());
        auto c = default_config(name);
        c.run.spec = spec_from_json(sys);
        read_opt(j, "label", c.run.label);
        if (j.contains("data")) {
            const auto& d = j.at("data");
            read_opt(d, "n_points", c.run.n_points);
            read_opt(d, "transient", c.run.transient);
            read_opt(d, "seed", c.run.data_seed);
        }
        if (j.contains("grid")) {
            read_opt(j.at("grid"), "r", c.run.grid.r);
            read_opt(j.at("grid"), "k", c.run.grid.k);
        }
        c.run.grid.dim = c.run.spec.dim();
        if (j.contains("plan")) {
            const auto& p = j.at("plan");
            auto& plan = c.run.plan;
            if (p.contains("lengths")) {
                const auto& l = p.at("lengths");
                if (l.is_object())
                    plan.lengths = experiments::ExperimentPlan::length_grid(l.at("step").get<std::size_t>(),
                                                                            l.at("max").get<std::size_t>());
                else
                    plan.lengths = l.get<std::vector<std::size_t>>();
            }
            read_opt(p, "per_length", plan.per_length);
            read_opt(p, "seed", plan.seed);
            read_opt(p, "radii", plan.radii);
            if (p.contains("C")) {
                if (p.at("C").is_null()) plan.C.reset();
                else plan.C = p.at("C").get<double>();
            }
        }
        read_opt(j, "threshold", c.threshold);
        if (j.contains("output")) c.output = j.at("output").get<std::string>();
        read_opt(j, "threads", c.threads);
        if (j.contains("sweep")) c.sweep = j.at("sweep").get<std::vector<nlohmann::json>>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

nlohmann::json to_json(const PipelineConfig& c) {
    const auto& r = c.run;
    nlohmann::json plan = experiments::plan_json(r.plan);
    return {{"format", kFormat},
            {"label", r.label},
            {"system", spec_json(r.spec)},
            {"data", {{"n_points", r.n_points}, {"transient", r.transient}, {"seed", r.data_seed}}},
            {"grid", {{"r", r.grid.r}, {"k", r.grid.k}}},
            {"plan", plan},
            {"threshold", c.threshold},
            {"output", c.output.string()},
            {"threads", c.threads},
            {"sweep", c.sweep}};
}

PipelineConfig load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + file.string() + ": " + e.what());
    }
    return from_json(j);
}

PipelineConfig apply_patch(const PipelineConfig& base, const nlohmann::json& patch) {
    auto j = to_json(base);
    j.erase("sweep");
    j.merge_patch(patch);
    auto c = from_json(j);
    c.sweep.clear();
    return c;
}

}  // namespace cycsig::config
