#include "cycsig/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "cycsig/errors.hpp"
#include "cycsig/io.hpp"
#include "cycsig/plot.hpp"

namespace cycsig::pipeline {

namespace fs = std::filesystem;

namespace {

std::string error_type(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const IntegrationFailure*>(&e)) return "integration";
    if (dynamic_cast<const LiftFailure*>(&e)) return "lift";
    if (dynamic_cast<const EdgeTooLong*>(&e)) return "edge_too_long";
    if (dynamic_cast<const Error*>(&e)) return "pipeline";
    return "internal";
}

class Timer {
public:
    template <class F>
    auto stage(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(f())>) {
                f();
                record(name, t0);
            } else {
                auto r = f();
                record(name, t0);
                return r;
            }
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(name, e);
        }
    }
    nlohmann::json stages = nlohmann::json::array();

private:
    void record(const std::string& name, std::chrono::steady_clock::time_point t0) {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        stages.push_back({{"name", name}, {"seconds", s}});
    }
};

}  // namespace

StageError::StageError(std::string stage_name, const std::exception& cause)
    : std::runtime_error(stage_name + ": " + cause.what()), stage(std::move(stage_name)), type(error_type(cause)) {}

std::string radius_dir(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "r%g", r);
    return buf;
}

nlohmann::json generate(const config::PipelineConfig& c, const fs::path& csv) {
    const auto data = systems::generate(c.run.spec, c.run.n_points, c.run.data_seed, c.run.transient);
    nlohmann::json meta = {{"system", config::spec_json(c.run.spec)},
                           {"seed", c.run.data_seed},
                           {"transient", c.run.transient},
                           {"tangents_included", true}};
    io::write_trajectory(csv, data.lifted, meta);
    return meta;
}

cubical::ComparisonSpace space(const systems::LiftedSeries& lifted, const cubical::GridParams& g, const fs::path& out) {
    auto grid = g;
    grid.dim = lifted.dim;
    auto y = cubical::build_space(lifted, grid);
    io::write_json(out, cubical::space_summary(y));
    return y;
}

std::vector<experiments::Outcome> compute(const systems::LiftedSeries& lifted, const cubical::ComparisonSpace& y,
                                          const experiments::ExperimentPlan& plan, std::size_t threads,
                                          const fs::path& out) {
    auto outcomes = experiments::run_plan(lifted, y, plan, threads);
    std::ostringstream os;
    experiments::write_outcomes_jsonl(os, outcomes);
    io::write_text(out, os.str());
    return outcomes;
}

experiments::Summary stats(const std::vector<experiments::Outcome>& outcomes, std::size_t betti1, double threshold,
                           const fs::path& dir) {
    auto s = experiments::summarize(outcomes, betti1, threshold);
    std::ostringstream ranks, r1, r2, dot;
    experiments::write_rank_csv(ranks, s.ranks);
    experiments::write_curves_csv(r1, s.rank1);
    experiments::write_curves_csv(r2, s.rank2);
    experiments::write_dot(dot, s.graph);
    io::write_text(dir / "ranks.csv", ranks.str());
    io::write_text(dir / "rank1.csv", r1.str());
    io::write_text(dir / "rank2.csv", r2.str());
    io::write_text(dir / "inclusion.dot", dot.str());
    io::write_json(dir / "summary.json", experiments::summary_json(s));
    return s;
}

void plot_dir(const fs::path& dir) {
    std::ifstream ranks(dir / "ranks.csv");
    if (ranks) io::write_text(dir / "ranks.svg", plot::rank_svg(experiments::read_rank_csv(ranks), "cycling rank"));
    for (const char* name : {"rank1", "rank2"}) {
        std::ifstream in(dir / (std::string(name) + ".csv"));
        if (!in) continue;
        const auto title = std::string(name) == "rank1" ? "rank 1 signatures" : "rank 2 signatures";
        io::write_text(dir / (std::string(name) + ".svg"), plot::curves_svg(experiments::read_curves_csv(in), title));
    }
}

nlohmann::json run(const config::PipelineConfig& c) {
    const fs::path dir = c.output;
    Timer timer;
    try {
        timer.stage("validate", [&] { c.validate(); });
        fs::create_directories(dir);
        io::write_json(dir / "config.json", config::to_json(c));

        const auto csv = dir / "trajectory.csv";
        timer.stage("generate", [&] { generate(c, csv); });
        const auto traj = timer.stage("load", [&] { return io::read_trajectory(csv); });
        const auto y = timer.stage("space", [&] { return space(traj.lifted, c.run.grid, dir / "space.json"); });
        const auto outcomes = timer.stage(
            "compute", [&] { return compute(traj.lifted, y, c.run.plan, c.threads, dir / "signatures.jsonl"); });
        nlohmann::json summaries = nlohmann::json::object();
        timer.stage("stats", [&] {
            for (double r : c.run.plan.radii) {
                const auto s = stats(experiments::at_radius(outcomes, r), y.betti1(), c.threshold, dir / radius_dir(r));
                summaries[radius_dir(r)] = experiments::summary_json(s);
            }
        });
        timer.stage("plot", [&] {
            for (double r : c.run.plan.radii) plot_dir(dir / radius_dir(r));
        });

        // Every artifact of this run in path order; sweep results nested in
        // the same directory belong to their own manifests.
        std::vector<fs::path> files;
        for (auto it = fs::recursive_directory_iterator(dir); it != fs::recursive_directory_iterator(); ++it) {
            const auto name = it->path().filename();
            if (it->is_directory() && it.depth() == 0 && name == "sweep") it.disable_recursion_pending();
            if (!it->is_regular_file() || (it.depth() == 0 && (name == "manifest.json" || name == "error.json" ||
                                                                name == "sweep.json")))
                continue;
            files.push_back(it->path());
        }
        std::sort(files.begin(), files.end());
        nlohmann::json listing = nlohmann::json::array();
        std::string all;
        for (const auto& f : files) {
            const auto rel = fs::relative(f, dir).generic_string();
            const auto digest = io::sha256_file(f);
            listing.push_back({{"path", rel}, {"bytes", fs::file_size(f)}, {"sha256", digest}});
            all += rel + " " + digest + "\n";
        }
        nlohmann::json manifest = {{"format", "cycsig-manifest/1"},
                                   {"version", kVersion},
                                   {"config", config::to_json(c)},
                                   {"seeds", {{"data", c.run.data_seed}, {"plan", c.run.plan.seed}}},
                                   {"betti1", y.betti1()},
                                   {"summaries", summaries},
                                   {"stages", timer.stages},
                                   {"files", listing},
                                   {"digest", io::sha256(all)}};
        io::write_json(dir / "manifest.json", manifest);
        fs::remove(dir / "error.json");
        return manifest;
    } catch (const StageError& e) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        try {
            io::write_json(dir / "error.json", {{"stage", e.stage}, {"type", e.type}, {"message", e.what()}});
        } catch (...) {
        }
        throw;
    }
}

nlohmann::json sweep(const config::PipelineConfig& c) {
    nlohmann::json report = nlohmann::json::array();
    for (std::size_t i = 0; i < c.sweep.size(); ++i) {
        const auto& patch = c.sweep[i];
        std::string label = patch.contains("label") ? patch.at("label").get<std::string>() : "run" + std::to_string(i);
        nlohmann::json entry = {{"label", label}, {"patch", patch}};
        try {
            auto sub = config::apply_patch(c, patch);
            sub.output = c.output / "sweep" / label;
            const auto m = run(sub);
            entry["status"] = "ok";
            entry["output"] = sub.output.string();
            entry["digest"] = m.at("digest");
            entry["summaries"] = m.at("summaries");
        } catch (const StageError& e) {
            entry["status"] = "failed";
            entry["stage"] = e.stage;
            entry["error"] = e.what();
        } catch (const std::exception& e) {
            entry["status"] = "failed";
            entry["stage"] = "config";
            entry["error"] = e.what();
        }
        report.push_back(entry);
    }
    io::write_json(c.output / "sweep.json", report);
    return report;
}

}  // namespace cycsig::pipeline
