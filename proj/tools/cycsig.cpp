#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cycsig/config.hpp"
#include "cycsig/errors.hpp"
#include "cycsig/experiments.hpp"
#include "cycsig/io.hpp"
#include "cycsig/pipeline.hpp"
#include "cycsig/plot.hpp"

namespace fs = std::filesystem;
using namespace cycsig;

namespace {

struct Source {
    std::string config_file;
    std::string system;

    config::PipelineConfig resolve() const {
        if (!config_file.empty()) return config::load(config_file);
        if (!system.empty()) return config::default_config(systems::parse_system_name(system));
        throw ConfigError("need --config or --system");
    }
    void add(CLI::App* app) {
        app->add_option("-c,--config", config_file, "JSON config file")->check(CLI::ExistingFile);
        app->add_option("-s,--system", system, "lorenz, doublewell or dadras (uses built-in defaults)");
    }
};

// "10:10:500" (start:step:stop) or "10,20,50".
std::vector<std::size_t> parse_lengths(const std::string& s) {
    std::vector<std::size_t> out;
    if (s.find(':') != std::string::npos) {
        std::size_t a = 0, b = 0, step = 0;
        char c1 = 0, c2 = 0;
        std::istringstream in(s);
        if (!(in >> a >> c1 >> step >> c2 >> b) || c1 != ':' || c2 != ':' || step == 0)
            throw ConfigError("lengths must look like start:step:stop");
        for (std::size_t l = a; l <= b; l += step) out.push_back(l);
        return out;
    }
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stoul(tok));
    return out;
}

std::size_t betti_from(const std::string& space_file, std::optional<std::size_t> betti,
                       const std::vector<experiments::Outcome>& outcomes) {
    if (betti) return *betti;
    if (!space_file.empty()) return io::read_json(space_file).at("betti1").get<std::size_t>();
    for (const auto& o : outcomes)
        if (o.ok()) return o.signature->ambient();
    throw ConfigError("cannot tell b1: pass --space or --betti");
}

std::vector<experiments::Outcome> load_outcomes(const std::string& file, std::optional<double> radius) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file);
    auto all = experiments::read_outcomes_jsonl(in);
    if (all.empty()) return all;
    return experiments::at_radius(all, radius.value_or(all.front().radius));
}

int fail(const std::exception& e) {
    nlohmann::json err = {{"error", e.what()}};
    int code = 1;
    if (const auto* s = dynamic_cast<const pipeline::StageError*>(&e)) {
        err["stage"] = s->stage;
        err["type"] = s->type;
        if (s->type == "config") code = 2;
    } else if (dynamic_cast<const ConfigError*>(&e)) {
        err["type"] = "config";
        code = 2;
    }
    std::cerr << err.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cycling signatures of time series in a cubical comparison space"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pipeline::kVersion);

    // generate
    Source gen_src;
    std::optional<std::size_t> gen_points;
    std::optional<std::uint64_t> gen_seed;
    std::string gen_out;
    auto* gen = app.add_subcommand("generate", "Integrate a system and write the lifted trajectory");
    gen_src.add(gen);
    gen->add_option("-n,--points", gen_points, "Number of samples kept after the transient");
    gen->add_option("--seed", gen_seed, "Noise seed");
    gen->add_option("-o,--out", gen_out, "Trajectory CSV path")->required();

    // space
    std::string sp_traj, sp_out;
    double sp_r = 0.0;
    int sp_k = 3;
    auto* sp = app.add_subcommand("space", "Build the comparison space of a trajectory");
    sp->add_option("-t,--trajectory,--traj,--input", sp_traj, "Trajectory CSV")->required()->check(CLI::ExistingFile);
    sp->add_option("-r", sp_r, "Space box size")->required();
    sp->add_option("-k", sp_k, "Sphere subdivision")->capture_default_str();
    sp->add_option("-o,--out", sp_out, "Space JSON path")->required();

    // compute
    std::string cm_traj, cm_space, cm_out, cm_lengths = "10:10:500";
    std::vector<double> cm_radii;
    std::size_t cm_per = 200, cm_threads = 0;
    std::uint64_t cm_seed = 7;
    std::optional<double> cm_c;
    auto* cm = app.add_subcommand("compute", "Signatures of sampled segments");
    cm->add_option("-t,--trajectory,--traj", cm_traj, "Trajectory CSV")->required()->check(CLI::ExistingFile);
    cm->add_option("--space", cm_space, "Space JSON")->required()->check(CLI::ExistingFile);
    cm->add_option("--radius", cm_radii, "Evaluation radius (repeatable)")->required();
    cm->add_option("--lengths", cm_lengths, "start:step:stop or comma list")->capture_default_str();
    cm->add_option("--per-length", cm_per, "Segments per length")->capture_default_str();
    cm->add_option("--seed", cm_seed, "Sampling seed")->capture_default_str();
    cm->add_option("-C", cm_c, "Metric weight (default r k)");
    cm->add_option("-j,--threads", cm_threads, "Workers (0: CYCSIG_THREADS or all cores)");
    cm->add_option("-o,--out", cm_out, "Signature table (JSON lines)")->required();

    // stats / graph
    std::string st_sig, st_space, st_out;
    std::optional<std::size_t> st_betti;
    std::optional<double> st_radius;
    double st_threshold = 0.02;
    auto* st = app.add_subcommand("stats", "Rank table, frequency curves and summary");
    auto* gr = app.add_subcommand("graph", "Inclusion graph of frequent signatures (DOT)");
    for (auto* sub : {st, gr}) {
        sub->add_option("--signatures", st_sig, "Signature table")->required()->check(CLI::ExistingFile);
        sub->add_option("--space", st_space, "Space JSON (for b1)")->check(CLI::ExistingFile);
        sub->add_option("--betti", st_betti, "b1 of the space");
        sub->add_option("--radius", st_radius, "Radius to use (default: first in the table)");
        sub->add_option("--threshold", st_threshold, "Frequent-signature cutoff")->capture_default_str();
    }
    st->add_option("-o,--out", st_out, "Output directory")->required();
    gr->add_option("-o,--out", st_out, "DOT file (default stdout)");

    // sweep / run
    Source run_src;
    std::string run_out;
    std::optional<std::size_t> run_threads;
    auto* sw = app.add_subcommand("sweep", "Run every variation listed in a config");
    sw->add_option("-c,--config", run_src.config_file, "JSON config with a sweep list")->required()->check(
        CLI::ExistingFile);
    sw->add_option("-o,--out", run_out, "Override output directory");
    sw->add_option("-j,--threads", run_threads, "Workers");
    auto* rn = app.add_subcommand("run", "Whole pipeline from a config");
    run_src.add(rn);
    rn->add_option("-o,--out", run_out, "Override output directory");
    rn->add_option("-j,--threads", run_threads, "Workers");

    // plot
    std::vector<std::string> pl_tables;
    std::string pl_title;
    auto* pl = app.add_subcommand("plot", "SVG for rank tables and frequency curves");
    pl->add_option("tables", pl_tables, "CSV tables; SVG is written next to each")->required()->check(
        CLI::ExistingFile);
    pl->add_option("--title", pl_title, "Plot title");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            auto c = gen_src.resolve();
            if (gen_points) c.run.n_points = *gen_points;
            if (gen_seed) c.run.data_seed = *gen_seed;
            c.run.spec.validate();
            const auto meta = pipeline::generate(c, gen_out);
            std::cout << "wrote " << gen_out << " (" << c.run.n_points << " samples)\n";
        } else if (*sp) {
            const auto traj = io::read_trajectory(sp_traj);
            cubical::GridParams g{sp_r, sp_k, traj.lifted.dim};
            g.validate();
            const auto y = pipeline::space(traj.lifted, g, sp_out);
            std::cout << "boxes " << y.complex.boxes().size() << ", b1 " << y.betti1() << "\n";
        } else if (*cm) {
            const auto traj = io::read_trajectory(cm_traj);
            const auto y = cubical::load_space(traj.lifted, io::read_json(cm_space));
            experiments::ExperimentPlan plan;
            plan.lengths = parse_lengths(cm_lengths);
            plan.per_length = cm_per;
            plan.seed = cm_seed;
            plan.radii = cm_radii;
            plan.C = cm_c;
            const auto out = pipeline::compute(traj.lifted, y, plan, cm_threads, cm_out);
            std::size_t failed = 0;
            for (const auto& o : out) failed += !o.ok();
            std::cout << out.size() << " records, " << failed << " failed\n";
        } else if (*st || *gr) {
            const auto outcomes = load_outcomes(st_sig, st_radius);
            const auto b1 = betti_from(st_space, st_betti, outcomes);
            if (*st) {
                const auto s = pipeline::stats(outcomes, b1, st_threshold, st_out);
                std::cout << experiments::summary_json(s).dump(2) << "\n";
            } else {
                const auto s = experiments::summarize(outcomes, b1, st_threshold);
                if (st_out.empty()) {
                    experiments::write_dot(std::cout, s.graph);
                } else {
                    std::ostringstream os;
                    experiments::write_dot(os, s.graph);
                    io::write_text(st_out, os.str());
                }
            }
        } else if (*sw || *rn) {
            auto c = run_src.resolve();
            if (!run_out.empty()) c.output = run_out;
            if (run_threads) c.threads = *run_threads;
            if (*sw) {
                const auto report = pipeline::sweep(c);
                int failed = 0;
                for (const auto& e : report) failed += e.at("status") != "ok";
                std::cout << report.size() << " runs, " << failed << " failed\n";
                return failed ? 1 : 0;
            }
            const auto m = pipeline::run(c);
            std::cout << m.at("summaries").dump(2) << "\n";
        } else if (*pl) {
            for (const auto& t : pl_tables) {
                std::ifstream in(t);
                std::string head;
                std::getline(in, head);
                in.seekg(0);
                fs::path out = t;
                out.replace_extension(".svg");
                const bool ranks = head.size() >= 7 && head.compare(head.size() - 7, 7, ",failed") == 0;
                io::write_text(out, ranks ? plot::rank_svg(experiments::read_rank_csv(in), pl_title)
                                          : plot::curves_svg(experiments::read_curves_csv(in), pl_title));
                std::cout << "wrote " << out.string() << "\n";
            }
        }
    } catch (const std::exception& e) {
        return fail(e);
    }
    return 0;
}
