#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cycsig/config.hpp"
#include "cycsig/errors.hpp"
#include "cycsig/io.hpp"
#include "cycsig/pipeline.hpp"
#include "cycsig/plot.hpp"

namespace fs = std::filesystem;
using namespace cycsig;
using systems::SystemName;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("cycsig_test_" + name);
    fs::remove_all(p);
    return p;
}

config::PipelineConfig tiny(const fs::path& out) {
    auto c = config::default_config(SystemName::Lorenz);
    c.run.n_points = 2000;
    c.run.transient = 200;
    c.run.plan.lengths = {20, 60, 120};
    c.run.plan.per_length = 6;
    c.run.plan.radii = {4.5, 5.0};
    c.output = out;
    c.threads = 2;
    return c;
}

}  // namespace

TEST_CASE("defaults and validation") {
    for (auto name : {SystemName::Lorenz, SystemName::DoubleWell, SystemName::Dadras}) {
        const auto c = config::default_config(name);
        CHECK_NOTHROW(c.validate());
        CHECK(c.run.plan.lengths.front() == 10);
        CHECK(c.run.plan.lengths.back() == 500);
        CHECK(c.run.plan.per_length == 200);
        CHECK(c.run.grid.dim == c.run.spec.dim());
    }
    CHECK(config::default_config(SystemName::DoubleWell).run.plan.radii == std::vector<double>{0.18});
    auto c = config::default_config(SystemName::Lorenz);
    c.run.plan.radii = {9.0};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = config::default_config(SystemName::Lorenz);
    c.run.n_points = 100;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = config::default_config(SystemName::Lorenz);
    c.threshold = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("config json round trip and patches") {
    auto c = config::default_config(SystemName::Dadras);
    c.run.plan.C = 18.0;
    c.sweep = {nlohmann::json{{"label", "a"}}};
    const auto j = config::to_json(c);
    CHECK(j.at("format") == config::kFormat);
    const auto back = config::from_json(nlohmann::json::parse(j.dump()));
    CHECK(config::to_json(back) == j);

    const auto p = config::apply_patch(c, {{"grid", {{"r", 6.0}}}, {"plan", {{"radii", {1.0, 2.0}}}}});
    CHECK(p.run.grid.r == 6.0);
    CHECK(p.run.grid.k == 3);
    CHECK(p.run.plan.radii == std::vector<double>{1.0, 2.0});
    CHECK(p.run.spec.x0 == c.run.spec.x0);

    // Only the system name is required.
    const auto minimal = config::from_json({{"system", {{"name", "doublewell"}}}});
    CHECK(minimal.run.grid.r == 0.2);
    CHECK_THROWS_AS(config::from_json({{"format", "other/9"}, {"system", {{"name", "lorenz"}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json({{"system", {{"name", "nope"}}}}), ConfigError);
}

TEST_CASE("trajectory round trip is exact") {
    const auto dir = scratch("traj");
    const auto data = systems::generate(systems::dadras_spec(), 300, 0, 50);
    io::write_trajectory(dir / "t.csv", data.lifted, {{"note", "x"}});
    const auto back = io::read_trajectory(dir / "t.csv");
    CHECK(back.lifted.dim == data.lifted.dim);
    CHECK(back.lifted.points == data.lifted.points);
    CHECK(back.lifted.tangents == data.lifted.tangents);
    CHECK(back.meta.at("note") == "x");
    CHECK(back.meta.at("points") == 300);
    fs::remove_all(dir);
}

TEST_CASE("sha256 known value") {
    CHECK(io::sha256("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(io::sha256("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("plots") {
    experiments::RankTable empty;
    const auto svg = plot::rank_svg(empty, "nothing");
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("<g class=\"bar\"") == std::string::npos);
    CHECK(plot::curves_svg(experiments::FrequencyCurves{}).find("</svg>") != std::string::npos);

    experiments::RankTable one;
    one.max_rank = 2;
    one.lengths = {50};
    one.counts = {{3, 2, 1}};
    one.failed = {0};
    const auto a = plot::rank_svg(one, "one");
    CHECK(a == plot::rank_svg(one, "one"));
    CHECK(a.find("<g class=\"bar\"") != std::string::npos);
    CHECK(a.find("<g class=\"bar\"") == a.rfind("<g class=\"bar\""));
}

TEST_CASE("pipeline run is reproducible") {
    const auto dir = scratch("run");
    auto c = tiny(dir / "a");
    const auto m1 = pipeline::run(c);
    const auto first = io::read_text(dir / "a" / "r5" / "ranks.csv");
    const auto m2 = pipeline::run(c);
    CHECK(io::read_text(dir / "a" / "r5" / "ranks.csv") == first);
    CHECK(m1.at("digest") == m2.at("digest"));
    CHECK(m1.at("betti1") == 2);

    // Every file but the manifest is listed with its digest.
    std::set<std::string> listed;
    for (const auto& f : m1.at("files")) {
        listed.insert(f.at("path").get<std::string>());
        CHECK(io::sha256_file(dir / "a" / f.at("path").get<std::string>()) == f.at("sha256"));
    }
    for (auto it = fs::recursive_directory_iterator(dir / "a"); it != fs::recursive_directory_iterator(); ++it)
        if (it->is_regular_file() && it->path().filename() != "manifest.json")
            CHECK(listed.count(fs::relative(it->path(), dir / "a").generic_string()) == 1);
    for (const char* f : {"trajectory.csv", "space.json", "signatures.jsonl", "r4.5/ranks.csv", "r5/rank1.csv",
                          "r5/rank2.csv", "r5/inclusion.dot", "r5/ranks.svg", "r5/summary.json"})
        CHECK(fs::exists(dir / "a" / f));

    // A different thread count changes no data file (config.json records
    // the thread count and output path, so the digest differs).
    c.threads = 1;
    c.output = dir / "b";
    pipeline::run(c);
    for (const char* f : {"trajectory.csv", "space.json", "signatures.jsonl", "r5/ranks.csv", "r5/rank1.csv"})
        CHECK(io::read_text(dir / "a" / f) == io::read_text(dir / "b" / f));
    fs::remove_all(dir);
}

TEST_CASE("bad config fails before compute with error.json") {
    const auto dir = scratch("bad");
    auto c = tiny(dir);
    c.run.plan.radii = {20.0};
    CHECK_THROWS_AS(pipeline::run(c), pipeline::StageError);
    const auto err = io::read_json(dir / "error.json");
    CHECK(err.at("stage") == "validate");
    CHECK(err.at("type") == "config");
    CHECK_FALSE(fs::exists(dir / "trajectory.csv"));
    fs::remove_all(dir);
}

TEST_CASE("sweep isolates failures") {
    const auto dir = scratch("sweep");
    auto c = tiny(dir);
    c.run.plan.radii = {5.0};
    c.sweep = {nlohmann::json{{"label", "c6"}, {"grid", {{"r", 6.0}}}},
               nlohmann::json{{"label", "bad"}, {"plan", {{"radii", {9.0}}}}}};
    const auto report = pipeline::sweep(c);
    REQUIRE(report.size() == 2);
    CHECK(report[0].at("status") == "ok");
    CHECK(report[1].at("status") != "ok");
    CHECK(fs::exists(dir / "sweep" / "c6" / "manifest.json"));
    CHECK(fs::exists(dir / "sweep" / "bad" / "error.json"));
    CHECK(fs::exists(dir / "sweep.json"));
    CHECK(pipeline::sweep(tiny(dir / "none")).empty());
    fs::remove_all(dir);
}
