#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cycsig/errors.hpp"
#include "cycsig/experiments.hpp"
#include "oracles.hpp"

using namespace cycsig;
using namespace cycsig::experiments;
using systems::SystemName;

namespace {

Outcome rec(std::size_t length, std::size_t ambient, const std::string& key, double radius = 1.0) {
    Outcome o;
    o.length = length;
    o.radius = radius;
    o.signature = gf2::Subspace::from_key(ambient, key);
    return o;
}

Outcome failed(std::size_t length) {
    Outcome o;
    o.length = length;
    o.radius = 1.0;
    o.error = "edge too long";
    return o;
}

// 10 and 20 with a mix of ranks and one failure.
std::vector<Outcome> mixed() {
    return {rec(10, 2, "0"),  rec(10, 2, "0"),  rec(10, 2, "10"),    rec(10, 2, "0"), failed(10),
            rec(20, 2, "10"), rec(20, 2, "01"), rec(20, 2, "10|01"), rec(20, 2, "11"), rec(20, 2, "10")};
}

}  // namespace

TEST_CASE("sampling") {
    CHECK(sample_segments(50, 50, 7, 1) == std::vector<std::size_t>(7, 0));
    CHECK(sample_segments(1000, 10, 100, 3) == sample_segments(1000, 10, 100, 3));
    CHECK(sample_segments(1000, 10, 100, 3) != sample_segments(1000, 10, 100, 4));
    CHECK(sample_segments(1000, 10, 100, 3) != sample_segments(1000, 20, 100, 3));
    CHECK_THROWS_AS(sample_segments(10, 11, 1, 0), ConfigError);
    CHECK(sample_segments(10, 5, 0, 0).empty());
    for (auto s : sample_segments(100, 30, 500, 9)) CHECK(s <= 70);
}

TEST_CASE("sampled starts are uniform") {
    const std::size_t n = 100000, len = 100, count = 1000;
    const auto starts = sample_segments(n, len, count, 2024);
    std::vector<double> bins(10, 0.0);
    const double width = static_cast<double>(n - len + 1) / 10.0;
    for (auto s : starts) bins[std::min<std::size_t>(9, static_cast<std::size_t>(s / width))] += 1;
    double chi2 = 0.0;
    for (double b : bins) chi2 += (b - 100.0) * (b - 100.0) / 100.0;
    // 99th percentile of chi-square with 9 degrees of freedom.
    CHECK(chi2 < 21.666);
}

TEST_CASE("plan validation and length grid") {
    CHECK(ExperimentPlan::length_grid(10, 50) == std::vector<std::size_t>{10, 20, 30, 40, 50});
    ExperimentPlan p;
    p.lengths = {10, 20};
    p.radii = {1.0};
    CHECK_NOTHROW(p.validate());
    p.lengths = {20, 10};
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.lengths = {10};
    p.per_length = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.per_length = 1;
    p.radii = {};
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.radii = {0.5};
    const auto back = plan_from_json(nlohmann::json::parse(plan_json(p).dump()));
    CHECK(back.lengths == p.lengths);
    CHECK(back.radii == p.radii);
    CHECK(back.per_length == p.per_length);
    CHECK(back.seed == p.seed);
}

TEST_CASE("rank table by hand") {
    const auto t = rank_table(mixed(), 2);
    REQUIRE(t.lengths == std::vector<std::size_t>{10, 20});
    CHECK(t.counts[0] == std::vector<std::size_t>{3, 1, 0});
    CHECK(t.counts[1] == std::vector<std::size_t>{0, 4, 1});
    CHECK(t.failed == std::vector<std::size_t>{1, 0});
    CHECK(t.total(0) == 5);
    CHECK(t.total(1) == 5);
    CHECK(t.rank0_extinction() == 20u);
    CHECK(t.positive_onset() == 10u);
    CHECK_THROWS(rank_table(mixed(), 1));

    const auto zeros = rank_table({rec(10, 3, "0"), rec(10, 3, "0")}, 3);
    CHECK(zeros.counts[0] == std::vector<std::size_t>{2, 0, 0, 0});
    CHECK_FALSE(zeros.rank0_extinction());
    CHECK_FALSE(zeros.positive_onset());
    CHECK(rank_table({}, 2).lengths.empty());
}

TEST_CASE("frequency curves by hand") {
    const auto c = frequency_curves(mixed(), 1, 2);
    REQUIRE(c.keys == std::vector<std::string>{"01", "10", "11"});
    CHECK(c.freq[1] == std::vector<double>{0.2, 0.4});
    CHECK(c.freq[0] == std::vector<double>{0.0, 0.2});
    CHECK(c.peak(1) == 0.4);
    CHECK(frequent_keys(c, 0.3) == std::vector<std::string>{"10"});
    CHECK(frequent_keys(c, 0.2) == std::vector<std::string>{"10", "01", "11"});
    const auto on = onset_lengths(c, 0.2);
    CHECK(on.at("10") == 10);
    CHECK(on.at("01") == 20);
    CHECK(onset_lengths(c, 0.5).empty());
    CHECK(onset_lengths(FrequencyCurves{}, 0.1).empty());
    CHECK_THROWS_AS(onset_lengths(c, 0.0), ConfigError);
    CHECK_THROWS_AS(onset_lengths(c, 1.5), ConfigError);

    // Column sums equal the rank share and never exceed 1.
    const auto t = rank_table(mixed(), 2);
    for (std::size_t rank : {0, 1, 2}) {
        const auto cr = frequency_curves(mixed(), rank, 2);
        for (std::size_t l = 0; l < cr.lengths.size(); ++l) {
            double s = 0;
            for (const auto& f : cr.freq) s += f[l];
            CHECK(s == doctest::Approx(double(t.counts[l][rank]) / double(t.total(l))));
            CHECK(s <= 1.0);
        }
    }
}

TEST_CASE("inclusion graph edges are exactly containment") {
    const auto g = inclusion_graph(3, {"100", "010", "110", "001"}, {"100|010", "001|010"});
    std::set<std::pair<std::size_t, std::size_t>> edges(g.edges.begin(), g.edges.end());
    CHECK(edges == std::set<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 0}, {2, 0}, {1, 1}, {3, 1}});
    CHECK_THROWS(inclusion_graph(3, {"10"}, {}));
    std::ostringstream dot;
    write_dot(dot, g);
    CHECK(dot.str().find("digraph inclusion") == 0);
    CHECK(dot.str().find("v1 -> w1") != std::string::npos);

    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::string> lo, hi;
        for (int i = 0; i < 4; ++i) lo.push_back(gf2::span(4, oracle::random_matrix(rng, 1, 4).row_list()).key());
        for (int i = 0; i < 3; ++i) hi.push_back(gf2::span(4, oracle::random_matrix(rng, 2, 4).row_list()).key());
        const auto gg = inclusion_graph(4, lo, hi);
        const std::set<std::pair<std::size_t, std::size_t>> e(gg.edges.begin(), gg.edges.end());
        for (std::size_t i = 0; i < lo.size(); ++i)
            for (std::size_t j = 0; j < hi.size(); ++j)
                CHECK(e.count({i, j}) ==
                      gf2::contains(gf2::Subspace::from_key(4, hi[j]), gf2::Subspace::from_key(4, lo[i])));
    }
}

TEST_CASE("file formats round trip") {
    std::ostringstream js;
    write_outcomes_jsonl(js, mixed());
    std::istringstream jin(js.str());
    const auto back = read_outcomes_jsonl(jin);
    REQUIRE(back.size() == mixed().size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].length == mixed()[i].length);
        CHECK(back[i].ok() == mixed()[i].ok());
        if (back[i].ok()) CHECK(*back[i].signature == *mixed()[i].signature);
    }
    std::istringstream garbage("{\"start\": 1}\n");
    CHECK_THROWS(read_outcomes_jsonl(garbage));

    const auto t = rank_table(mixed(), 2);
    std::ostringstream rs;
    write_rank_csv(rs, t);
    CHECK(rs.str().rfind("L,rank0,rank1,rank2,failed\n", 0) == 0);
    std::istringstream rin(rs.str());
    const auto t2 = read_rank_csv(rin);
    CHECK(t2.lengths == t.lengths);
    CHECK(t2.counts == t.counts);
    CHECK(t2.failed == t.failed);

    const auto c = frequency_curves(mixed(), 2, 2);
    std::ostringstream cs;
    write_curves_csv(cs, c);
    std::istringstream cin(cs.str());
    const auto c2 = read_curves_csv(cin);
    CHECK(c2.keys == c.keys);
    CHECK(c2.rank == 2);
    CHECK(c2.freq == c.freq);
    std::istringstream bad("L,10\n10,x\n");
    CHECK_THROWS(read_curves_csv(bad));
}

TEST_CASE("run_plan output does not depend on thread count") {
    const auto& series = oracle::small_series(SystemName::Lorenz, 3000);
    const auto y = cubical::build_space(series, oracle::default_grid(SystemName::Lorenz));
    ExperimentPlan p;
    p.lengths = {20, 60, 120};
    p.per_length = 8;
    p.seed = 5;
    p.radii = {4.5, 5.0};
    const auto a = run_plan(series, y, p, 1);
    const auto b = run_plan(series, y, p, 3);
    REQUIRE(a.size() == 3 * 8 * 2);
    REQUIRE(b.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].start == b[i].start);
        CHECK(a[i].length == b[i].length);
        CHECK(a[i].radius == b[i].radius);
        CHECK(a[i].signature == b[i].signature);
    }
    CHECK(a[0].radius == 4.5);
    CHECK(a[1].radius == 5.0);
    CHECK(at_radius(a, 5.0).size() == 24);
    p.radii = {9.0};
    CHECK_THROWS_AS(run_plan(series, y, p, 1), ConfigError);
}

TEST_CASE("stability sweep") {
    CHECK(stability_sweep({}).empty());
    Configuration c;
    c.label = "small";
    c.spec = systems::lorenz_spec();
    c.n_points = 2000;
    c.transient = 200;
    c.data_seed = 1;
    c.grid = {8.0, 3, 3};
    c.plan.lengths = {30, 90};
    c.plan.per_length = 5;
    c.plan.seed = 2;
    c.plan.radii = {5.0};
    auto broken = c;
    broken.label = "broken";
    broken.grid.r = -1.0;
    const auto out = stability_sweep({c, broken, c}, 2);
    REQUIRE(out.size() == 3);
    CHECK(out[0].ok());
    CHECK_FALSE(out[1].ok());
    CHECK(out[1].outcomes.empty());
    CHECK(out[2].ok());
    const auto direct = run_configuration(c, 1);
    CHECK(direct.betti1 == out[0].betti1);
    REQUIRE(direct.outcomes.size() == out[0].outcomes.size());
    for (std::size_t i = 0; i < direct.outcomes.size(); ++i)
        CHECK(direct.outcomes[i].signature == out[0].outcomes[i].signature);
}

TEST_CASE("summary json") {
    const auto s = summarize(mixed(), 2, 0.2);
    CHECK(s.oscillations == std::vector<std::string>{"10", "01", "11"});
    CHECK(s.rank2_keys == std::vector<std::string>{"10|01"});
    CHECK(s.graph.edges.size() == 3);
    const auto j = summary_json(s);
    CHECK(j.at("betti1") == 2);
    CHECK(j.at("rank0_extinction") == 20);
    CHECK(j.at("failed_segments") == 1);
    CHECK(j.at("oscillations").size() == 3);
}
