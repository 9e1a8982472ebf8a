#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "cycsig/errors.hpp"
#include "cycsig/persistence.hpp"
#include "oracles.hpp"

using namespace cycsig;
using namespace cycsig::persistence;

namespace {

using Points = std::vector<std::vector<double>>;

Filtration euclidean(const Points& pts, double r_max) {
    return build_filtration(
        pts.size(),
        [&](std::size_t a, std::size_t b) {
            double s = 0;
            for (std::size_t i = 0; i < pts[a].size(); ++i) s += (pts[a][i] - pts[b][i]) * (pts[a][i] - pts[b][i]);
            return std::sqrt(s);
        },
        r_max);
}

const Points kSquare{{0, 0}, {1, 0}, {1, 1}, {0, 1}};

bool is_cycle(const std::vector<DataEdge>& rep) {
    std::map<std::uint32_t, int> deg;
    for (auto e : rep) {
        ++deg[e.u];
        ++deg[e.v];
    }
    return std::all_of(deg.begin(), deg.end(), [](auto& p) { return p.second % 2 == 0; });
}

}  // namespace

TEST_CASE("d_C examples") {
    const std::vector<double> v{1, 0}, w{0, 1};
    CHECK(d_c(std::vector<double>{0, 0}, v, std::vector<double>{3, 4}, v, 24) == 5.0);
    CHECK(d_c(std::vector<double>{0, 0}, v, std::vector<double>{0, 0}, w, 24) == doctest::Approx(24 * std::sqrt(2.0)));
    CHECK(d_c(std::vector<double>{0, 0}, v, std::vector<double>{3, 4}, w, 0) == 5.0);
}

TEST_CASE("d_C satisfies the triangle inequality") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> c_dist(0, 30);
    auto unit = [&](std::size_t d) {
        std::vector<double> v(d);
        double n = 0;
        for (auto& x : v) {
            x = g(rng);
            n += x * x;
        }
        for (auto& x : v) x /= std::sqrt(n);
        return v;
    };
    auto point = [&](std::size_t d) {
        std::vector<double> p(d);
        for (auto& x : p) x = 5 * g(rng);
        return p;
    };
    for (int i = 0; i < 10000; ++i) {
        const std::size_t d = 2 + i % 3;
        const double C = c_dist(rng);
        const auto p = point(d), q = point(d), s = point(d);
        const auto v = unit(d), w = unit(d), u = unit(d);
        const double pq = d_c(p, v, q, w, C), qs = d_c(q, w, s, u, C), ps = d_c(p, v, s, u, C);
        REQUIRE(ps <= pq + qs + 1e-9);
        REQUIRE(pq == d_c(q, w, p, v, C));
    }
}

TEST_CASE("filtration examples") {
    auto f = euclidean({{0}, {0.5}}, 1.0);
    CHECK(f.edges.size() == 1);
    CHECK(f.triangles.empty());

    f = euclidean(kSquare, 2.0);
    REQUIRE(f.edges.size() == 6);
    CHECK(std::count_if(f.edges.begin(), f.edges.end(), [](auto& e) { return e.value == 1.0; }) == 4);
    CHECK(std::count_if(f.edges.begin(), f.edges.end(), [](auto& e) { return e.value == std::sqrt(2.0); }) == 2);
    CHECK(f.triangles.size() == 4);
    for (auto& t : f.triangles) CHECK(t.value == std::sqrt(2.0));
    for (std::size_t i = 1; i < f.edges.size(); ++i) CHECK(f.edges[i - 1].value <= f.edges[i].value);

    f = euclidean(kSquare, 0.5);
    CHECK(f.edges.empty());
    CHECK_THROWS_AS(euclidean(kSquare, 0.0), ConfigError);
}

TEST_CASE("unit square has exactly the bar [1, sqrt 2)") {
    const auto b = persist_h1(euclidean(kSquare, 2.0));
    REQUIRE(b.bars.size() == 1);
    CHECK(b.bars[0].birth == 1.0);
    CHECK(b.bars[0].death == std::sqrt(2.0));
    CHECK(b.bars[0].representative.size() == 4);
    CHECK(is_cycle(b.bars[0].representative));
    CHECK(bars_alive(b, 1.2).size() == 1);
    CHECK(bars_alive(b, 0.5).empty());
    CHECK(bars_alive(b, 1.5).empty());
    CHECK_THROWS_AS(bars_alive(b, 2.5), ConfigError);

    // Cut below the death: the bar never closes.
    const auto open = persist_h1(euclidean(kSquare, 1.2));
    REQUIRE(open.bars.size() == 1);
    CHECK(std::isinf(open.bars[0].death));
}

TEST_CASE("collinear points have no loops") {
    CHECK(persist_h1(euclidean({{0}, {1}, {2}}, 5.0)).bars.empty());
}

TEST_CASE("twelve points on a circle") {
    Points pts;
    for (int i = 0; i < 12; ++i) pts.push_back({std::cos(i * M_PI / 6), std::sin(i * M_PI / 6)});
    const auto b = persist_h1(euclidean(pts, 2.0));
    REQUIRE(!b.bars.empty());
    const auto longest = *std::max_element(b.bars.begin(), b.bars.end(), [](auto& x, auto& y) {
        return x.death - x.birth < y.death - y.birth;
    });
    CHECK(longest.birth == doctest::Approx(2 * std::sin(M_PI / 12)));
    CHECK(longest.death > 1.0);
    // Total bar count agrees with brute force at every critical value.
    const auto f = euclidean(pts, 2.0);
    for (const auto& e : f.edges) {
        const double r = e.value;
        // Same arithmetic as the filtration so ties compare equal.
        auto dist = [&](std::size_t a, std::size_t c) {
            const double dx = pts[a][0] - pts[c][0], dy = pts[a][1] - pts[c][1];
            return std::sqrt(dx * dx + dy * dy);
        };
        CHECK(bars_alive(b, r).size() == oracle::clique_h1(pts.size(), dist, r));
    }
}

TEST_CASE("alive bar count matches brute-force homology") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t n = 4 + inst % 7, d = 2 + inst % 3;
        Points pts(n, std::vector<double>(d));
        for (auto& p : pts)
            for (auto& x : p) x = u(rng);
        auto dist = [&](std::size_t a, std::size_t b) {
            double s = 0;
            for (std::size_t i = 0; i < d; ++i) s += (pts[a][i] - pts[b][i]) * (pts[a][i] - pts[b][i]);
            return std::sqrt(s);
        };
        const double r_max = 1.5;
        const auto b = persist_h1(euclidean(pts, r_max));
        for (const auto& bar : b.bars) {
            CHECK(bar.birth < bar.death);
            CHECK(is_cycle(bar.representative));
        }
        for (int k = 0; k < 20; ++k) {
            const double r = u(rng) * r_max;
            REQUIRE(bars_alive(b, r).size() == oracle::clique_h1(n, dist, r));
        }
    }
}

TEST_CASE("alive representatives are a homology basis") {
    // Rank of [boundaries | alive representatives] exceeds rank of the
    // boundaries by the number of alive bars.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    for (int inst = 0; inst < 30; ++inst) {
        const std::size_t n = 6 + inst % 5;
        Points pts(n, std::vector<double>(2));
        for (auto& p : pts)
            for (auto& x : p) x = u(rng);
        const auto f = euclidean(pts, 1.5);
        const auto b = persist_h1(f);
        for (int k = 0; k < 10; ++k) {
            const double r = u(rng) * 1.5;
            std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> col;
            for (const auto& e : f.edges)
                if (e.value <= r) col.emplace(std::make_pair(e.i, e.j), col.size());
            oracle::Dense rows;
            for (const auto& t : f.triangles) {
                if (t.value > r) continue;
                std::vector<std::uint8_t> row(col.size(), 0);
                row[col.at({t.i, t.j})] ^= 1;
                row[col.at({t.i, t.k})] ^= 1;
                row[col.at({t.j, t.k})] ^= 1;
                rows.push_back(row);
            }
            const auto base = oracle::dense_rank(rows);
            const auto alive = bars_alive(b, r);
            for (const auto& bar : alive) {
                std::vector<std::uint8_t> row(col.size(), 0);
                for (auto e : bar.representative) row[col.at({std::min(e.u, e.v), std::max(e.u, e.v)})] ^= 1;
                rows.push_back(row);
            }
            CHECK(oracle::dense_rank(rows) == base + alive.size());
        }
    }
}

TEST_CASE("barcode does not depend on point order") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0, 1);
    for (int inst = 0; inst < 20; ++inst) {
        Points pts(9, std::vector<double>(2));
        for (auto& p : pts)
            for (auto& x : p) x = u(rng);
        auto shuffled = pts;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto bars = [](const Barcode& b) {
            std::vector<std::pair<double, double>> out;
            for (auto& bar : b.bars) out.emplace_back(bar.birth, bar.death);
            std::sort(out.begin(), out.end());
            return out;
        };
        CHECK(bars(persist_h1(euclidean(pts, 1.5))) == bars(persist_h1(euclidean(shuffled, 1.5))));
    }
}

TEST_CASE("segment view and barcode json") {
    systems::LiftedSeries s;
    s.dim = 2;
    for (int i = 0; i < 4; ++i) {
        s.points.insert(s.points.end(), kSquare[i].begin(), kSquare[i].end());
        s.tangents.insert(s.tangents.end(), {1.0, 0.0});
    }
    CHECK_THROWS_AS(SegmentView(s, 2, 3), ConfigError);
    CHECK_THROWS_AS(SegmentView(s, 0, 0), ConfigError);
    const SegmentView seg(s, 0, 4);
    auto b = persist_h1(build_filtration(seg, 10.0, 2.0));
    REQUIRE(b.bars.size() == 1);
    b.start = 5;
    const auto j = barcode_json(b);
    CHECK(j.at("bars").size() == 1);
    CHECK(j.at("bars")[0].at("representative")[0][0].get<std::size_t>() >= 5);
    CHECK(persist_h1(build_filtration(SegmentView(s, 0, 1), 1.0, 1.0)).bars.empty());
}
