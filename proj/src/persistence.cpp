#include "cycsig/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <nlohmann/json.hpp>

#include "cycsig/errors.hpp"

namespace cycsig::persistence {

SegmentView::SegmentView(const systems::LiftedSeries& s, std::size_t start, std::size_t length)
    : series(&s), start(start), length(length) {
    if (length < 1) throw ConfigError("segment length must be at least 1");
    if (start + length > s.size()) throw ConfigError("segment exceeds series");
}

double d_c(std::span<const double> p, std::span<const double> v, std::span<const double> q,
           std::span<const double> w, double C) {
    double dp = 0.0, dv = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        dp += (p[i] - q[i]) * (p[i] - q[i]);
        dv += (v[i] - w[i]) * (v[i] - w[i]);
    }
    return std::max(std::sqrt(dp), C * std::sqrt(dv));
}

Filtration build_filtration(std::size_t n, const Metric& metric, double r_max) {
    if (!(r_max > 0.0)) throw ConfigError("r_max must be positive");
    Filtration f;
    f.vertex_count = n;
    f.r_max = r_max;

    // Upper neighbours with edge values.
    std::vector<std::vector<std::pair<std::uint32_t, double>>> up(n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) {
            const double d = metric(i, j);
            if (d <= r_max) {
                up[i].emplace_back(j, d);
                f.edges.push_back({i, j, d});
            }
        }

    auto value_of = [&](std::uint32_t a, std::uint32_t b, double& out) {
        const auto& row = up[a];
        auto it = std::lower_bound(row.begin(), row.end(), b, [](const auto& e, std::uint32_t x) { return e.first < x; });
        if (it == row.end() || it->first != b) return false;
        out = it->second;
        return true;
    };

    for (std::uint32_t i = 0; i < n; ++i) {
        const auto& ni = up[i];
        for (std::size_t a = 0; a < ni.size(); ++a) {
            const auto [j, dij] = ni[a];
            for (std::size_t b = a + 1; b < ni.size(); ++b) {
                const auto [k, dik] = ni[b];
                double djk;
                if (!value_of(j, k, djk)) continue;
                f.triangles.push_back({i, j, k, std::max({dij, dik, djk})});
            }
        }
    }

    std::sort(f.edges.begin(), f.edges.end(), [](const auto& a, const auto& b) {
        return std::tie(a.value, a.i, a.j) < std::tie(b.value, b.i, b.j);
    });
    std::sort(f.triangles.begin(), f.triangles.end(), [](const auto& a, const auto& b) {
        return std::tie(a.value, a.i, a.j, a.k) < std::tie(b.value, b.i, b.j, b.k);
    });
    return f;
}

Filtration build_filtration(const SegmentView& seg, double C, double r_max) {
    if (!(C >= 0.0)) throw ConfigError("C must be nonnegative");
    return build_filtration(
        seg.length,
        [&](std::size_t a, std::size_t b) { return d_c(seg.point(a), seg.tangent(a), seg.point(b), seg.tangent(b), C); },
        r_max);
}

namespace {

struct Forest {
    explicit Forest(std::size_t n) : parent(n), parent_edge(n, -1), depth(n, 0), adj(n) {
        std::iota(parent.begin(), parent.end(), 0u);
    }
    std::vector<std::uint32_t> parent;
    std::vector<std::int64_t> parent_edge;
    std::vector<std::uint32_t> depth;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> adj;  // (vertex, edge)

    void root_all() {
        std::vector<char> seen(adj.size(), 0);
        std::vector<std::uint32_t> stack;
        for (std::uint32_t r = 0; r < adj.size(); ++r) {
            if (seen[r]) continue;
            seen[r] = 1;
            stack.push_back(r);
            while (!stack.empty()) {
                const auto u = stack.back();
                stack.pop_back();
                for (auto [w, e] : adj[u]) {
                    if (seen[w]) continue;
                    seen[w] = 1;
                    parent[w] = u;
                    parent_edge[w] = e;
                    depth[w] = depth[u] + 1;
                    stack.push_back(w);
                }
            }
        }
    }

    // Edge indices on the tree path between a and b.
    void path(std::uint32_t a, std::uint32_t b, std::vector<std::uint32_t>& out) const {
        while (a != b) {
            if (depth[a] >= depth[b]) {
                out.push_back(static_cast<std::uint32_t>(parent_edge[a]));
                a = parent[a];
            } else {
                out.push_back(static_cast<std::uint32_t>(parent_edge[b]));
                b = parent[b];
            }
        }
    }
};

struct UnionFind {
    explicit UnionFind(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0u); }
    std::uint32_t find(std::uint32_t x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    std::vector<std::uint32_t> p;
};

}  // namespace

Barcode persist_h1(const Filtration& f) {
    const std::size_t n = f.vertex_count;
    const std::size_t ne = f.edges.size();
    Barcode out;
    out.r_max = f.r_max;
    out.length = n;

    // Minimum spanning forest; edges that close a cycle create H1 classes.
    UnionFind uf(n);
    Forest forest(n);
    std::vector<char> positive(ne, 0);
    for (std::uint32_t e = 0; e < ne; ++e) {
        const auto [i, j, value] = f.edges[e];
        auto a = uf.find(i), b = uf.find(j);
        if (a == b) {
            positive[e] = 1;
        } else {
            uf.p[std::max(a, b)] = std::min(a, b);
            forest.adj[i].emplace_back(j, e);
            forest.adj[j].emplace_back(i, e);
        }
    }
    forest.root_all();

    std::vector<std::int32_t> edge_index(n * n, -1);
    for (std::uint32_t e = 0; e < ne; ++e) {
        edge_index[f.edges[e].i * n + f.edges[e].j] = static_cast<std::int32_t>(e);
    }
    auto eid = [&](std::uint32_t a, std::uint32_t b) {
        return static_cast<std::uint32_t>(edge_index[a * n + b]);
    };

    // Column reduction of the triangle boundaries; pivot = latest edge.
    constexpr std::uint32_t kNone = 0xffffffffu;
    std::vector<std::uint32_t> owner(ne, kNone);
    std::vector<std::vector<std::uint32_t>> reduced(f.triangles.size());
    std::vector<double> death(ne, std::numeric_limits<double>::infinity());
    std::vector<std::uint32_t> col, scratch;
    for (std::uint32_t t = 0; t < f.triangles.size(); ++t) {
        const auto& tri = f.triangles[t];
        col = {eid(tri.i, tri.j), eid(tri.i, tri.k), eid(tri.j, tri.k)};
        std::sort(col.begin(), col.end());
        while (!col.empty() && owner[col.back()] != kNone) {
            const auto& other = reduced[owner[col.back()]];
            scratch.clear();
            std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                          std::back_inserter(scratch));
            col.swap(scratch);
        }
        if (col.empty()) continue;
        owner[col.back()] = t;
        death[col.back()] = tri.value;
        reduced[t] = col;
    }

    std::vector<std::uint32_t> path;
    for (std::uint32_t e = 0; e < ne; ++e) {
        if (!positive[e]) continue;
        const double birth = f.edges[e].value;
        if (!(death[e] > birth)) continue;
        Bar bar;
        bar.birth = birth;
        bar.death = death[e];
        path.clear();
        forest.path(f.edges[e].i, f.edges[e].j, path);
        bar.representative.push_back({f.edges[e].i, f.edges[e].j});
        for (auto pe : path) bar.representative.push_back({f.edges[pe].i, f.edges[pe].j});
        out.bars.push_back(std::move(bar));
    }
    return out;
}

std::vector<Bar> bars_alive(const Barcode& b, double r) {
    if (r > b.r_max) throw ConfigError("evaluation radius exceeds filtration cutoff");
    std::vector<Bar> alive;
    for (const auto& bar : b.bars)
        if (bar.birth <= r && r < bar.death) alive.push_back(bar);
    return alive;
}

nlohmann::json barcode_json(const Barcode& b) {
    nlohmann::json bars = nlohmann::json::array();
    for (const auto& bar : b.bars) {
        nlohmann::json rep = nlohmann::json::array();
        for (const auto& e : bar.representative) rep.push_back({b.start + e.u, b.start + e.v});
        bars.push_back({{"birth", bar.birth},
                        {"death", std::isinf(bar.death) ? nlohmann::json(nullptr) : nlohmann::json(bar.death)},
                        {"representative", rep}});
    }
    return {{"start", b.start}, {"length", b.length}, {"C", b.C}, {"r_max", b.r_max}, {"bars", bars}};
}

}  // namespace cycsig::persistence
