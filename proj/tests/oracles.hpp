#pragma once

// Brute-force references shared by the unit tests and the acceptance run.
// Everything here is dense and slow on purpose.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "cycsig/cubical.hpp"
#include "cycsig/gf2.hpp"
#include "cycsig/persistence.hpp"
#include "cycsig/systems.hpp"

namespace oracle {

namespace gf2 = cycsig::gf2;

using Dense = std::vector<std::vector<std::uint8_t>>;

// Rank over F2 by plain Gaussian elimination on bytes.
inline std::size_t dense_rank(Dense m) {
    std::size_t rank = 0;
    const std::size_t rows = m.size();
    const std::size_t cols = rows ? m[0].size() : 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t p = rank;
        while (p < rows && !m[p][c]) ++p;
        if (p == rows) continue;
        std::swap(m[p], m[rank]);
        for (std::size_t r = 0; r < rows; ++r)
            if (r != rank && m[r][c])
                for (std::size_t k = c; k < cols; ++k) m[r][k] ^= m[rank][k];
        ++rank;
    }
    return rank;
}

// All 2^rows combinations of the rows, as strings. Only for a few rows.
inline std::set<std::vector<std::uint8_t>> enumerate_span(const std::vector<gf2::BitVector>& rows, std::size_t n) {
    std::set<std::vector<std::uint8_t>> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << rows.size()); ++mask) {
        std::vector<std::uint8_t> v(n, 0);
        for (std::size_t r = 0; r < rows.size(); ++r)
            if ((mask >> r) & 1u)
                for (std::size_t c = 0; c < n; ++c) v[c] ^= rows[r].get(c);
        out.insert(v);
    }
    return out;
}

// b1 of a cubical complex from its boundary matrices.
inline std::size_t cubical_b1(const cycsig::cubical::CubicalComplex& y) {
    const std::size_t nv = y.cell_count(0), ne = y.cell_count(1), nf = y.cell_count(2);
    Dense d1(nv, std::vector<std::uint8_t>(ne, 0));
    for (std::size_t e = 0; e < ne; ++e)
        for (auto v : y.edge_boundary(e)) d1[v][e] ^= 1;
    Dense d2(ne, std::vector<std::uint8_t>(nf, 0));
    for (std::size_t f = 0; f < nf; ++f)
        for (auto e : y.face_boundary(f)) d2[e][f] ^= 1;
    return ne - dense_rank(d1) - dense_rank(d2);
}

// dim H1 of the clique complex of the threshold graph {d <= r}.
template <class Dist>
std::size_t clique_h1(std::size_t n, Dist&& dist, double r) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (dist(i, j) <= r) {
                index[{i, j}] = edges.size();
                edges.emplace_back(i, j);
            }
    std::vector<std::vector<std::size_t>> tris;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k)
                if (index.count({i, j}) && index.count({i, k}) && index.count({j, k}))
                    tris.push_back({index[{i, j}], index[{i, k}], index[{j, k}]});
    Dense d1(n, std::vector<std::uint8_t>(edges.size(), 0));
    for (std::size_t e = 0; e < edges.size(); ++e) {
        d1[edges[e].first][e] = 1;
        d1[edges[e].second][e] = 1;
    }
    Dense d2(edges.size(), std::vector<std::uint8_t>(tris.size(), 0));
    for (std::size_t t = 0; t < tris.size(); ++t)
        for (auto e : tris[t]) d2[e][t] = 1;
    return edges.size() - dense_rank(d1) - dense_rank(d2);
}

// Image in Y of the fundamental cycles of the threshold graph of a segment
// at radius r, as pairing vectors. A separate route to the signature: the
// graph cycles span H1 of the Rips complex, and boundaries pair to zero.
inline std::vector<gf2::BitVector> graph_cycle_pairings(const cycsig::persistence::SegmentView& seg,
                                                        const cycsig::cubical::ComparisonSpace& y, double C,
                                                        double r) {
    using cycsig::cubical::DataEdge;
    const std::size_t n = seg.length;
    std::vector<std::vector<std::size_t>> adj(n);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (cycsig::persistence::d_c(seg.point(i), seg.tangent(i), seg.point(j), seg.tangent(j), C) <= r) {
                adj[i].push_back(j);
                adj[j].push_back(i);
                edges.emplace_back(i, j);
            }
    // BFS forest.
    std::vector<std::int64_t> parent(n, -1);
    std::vector<std::size_t> depth(n, 0);
    std::vector<bool> seen(n, false);
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        seen[s] = true;
        std::vector<std::size_t> queue{s};
        for (std::size_t q = 0; q < queue.size(); ++q)
            for (auto w : adj[queue[q]])
                if (!seen[w]) {
                    seen[w] = true;
                    parent[w] = static_cast<std::int64_t>(queue[q]);
                    depth[w] = depth[queue[q]] + 1;
                    queue.push_back(w);
                }
    }
    auto is_tree = [&](std::size_t a, std::size_t b) {
        return parent[a] == static_cast<std::int64_t>(b) || parent[b] == static_cast<std::int64_t>(a);
    };
    std::vector<gf2::BitVector> out;
    for (auto [a, b] : edges) {
        if (is_tree(a, b)) continue;
        std::vector<DataEdge> cyc{{static_cast<std::uint32_t>(seg.start + a), static_cast<std::uint32_t>(seg.start + b)}};
        std::size_t u = a, v = b;
        while (u != v) {
            auto& deeper = depth[u] >= depth[v] ? u : v;
            const auto p = static_cast<std::size_t>(parent[deeper]);
            cyc.push_back({static_cast<std::uint32_t>(seg.start + deeper), static_cast<std::uint32_t>(seg.start + p)});
            deeper = p;
        }
        const auto z = cycsig::cubical::map_cycle(cyc, *seg.series, y);
        const auto mask = cycsig::cubical::pairing_mask(y.complex, z);
        gf2::BitVector vec(y.betti1());
        for (std::size_t j = 0; j < y.betti1(); ++j)
            if ((mask >> j) & 1u) vec.set(j);
        out.push_back(vec);
    }
    return out;
}

inline gf2::Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double density = 0.5) {
    std::bernoulli_distribution bit(density);
    gf2::Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if (bit(rng)) m.set(r, c);
    return m;
}

// Small lifted series for each system, cached.
inline const cycsig::systems::LiftedSeries& small_series(cycsig::systems::SystemName name, std::size_t n = 6000) {
    static std::map<std::pair<int, std::size_t>, cycsig::systems::LiftedSeries> cache;
    const auto key = std::make_pair(static_cast<int>(name), n);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, cycsig::systems::generate(cycsig::systems::default_spec(name), n, 3, 500).lifted).first;
    return it->second;
}

inline cycsig::cubical::GridParams default_grid(cycsig::systems::SystemName name) {
    using cycsig::systems::SystemName;
    switch (name) {
        case SystemName::Lorenz: return {8.0, 3, 3};
        case SystemName::DoubleWell: return {0.2, 3, 2};
        case SystemName::Dadras: return {4.0, 3, 4};
    }
    return {};
}

inline double default_radius(cycsig::systems::SystemName name) {
    using cycsig::systems::SystemName;
    switch (name) {
        case SystemName::Lorenz: return 5.0;
        case SystemName::DoubleWell: return 0.18;
        case SystemName::Dadras: return 1.5;
    }
    return 0.0;
}

}  // namespace oracle
