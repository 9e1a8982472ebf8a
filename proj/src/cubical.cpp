#include "cycsig/cubical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "cycsig/errors.hpp"

namespace cycsig::cubical {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

struct UnionFind {
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (a < b) std::swap(a, b);
        parent[a] = b;
        return true;
    }
    std::vector<std::uint32_t> parent;
};

// Symmetric difference of two sorted index lists.
void xor_into(std::vector<std::uint32_t>& acc, const std::vector<std::uint32_t>& other,
              std::vector<std::uint32_t>& scratch) {
    scratch.clear();
    std::set_symmetric_difference(acc.begin(), acc.end(), other.begin(), other.end(), std::back_inserter(scratch));
    acc.swap(scratch);
}

}  // namespace

void GridParams::validate() const {
    if (!(r > 0.0)) throw ConfigError("space box size r must be positive");
    if (k < 1) throw ConfigError("sphere subdivision k must be at least 1");
    if (dim < 1 || 2 * dim > kMaxCoords) throw ConfigError("unsupported state dimension");
}

int Cell::dimension() const { return std::popcount(full); }

std::size_t CellHash::operator()(const Cell& c) const noexcept {
    std::uint64_t h = c.full;
    for (std::size_t i = 0; i < c.n; ++i) h = mix(h, static_cast<std::uint32_t>(c.lo[i]));
    return static_cast<std::size_t>(h);
}

std::size_t BoxHash::operator()(const BoxId& b) const noexcept {
    std::uint64_t h = b.n;
    for (std::size_t i = 0; i < b.n; ++i) h = mix(h, static_cast<std::uint32_t>(b.c[i]));
    return static_cast<std::size_t>(h);
}

BoxId locate_box(std::span<const double> x, std::span<const double> v, const GridParams& g) {
    const std::size_t d = x.size();
    BoxId b;
    b.n = static_cast<std::uint8_t>(2 * d);
    double vmax = 0.0;
    for (double c : v) vmax = std::max(vmax, std::abs(c));
    for (std::size_t i = 0; i < d; ++i) {
        b.c[i] = static_cast<std::int32_t>(std::round(x[i] / g.r));
        double w = vmax > 0.0 ? g.k * v[i] / vmax : 0.0;
        int q = static_cast<int>(std::round(w));
        if (std::abs(v[i]) == vmax && vmax > 0.0) q = v[i] > 0 ? g.k : -g.k;
        b.c[d + i] = std::clamp(q, -g.k, g.k);
    }
    return b;
}

Chain chain_add(const Chain& a, const Chain& b) {
    Chain out;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::int64_t CubicalComplex::find(const Cell& c) const {
    const int d = c.dimension();
    if (d > 2) return -1;
    auto it = index_[d].find(c);
    return it == index_[d].end() ? -1 : static_cast<std::int64_t>(it->second);
}

CubicalComplex CubicalComplex::from_boxes(std::size_t n, std::vector<BoxId> boxes) {
    if (n == 0 || n > kMaxCoords) throw ConfigError("unsupported lattice dimension");
    for (auto& b : boxes) {
        if (b.n != n) throw Error("box dimension mismatch");
        for (std::size_t i = n; i < kMaxCoords; ++i) b.c[i] = 0;
    }
    std::sort(boxes.begin(), boxes.end());
    boxes.erase(std::unique(boxes.begin(), boxes.end()), boxes.end());
    CubicalComplex y;
    y.n_ = n;
    y.boxes_ = std::move(boxes);
    y.box_index_.reserve(y.boxes_.size());
    for (std::size_t i = 0; i < y.boxes_.size(); ++i) y.box_index_.emplace(y.boxes_[i], static_cast<std::uint32_t>(i));
    y.build_cells();
    y.compute_cohomology();
    return y;
}

void CubicalComplex::build_cells() {
    const std::size_t n = n_;
    auto intern = [this](int d, const Cell& c) -> std::uint32_t {
        auto [it, inserted] = index_[d].try_emplace(c, static_cast<std::uint32_t>(cells_[d].size()));
        if (inserted) cells_[d].push_back(c);
        return it->second;
    };

    // Full-coordinate masks of dimension 0, 1, 2.
    std::vector<std::uint16_t> masks;
    masks.push_back(0);
    for (std::size_t i = 0; i < n; ++i) masks.push_back(static_cast<std::uint16_t>(1u << i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) masks.push_back(static_cast<std::uint16_t>((1u << i) | (1u << j)));

    for (const auto& box : boxes_) {
        for (auto full : masks) {
            const int d = std::popcount(full);
            // Offsets over the degenerate coordinates.
            std::array<std::size_t, kMaxCoords> free{};
            std::size_t nfree = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (!((full >> i) & 1u)) free[nfree++] = i;
            for (std::uint32_t bits = 0; bits < (1u << nfree); ++bits) {
                Cell c;
                c.n = static_cast<std::uint8_t>(n);
                c.full = full;
                c.lo = box.c;
                for (std::size_t t = 0; t < nfree; ++t) c.lo[free[t]] += static_cast<std::int32_t>((bits >> t) & 1u);
                intern(d, c);
            }
        }
    }

    auto lookup = [this](int d, const Cell& c) {
        auto it = index_[d].find(c);
        if (it == index_[d].end()) throw Error("cubical complex is not closed under faces");
        return it->second;
    };
    edge_bd_.resize(cells_[1].size());
    for (std::size_t e = 0; e < cells_[1].size(); ++e) {
        const Cell& c = cells_[1][e];
        const int i = std::countr_zero(c.full);
        Cell a = c, b = c;
        a.full = b.full = 0;
        b.lo[i] += 1;
        edge_bd_[e] = {lookup(0, a), lookup(0, b)};
    }
    face_bd_.resize(cells_[2].size());
    for (std::size_t f = 0; f < cells_[2].size(); ++f) {
        const Cell& c = cells_[2][f];
        const int i = std::countr_zero(c.full);
        const int j = 31 - std::countl_zero(static_cast<std::uint32_t>(c.full));
        Cell e1 = c, e2 = c, e3 = c, e4 = c;
        e1.full = e2.full = static_cast<std::uint16_t>(1u << i);
        e2.lo[j] += 1;
        e3.full = e4.full = static_cast<std::uint16_t>(1u << j);
        e4.lo[i] += 1;
        std::array<std::uint32_t, 4> bd{lookup(1, e1), lookup(1, e2), lookup(1, e3), lookup(1, e4)};
        std::sort(bd.begin(), bd.end());
        face_bd_[f] = bd;
    }
}

// Cohomology by reducing the anti-transposed boundary matrix: edges are
// processed from last to first, each coboundary column keyed by its smallest
// coface. Edges of the spanning forest (first-come, in index order) are paired
// with vertices and skipped. Unpaired edges whose columns vanish give the
// cocycle basis.
void CubicalComplex::compute_cohomology() {
    const std::size_t nv = cells_[0].size();
    const std::size_t ne = cells_[1].size();
    const std::size_t nf = cells_[2].size();

    std::vector<char> tree(ne, 0);
    UnionFind uf(nv);
    for (std::size_t e = 0; e < ne; ++e) tree[e] = uf.unite(edge_bd_[e][0], edge_bd_[e][1]) ? 1 : 0;

    std::vector<std::vector<std::uint32_t>> cob(ne);
    for (std::size_t f = 0; f < nf; ++f)
        for (auto e : face_bd_[f]) cob[e].push_back(static_cast<std::uint32_t>(f));

    constexpr std::uint32_t kNone = 0xffffffffu;
    std::vector<std::uint32_t> owner(nf, kNone);
    // Reduced columns and their V columns, indexed by owning edge. Columns
    // that were never modified keep an empty V meaning {e}.
    std::vector<std::vector<std::uint32_t>> reduced(ne);
    std::vector<std::vector<std::uint32_t>> combo(ne);
    std::vector<std::uint32_t> scratch;

    std::vector<std::uint32_t> essential;
    std::vector<std::vector<std::uint32_t>> essential_combo;

    for (std::size_t idx = ne; idx-- > 0;) {
        if (tree[idx]) continue;
        auto col = std::move(cob[idx]);
        std::vector<std::uint32_t> v;
        bool touched = false;
        while (!col.empty() && owner[col.front()] != kNone) {
            const std::uint32_t other = owner[col.front()];
            xor_into(col, reduced[other], scratch);
            if (!touched) {
                v.push_back(static_cast<std::uint32_t>(idx));
                touched = true;
            }
            if (combo[other].empty()) {
                std::vector<std::uint32_t> single{other};
                xor_into(v, single, scratch);
            } else {
                xor_into(v, combo[other], scratch);
            }
        }
        if (col.empty()) {
            if (!touched) v.push_back(static_cast<std::uint32_t>(idx));
            essential.push_back(static_cast<std::uint32_t>(idx));
            essential_combo.push_back(std::move(v));
        } else {
            owner[col.front()] = static_cast<std::uint32_t>(idx);
            reduced[idx] = std::move(col);
            combo[idx] = std::move(v);
        }
    }

    // Lowest essential edge first.
    std::vector<std::size_t> order(essential.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return essential[a] < essential[b]; });
    cocycles_.clear();
    for (auto i : order) cocycles_.push_back(std::move(essential_combo[i]));
    if (cocycles_.size() > 64) throw Error("first Betti number above 64 is not supported");
    rebuild_masks();
}

void CubicalComplex::rebuild_masks() {
    edge_masks_.assign(cells_[1].size(), 0);
    for (std::size_t j = 0; j < cocycles_.size(); ++j)
        for (auto e : cocycles_[j]) edge_masks_[e] |= std::uint64_t{1} << j;
}

void CubicalComplex::set_cocycles(std::vector<Chain> cocycles) {
    if (cocycles.size() != cocycles_.size()) throw Error("cocycle count does not match first Betti number");
    for (auto& c : cocycles) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        if (!c.empty() && c.back() >= cells_[1].size()) throw Error("cocycle references a missing edge");
        if (!is_cocycle(c)) throw Error("stored cochain is not a cocycle");
    }
    cocycles_ = std::move(cocycles);
    rebuild_masks();
}

Chain CubicalComplex::boundary_of_face(std::size_t f) const {
    const auto& bd = face_bd_[f];
    return Chain(bd.begin(), bd.end());
}

std::vector<std::uint32_t> CubicalComplex::coboundary_of_cocycle(const Chain& alpha) const {
    std::vector<char> in(cells_[1].size(), 0);
    for (auto e : alpha) in[e] ^= 1;
    std::vector<std::uint32_t> out;
    for (std::size_t f = 0; f < face_bd_.size(); ++f) {
        int s = 0;
        for (auto e : face_bd_[f]) s ^= in[e];
        if (s) out.push_back(static_cast<std::uint32_t>(f));
    }
    return out;
}

bool CubicalComplex::is_cocycle(const Chain& alpha) const { return coboundary_of_cocycle(alpha).empty(); }

bool CubicalComplex::is_cycle(const Chain& z) const {
    std::unordered_map<std::uint32_t, int> deg;
    for (auto e : z) {
        deg[edge_bd_[e][0]] ^= 1;
        deg[edge_bd_[e][1]] ^= 1;
    }
    return std::all_of(deg.begin(), deg.end(), [](const auto& kv) { return kv.second == 0; });
}

std::uint32_t CubicalComplex::anchor_vertex(const BoxId& b) const {
    Cell c;
    c.n = static_cast<std::uint8_t>(n_);
    c.lo = b.c;
    const auto idx = find(c);
    if (idx < 0) throw Error("box is not part of the comparison space");
    return static_cast<std::uint32_t>(idx);
}

ComparisonSpace build_space(const systems::LiftedSeries& series, const GridParams& g) {
    g.validate();
    if (series.size() == 0) throw ConfigError("cannot build a comparison space from an empty series");
    if (series.dim != g.dim) throw ConfigError("grid dimension does not match series");
    std::vector<BoxId> boxes;
    boxes.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) boxes.push_back(locate_box(series.point(i), series.tangent(i), g));
    return {g, CubicalComplex::from_boxes(2 * g.dim, std::move(boxes))};
}

namespace {

// Calls visit(edge_index) for each edge on the staircase from anchor(a) to
// anchor(b): coordinates that increase are stepped first (inside a), then
// those that decrease (inside b), each group in coordinate order.
template <class Visit>
void walk_route(const BoxId& a, const BoxId& b, const CubicalComplex& y, Visit&& visit) {
    if (a == b) return;
    const std::size_t n = y.lattice_dim();
    if (a.n != n || b.n != n) throw Error("box dimension mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(a.c[i] - b.c[i]) > 1) throw EdgeTooLong("data edge spans non-adjacent boxes");
    if (!y.has_box(a) || !y.has_box(b)) throw Error("box is not part of the comparison space");

    Cell cur;
    cur.n = static_cast<std::uint8_t>(n);
    cur.lo = a.c;
    auto step = [&](std::size_t i, int dir) {
        Cell e = cur;
        e.full = static_cast<std::uint16_t>(1u << i);
        if (dir < 0) e.lo[i] -= 1;
        const auto idx = y.find(e);
        if (idx < 0) throw Error("route left the comparison space");
        visit(static_cast<std::uint32_t>(idx));
        cur.lo[i] += dir;
    };
    for (std::size_t i = 0; i < n; ++i)
        if (b.c[i] == a.c[i] + 1) step(i, +1);
    for (std::size_t i = 0; i < n; ++i)
        if (b.c[i] == a.c[i] - 1) step(i, -1);
}

}  // namespace

Chain route_edge(const BoxId& a, const BoxId& b, const CubicalComplex& y) {
    Chain path;
    walk_route(a, b, y, [&](std::uint32_t e) { path.push_back(e); });
    std::sort(path.begin(), path.end());
    return path;
}

std::uint64_t route_mask(const BoxId& a, const BoxId& b, const CubicalComplex& y) {
    std::uint64_t m = 0;
    walk_route(a, b, y, [&](std::uint32_t e) { m ^= y.edge_mask(e); });
    return m;
}

Chain map_cycle(std::span<const DataEdge> cycle, const systems::LiftedSeries& series, const ComparisonSpace& y) {
    std::unordered_map<std::uint32_t, int> deg;
    for (const auto& e : cycle) {
        deg[e.u] ^= 1;
        deg[e.v] ^= 1;
    }
    for (const auto& [v, parity] : deg)
        if (parity) throw Error("map_cycle input is not a cycle");

    std::vector<std::uint32_t> edges;
    for (const auto& e : cycle)
        walk_route(y.box_of(series, e.u), y.box_of(series, e.v), y.complex,
                   [&](std::uint32_t idx) { edges.push_back(idx); });
    std::sort(edges.begin(), edges.end());
    Chain z;
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j] == edges[i]) ++j;
        if ((j - i) & 1u) z.push_back(edges[i]);
        i = j;
    }
    if (!y.complex.is_cycle(z)) throw Error("mapped chain has nonzero boundary");
    return z;
}

bool pair(const Chain& alpha, const Chain& z) {
    std::size_t count = 0;
    auto i = alpha.begin();
    auto j = z.begin();
    while (i != alpha.end() && j != z.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count & 1u;
}

std::uint64_t pairing_mask(const CubicalComplex& y, const Chain& z) {
    std::uint64_t m = 0;
    for (auto e : z) m ^= y.edge_mask(e);
    return m;
}

nlohmann::json space_summary(const ComparisonSpace& y) {
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : y.complex.boxes()) boxes.push_back(std::vector<int>(b.c.begin(), b.c.begin() + b.n));
    nlohmann::json cocycles = nlohmann::json::array();
    for (const auto& c : y.complex.cocycles()) cocycles.push_back(c);
    return {
        {"format", "cycsig-space/1"},
        {"grid", {{"r", y.grid.r}, {"k", y.grid.k}, {"dim", y.grid.dim}}},
        {"boxes", y.complex.boxes().size()},
        {"cells", {y.complex.cell_count(0), y.complex.cell_count(1), y.complex.cell_count(2)}},
        {"betti1", y.betti1()},
        {"cocycles", cocycles},
        {"box_list", boxes},
    };
}

ComparisonSpace load_space(const systems::LiftedSeries& series, const nlohmann::json& summary) {
    GridParams g;
    g.r = summary.at("grid").at("r").get<double>();
    g.k = summary.at("grid").at("k").get<int>();
    g.dim = summary.at("grid").at("dim").get<std::size_t>();
    auto y = build_space(series, g);
    if (y.complex.boxes().size() != summary.at("boxes").get<std::size_t>())
        throw Error("space file does not match trajectory (box count differs)");
    if (y.betti1() != summary.at("betti1").get<std::size_t>())
        throw Error("space file does not match trajectory (Betti number differs)");
    std::vector<Chain> cocycles;
    for (const auto& c : summary.at("cocycles")) cocycles.push_back(c.get<Chain>());
    y.complex.set_cocycles(std::move(cocycles));
    return y;
}

}  // namespace cycsig::cubical
