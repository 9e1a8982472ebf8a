#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cycsig/gf2.hpp"
#include "cycsig/systems.hpp"

namespace cycsig::cubical {

inline constexpr std::size_t kMaxCoords = 8;
using Lattice = std::array<std::int32_t, kMaxCoords>;

struct GridParams {
    double r = 1.0;  // space box size
    int k = 3;       // sphere subdivision, sphere box size 1/k
    std::size_t dim = 0;

    void validate() const;
};

// Lattice box; coordinates 0..dim-1 are the space index p, dim..2dim-1 the
// sphere index q. After shifting every coordinate by +1/2 the box is the
// unit cube with minimal corner (p, q).
struct BoxId {
    Lattice c{};
    std::uint8_t n = 0;

    friend bool operator==(const BoxId&, const BoxId&) = default;
    friend auto operator<=>(const BoxId&, const BoxId&) = default;
};

// Elementary cube: in coordinate i the interval is [lo_i, lo_i + 1] if bit
// i of `full` is set, otherwise the point {lo_i}.
struct Cell {
    Lattice lo{};
    std::uint16_t full = 0;
    std::uint8_t n = 0;

    int dimension() const;
    friend bool operator==(const Cell&, const Cell&) = default;
};

struct CellHash {
    std::size_t operator()(const Cell& c) const noexcept;
};
struct BoxHash {
    std::size_t operator()(const BoxId& b) const noexcept;
};

BoxId locate_box(std::span<const double> x, std::span<const double> v, const GridParams& g);

// F2 1-chain as a sorted list of distinct edge indices.
using Chain = std::vector<std::uint32_t>;
Chain chain_add(const Chain& a, const Chain& b);

// The 2-skeleton of a union of closed unit lattice boxes, with a degree-one
// cohomology basis.
class CubicalComplex {
public:
    // Boxes may repeat; they are deduplicated and sorted.
    static CubicalComplex from_boxes(std::size_t n, std::vector<BoxId> boxes);

    std::size_t lattice_dim() const { return n_; }
    const std::vector<BoxId>& boxes() const { return boxes_; }
    bool has_box(const BoxId& b) const { return box_index_.contains(b); }

    std::size_t cell_count(int dim) const { return cells_[dim].size(); }
    const Cell& cell(int dim, std::size_t i) const { return cells_[dim][i]; }
    // Index of a cell, or -1 if absent.
    std::int64_t find(const Cell& c) const;

    const std::array<std::uint32_t, 2>& edge_boundary(std::size_t e) const { return edge_bd_[e]; }
    const std::array<std::uint32_t, 4>& face_boundary(std::size_t f) const { return face_bd_[f]; }

    std::size_t betti1() const { return cocycles_.size(); }
    // Cocycle basis as sorted edge index lists.
    const std::vector<Chain>& cocycles() const { return cocycles_; }
    // Bit j set iff cocycle j takes value 1 on the edge.
    std::uint64_t edge_mask(std::size_t e) const { return edge_masks_[e]; }

    // Replaces the basis; every entry must be a cocycle and the list must
    // have betti1() independent classes. Used when loading a saved space.
    void set_cocycles(std::vector<Chain> cocycles);

    // Chain-level helpers.
    Chain boundary_of_face(std::size_t f) const;
    std::vector<std::uint32_t> coboundary_of_cocycle(const Chain& alpha) const;
    bool is_cocycle(const Chain& alpha) const;
    bool is_cycle(const Chain& z) const;

    // Minimal corner of the box, as a vertex index.
    std::uint32_t anchor_vertex(const BoxId& b) const;

private:
    void build_cells();
    void compute_cohomology();
    void rebuild_masks();

    std::size_t n_ = 0;
    std::vector<BoxId> boxes_;
    std::unordered_map<BoxId, std::uint32_t, BoxHash> box_index_;
    std::array<std::vector<Cell>, 3> cells_;
    std::array<std::unordered_map<Cell, std::uint32_t, CellHash>, 3> index_;
    std::vector<std::array<std::uint32_t, 2>> edge_bd_;
    std::vector<std::array<std::uint32_t, 4>> face_bd_;
    std::vector<Chain> cocycles_;
    std::vector<std::uint64_t> edge_masks_;
};

struct ComparisonSpace {
    GridParams grid;
    CubicalComplex complex;

    std::size_t betti1() const { return complex.betti1(); }
    BoxId box_of(const systems::LiftedSeries& series, std::size_t i) const {
        return locate_box(series.point(i), series.tangent(i), grid);
    }
};

ComparisonSpace build_space(const systems::LiftedSeries& series, const GridParams& g);

// Path of edges from anchor(a) to anchor(b) using faces of a or b only.
// Throws EdgeTooLong if the boxes are not lattice neighbours.
Chain route_edge(const BoxId& a, const BoxId& b, const CubicalComplex& y);
// Same path, folded into cocycle coordinates.
std::uint64_t route_mask(const BoxId& a, const BoxId& b, const CubicalComplex& y);

struct DataEdge {
    std::uint32_t u = 0;
    std::uint32_t v = 0;
};

// Image of a data 1-cycle (edges between lifted samples) in the cubical
// complex. Throws if the input is not a cycle.
Chain map_cycle(std::span<const DataEdge> cycle, const systems::LiftedSeries& series, const ComparisonSpace& y);

bool pair(const Chain& alpha, const Chain& z);
// All cocycle pairings of z packed as bits.
std::uint64_t pairing_mask(const CubicalComplex& y, const Chain& z);

nlohmann::json space_summary(const ComparisonSpace& y);
// Rebuilds the complex from the series using the grid stored in `summary`
// and installs the stored cocycles.
ComparisonSpace load_space(const systems::LiftedSeries& series, const nlohmann::json& summary);

}  // namespace cycsig::cubical
