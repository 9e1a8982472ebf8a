#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cycsig/cubical.hpp"
#include "cycsig/systems.hpp"

namespace cycsig::persistence {

using cubical::DataEdge;

// Consecutive samples [start, start + length) of a lifted series.
struct SegmentView {
    const systems::LiftedSeries* series = nullptr;
    std::size_t start = 0;
    std::size_t length = 0;

    SegmentView(const systems::LiftedSeries& s, std::size_t start, std::size_t length);
    std::span<const double> point(std::size_t i) const { return series->point(start + i); }
    std::span<const double> tangent(std::size_t i) const { return series->tangent(start + i); }
};

// max(|p - q|_2, C |v - w|_2)
double d_c(std::span<const double> p, std::span<const double> v, std::span<const double> q,
           std::span<const double> w, double C);

struct FiltrationEdge {
    std::uint32_t i = 0, j = 0;  // i < j
    double value = 0.0;
};

struct FiltrationTriangle {
    std::uint32_t i = 0, j = 0, k = 0;  // i < j < k
    double value = 0.0;
};

struct Filtration {
    std::size_t vertex_count = 0;
    std::vector<FiltrationEdge> edges;
    std::vector<FiltrationTriangle> triangles;
    double r_max = 0.0;
};

using Metric = std::function<double(std::size_t, std::size_t)>;

// Clique filtration truncated at r_max; ties broken by sorted vertex indices.
Filtration build_filtration(std::size_t vertex_count, const Metric& metric, double r_max);
Filtration build_filtration(const SegmentView& seg, double C, double r_max);

struct Bar {
    double birth = 0.0;
    double death = std::numeric_limits<double>::infinity();
    // Cycle in segment-local vertex indices.
    std::vector<DataEdge> representative;
};

struct Barcode {
    std::vector<Bar> bars;
    std::size_t start = 0;
    std::size_t length = 0;
    double C = 0.0;
    double r_max = 0.0;
};

// Degree-one persistence by column reduction over F2. Bars never killed
// below r_max get infinite death; zero-length pairs are dropped.
// Representatives are the fundamental cycles of the creating edges with
// respect to the minimum spanning forest of the filtration.
Barcode persist_h1(const Filtration& f);

// Bars with birth <= r < death. Throws if r exceeds the barcode's r_max.
std::vector<Bar> bars_alive(const Barcode& b, double r);

nlohmann::json barcode_json(const Barcode& b);

}  // namespace cycsig::persistence
