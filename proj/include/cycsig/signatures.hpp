#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cycsig/cubical.hpp"
#include "cycsig/gf2.hpp"
#include "cycsig/persistence.hpp"

namespace cycsig::signatures {

struct SignatureRecord {
    std::size_t start = 0;
    std::size_t length = 0;
    double radius = 0.0;
    gf2::Subspace signature;

    std::size_t rank() const { return signature.rank(); }
};

// Default C = r k of the comparison space grid.
double default_c(const cubical::GridParams& g);

// Span of the cocycle pairings of the representatives alive at r_bar.
SignatureRecord signature(const persistence::SegmentView& seg, const cubical::ComparisonSpace& y,
                          std::optional<double> C, double r_bar);

// One filtration at the largest radius, read off at every radius. Records
// come back in the order of `radii`.
std::vector<SignatureRecord> signature_sweep(const persistence::SegmentView& seg, const cubical::ComparisonSpace& y,
                                             std::optional<double> C, const std::vector<double>& radii);

// Cocycle coordinates of a data cycle given in segment-local indices.
gf2::BitVector pairing_vector(const persistence::SegmentView& seg, const cubical::ComparisonSpace& y,
                              const std::vector<persistence::DataEdge>& cycle);

nlohmann::json record_json(const SignatureRecord& r);
SignatureRecord record_from_json(const nlohmann::json& j);

}  // namespace cycsig::signatures
