#include "cycsig/signatures.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "cycsig/errors.hpp"

namespace cycsig::signatures {

double default_c(const cubical::GridParams& g) { return g.r * g.k; }

gf2::BitVector pairing_vector(const persistence::SegmentView& seg, const cubical::ComparisonSpace& y,
                              const std::vector<persistence::DataEdge>& cycle) {
    std::vector<cubical::DataEdge> global;
    global.reserve(cycle.size());
    for (const auto& e : cycle)
        global.push_back({static_cast<std::uint32_t>(seg.start + e.u), static_cast<std::uint32_t>(seg.start + e.v)});
    const auto z = cubical::map_cycle(global, *seg.series, y);
    const auto mask = cubical::pairing_mask(y.complex, z);
    gf2::BitVector v(y.betti1());
    for (std::size_t j = 0; j < y.betti1(); ++j)
        if ((mask >> j) & 1u) v.set(j);
    return v;
}

std::vector<SignatureRecord> signature_sweep(const persistence::SegmentView& seg, const cubical::ComparisonSpace& y,
                                             std::optional<double> C, const std::vector<double>& radii) {
    if (radii.empty()) return {};
    for (double r : radii) {
        if (!(r > 0.0)) throw ConfigError("evaluation radius must be positive");
        if (r > y.grid.r) throw ConfigError("evaluation radius exceeds space box size");
    }
    const double c = C.value_or(default_c(y.grid));
    const double r_max = *std::max_element(radii.begin(), radii.end());
    const auto filtration = persistence::build_filtration(seg, c, r_max);
    auto barcode = persistence::persist_h1(filtration);
    barcode.start = seg.start;
    barcode.C = c;

    std::vector<SignatureRecord> out;
    out.reserve(radii.size());
    for (double r : radii) {
        std::vector<gf2::BitVector> vectors;
        for (const auto& bar : persistence::bars_alive(barcode, r))
            vectors.push_back(pairing_vector(seg, y, bar.representative));
        out.push_back({seg.start, seg.length, r, gf2::span(y.betti1(), vectors)});
    }
    return out;
}

SignatureRecord signature(const persistence::SegmentView& seg, const cubical::ComparisonSpace& y,
                          std::optional<double> C, double r_bar) {
    return signature_sweep(seg, y, C, {r_bar}).front();
}

nlohmann::json record_json(const SignatureRecord& r) {
    return {{"start", r.start},
            {"length", r.length},
            {"radius", r.radius},
            {"rank", r.rank()},
            {"key", r.signature.key()},
            {"signature", r.signature.to_json()}};
}

SignatureRecord record_from_json(const nlohmann::json& j) {
    SignatureRecord r;
    r.start = j.at("start").get<std::size_t>();
    r.length = j.at("length").get<std::size_t>();
    r.radius = j.at("radius").get<double>();
    r.signature = gf2::Subspace::from_json(j.at("signature"));
    if (j.contains("key") && j.at("key").get<std::string>() != r.signature.key())
        throw Error("signature record key does not match its subspace");
    return r;
}

}  // namespace cycsig::signatures
