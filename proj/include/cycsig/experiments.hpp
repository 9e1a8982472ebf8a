#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cycsig/cubical.hpp"
#include "cycsig/signatures.hpp"
#include "cycsig/systems.hpp"

namespace cycsig::experiments {

struct ExperimentPlan {
    std::vector<std::size_t> lengths;
    std::size_t per_length = 200;
    std::uint64_t seed = 0;
    std::vector<double> radii;
    std::optional<double> C;

    void validate() const;
    // L = 10, 20, ..., max_length.
    static std::vector<std::size_t> length_grid(std::size_t step, std::size_t max_length);
};

// `count` starts uniform on [0, n - length], with replacement. The stream
// depends on (seed, length) only.
std::vector<std::size_t> sample_segments(std::size_t n, std::size_t length, std::size_t count, std::uint64_t seed);

// One evaluated segment at one radius. A failed segment has no signature
// and carries the error text instead.
struct Outcome {
    std::size_t start = 0;
    std::size_t length = 0;
    double radius = 0.0;
    std::optional<gf2::Subspace> signature;
    std::string error;

    bool ok() const { return signature.has_value(); }
    std::size_t rank() const { return signature ? signature->rank() : 0; }
};

// Worker count from CYCSIG_THREADS, else hardware concurrency.
std::size_t default_threads();

// Evaluates every sampled segment at every plan radius. Output order is
// (length, sample, radius) regardless of thread count. EdgeTooLong on a
// segment is recorded as a failed outcome; other errors propagate.
std::vector<Outcome> run_plan(const systems::LiftedSeries& series, const cubical::ComparisonSpace& y,
                              const ExperimentPlan& plan, std::size_t threads = 0);

// Outcomes at one radius (exact match).
std::vector<Outcome> at_radius(const std::vector<Outcome>& all, double radius);

struct RankTable {
    std::size_t max_rank = 0;
    std::vector<std::size_t> lengths;
    // counts[l][r] for lengths[l] and rank r; failed[l] counts errors.
    std::vector<std::vector<std::size_t>> counts;
    std::vector<std::size_t> failed;

    std::size_t total(std::size_t l) const;
    // Smallest length with no rank-0 segments, and the smallest with some
    // rank > 0 segment.
    std::optional<std::size_t> rank0_extinction() const;
    std::optional<std::size_t> positive_onset() const;
};

RankTable rank_table(const std::vector<Outcome>& outcomes, std::size_t max_rank);

struct FrequencyCurves {
    std::size_t rank = 0;
    std::size_t ambient = 0;
    std::vector<std::size_t> lengths;
    std::vector<std::string> keys;  // sorted
    // freq[key index][length index]
    std::vector<std::vector<double>> freq;

    double peak(std::size_t key) const;
};

// Per length, the share of all segments of that length (failures included)
// whose signature has the given rank and key.
FrequencyCurves frequency_curves(const std::vector<Outcome>& outcomes, std::size_t rank, std::size_t ambient);

// Keys whose peak frequency reaches `threshold`, ordered by decreasing peak.
std::vector<std::string> frequent_keys(const FrequencyCurves& curves, double threshold);

// Smallest length with frequency >= threshold, per key (absent if never).
std::map<std::string, std::size_t> onset_lengths(const FrequencyCurves& curves, double threshold);

struct InclusionGraph {
    std::size_t ambient = 0;
    std::vector<std::string> bottom;
    std::vector<std::string> top;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // (bottom, top)
};

InclusionGraph inclusion_graph(std::size_t ambient, const std::vector<std::string>& bottom,
                               const std::vector<std::string>& top);

// Everything the statistics stage derives from one radius' outcomes.
struct Summary {
    std::size_t betti1 = 0;
    double threshold = 0.02;
    RankTable ranks;
    FrequencyCurves rank1, rank2;
    std::vector<std::string> oscillations;  // frequent rank-1 keys
    std::vector<std::string> rank2_keys;    // frequent rank-2 keys
    std::map<std::string, std::size_t> onsets;  // of the oscillations, at `threshold`
    InclusionGraph graph;
};

Summary summarize(const std::vector<Outcome>& outcomes, std::size_t betti1, double threshold);
nlohmann::json summary_json(const Summary& s);

// One full pipeline configuration: data, space and plan.
struct Configuration {
    std::string label;
    systems::SystemSpec spec;
    std::size_t n_points = 200'000;
    std::size_t transient = 1000;
    std::uint64_t data_seed = 0;
    cubical::GridParams grid;
    ExperimentPlan plan;
};

struct ConfigResult {
    Configuration config;
    std::size_t betti1 = 0;
    std::vector<Outcome> outcomes;
    std::string error;  // non-empty if the run failed

    bool ok() const { return error.empty(); }
};

ConfigResult run_configuration(const Configuration& c, std::size_t threads = 0);

// Runs each configuration independently; a failing run is reported in its
// result and does not stop the others.
std::vector<ConfigResult> stability_sweep(const std::vector<Configuration>& configs, std::size_t threads = 0);

// File formats.
void write_outcomes_jsonl(std::ostream& os, const std::vector<Outcome>& outcomes);
std::vector<Outcome> read_outcomes_jsonl(std::istream& is);
void write_rank_csv(std::ostream& os, const RankTable& t);
RankTable read_rank_csv(std::istream& is);
void write_curves_csv(std::ostream& os, const FrequencyCurves& c);
FrequencyCurves read_curves_csv(std::istream& is);
void write_dot(std::ostream& os, const InclusionGraph& g);

nlohmann::json plan_json(const ExperimentPlan& p);
ExperimentPlan plan_from_json(const nlohmann::json& j);

}  // namespace cycsig::experiments
