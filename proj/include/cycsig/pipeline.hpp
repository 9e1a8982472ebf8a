#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cycsig/config.hpp"
#include "cycsig/cubical.hpp"
#include "cycsig/experiments.hpp"

namespace cycsig::pipeline {

inline constexpr const char* kVersion = "0.1.0";

// Error raised inside a named stage; `run` turns it into error.json.
struct StageError : std::runtime_error {
    StageError(std::string stage, const std::exception& cause);
    std::string stage;
    std::string type;
};

// Directory name for the statistics of one radius, e.g. "r5" or "r0.18".
std::string radius_dir(double r);

// Stage bodies; each reads and writes files under `dir`.
nlohmann::json generate(const config::PipelineConfig& c, const std::filesystem::path& csv);
cubical::ComparisonSpace space(const systems::LiftedSeries& lifted, const cubical::GridParams& g,
                               const std::filesystem::path& out);
std::vector<experiments::Outcome> compute(const systems::LiftedSeries& lifted, const cubical::ComparisonSpace& y,
                                          const experiments::ExperimentPlan& plan, std::size_t threads,
                                          const std::filesystem::path& out);
// Rank table, frequency curves, summary and inclusion graph for one radius.
experiments::Summary stats(const std::vector<experiments::Outcome>& outcomes, std::size_t betti1, double threshold,
                           const std::filesystem::path& dir);
// SVG next to every CSV table in `dir`.
void plot_dir(const std::filesystem::path& dir);

// Full pipeline into c.output. Writes manifest.json on success, error.json
// on failure (and rethrows as StageError).
nlohmann::json run(const config::PipelineConfig& c);

// Each sweep patch runs as its own pipeline under output/sweep/<label>;
// failures are recorded in sweep.json and do not stop the batch.
nlohmann::json sweep(const config::PipelineConfig& c);

}  // namespace cycsig::pipeline
