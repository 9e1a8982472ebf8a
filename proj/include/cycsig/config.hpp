#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cycsig/cubical.hpp"
#include "cycsig/experiments.hpp"
#include "cycsig/systems.hpp"

namespace cycsig::config {

inline constexpr const char* kFormat = "cycsig-config/1";

struct PipelineConfig {
    experiments::Configuration run;
    double threshold = 0.02;  // "frequent" cutoff on peak frequency
    std::filesystem::path output = "out";
    std::size_t threads = 0;  // 0: CYCSIG_THREADS or hardware concurrency
    // Sweep variations, each a JSON merge patch applied to the base config.
    std::vector<nlohmann::json> sweep;

    // Radii within the grid, plan and spec valid.
    void validate() const;
};

// Per-system defaults: Lorenz (8,3) at 5, double well (0.2,3) at 0.18,
// Dadras (4,3) at 1.5; 200 segments per length, L = 10..500.
PipelineConfig default_config(systems::SystemName name);

// Missing fields fall back to the defaults of the named system.
PipelineConfig from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& c);

PipelineConfig load(const std::filesystem::path& file);

// Base config with one sweep patch applied.
PipelineConfig apply_patch(const PipelineConfig& base, const nlohmann::json& patch);

nlohmann::json spec_json(const systems::SystemSpec& s);
systems::SystemSpec spec_from_json(const nlohmann::json& j);

}  // namespace cycsig::config
