#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "cycsig/systems.hpp"

namespace cycsig::io {

// Lifted trajectory as CSV (x0..x{d-1}, v0..v{d-1}) with a sidecar
// PATH.meta.json holding the system spec, seed and sizes.
struct Trajectory {
    systems::LiftedSeries lifted;
    nlohmann::json meta;
};

std::filesystem::path meta_path(const std::filesystem::path& csv);

void write_trajectory(const std::filesystem::path& csv, const systems::LiftedSeries& lifted, const nlohmann::json& meta);
Trajectory read_trajectory(const std::filesystem::path& csv);

nlohmann::json read_json(const std::filesystem::path& file);
void write_json(const std::filesystem::path& file, const nlohmann::json& j);
void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);

// Lowercase hex SHA-256.
std::string sha256(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& file);

}  // namespace cycsig::io
