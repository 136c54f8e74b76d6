#pragma once

#include "zipsel/corpus.hpp"
#include "zipsel/selector.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace zipsel {

/// Everything needed to reproduce a selection run bit for bit: the full
/// config snapshot, the input checksum and the chosen ids, plus the
/// trajectory and timings for analysis.
struct RunManifest {
    std::string tool = "zipsel";
    std::string version;
    std::string strategy; // "zip" | "random"
    std::string input_path;
    std::string input_crc32;
    SampleKind mode = SampleKind::single;
    std::uint64_t pool_samples = 0;

    SelectorConfig config;
    std::optional<std::uint64_t> seed; // random strategy only

    std::vector<std::string> selected_ids;
    RatioScore final_ratio;
    SpentBudget spent;
    std::vector<TrajectoryPoint> trajectory;
    double total_wall_seconds = 0.0;
    std::vector<std::string> warnings;
};

std::string to_json_string(const RunManifest& manifest);
RunManifest manifest_from_json_string(const std::string& text);

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

/// CRC-32 of a file's raw bytes, zero-padded lowercase hex.
std::string file_crc32(const std::filesystem::path& path);

} // namespace zipsel
