#pragma once

#include "evbat/snippet.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace evbat {

/// Writes one JSON object per snippet with keys vehicle_id, snippet_index,
/// mileage, health_label, capacity_label (null when absent) and series
/// (128 x 8 array), one line each.
void write_dataset_jsonl(const std::filesystem::path& path,
                         std::span<const Vehicle> fleet);

/// Sidecar manifest: {"vehicles": [{"vehicle_id", "health_label"}, ...]}.
void write_manifest(const std::filesystem::path& path,
                    std::span<const Vehicle> fleet);

/// Loads a dataset written by the pair above. Vehicles come back in manifest
/// order with snippets in file order; every snippet is re-validated and its
/// health label checked against the manifest.
std::vector<Vehicle> read_dataset(const std::filesystem::path& jsonl_path,
                                  const std::filesystem::path& manifest_path);

}  // namespace evbat
