#include "evbat/dataset_io.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

namespace evbat {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json snippet_to_json(const Vehicle& vehicle, const ChargingSnippet& s) {
  ordered_json line;
  line["vehicle_id"] = s.vehicle_id();
  line["snippet_index"] = s.snippet_index();
  line["mileage"] = s.mileage();
  line["health_label"] = vehicle.health_label;
  if (s.capacity_label().has_value()) {
    line["capacity_label"] = *s.capacity_label();
  } else {
    line["capacity_label"] = nullptr;
  }
  ordered_json series = ordered_json::array();
  const SeriesMatrix& m = s.series();
  for (int i = 0; i < kSnippetLength; ++i) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < kChannelCount; ++c) {
      row.push_back(m(i, c));
    }
    series.push_back(std::move(row));
  }
  line["series"] = std::move(series);
  return line;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  return out;
}

}  // namespace

void write_dataset_jsonl(const std::filesystem::path& path,
                         std::span<const Vehicle> fleet) {
  std::ofstream out = open_for_write(path);
  for (const Vehicle& v : fleet) {
    for (const ChargingSnippet& s : v.snippets) {
      out << snippet_to_json(v, s).dump() << '\n';
    }
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

void write_manifest(const std::filesystem::path& path,
                    std::span<const Vehicle> fleet) {
  ordered_json manifest;
  ordered_json vehicles = ordered_json::array();
  for (const Vehicle& v : fleet) {
    vehicles.push_back({{"vehicle_id", v.vehicle_id},
                        {"health_label", v.health_label}});
  }
  manifest["vehicles"] = std::move(vehicles);
  std::ofstream out = open_for_write(path);
  out << manifest.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

std::vector<Vehicle> read_dataset(const std::filesystem::path& jsonl_path,
                                  const std::filesystem::path& manifest_path) {
  std::ifstream manifest_in(manifest_path);
  if (!manifest_in) {
    throw std::runtime_error("cannot open manifest: " + manifest_path.string());
  }
  const auto manifest = nlohmann::json::parse(manifest_in);

  std::vector<Vehicle> fleet;
  std::map<std::string, std::size_t> index_by_id;
  for (const auto& entry : manifest.at("vehicles")) {
    Vehicle v;
    v.vehicle_id = entry.at("vehicle_id").get<std::string>();
    v.health_label = entry.at("health_label").get<int>();
    if (v.health_label != 0 && v.health_label != 1) {
      throw std::runtime_error("manifest health_label must be 0 or 1 for " +
                               v.vehicle_id);
    }
    if (!index_by_id.emplace(v.vehicle_id, fleet.size()).second) {
      throw std::runtime_error("duplicate vehicle_id in manifest: " + v.vehicle_id);
    }
    fleet.push_back(std::move(v));
  }

  std::ifstream in(jsonl_path);
  if (!in) {
    throw std::runtime_error("cannot open dataset: " + jsonl_path.string());
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error("bad JSON at " + jsonl_path.string() + ":" +
                               std::to_string(line_no) + ": " + e.what());
    }
    const auto vehicle_id = obj.at("vehicle_id").get<std::string>();
    const auto it = index_by_id.find(vehicle_id);
    if (it == index_by_id.end()) {
      throw std::runtime_error("snippet vehicle_id not in manifest: " + vehicle_id);
    }
    Vehicle& vehicle = fleet[it->second];
    if (obj.at("health_label").get<int>() != vehicle.health_label) {
      throw std::runtime_error("snippet health_label disagrees with manifest for " +
                               vehicle_id);
    }
    const auto& series_json = obj.at("series");
    if (series_json.size() != static_cast<std::size_t>(kSnippetLength)) {
      throw std::runtime_error("series must have " +
                               std::to_string(kSnippetLength) + " rows (line " +
                               std::to_string(line_no) + ")");
    }
    auto series = std::make_shared<SeriesMatrix>();
    for (int i = 0; i < kSnippetLength; ++i) {
      const auto& row = series_json.at(i);
      if (row.size() != static_cast<std::size_t>(kChannelCount)) {
        throw std::runtime_error("series row must have " +
                                 std::to_string(kChannelCount) + " channels (line " +
                                 std::to_string(line_no) + ")");
      }
      for (int c = 0; c < kChannelCount; ++c) {
        (*series)(i, c) = row.at(c).get<double>();
      }
    }
    std::optional<double> capacity;
    if (!obj.at("capacity_label").is_null()) {
      capacity = obj.at("capacity_label").get<double>();
    }
    // Validating constructor: malformed series are rejected at load time.
    vehicle.snippets.emplace_back(vehicle_id, obj.at("snippet_index").get<int>(),
                                  obj.at("mileage").get<double>(),
                                  std::move(series), capacity);
  }
  return fleet;
}

}  // namespace evbat
