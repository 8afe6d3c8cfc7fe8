#include "evbat/snippet.hpp"

#include <stdexcept>
#include <string>

namespace evbat {

namespace {

[[noreturn]] void fail_row(const char* what, Eigen::Index row) {
  throw std::invalid_argument(std::string("invalid charging record: ") + what +
                              " at row " + std::to_string(row));
}

}  // namespace

void validate_record(const Eigen::MatrixXd& record) {
  if (record.cols() != kChannelCount) {
    throw std::invalid_argument("invalid charging record: expected " +
                                std::to_string(kChannelCount) + " channels, got " +
                                std::to_string(record.cols()));
  }
  for (Eigen::Index i = 0; i < record.rows(); ++i) {
    const double avg_v = record(i, kAvgCellVoltage);
    const double max_v = record(i, kMaxCellVoltage);
    const double min_v = record(i, kMinCellVoltage);
    if (!(min_v <= avg_v && avg_v <= max_v)) {
      fail_row("cell voltage ordering violated (min <= avg <= max)", i);
    }
    if (!(record(i, kMinTemp) <= record(i, kMaxTemp))) {
      fail_row("temperature ordering violated (min <= max)", i);
    }
    const double soc = record(i, kSoc);
    if (!(soc >= 0.0 && soc <= 100.0)) {
      fail_row("soc outside [0, 100]", i);
    }
    if (i > 0) {
      if (record(i, kSoc) < record(i - 1, kSoc)) {
        fail_row("soc decreases", i);
      }
      if (!(record(i, kTimestamp) > record(i - 1, kTimestamp))) {
        fail_row("timestamps not strictly increasing", i);
      }
    }
  }
}

ChargingSnippet::ChargingSnippet(std::string vehicle_id, int snippet_index,
                                 double mileage, SeriesPtr series,
                                 std::optional<double> capacity_label)
    : ChargingSnippet(kUnchecked, std::move(vehicle_id), snippet_index, mileage,
                      std::move(series), capacity_label) {
  if (!series_) {
    throw std::invalid_argument("charging snippet requires a series");
  }
  if (snippet_index_ < 0) {
    throw std::invalid_argument("snippet_index must be non-negative");
  }
  if (mileage_ < 0.0) {
    throw std::invalid_argument("mileage must be non-negative");
  }
  validate_record(*series_);
}

ChargingSnippet::ChargingSnippet(UncheckedTag, std::string vehicle_id,
                                 int snippet_index, double mileage,
                                 SeriesPtr series,
                                 std::optional<double> capacity_label)
    : vehicle_id_(std::move(vehicle_id)),
      snippet_index_(snippet_index),
      mileage_(mileage),
      series_(std::move(series)),
      capacity_label_(capacity_label) {}

void validate_vehicle(const Vehicle& vehicle) {
  if (vehicle.health_label != 0 && vehicle.health_label != 1) {
    throw std::invalid_argument("vehicle health_label must be 0 or 1");
  }
  for (const ChargingSnippet& s : vehicle.snippets) {
    if (s.vehicle_id() != vehicle.vehicle_id) {
      throw std::invalid_argument("snippet vehicle_id '" + s.vehicle_id() +
                                  "' does not match vehicle '" +
                                  vehicle.vehicle_id + "'");
    }
  }
}

std::vector<ChargingSnippet> extract_snippets(
    const Eigen::MatrixXd& record, int window, int stride,
    const std::string& vehicle_id, double mileage,
    std::optional<double> capacity_label, int first_index) {
  if (window != kSnippetLength) {
    throw std::invalid_argument("window must equal the fixed snippet length " +
                                std::to_string(kSnippetLength));
  }
  if (stride < 1) {
    throw std::invalid_argument("stride must be positive");
  }
  std::vector<ChargingSnippet> out;
  if (record.rows() < window) {
    return out;
  }
  validate_record(record);
  const Eigen::Index count = (record.rows() - window) / stride + 1;
  out.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index k = 0; k < count; ++k) {
    auto series = std::make_shared<SeriesMatrix>(
        record.middleRows(k * stride, window));
    out.emplace_back(kUnchecked, vehicle_id, first_index + static_cast<int>(k),
                     mileage, std::move(series), capacity_label);
  }
  return out;
}

DatasetStats DatasetStats::operator+(const DatasetStats& other) const {
  return DatasetStats{vehicles + other.vehicles,
                      anomalous_vehicles + other.anomalous_vehicles,
                      snippets + other.snippets,
                      capacity_labeled + other.capacity_labeled};
}

DatasetStats dataset_stats(std::span<const Vehicle> fleet) {
  DatasetStats stats;
  for (const Vehicle& v : fleet) {
    ++stats.vehicles;
    if (v.health_label == 1) {
      ++stats.anomalous_vehicles;
    }
    stats.snippets += v.snippets.size();
    for (const ChargingSnippet& s : v.snippets) {
      if (s.capacity_label().has_value()) {
        ++stats.capacity_labeled;
      }
    }
  }
  return stats;
}

}  // namespace evbat
