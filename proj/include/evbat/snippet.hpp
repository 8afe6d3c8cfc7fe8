#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evbat {

inline constexpr int kSnippetLength = 128;
inline constexpr int kChannelCount = 8;

/// Column layout of a charging series.
enum Channel : int {
  kAvgCellVoltage = 0,  // V
  kCurrent = 1,         // A
  kMaxCellVoltage = 2,  // V
  kMinCellVoltage = 3,  // V
  kMaxTemp = 4,         // degC
  kMinTemp = 5,         // degC
  kSoc = 6,             // percent
  kTimestamp = 7,       // seconds
};

using SeriesMatrix = Eigen::Matrix<double, kSnippetLength, kChannelCount>;
using SeriesPtr = std::shared_ptr<const SeriesMatrix>;

/// Throws std::invalid_argument if a (rows x 8) record violates the channel
/// invariants: min <= avg <= max cell voltage, min <= max temperature,
/// soc in [0,100] and non-decreasing, timestamps strictly increasing.
void validate_record(const Eigen::MatrixXd& record);

struct UncheckedTag {};
inline constexpr UncheckedTag kUnchecked{};

/// One fixed-length window of a charging record plus its metadata.
/// Immutable after construction; copies share the underlying series.
class ChargingSnippet {
 public:
  ChargingSnippet(std::string vehicle_id, int snippet_index, double mileage,
                  SeriesPtr series,
                  std::optional<double> capacity_label = std::nullopt);

  /// Skips invariant validation; for windows cut from an already-validated
  /// record and for I/O paths that validate separately.
  ChargingSnippet(UncheckedTag, std::string vehicle_id, int snippet_index,
                  double mileage, SeriesPtr series,
                  std::optional<double> capacity_label = std::nullopt);

  const std::string& vehicle_id() const { return vehicle_id_; }
  int snippet_index() const { return snippet_index_; }
  double mileage() const { return mileage_; }
  const SeriesMatrix& series() const { return *series_; }
  const SeriesPtr& series_ptr() const { return series_; }
  const std::optional<double>& capacity_label() const { return capacity_label_; }

 private:
  std::string vehicle_id_;
  int snippet_index_ = 0;
  double mileage_ = 0.0;
  SeriesPtr series_;
  std::optional<double> capacity_label_;
};

/// A labeled collection of snippets from one vehicle. The health label lives
/// on the vehicle and extends to every snippet.
struct Vehicle {
  std::string vehicle_id;
  int health_label = 0;  // 0 normal, 1 anomalous
  std::vector<ChargingSnippet> snippets;
};

/// Throws std::invalid_argument if any snippet carries a foreign vehicle_id
/// or the label is outside {0,1}.
void validate_vehicle(const Vehicle& vehicle);

/// Cuts fixed-length windows out of a raw (rows x 8) record. Offsets advance
/// by `stride`; a record shorter than `window` yields an empty list.
/// Snippet indices count up from `first_index`.
std::vector<ChargingSnippet> extract_snippets(
    const Eigen::MatrixXd& record, int window, int stride,
    const std::string& vehicle_id, double mileage,
    std::optional<double> capacity_label = std::nullopt, int first_index = 0);

struct DatasetStats {
  std::size_t vehicles = 0;
  std::size_t anomalous_vehicles = 0;
  std::size_t snippets = 0;
  std::size_t capacity_labeled = 0;

  DatasetStats operator+(const DatasetStats& other) const;
  bool operator==(const DatasetStats& other) const = default;
};

DatasetStats dataset_stats(std::span<const Vehicle> fleet);

}  // namespace evbat
