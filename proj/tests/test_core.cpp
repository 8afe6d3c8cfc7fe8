#include "evbat/dataset_io.hpp"
#include "evbat/normalize.hpp"
#include "evbat/snippet.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace evbat;

namespace {

Eigen::MatrixXd valid_record(int rows) {
  Eigen::MatrixXd m(rows, kChannelCount);
  for (int i = 0; i < rows; ++i) {
    const double frac = static_cast<double>(i) / std::max(1, rows - 1);
    const double v = 3.5 + 0.6 * frac;
    m(i, kAvgCellVoltage) = v;
    m(i, kCurrent) = 35.0;
    m(i, kMaxCellVoltage) = v + 0.01;
    m(i, kMinCellVoltage) = v - 0.01;
    m(i, kMaxTemp) = 26.0;
    m(i, kMinTemp) = 24.0;
    m(i, kSoc) = std::min(100.0, 10.0 + 80.0 * frac);
    m(i, kTimestamp) = 10.0 * i;
  }
  return m;
}

}  // namespace

TEST_CASE("record validation catches each invariant violation") {
  CHECK_NOTHROW(validate_record(valid_record(64)));

  Eigen::MatrixXd bad = valid_record(64);
  bad(10, kMinCellVoltage) = bad(10, kAvgCellVoltage) + 0.1;
  CHECK_THROWS_AS(validate_record(bad), std::invalid_argument);

  bad = valid_record(64);
  bad(5, kMinTemp) = bad(5, kMaxTemp) + 1.0;
  CHECK_THROWS_AS(validate_record(bad), std::invalid_argument);

  bad = valid_record(64);
  bad(20, kSoc) = 101.0;
  CHECK_THROWS_AS(validate_record(bad), std::invalid_argument);

  bad = valid_record(64);
  bad(20, kSoc) = bad(19, kSoc) - 1.0;
  CHECK_THROWS_AS(validate_record(bad), std::invalid_argument);

  bad = valid_record(64);
  bad(30, kTimestamp) = bad(29, kTimestamp);
  CHECK_THROWS_AS(validate_record(bad), std::invalid_argument);
}

TEST_CASE("extract_snippets window arithmetic") {
  const std::string id = "veh";

  SUBCASE("length-128 record, any stride, exactly one snippet") {
    const auto snippets = extract_snippets(valid_record(128), 128, 64, id, 0.0);
    REQUIRE(snippets.size() == 1);
    CHECK(snippets[0].snippet_index() == 0);
  }

  SUBCASE("length-256 record, stride 64, three snippets at offsets 0/64/128") {
    const Eigen::MatrixXd record = valid_record(256);
    const auto snippets = extract_snippets(record, 128, 64, id, 0.0);
    REQUIRE(snippets.size() == 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(snippets[k].snippet_index() == k);
      // Window k must equal rows [64k, 64k + 128).
      CHECK(snippets[k].series() == record.middleRows(64 * k, 128));
    }
  }

  SUBCASE("length-127 record is too short, empty result") {
    CHECK(extract_snippets(valid_record(127), 128, 64, id, 0.0).empty());
  }

  SUBCASE("non-monotone timestamps are rejected with a diagnostic") {
    Eigen::MatrixXd record = valid_record(128);
    record(64, kTimestamp) = record(63, kTimestamp) - 5.0;
    CHECK_THROWS_WITH_AS(extract_snippets(record, 128, 64, id, 0.0),
                         doctest::Contains("timestamps"), std::invalid_argument);
  }

  SUBCASE("stride covering: windows tile every offset up to the last") {
    const int rows = 128 + 5 * 17;
    const auto snippets = extract_snippets(valid_record(rows), 128, 17, id, 0.0);
    REQUIRE(snippets.size() == 6);
    std::vector<bool> covered(rows, false);
    for (std::size_t k = 0; k < snippets.size(); ++k) {
      for (int i = 0; i < 128; ++i) {
        covered[17 * k + i] = true;
      }
    }
    const int last_offset = 17 * 5;
    for (int i = 0; i < last_offset + 128; ++i) {
      CHECK(covered[i]);
    }
  }
}

TEST_CASE("fit_normalizer basics") {
  SUBCASE("constant channel maps to mean with epsilon std") {
    const auto s = test::make_snippet("a", 0, [](SeriesMatrix& m) {
      m.col(kCurrent).setConstant(5.0);
    });
    const NormStats stats = fit_normalizer({s});
    CHECK(stats.mean(kCurrent) == doctest::Approx(5.0));
    CHECK(stats.std_dev(kCurrent) == doctest::Approx(1e-6));
  }

  SUBCASE("two values 0 and 2: mean 1, population std 1") {
    const auto s = test::make_snippet("a", 0, [](SeriesMatrix& m) {
      m.col(kCurrent).setZero();
      for (int i = 0; i < kSnippetLength; i += 2) {
        m(i, kCurrent) = 2.0;  // half the rows 2, half 0
      }
    });
    const NormStats stats = fit_normalizer({s});
    CHECK(stats.mean(kCurrent) == doctest::Approx(1.0));
    CHECK(stats.std_dev(kCurrent) == doctest::Approx(1.0));
  }

  SUBCASE("empty training set is an error") {
    CHECK_THROWS_WITH_AS(fit_normalizer(std::vector<ChargingSnippet>{}),
                         doctest::Contains("no training data"),
                         std::invalid_argument);
  }

  SUBCASE("normalize-then-fit yields mean 0, std 1") {
    const auto a = test::make_snippet("a", 0);
    const auto b = test::make_snippet("a", 1, [](SeriesMatrix& m) {
      m.col(kCurrent).setConstant(20.0);
      m.col(kSoc).array() += 5.0;
    });
    const NormStats stats = fit_normalizer({a, b});
    const SeriesMatrix na = apply_normalizer(a, stats);
    const SeriesMatrix nb = apply_normalizer(b, stats);
    const ChargingSnippet sa(kUnchecked, "a", 0, 0.0,
                             std::make_shared<SeriesMatrix>(na));
    const ChargingSnippet sb(kUnchecked, "a", 1, 0.0,
                             std::make_shared<SeriesMatrix>(nb));
    const NormStats refit = fit_normalizer({sa, sb});
    for (int c = 0; c < kChannelCount; ++c) {
      CHECK(refit.mean(c) == doctest::Approx(0.0).epsilon(1e-9));
      // Constant channels stay floored at epsilon instead of 1.
      if (refit.std_dev(c) > 1e-5) {
        CHECK(refit.std_dev(c) == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("apply_normalizer is the affine map and inverts cleanly") {
  const auto s = test::make_snippet();
  const NormStats stats = fit_normalizer({s});

  SUBCASE("x = mean maps to 0, x = mean + std maps to 1") {
    SeriesMatrix m = s.series();
    m.row(0) = stats.mean.transpose().matrix();
    m.row(1) = (stats.mean + stats.std_dev).transpose().matrix();
    const SeriesMatrix normalized = apply_normalizer(m, stats);
    for (int c = 0; c < kChannelCount; ++c) {
      CHECK(normalized(0, c) == doctest::Approx(0.0).epsilon(1e-12));
      // Epsilon-floored (constant) channels lose digits in mean + std.
      if (stats.std_dev(c) > 1e-5) {
        CHECK(normalized(1, c) == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  SUBCASE("round trip is identity to relative 1e-9") {
    const SeriesMatrix back =
        invert_normalizer(apply_normalizer(s.series(), stats), stats);
    for (int i = 0; i < kSnippetLength; ++i) {
      for (int c = 0; c < kChannelCount; ++c) {
        const double x = s.series()(i, c);
        CHECK(std::abs(back(i, c) - x) <= 1e-9 * std::max(1.0, std::abs(x)));
      }
    }
  }

  SUBCASE("normalization preserves within-channel ordering") {
    const SeriesMatrix normalized = apply_normalizer(s.series(), stats);
    for (int i = 1; i < kSnippetLength; ++i) {
      CHECK(normalized(i, kSoc) >= normalized(i - 1, kSoc));
      CHECK(normalized(i, kTimestamp) > normalized(i - 1, kTimestamp));
    }
  }
}

TEST_CASE("dataset_stats counts and additivity") {
  SUBCASE("empty input is all zeros") {
    const DatasetStats stats = dataset_stats({});
    CHECK(stats == DatasetStats{});
  }

  SUBCASE("10 vehicles x 20 snippets = 200 snippets") {
    std::vector<Vehicle> fleet;
    for (int v = 0; v < 10; ++v) {
      Vehicle vehicle{"v" + std::to_string(v), v < 3 ? 1 : 0, {}};
      for (int i = 0; i < 20; ++i) {
        vehicle.snippets.push_back(test::make_snippet(
            vehicle.vehicle_id, i, nullptr,
            i % 2 == 0 ? std::optional<double>(30.0) : std::nullopt));
      }
      fleet.push_back(std::move(vehicle));
    }
    const DatasetStats stats = dataset_stats(fleet);
    CHECK(stats.vehicles == 10);
    CHECK(stats.anomalous_vehicles == 3);
    CHECK(stats.snippets == 200);
    CHECK(stats.capacity_labeled == 100);
  }

  SUBCASE("fleet shaped like a real deployment: 217 vehicles, 31 anomalous") {
    // Snippets share one series, so this stays cheap at 629k snippets.
    const auto series = std::make_shared<SeriesMatrix>(test::make_valid_series());
    const std::size_t total_snippets = 629121;
    const std::size_t total_labeled = 349741;
    std::vector<Vehicle> fleet(217);
    std::size_t made = 0, labeled = 0;
    for (std::size_t v = 0; v < fleet.size(); ++v) {
      fleet[v].vehicle_id = "v" + std::to_string(v);
      fleet[v].health_label = v < 31 ? 1 : 0;
      const std::size_t share =
          total_snippets / fleet.size() + (v < total_snippets % fleet.size() ? 1 : 0);
      fleet[v].snippets.reserve(share);
      for (std::size_t i = 0; i < share; ++i) {
        std::optional<double> label;
        if (labeled < total_labeled) {
          label = 35.0;
          ++labeled;
        }
        fleet[v].snippets.emplace_back(kUnchecked, fleet[v].vehicle_id,
                                       static_cast<int>(i), 0.0, series, label);
        ++made;
      }
    }
    REQUIRE(made == total_snippets);
    const DatasetStats stats = dataset_stats(fleet);
    CHECK(stats.vehicles == 217);
    CHECK(stats.anomalous_vehicles == 31);
    CHECK(stats.snippets == 629121);
    CHECK(stats.capacity_labeled == 349741);
  }

  SUBCASE("stats of a disjoint union is the componentwise sum") {
    std::mt19937_64 rng(3);
    const auto random_fleet = [&](const std::string& prefix) {
      std::vector<Vehicle> fleet;
      const int n = 1 + static_cast<int>(rng() % 5);
      for (int v = 0; v < n; ++v) {
        Vehicle vehicle{prefix + std::to_string(v),
                        static_cast<int>(rng() % 2), {}};
        const int count = static_cast<int>(rng() % 4);
        for (int i = 0; i < count; ++i) {
          vehicle.snippets.push_back(test::make_snippet(
              vehicle.vehicle_id, i, nullptr,
              rng() % 2 == 0 ? std::optional<double>(30.0) : std::nullopt));
        }
        fleet.push_back(std::move(vehicle));
      }
      return fleet;
    };
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Vehicle> a = random_fleet("a");
      const std::vector<Vehicle> b = random_fleet("b");
      const DatasetStats sa = dataset_stats(a);
      const DatasetStats sb = dataset_stats(b);
      a.insert(a.end(), b.begin(), b.end());
      CHECK(dataset_stats(a) == sa + sb);
    }
  }
}

TEST_CASE("vehicle validation") {
  Vehicle v{"car", 0, {test::make_snippet("car", 0)}};
  CHECK_NOTHROW(validate_vehicle(v));
  v.snippets.push_back(test::make_snippet("other", 1));
  CHECK_THROWS_AS(validate_vehicle(v), std::invalid_argument);
  v.snippets.pop_back();
  v.health_label = 2;
  CHECK_THROWS_AS(validate_vehicle(v), std::invalid_argument);
}

TEST_CASE("JSON-Lines dataset round trip") {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("evbat_core_io_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  std::vector<Vehicle> fleet;
  for (int v = 0; v < 3; ++v) {
    Vehicle vehicle{"v" + std::to_string(v), v == 1 ? 1 : 0, {}};
    for (int i = 0; i < 4; ++i) {
      vehicle.snippets.push_back(test::make_snippet(
          vehicle.vehicle_id, i,
          [&](SeriesMatrix& m) { m.col(kCurrent).array() += v + 0.25 * i; },
          i % 2 == 0 ? std::optional<double>(30.0 + v) : std::nullopt));
    }
    fleet.push_back(std::move(vehicle));
  }

  write_dataset_jsonl(dir / "dataset.jsonl", fleet);
  write_manifest(dir / "manifest.json", fleet);
  const std::vector<Vehicle> loaded =
      read_dataset(dir / "dataset.jsonl", dir / "manifest.json");

  REQUIRE(loaded.size() == fleet.size());
  for (std::size_t v = 0; v < fleet.size(); ++v) {
    CHECK(loaded[v].vehicle_id == fleet[v].vehicle_id);
    CHECK(loaded[v].health_label == fleet[v].health_label);
    REQUIRE(loaded[v].snippets.size() == fleet[v].snippets.size());
    for (std::size_t i = 0; i < fleet[v].snippets.size(); ++i) {
      const ChargingSnippet& a = fleet[v].snippets[i];
      const ChargingSnippet& b = loaded[v].snippets[i];
      CHECK(b.snippet_index() == a.snippet_index());
      CHECK(b.mileage() == a.mileage());
      CHECK(b.capacity_label() == a.capacity_label());
      CHECK(b.series() == a.series());  // exact, not approximate
    }
  }

  SUBCASE("snippet with unknown vehicle_id is rejected") {
    std::ofstream app(dir / "dataset.jsonl", std::ios::app);
    app << R"({"vehicle_id":"ghost","snippet_index":0,"mileage":0,)"
        << R"("health_label":0,"capacity_label":null,"series":[]})" << "\n";
    app.close();
    CHECK_THROWS(read_dataset(dir / "dataset.jsonl", dir / "manifest.json"));
  }

  fs::remove_all(dir);
}
