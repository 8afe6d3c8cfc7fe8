// evbat: synthetic EV charging fleets, anomaly detection and capacity
// estimation from one reproducible seed.

#include "evbat/anonymize.hpp"
#include "evbat/batching.hpp"
#include "evbat/capacity/regressor.hpp"
#include "evbat/config_json.hpp"
#include "evbat/dataset_io.hpp"
#include "evbat/detect/autoencoder.hpp"
#include "evbat/detect/dyad.hpp"
#include "evbat/detect/variance.hpp"
#include "evbat/eval/folds.hpp"
#include "evbat/eval/protocol.hpp"
#include "evbat/fleet_gen.hpp"
#include "evbat/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

json load_config_file(const std::string& path) {
  if (path.empty()) {
    return json::object();
  }
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config: " + path);
  }
  return json::parse(in);
}

void write_resolved_config(const fs::path& out_dir, const json& resolved) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "resolved_config.json");
  if (!out) {
    throw std::runtime_error("cannot write resolved config under " +
                             out_dir.string());
  }
  out << resolved.dump(2) << '\n';
}

std::vector<evbat::Vehicle> load_fleet(const std::string& data_path) {
  const fs::path jsonl(data_path);
  const fs::path manifest = jsonl.parent_path() / "manifest.json";
  return evbat::read_dataset(jsonl, manifest);
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int folds = 5;
};

int cmd_generate(const CommonArgs& common, std::optional<bool> anonymize_flag) {
  const json file = load_config_file(common.config_path);
  evbat::synth::GenConfig gen;
  if (file.contains("generate")) {
    file.at("generate").get_to(gen);
  }
  if (file.contains("seed")) {
    gen.seed = file.at("seed").get<std::uint64_t>();
  }
  if (common.seed) {
    gen.seed = *common.seed;
  }
  if (anonymize_flag) {
    gen.anonymize = *anonymize_flag;
  }

  std::vector<evbat::Vehicle> fleet = evbat::synth::generate_fleet(gen);
  if (gen.anonymize) {
    fleet = evbat::synth::anonymize(std::move(fleet), gen.seed);
  }

  const fs::path out(common.out_dir);
  evbat::write_dataset_jsonl(out / "dataset.jsonl", fleet);
  evbat::write_manifest(out / "manifest.json", fleet);

  json resolved;
  resolved["command"] = "generate";
  resolved["seed"] = gen.seed;
  resolved["generate"] = gen;
  write_resolved_config(out, resolved);

  const evbat::DatasetStats stats = evbat::dataset_stats(fleet);
  std::printf("vehicles: %zu (anomalous %zu), snippets: %zu, capacity labels: %zu\n",
              stats.vehicles, stats.anomalous_vehicles, stats.snippets,
              stats.capacity_labeled);
  std::printf("wrote %s and %s\n", (out / "dataset.jsonl").c_str(),
              (out / "manifest.json").c_str());
  return 0;
}

int cmd_detect(const CommonArgs& common, const std::string& data_path,
               const std::string& detector) {
  const json file = load_config_file(common.config_path);
  const json section = file.value("detect", json::object());

  std::uint64_t seed = file.value("seed", std::uint64_t{42});
  if (common.seed) {
    seed = *common.seed;
  }
  evbat::eval::HyperparamGrids grids;
  if (section.contains("grids")) {
    section.at("grids").get_to(grids);
  }
  evbat::detect::DyadConfig dyad_config;
  if (section.contains("dyad")) {
    section.at("dyad").get_to(dyad_config);
  }
  evbat::detect::AeConfig ae_config;
  if (section.contains("ae")) {
    section.at("ae").get_to(ae_config);
  }
  const int variance_channel =
      section.value("variance_channel", int{evbat::kAvgCellVoltage});

  const std::vector<evbat::Vehicle> fleet = load_fleet(data_path);
  const evbat::eval::FoldPlan plan =
      evbat::eval::build_folds(fleet, common.folds, seed);

  evbat::eval::BackendFactory factory;
  if (detector == "dyad") {
    factory = [&] { return std::make_unique<evbat::detect::DyadModel>(dyad_config); };
  } else if (detector == "ae") {
    factory = [&] { return std::make_unique<evbat::detect::AeModel>(ae_config); };
  } else if (detector == "variance") {
    factory = [&] {
      return std::make_unique<evbat::detect::VarianceBackend>(variance_channel);
    };
  } else {
    std::fprintf(stderr, "unknown detector: %s\n", detector.c_str());
    return kExitUsage;
  }

  const evbat::eval::DetectionReport report =
      evbat::eval::run_detection(fleet, plan, factory, seed, grids);

  const fs::path out(common.out_dir);
  evbat::eval::write_detection_report(out, report);

  json resolved;
  resolved["command"] = "detect";
  resolved["seed"] = seed;
  resolved["data"] = data_path;
  resolved["detector"] = detector;
  resolved["folds"] = common.folds;
  resolved["detect"] = {{"grids", grids},
                        {"dyad", dyad_config},
                        {"ae", ae_config},
                        {"variance_channel", variance_channel}};
  write_resolved_config(out, resolved);

  std::printf("%s test AUROC: %.4f +/- %.4f over %d rounds\n",
              report.algorithm.c_str(), report.auroc_mean, report.auroc_std,
              static_cast<int>(report.rounds.size()));
  for (const auto& r : report.rounds) {
    std::printf("  round %d: auroc %.4f (h=%g, tau=%.6g)\n", r.round, r.auroc,
                r.h_percentile, r.tau);
  }
  return 0;
}

int cmd_capacity(const CommonArgs& common, const std::string& data_path,
                 const std::string& regressor) {
  const json file = load_config_file(common.config_path);
  const json section = file.value("capacity", json::object());

  std::uint64_t seed = file.value("seed", std::uint64_t{42});
  if (common.seed) {
    seed = *common.seed;
  }
  evbat::capacity::RegressorConfig config;
  if (section.contains("regressor")) {
    section.at("regressor").get_to(config);
  }
  if (!regressor.empty()) {
    config.kind = evbat::capacity::parse_regressor_kind(regressor);
  }

  const std::vector<evbat::Vehicle> fleet = load_fleet(data_path);
  std::vector<evbat::capacity::CapacityPrediction> predictions;
  const evbat::capacity::CapacityReport report = evbat::capacity::evaluate_capacity(
      fleet, config, common.folds, seed, &predictions);

  const fs::path out(common.out_dir);
  evbat::capacity::write_capacity_report(out, report, predictions);

  json resolved;
  resolved["command"] = "capacity";
  resolved["seed"] = seed;
  resolved["data"] = data_path;
  resolved["folds"] = common.folds;
  resolved["capacity"] = {{"regressor", config}};
  write_resolved_config(out, resolved);

  std::printf("%s test RMSE: %.4f +/- %.4f (mean-predictor %.4f)\n",
              report.algorithm.c_str(), report.rmse_mean, report.rmse_std,
              report.baseline_rmse_mean);
  return 0;
}

struct ReportRow {
  std::string algorithm;
  std::string task;
  std::string metric;
  double mean = 0.0;
  double std_dev = 0.0;
};

std::string format_mean_std(const ReportRow& row) {
  char buf[64];
  if (row.metric == "auroc") {
    // Percent with one decimal, the usual table style.
    std::snprintf(buf, sizeof(buf), "%.1f±%.1f", 100.0 * row.mean,
                  100.0 * row.std_dev);
  } else {
    std::snprintf(buf, sizeof(buf), "%.2f±%.2f", row.mean, row.std_dev);
  }
  return buf;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
  std::vector<ReportRow> rows;
  for (const std::string& dir : run_dirs) {
    const fs::path path = fs::path(dir) / "report.json";
    std::ifstream in(path);
    if (!in) {
      throw std::runtime_error("missing report: " + path.string());
    }
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("corrupt report " + path.string() + ": " + e.what());
    }
    ReportRow row;
    row.algorithm = doc.at("algorithm").get<std::string>();
    row.task = doc.at("task").get<std::string>();
    row.metric = doc.at("metric").get<std::string>();
    row.mean = doc.at(row.metric + "_mean").get<double>();
    row.std_dev = doc.at(row.metric + "_std").get<double>();
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.task, a.algorithm) < std::tie(b.task, b.algorithm);
  });

  const fs::path out(out_dir);
  fs::create_directories(out);
  std::ofstream csv(out / "table.csv");
  csv << "algorithm,task,metric,mean,std,formatted\n";
  std::ofstream txt(out / "table.txt");
  for (const ReportRow& row : rows) {
    const std::string formatted = format_mean_std(row);
    csv << row.algorithm << ',' << row.task << ',' << row.metric << ','
        << row.mean << ',' << row.std_dev << ',' << formatted << '\n';
    char line[128];
    std::snprintf(line, sizeof(line), "%-14s %-10s %-7s %s", row.algorithm.c_str(),
                  row.task.c_str(), row.metric.c_str(), formatted.c_str());
    txt << line << '\n';
    std::printf("%s\n", line);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EV battery charging analytics: synthetic fleets, anomaly "
               "detection, capacity estimation"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string data_path;
  std::string detector = "dyad";
  std::string regressor;
  std::optional<bool> anonymize_flag;
  std::vector<std::string> run_dirs;

  const auto add_common = [&](CLI::App* sub, bool with_folds = true) {
    sub->add_option("--config", common.config_path, "JSON config file");
    sub->add_option("--seed", common.seed, "master seed (overrides config)");
    sub->add_option("--out", common.out_dir, "output directory");
    if (with_folds) {
      sub->add_option("--folds", common.folds, "cross-validation folds")
          ->default_val(5);
    }
  };

  CLI::App* generate = app.add_subcommand("generate", "generate a synthetic fleet");
  add_common(generate, false);
  generate->add_option("--anonymize", anonymize_flag,
                       "apply the anonymization pass (true/false)");

  CLI::App* detect = app.add_subcommand("detect", "run the detection protocol");
  add_common(detect);
  detect->add_option("--data", data_path, "dataset.jsonl path")->required();
  detect->add_option("--detector", detector, "dyad|ae|variance")
      ->check(CLI::IsMember({"dyad", "ae", "variance"}));

  CLI::App* capacity = app.add_subcommand("capacity", "run capacity regression");
  add_common(capacity);
  capacity->add_option("--data", data_path, "dataset.jsonl path")->required();
  capacity->add_option("--regressor", regressor, "recurrent|feedforward|ridge")
      ->check(CLI::IsMember({"recurrent", "feedforward", "ridge"}));

  CLI::App* report = app.add_subcommand("report", "merge run reports into a table");
  report->add_option("runs", run_dirs, "run directories")->required();
  report->add_option("--out", common.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (generate->parsed()) {
      return cmd_generate(common, anonymize_flag);
    }
    if (detect->parsed()) {
      return cmd_detect(common, data_path, detector);
    }
    if (capacity->parsed()) {
      return cmd_capacity(common, data_path, regressor);
    }
    if (report->parsed()) {
      return cmd_report(run_dirs, common.out_dir);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
