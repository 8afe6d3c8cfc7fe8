#include "evbat/eval/protocol.hpp"

#include "evbat/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <stdexcept>

namespace evbat::eval {

namespace {

double f1_at(std::span<const int> labels, std::span<const double> scores,
             double tau) {
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int pred = robust_vehicle_predict(scores[i], tau);
    if (pred == 1 && labels[i] == 1) ++tp;
    if (pred == 1 && labels[i] == 0) ++fp;
    if (pred == 0 && labels[i] == 1) ++fn;
  }
  const long denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

std::vector<double> quantile_grid(std::span<const double> values, int quantiles) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(quantiles));
  const double n = static_cast<double>(sorted.size());
  for (int q = 0; q < quantiles; ++q) {
    const double pos = (quantiles == 1 ? 0.0 : static_cast<double>(q) / (quantiles - 1)) *
                       (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    const double v = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    if (grid.empty() || v > grid.back()) {
      grid.push_back(v);
    }
  }
  return grid;
}

}  // namespace

double select_tau_by_f1(std::span<const int> labels,
                        std::span<const double> vehicle_scores, int quantiles) {
  const std::vector<double> grid = quantile_grid(vehicle_scores, quantiles);
  double best_tau = grid.front();
  double best_f1 = -1.0;
  for (const double tau : grid) {
    const double f1 = f1_at(labels, vehicle_scores, tau);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_tau = tau;
    }
  }
  return best_tau;
}

RobustScoreParams select_hyperparams(
    std::span<const int> validation_labels,
    const std::vector<std::vector<double>>& validation_snippet_scores,
    const HyperparamGrids& grids) {
  if (validation_labels.size() != validation_snippet_scores.size()) {
    throw std::invalid_argument("select_hyperparams: labels/scores mismatch");
  }
  if (grids.h_grid.empty() || grids.tau_quantiles < 1) {
    throw std::invalid_argument("select_hyperparams: empty grids");
  }

  std::vector<double> h_grid = grids.h_grid;
  std::sort(h_grid.begin(), h_grid.end());

  double best_h = h_grid.front();
  double best_auc = -1.0;
  std::vector<double> best_scores;
  std::vector<double> vehicle_scores(validation_labels.size());
  for (const double h : h_grid) {
    for (std::size_t i = 0; i < validation_snippet_scores.size(); ++i) {
      vehicle_scores[i] = robust_vehicle_score(validation_snippet_scores[i], h);
    }
    const double auc = auroc(validation_labels, vehicle_scores);  // checks classes
    if (auc > best_auc) {
      best_auc = auc;
      best_h = h;
      best_scores = vehicle_scores;
    }
  }

  RobustScoreParams params;
  params.h_percentile = best_h;
  params.tau = select_tau_by_f1(validation_labels, best_scores, grids.tau_quantiles);
  return params;
}

namespace {

RoundResult run_round(const std::map<std::string, const Vehicle*>& by_id,
                      const FoldPlan& plan, int round,
                      const BackendFactory& make_backend, std::uint64_t seed,
                      const HyperparamGrids& grids) {
  const FoldPlan::RoundRoles roles = plan.roles(round);
  const auto resolve = [&](const std::vector<std::string>& ids) {
    std::vector<const Vehicle*> out;
    out.reserve(ids.size());
    for (const std::string& id : ids) {
      out.push_back(by_id.at(id));
    }
    return out;
  };

  const std::vector<const Vehicle*> train = resolve(roles.train_normal);
  const std::vector<const Vehicle*> val_anomalous = resolve(roles.validation_anomalous);
  const std::vector<const Vehicle*> test = resolve(roles.test);

  std::unique_ptr<detect::DetectorBackend> backend = make_backend();
  backend->train(train, derive_seed(seed, "detect-round",
                                    static_cast<std::uint64_t>(round)));

  // Validation pool: the round's anomalous fold alongside the training
  // normals.
  std::vector<const Vehicle*> validation = train;
  validation.insert(validation.end(), val_anomalous.begin(), val_anomalous.end());
  std::vector<int> val_labels;
  val_labels.reserve(validation.size());
  for (const Vehicle* v : validation) {
    val_labels.push_back(v->health_label);
  }

  RoundResult result;
  result.round = round;

  const bool direct = backend->scores_vehicles_directly();
  if (direct) {
    std::vector<double> val_scores;
    val_scores.reserve(validation.size());
    for (const Vehicle* v : validation) {
      val_scores.push_back(backend->direct_vehicle_score(*v));
    }
    result.h_percentile = 100.0;  // no snippet-level aggregation
    result.tau = select_tau_by_f1(val_labels, val_scores, grids.tau_quantiles);
  } else {
    std::vector<std::vector<double>> val_snippet_scores;
    val_snippet_scores.reserve(validation.size());
    for (const Vehicle* v : validation) {
      std::vector<double> scores;
      for (const detect::SnippetScore& s : backend->score_vehicle(*v)) {
        scores.push_back(s.score);
      }
      val_snippet_scores.push_back(std::move(scores));
    }
    const RobustScoreParams params =
        select_hyperparams(val_labels, val_snippet_scores, grids);
    result.h_percentile = params.h_percentile;
    result.tau = params.tau;
  }

  std::vector<int> test_labels;
  std::vector<double> test_scores;
  test_labels.reserve(test.size());
  test_scores.reserve(test.size());
  for (const Vehicle* v : test) {
    double vehicle_score;
    if (direct) {
      vehicle_score = backend->direct_vehicle_score(*v);
    } else {
      std::vector<double> scores;
      for (const detect::SnippetScore& s : backend->score_vehicle(*v)) {
        scores.push_back(s.score);
      }
      vehicle_score = robust_vehicle_score(scores, result.h_percentile);
    }
    test_labels.push_back(v->health_label);
    test_scores.push_back(vehicle_score);
    result.test_vehicle_scores.emplace_back(v->vehicle_id, vehicle_score);
  }

  result.auroc = auroc(test_labels, test_scores);
  result.roc = roc_curve(test_labels, test_scores);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const int pred = robust_vehicle_predict(test_scores[i], result.tau);
    if (pred == 1 && test_labels[i] == 1) ++result.confusion.tp;
    if (pred == 1 && test_labels[i] == 0) ++result.confusion.fp;
    if (pred == 0 && test_labels[i] == 0) ++result.confusion.tn;
    if (pred == 0 && test_labels[i] == 1) ++result.confusion.fn;
  }
  return result;
}

}  // namespace

DetectionReport run_detection(std::span<const Vehicle> fleet, const FoldPlan& plan,
                              const BackendFactory& make_backend,
                              std::uint64_t seed, const HyperparamGrids& grids,
                              bool parallel_rounds) {
  std::map<std::string, const Vehicle*> by_id;
  for (const Vehicle& v : fleet) {
    by_id[v.vehicle_id] = &v;
  }

  DetectionReport report;
  report.seed = seed;
  report.rounds.resize(plan.k);

  if (parallel_rounds) {
    std::vector<std::future<RoundResult>> futures;
    futures.reserve(plan.k);
    for (int r = 0; r < plan.k; ++r) {
      futures.push_back(std::async(std::launch::async, [&, r] {
        return run_round(by_id, plan, r, make_backend, seed, grids);
      }));
    }
    for (int r = 0; r < plan.k; ++r) {
      report.rounds[r] = futures[r].get();
    }
  } else {
    for (int r = 0; r < plan.k; ++r) {
      report.rounds[r] = run_round(by_id, plan, r, make_backend, seed, grids);
    }
  }

  {
    std::unique_ptr<detect::DetectorBackend> probe = make_backend();
    report.algorithm = probe->name();
  }

  double sum = 0.0;
  for (const RoundResult& r : report.rounds) {
    sum += r.auroc;
  }
  report.auroc_mean = sum / report.rounds.size();
  double sq = 0.0;
  for (const RoundResult& r : report.rounds) {
    sq += (r.auroc - report.auroc_mean) * (r.auroc - report.auroc_mean);
  }
  report.auroc_std = std::sqrt(sq / report.rounds.size());

  std::vector<std::vector<RocPoint>> curves;
  curves.reserve(report.rounds.size());
  for (const RoundResult& r : report.rounds) {
    curves.push_back(r.roc);
  }
  report.averaged_roc = average_roc(curves);
  return report;
}

void write_detection_report(const std::filesystem::path& dir,
                            const DetectionReport& report) {
  std::filesystem::create_directories(dir);

  nlohmann::ordered_json doc;
  doc["task"] = "detection";
  doc["algorithm"] = report.algorithm;
  doc["seed"] = report.seed;
  doc["metric"] = "auroc";
  doc["auroc_mean"] = report.auroc_mean;
  doc["auroc_std"] = report.auroc_std;
  nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
  for (const RoundResult& r : report.rounds) {
    nlohmann::ordered_json jr;
    jr["round"] = r.round;
    jr["auroc"] = r.auroc;
    jr["h"] = r.h_percentile;
    jr["tau"] = r.tau;
    jr["confusion"] = {{"tp", r.confusion.tp},
                       {"fp", r.confusion.fp},
                       {"tn", r.confusion.tn},
                       {"fn", r.confusion.fn}};
    rounds.push_back(std::move(jr));
  }
  doc["rounds"] = std::move(rounds);

  std::ofstream out(dir / "report.json");
  if (!out) {
    throw std::runtime_error("cannot write report under " + dir.string());
  }
  out << doc.dump(2) << '\n';

  for (const RoundResult& r : report.rounds) {
    std::ofstream roc(dir / ("roc_round_" + std::to_string(r.round) + ".csv"));
    roc << "fpr,tpr\n";
    for (const RocPoint& p : r.roc) {
      roc << p.fpr << ',' << p.tpr << '\n';
    }
  }
  std::ofstream avg(dir / "roc_averaged.csv");
  avg << "fpr,tpr_mean,tpr_std\n";
  for (std::size_t g = 0; g < report.averaged_roc.fpr_grid.size(); ++g) {
    avg << report.averaged_roc.fpr_grid[g] << ',' << report.averaged_roc.tpr_mean[g]
        << ',' << report.averaged_roc.tpr_std[g] << '\n';
  }
}

void write_scores_csv(const std::filesystem::path& path,
                      std::span<const detect::SnippetScore> scores) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write scores: " + path.string());
  }
  out << "vehicle_id,snippet_index,score\n";
  for (const detect::SnippetScore& s : scores) {
    out << s.vehicle_id << ',' << s.snippet_index << ',' << s.score << '\n';
  }
}

}  // namespace evbat::eval
