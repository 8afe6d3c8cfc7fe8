#include "evbat/capacity/regressor.hpp"

#include "evbat/batching.hpp"
#include "evbat/eval/folds.hpp"
#include "evbat/eval/metrics.hpp"
#include "evbat/nn/adam.hpp"
#include "evbat/nn/ops.hpp"
#include "evbat/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <numeric>
#include <stdexcept>

namespace evbat::capacity {

const char* regressor_kind_name(RegressorKind kind) {
  switch (kind) {
    case RegressorKind::kRecurrent: return "recurrent";
    case RegressorKind::kFeedforward: return "feedforward";
    case RegressorKind::kRidge: return "ridge";
  }
  return "unknown";
}

void RegressorConfig::validate() const {
  if (modeled_channels.empty()) {
    throw std::invalid_argument("RegressorConfig: modeled channels empty");
  }
  if (hidden_size < 1 || epochs < 1 || batch_size < 1) {
    throw std::invalid_argument("RegressorConfig: invalid sizes");
  }
  if (ridge_lambda < 0.0) {
    throw std::invalid_argument("RegressorConfig: ridge lambda must be >= 0");
  }
}

Eigen::VectorXd summary_features(const ChargingSnippet& snippet,
                                 std::span<const int> channels,
                                 const NormStats& stats) {
  const auto n_ch = static_cast<Eigen::Index>(channels.size());
  Eigen::VectorXd features(5 * n_ch);
  const SeriesMatrix& series = snippet.series();
  for (Eigen::Index c = 0; c < n_ch; ++c) {
    const int ch = channels[c];
    const auto column =
        ((series.col(ch).array() - stats.mean(ch)) / stats.std_dev(ch)).eval();
    const double mean = column.mean();
    features(5 * c + 0) = mean;
    features(5 * c + 1) = std::sqrt((column - mean).square().mean());
    features(5 * c + 2) = column.minCoeff();
    features(5 * c + 3) = column.maxCoeff();
    features(5 * c + 4) = column(kSnippetLength - 1);
  }
  return features;
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            double lambda, double* normal_eq_residual) {
  if (x.rows() != y.size() || x.rows() == 0) {
    throw std::invalid_argument("ridge_solve: shape mismatch or empty system");
  }
  const Eigen::MatrixXd gram =
      x.transpose() * x +
      lambda * Eigen::MatrixXd::Identity(x.cols(), x.cols());
  const Eigen::VectorXd rhs = x.transpose() * y;
  const Eigen::VectorXd beta = gram.ldlt().solve(rhs);
  if (normal_eq_residual != nullptr) {
    *normal_eq_residual = (gram * beta - rhs).norm();
  }
  return beta;
}

namespace {

constexpr double kStdFloor = 1e-12;

void check_labeled(std::span<const ChargingSnippet* const> snippets) {
  if (snippets.empty()) {
    throw std::invalid_argument("train_regressor: no labeled snippets");
  }
  for (const ChargingSnippet* s : snippets) {
    if (!s->capacity_label().has_value()) {
      throw std::invalid_argument("train_regressor: unlabeled snippet " +
                                  s->vehicle_id() + "/" +
                                  std::to_string(s->snippet_index()));
    }
  }
}

}  // namespace

CapacityModel CapacityModel::train(std::span<const ChargingSnippet* const> labeled,
                                   const RegressorConfig& config,
                                   std::uint64_t seed) {
  config.validate();
  check_labeled(labeled);

  CapacityModel model;
  model.config_ = config;
  model.stats_ = fit_normalizer(labeled);

  const std::size_t n = labeled.size();
  Eigen::VectorXd targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    targets(static_cast<Eigen::Index>(i)) = *labeled[i]->capacity_label();
  }
  model.target_mean_ = targets.mean();
  model.target_std_ = std::max(
      std::sqrt((targets.array() - model.target_mean_).square().mean()),
      kNormEpsilon);
  const Eigen::VectorXd targets_std =
      (targets.array() - model.target_mean_) / model.target_std_;

  if (config.kind == RegressorKind::kRidge) {
    model.is_ridge_ = true;
    const auto n_features =
        static_cast<Eigen::Index>(5 * config.modeled_channels.size());
    Eigen::MatrixXd features(n, n_features);
    for (std::size_t i = 0; i < n; ++i) {
      features.row(static_cast<Eigen::Index>(i)) =
          summary_features(*labeled[i], config.modeled_channels, model.stats_)
              .transpose();
    }
    model.feature_mean_ = features.colwise().mean().array();
    Eigen::ArrayXd var =
        (features.rowwise() - model.feature_mean_.matrix().transpose())
            .array()
            .square()
            .colwise()
            .mean();
    model.feature_std_ = var.sqrt().max(kStdFloor);
    const Eigen::MatrixXd x_std =
        ((features.rowwise() - model.feature_mean_.matrix().transpose()).array()
             .rowwise() /
         model.feature_std_.transpose())
            .matrix();
    model.ridge_beta_ =
        ridge_solve(x_std, targets_std, config.ridge_lambda, &model.ridge_residual_);
    return model;
  }

  // Shared training loop for the two gradient-trained kinds.
  std::mt19937_64 init_rng = make_engine(seed, "init");
  const auto n_ch = static_cast<int>(config.modeled_channels.size());
  nn::TensorRefs params;
  if (config.kind == RegressorKind::kRecurrent) {
    model.gru_ = std::make_unique<nn::Gru>("capreg.gru", n_ch, config.hidden_size,
                                           init_rng);
    model.dense_.push_back(std::make_unique<nn::Dense>(
        "capreg.fc0", config.hidden_size, config.hidden_size,
        nn::Activation::kRelu, init_rng));
    model.dense_.push_back(std::make_unique<nn::Dense>(
        "capreg.fc1", config.hidden_size, 1, nn::Activation::kIdentity, init_rng));
    for (nn::Tensor* t : model.gru_->params()) params.push_back(t);
  } else {
    const int flat = kSnippetLength * n_ch;
    model.dense_.push_back(std::make_unique<nn::Dense>(
        "capreg.fc0", flat, config.hidden_size, nn::Activation::kRelu, init_rng));
    model.dense_.push_back(std::make_unique<nn::Dense>(
        "capreg.fc1", config.hidden_size, config.hidden_size,
        nn::Activation::kRelu, init_rng));
    model.dense_.push_back(std::make_unique<nn::Dense>(
        "capreg.fc2", config.hidden_size, 1, nn::Activation::kIdentity, init_rng));
  }
  for (auto& d : model.dense_) {
    for (nn::Tensor* t : d->params()) params.push_back(t);
  }

  nn::AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  adam.clip_global_norm = config.clip_global_norm;
  nn::AdamOptimizer optimizer(params, adam);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  std::vector<const ChargingSnippet*> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng = make_engine(seed, "shuffle", epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t end = std::min(n, start + batch_size);
      batch.clear();
      Eigen::MatrixXd y_true(1, static_cast<Eigen::Index>(end - start));
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(labeled[order[i]]);
        y_true(0, static_cast<Eigen::Index>(i - start)) =
            targets_std(static_cast<Eigen::Index>(order[i]));
      }

      optimizer.zero_grads();
      Eigen::MatrixXd y;
      nn::Gru::Cache cache;
      if (config.kind == RegressorKind::kRecurrent) {
        const std::vector<Eigen::MatrixXd> seq =
            sequence_batch(std::span<const ChargingSnippet* const>(batch),
                           config.modeled_channels, model.stats_);
        Eigen::MatrixXd h = model.gru_->forward(seq, cache);
        for (auto& d : model.dense_) {
          h = d->forward(h);
        }
        y = h;
        loss_sum += nn::mse(y, y_true) * static_cast<double>(batch.size());
        Eigen::MatrixXd grad = nn::mse_grad(y, y_true);
        for (std::size_t i = model.dense_.size(); i-- > 0;) {
          grad = model.dense_[i]->backward(grad);
        }
        model.gru_->backward_from_last(cache, grad);
      } else {
        Eigen::MatrixXd h =
            flattened_batch(std::span<const ChargingSnippet* const>(batch),
                            config.modeled_channels, model.stats_);
        for (auto& d : model.dense_) {
          h = d->forward(h);
        }
        y = h;
        loss_sum += nn::mse(y, y_true) * static_cast<double>(batch.size());
        Eigen::MatrixXd grad = nn::mse_grad(y, y_true);
        for (std::size_t i = model.dense_.size(); i-- > 0;) {
          grad = model.dense_[i]->backward(grad);
        }
      }
      optimizer.step();
    }
    model.epoch_losses_.push_back(loss_sum / static_cast<double>(n));
  }
  return model;
}

std::vector<double> CapacityModel::predict(
    std::span<const ChargingSnippet* const> snippets) const {
  std::vector<double> out;
  out.reserve(snippets.size());

  if (is_ridge_) {
    for (const ChargingSnippet* s : snippets) {
      const Eigen::VectorXd f =
          summary_features(*s, config_.modeled_channels, stats_);
      const Eigen::VectorXd f_std =
          ((f.array() - feature_mean_) / feature_std_).matrix();
      out.push_back(f_std.dot(ridge_beta_) * target_std_ + target_mean_);
    }
    return out;
  }

  const auto batch_size = static_cast<std::size_t>(config_.batch_size);
  std::vector<const ChargingSnippet*> batch;
  for (std::size_t start = 0; start < snippets.size(); start += batch_size) {
    const std::size_t end = std::min(snippets.size(), start + batch_size);
    batch.assign(snippets.begin() + start, snippets.begin() + end);
    Eigen::MatrixXd h;
    if (config_.kind == RegressorKind::kRecurrent) {
      const std::vector<Eigen::MatrixXd> seq =
          sequence_batch(std::span<const ChargingSnippet* const>(batch),
                         config_.modeled_channels, stats_);
      nn::Gru::Cache cache;
      h = gru_->forward(seq, cache);
    } else {
      h = flattened_batch(std::span<const ChargingSnippet* const>(batch),
                          config_.modeled_channels, stats_);
    }
    for (const auto& d : dense_) {
      h = nn::dense_infer(*d, h);
    }
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      out.push_back(h(0, j) * target_std_ + target_mean_);
    }
  }
  return out;
}

double CapacityModel::predict(const ChargingSnippet& snippet) const {
  const ChargingSnippet* ptr = &snippet;
  return predict(std::span<const ChargingSnippet* const>(&ptr, 1)).front();
}

const Eigen::VectorXd& CapacityModel::ridge_coefficients() const {
  if (!is_ridge_) {
    throw std::logic_error("ridge_coefficients: not a ridge model");
  }
  return ridge_beta_;
}

double CapacityModel::ridge_intercept() const {
  if (!is_ridge_) {
    throw std::logic_error("ridge_intercept: not a ridge model");
  }
  return target_mean_;
}

double CapacityModel::normal_equation_residual() const {
  if (!is_ridge_) {
    throw std::logic_error("normal_equation_residual: not a ridge model");
  }
  return ridge_residual_;
}

namespace {

std::vector<const ChargingSnippet*> labeled_snippets_of(
    const std::vector<const Vehicle*>& vehicles) {
  std::vector<const ChargingSnippet*> out;
  for (const Vehicle* v : vehicles) {
    for (const ChargingSnippet& s : v->snippets) {
      if (s.capacity_label().has_value()) {
        out.push_back(&s);
      }
    }
  }
  return out;
}

struct RoundOutput {
  CapacityRound round;
  std::vector<CapacityPrediction> predictions;
};

RoundOutput run_capacity_round(
    const std::vector<std::vector<std::string>>& folds,
    const std::map<std::string, const Vehicle*>& by_id, int round,
    const RegressorConfig& config, std::uint64_t seed) {
  std::vector<const Vehicle*> train_vehicles, test_vehicles;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (const std::string& id : folds[f]) {
      (static_cast<int>(f) == round ? test_vehicles : train_vehicles)
          .push_back(by_id.at(id));
    }
  }
  const std::vector<const ChargingSnippet*> train = labeled_snippets_of(train_vehicles);
  const std::vector<const ChargingSnippet*> test = labeled_snippets_of(test_vehicles);
  if (train.empty()) {
    throw std::runtime_error("evaluate_capacity: round " + std::to_string(round) +
                             " has no labeled training snippets");
  }
  if (test.empty()) {
    throw std::runtime_error("evaluate_capacity: round " + std::to_string(round) +
                             " has no labeled test snippets");
  }

  const CapacityModel model =
      CapacityModel::train(train, config,
                           derive_seed(seed, "capacity-round",
                                       static_cast<std::uint64_t>(round)));

  const std::vector<double> predicted = model.predict(test);
  std::vector<double> truth(test.size());
  double train_mean = 0.0;
  for (const ChargingSnippet* s : train) {
    train_mean += *s->capacity_label();
  }
  train_mean /= static_cast<double>(train.size());

  RoundOutput out;
  out.round.round = round;
  out.round.test_count = test.size();
  std::vector<double> baseline(test.size(), train_mean);
  for (std::size_t i = 0; i < test.size(); ++i) {
    truth[i] = *test[i]->capacity_label();
    out.predictions.push_back(CapacityPrediction{test[i]->vehicle_id(),
                                                 test[i]->snippet_index(),
                                                 predicted[i], truth[i]});
  }
  out.round.rmse = eval::rmse(predicted, truth);
  out.round.mean_predictor_rmse = eval::rmse(baseline, truth);
  return out;
}

}  // namespace

CapacityReport evaluate_capacity(std::span<const Vehicle> fleet,
                                 const RegressorConfig& config, int k,
                                 std::uint64_t seed,
                                 std::vector<CapacityPrediction>* predictions,
                                 bool parallel_rounds) {
  config.validate();
  if (static_cast<int>(fleet.size()) < k) {
    throw std::invalid_argument("evaluate_capacity: fewer vehicles than folds");
  }
  std::vector<std::string> ids;
  std::map<std::string, const Vehicle*> by_id;
  for (const Vehicle& v : fleet) {
    ids.push_back(v.vehicle_id);
    by_id[v.vehicle_id] = &v;
  }
  const std::vector<std::vector<std::string>> folds =
      eval::k_fold_split(std::move(ids), k, derive_seed(seed, "capacity-folds"));

  std::vector<RoundOutput> outputs(k);
  if (parallel_rounds) {
    std::vector<std::future<RoundOutput>> futures;
    for (int r = 0; r < k; ++r) {
      futures.push_back(std::async(std::launch::async, [&, r] {
        return run_capacity_round(folds, by_id, r, config, seed);
      }));
    }
    for (int r = 0; r < k; ++r) {
      outputs[r] = futures[r].get();
    }
  } else {
    for (int r = 0; r < k; ++r) {
      outputs[r] = run_capacity_round(folds, by_id, r, config, seed);
    }
  }

  CapacityReport report;
  report.algorithm = regressor_kind_name(config.kind);
  report.seed = seed;
  for (RoundOutput& out : outputs) {
    report.rounds.push_back(out.round);
    if (predictions != nullptr) {
      predictions->insert(predictions->end(), out.predictions.begin(),
                          out.predictions.end());
    }
  }

  const auto mean_std = [](const std::vector<CapacityRound>& rounds, auto getter) {
    double sum = 0.0;
    for (const CapacityRound& r : rounds) sum += getter(r);
    const double mean = sum / rounds.size();
    double sq = 0.0;
    for (const CapacityRound& r : rounds) {
      sq += (getter(r) - mean) * (getter(r) - mean);
    }
    return std::pair<double, double>(mean, std::sqrt(sq / rounds.size()));
  };
  std::tie(report.rmse_mean, report.rmse_std) =
      mean_std(report.rounds, [](const CapacityRound& r) { return r.rmse; });
  std::tie(report.baseline_rmse_mean, report.baseline_rmse_std) = mean_std(
      report.rounds, [](const CapacityRound& r) { return r.mean_predictor_rmse; });
  return report;
}

void write_capacity_report(const std::filesystem::path& dir,
                           const CapacityReport& report,
                           std::span<const CapacityPrediction> predictions) {
  std::filesystem::create_directories(dir);

  nlohmann::ordered_json doc;
  doc["task"] = "capacity";
  doc["algorithm"] = report.algorithm;
  doc["seed"] = report.seed;
  doc["metric"] = "rmse";
  doc["rmse_mean"] = report.rmse_mean;
  doc["rmse_std"] = report.rmse_std;
  doc["baseline_rmse_mean"] = report.baseline_rmse_mean;
  doc["baseline_rmse_std"] = report.baseline_rmse_std;
  nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
  for (const CapacityRound& r : report.rounds) {
    rounds.push_back({{"round", r.round},
                      {"rmse", r.rmse},
                      {"mean_predictor_rmse", r.mean_predictor_rmse},
                      {"test_count", r.test_count}});
  }
  doc["rounds"] = std::move(rounds);

  std::ofstream out(dir / "report.json");
  if (!out) {
    throw std::runtime_error("cannot write report under " + dir.string());
  }
  out << doc.dump(2) << '\n';

  std::ofstream csv(dir / "predictions.csv");
  csv << "vehicle_id,snippet_index,predicted_capacity,true_capacity\n";
  for (const CapacityPrediction& p : predictions) {
    csv << p.vehicle_id << ',' << p.snippet_index << ',' << p.predicted << ','
        << p.truth << '\n';
  }
}

}  // namespace evbat::capacity
