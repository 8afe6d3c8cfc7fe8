#include "evbat/config_json.hpp"

namespace evbat::synth {

FaultKind parse_fault_kind(const std::string& name) {
  if (name == "resistance_drift") return FaultKind::kResistanceDrift;
  if (name == "voltage_fluctuation") return FaultKind::kVoltageFluctuation;
  if (name == "accelerated_fade") return FaultKind::kAcceleratedFade;
  if (name == "cell_imbalance") return FaultKind::kCellImbalance;
  throw std::invalid_argument("unknown fault kind: " + name);
}

void to_json(nlohmann::json& j, const GenConfig& c) {
  j = nlohmann::json{{"seed", c.seed},
                     {"n_normal", c.n_normal},
                     {"n_anomalous", c.n_anomalous},
                     {"snippets_per_vehicle", c.snippets_per_vehicle},
                     {"records_per_vehicle", c.records_per_vehicle},
                     {"stride", c.stride},
                     {"dt_s", c.dt_s},
                     {"truncation_probability", c.truncation_probability},
                     {"fault_severity", c.fault_severity},
                     {"transient_fraction", c.transient_fraction},
                     {"capacity_band_low", c.capacity_band_low},
                     {"capacity_band_high", c.capacity_band_high},
                     {"base_fade_per_record", c.base_fade_per_record},
                     {"fade_per_manifest", c.fade_per_manifest},
                     {"noise_std", c.noise_std},
                     {"anonymize", c.anonymize}};
  nlohmann::json kinds = nlohmann::json::array();
  for (const FaultKind k : c.fault_kinds) {
    kinds.push_back(fault_kind_name(k));
  }
  j["fault_kinds"] = std::move(kinds);
}

void from_json(const nlohmann::json& j, GenConfig& c) {
  c.seed = j.value("seed", c.seed);
  c.n_normal = j.value("n_normal", c.n_normal);
  c.n_anomalous = j.value("n_anomalous", c.n_anomalous);
  c.snippets_per_vehicle = j.value("snippets_per_vehicle", c.snippets_per_vehicle);
  c.records_per_vehicle = j.value("records_per_vehicle", c.records_per_vehicle);
  c.stride = j.value("stride", c.stride);
  c.dt_s = j.value("dt_s", c.dt_s);
  c.truncation_probability =
      j.value("truncation_probability", c.truncation_probability);
  c.fault_severity = j.value("fault_severity", c.fault_severity);
  c.transient_fraction = j.value("transient_fraction", c.transient_fraction);
  c.capacity_band_low = j.value("capacity_band_low", c.capacity_band_low);
  c.capacity_band_high = j.value("capacity_band_high", c.capacity_band_high);
  c.base_fade_per_record = j.value("base_fade_per_record", c.base_fade_per_record);
  c.fade_per_manifest = j.value("fade_per_manifest", c.fade_per_manifest);
  c.noise_std = j.value("noise_std", c.noise_std);
  c.anonymize = j.value("anonymize", c.anonymize);
  if (j.contains("fault_kinds")) {
    c.fault_kinds.clear();
    for (const auto& name : j.at("fault_kinds")) {
      c.fault_kinds.push_back(parse_fault_kind(name.get<std::string>()));
    }
  }
}

}  // namespace evbat::synth

namespace evbat::detect {

void to_json(nlohmann::json& j, const DyadConfig& c) {
  j = nlohmann::json{{"input_channels", c.input_channels},
                     {"response_channels", c.response_channels},
                     {"hidden_size", c.hidden_size},
                     {"latent_size", c.latent_size},
                     {"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"kl_weight", c.kl_weight},
                     {"learning_rate", c.learning_rate},
                     {"cosine_schedule", c.cosine_schedule},
                     {"clip_global_norm", c.clip_global_norm}};
}

void from_json(const nlohmann::json& j, DyadConfig& c) {
  c.input_channels = j.value("input_channels", c.input_channels);
  c.response_channels = j.value("response_channels", c.response_channels);
  c.hidden_size = j.value("hidden_size", c.hidden_size);
  c.latent_size = j.value("latent_size", c.latent_size);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.kl_weight = j.value("kl_weight", c.kl_weight);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.cosine_schedule = j.value("cosine_schedule", c.cosine_schedule);
  c.clip_global_norm = j.value("clip_global_norm", c.clip_global_norm);
}

void to_json(nlohmann::json& j, const AeConfig& c) {
  j = nlohmann::json{{"modeled_channels", c.modeled_channels},
                     {"hidden_dims", c.hidden_dims},
                     {"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"learning_rate", c.learning_rate},
                     {"dropout_rate", c.dropout_rate}};
}

void from_json(const nlohmann::json& j, AeConfig& c) {
  c.modeled_channels = j.value("modeled_channels", c.modeled_channels);
  c.hidden_dims = j.value("hidden_dims", c.hidden_dims);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
}

}  // namespace evbat::detect

namespace evbat::eval {

void to_json(nlohmann::json& j, const HyperparamGrids& c) {
  j = nlohmann::json{{"h_grid", c.h_grid}, {"tau_quantiles", c.tau_quantiles}};
}

void from_json(const nlohmann::json& j, HyperparamGrids& c) {
  c.h_grid = j.value("h_grid", c.h_grid);
  c.tau_quantiles = j.value("tau_quantiles", c.tau_quantiles);
}

}  // namespace evbat::eval

namespace evbat::capacity {

RegressorKind parse_regressor_kind(const std::string& name) {
  if (name == "recurrent") return RegressorKind::kRecurrent;
  if (name == "feedforward") return RegressorKind::kFeedforward;
  if (name == "ridge") return RegressorKind::kRidge;
  throw std::invalid_argument("unknown regressor kind: " + name);
}

void to_json(nlohmann::json& j, const RegressorConfig& c) {
  j = nlohmann::json{{"kind", regressor_kind_name(c.kind)},
                     {"modeled_channels", c.modeled_channels},
                     {"hidden_size", c.hidden_size},
                     {"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"learning_rate", c.learning_rate},
                     {"clip_global_norm", c.clip_global_norm},
                     {"ridge_lambda", c.ridge_lambda}};
}

void from_json(const nlohmann::json& j, RegressorConfig& c) {
  if (j.contains("kind")) {
    c.kind = parse_regressor_kind(j.at("kind").get<std::string>());
  }
  c.modeled_channels = j.value("modeled_channels", c.modeled_channels);
  c.hidden_size = j.value("hidden_size", c.hidden_size);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.clip_global_norm = j.value("clip_global_norm", c.clip_global_norm);
  c.ridge_lambda = j.value("ridge_lambda", c.ridge_lambda);
}

}  // namespace evbat::capacity
