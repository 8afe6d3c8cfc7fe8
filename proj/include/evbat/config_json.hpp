#pragma once

#include "evbat/capacity/regressor.hpp"
#include "evbat/detect/autoencoder.hpp"
#include "evbat/detect/dyad.hpp"
#include "evbat/eval/protocol.hpp"
#include "evbat/fleet_gen.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

// JSON patch-style config loading: absent keys keep the struct's defaults.

namespace evbat::synth {

FaultKind parse_fault_kind(const std::string& name);

void to_json(nlohmann::json& j, const GenConfig& c);
void from_json(const nlohmann::json& j, GenConfig& c);

}  // namespace evbat::synth

namespace evbat::detect {

void to_json(nlohmann::json& j, const DyadConfig& c);
void from_json(const nlohmann::json& j, DyadConfig& c);

void to_json(nlohmann::json& j, const AeConfig& c);
void from_json(const nlohmann::json& j, AeConfig& c);

}  // namespace evbat::detect

namespace evbat::eval {

void to_json(nlohmann::json& j, const HyperparamGrids& c);
void from_json(const nlohmann::json& j, HyperparamGrids& c);

}  // namespace evbat::eval

namespace evbat::capacity {

RegressorKind parse_regressor_kind(const std::string& name);

void to_json(nlohmann::json& j, const RegressorConfig& c);
void from_json(const nlohmann::json& j, RegressorConfig& c);

}  // namespace evbat::capacity
