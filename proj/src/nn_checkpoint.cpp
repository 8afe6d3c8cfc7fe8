#include "evbat/nn/checkpoint.hpp"

#include "evbat/rng.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <stdexcept>

namespace evbat::nn {

void save_checkpoint(const std::filesystem::path& path, const TensorRefs& params,
                     const std::string& hash) {
  nlohmann::ordered_json doc;
  doc["config_hash"] = hash;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (const Tensor* t : params) {
    nlohmann::ordered_json entry;
    entry["name"] = t->name;
    entry["rows"] = t->value.rows();
    entry["cols"] = t->value.cols();
    nlohmann::ordered_json data = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < t->value.cols(); ++j) {
      for (Eigen::Index i = 0; i < t->value.rows(); ++i) {
        data.push_back(t->value(i, j));
      }
    }
    entry["data"] = std::move(data);
    tensors.push_back(std::move(entry));
  }
  doc["tensors"] = std::move(tensors);
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint: " + path.string());
  }
  out << doc.dump();
}

std::string load_checkpoint(const std::filesystem::path& path,
                            const TensorRefs& params) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read checkpoint: " + path.string());
  }
  const auto doc = nlohmann::json::parse(in);

  std::map<std::string, const nlohmann::json*> by_name;
  for (const auto& entry : doc.at("tensors")) {
    by_name[entry.at("name").get<std::string>()] = &entry;
  }
  for (Tensor* t : params) {
    const auto it = by_name.find(t->name);
    if (it == by_name.end()) {
      throw std::runtime_error("checkpoint missing tensor: " + t->name);
    }
    const auto& entry = *it->second;
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    if (rows != t->value.rows() || cols != t->value.cols()) {
      throw std::runtime_error("checkpoint shape mismatch for " + t->name);
    }
    const auto& data = entry.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw std::runtime_error("checkpoint data size mismatch for " + t->name);
    }
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) {
        t->value(i, j) = data.at(k++).get<double>();
      }
    }
  }
  return doc.at("config_hash").get<std::string>();
}

std::string config_hash(const std::string& serialized_config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(evbat::fnv1a64(serialized_config)));
  return buf;
}

}  // namespace evbat::nn
