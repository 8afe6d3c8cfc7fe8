#include "evbat/eval/folds.hpp"

#include "evbat/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace evbat::eval {

FoldPlan::RoundRoles FoldPlan::roles(int round) const {
  if (round < 0 || round >= k) {
    throw std::invalid_argument("FoldPlan: round out of range");
  }
  RoundRoles r;
  for (int f = 0; f < k; ++f) {
    if (f == round) {
      continue;
    }
    r.train_normal.insert(r.train_normal.end(), normal_folds[f].begin(),
                          normal_folds[f].end());
  }
  r.validation_anomalous = anomalous_folds[round];
  r.test = normal_folds[round];
  for (int f = 0; f < k; ++f) {
    if (f == round) {
      continue;
    }
    r.test.insert(r.test.end(), anomalous_folds[f].begin(),
                  anomalous_folds[f].end());
  }
  return r;
}

std::vector<std::vector<std::string>> k_fold_split(std::vector<std::string> ids,
                                                   int k, std::uint64_t seed) {
  if (k < 2) {
    throw std::invalid_argument("k_fold_split: k must be >= 2");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<std::vector<std::string>> folds(k);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    folds[i % k].push_back(std::move(ids[i]));
  }
  return folds;
}

FoldPlan build_folds(std::span<const Vehicle> fleet, int k, std::uint64_t seed) {
  std::vector<std::string> normal_ids, anomalous_ids;
  for (const Vehicle& v : fleet) {
    (v.health_label == 1 ? anomalous_ids : normal_ids).push_back(v.vehicle_id);
  }
  if (static_cast<int>(normal_ids.size()) < k) {
    throw std::invalid_argument("build_folds: fewer than " + std::to_string(k) +
                                " normal vehicles");
  }
  if (static_cast<int>(anomalous_ids.size()) < k) {
    throw std::invalid_argument("build_folds: fewer than " + std::to_string(k) +
                                " anomalous vehicles");
  }
  FoldPlan plan;
  plan.k = k;
  plan.normal_folds =
      k_fold_split(std::move(normal_ids), k, derive_seed(seed, "folds-normal"));
  plan.anomalous_folds = k_fold_split(std::move(anomalous_ids), k,
                                      derive_seed(seed, "folds-anomalous"));
  return plan;
}

}  // namespace evbat::eval
