#pragma once

#include "evbat/snippet.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace evbat::eval {

/// Five-fold plan over vehicle ids, stratified by health label. Per round r:
/// the k-1 normal folds other than r train, anomalous fold r is the
/// validation set's anomaly side, and the test set is normal fold r plus the
/// remaining anomalous folds. No vehicle holds two roles in one round.
struct FoldPlan {
  int k = 5;
  std::vector<std::vector<std::string>> normal_folds;
  std::vector<std::vector<std::string>> anomalous_folds;

  struct RoundRoles {
    std::vector<std::string> train_normal;
    std::vector<std::string> validation_anomalous;
    std::vector<std::string> test;
  };

  RoundRoles roles(int round) const;
};

/// Seeded shuffle then round-robin assignment, separately per label class.
/// Throws std::invalid_argument naming the class with fewer than k vehicles.
FoldPlan build_folds(std::span<const Vehicle> fleet, int k, std::uint64_t seed);

/// Plain (unstratified) k-fold split of ids; used where labels play no role.
std::vector<std::vector<std::string>> k_fold_split(std::vector<std::string> ids,
                                                   int k, std::uint64_t seed);

}  // namespace evbat::eval
