#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "advpara/eval/roc.hpp"

namespace advpara::eval {

// Row id reserved for the non-adversarial baseline attack.
inline constexpr const char* kSimpleParaphraseRow = "simple";

struct TransferCell {
  std::string guidance;
  std::string deployed;
  double baseline_tpr = 0.0;
  double attacked_tpr = 0.0;
  // (baseline - attacked) / baseline; empty when the baseline is 0 or missing.
  std::optional<double> relative_drop;
  std::string note;
};

struct TransferMatrix {
  std::vector<std::string> rows;     // guidance ids, "simple" first
  std::vector<std::string> columns;  // deployed detector ids
  std::vector<std::vector<std::optional<TransferCell>>> cells;

  const TransferCell* find(const std::string& guidance, const std::string& deployed) const;
  std::string to_csv() const;
};

using RunKey = std::pair<std::string, std::string>;  // (guidance, deployed)

/// Relative T@FPR drop of each attacked run against the deployed
/// detector's reference dataset.
TransferMatrix transfer_matrix(const std::map<RunKey, ScoredDataset>& runs,
                               const std::map<std::string, ScoredDataset>& baselines, double target_fpr = 0.01);

}  // namespace advpara::eval
