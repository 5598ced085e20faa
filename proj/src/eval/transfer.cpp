#include "advpara/eval/transfer.hpp"

#include <algorithm>
#include <set>

#include "advpara/util/io.hpp"

namespace advpara::eval {

const TransferCell* TransferMatrix::find(const std::string& guidance, const std::string& deployed) const {
  auto r = std::ranges::find(rows, guidance);
  auto c = std::ranges::find(columns, deployed);
  if (r == rows.end() || c == columns.end()) return nullptr;
  const auto& cell = cells[r - rows.begin()][c - columns.begin()];
  return cell ? &*cell : nullptr;
}

std::string TransferMatrix::to_csv() const {
  std::string out = "guidance,deployed,baseline_tpr,attacked_tpr,relative_drop,note\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& cell = cells[r][c];
      if (!cell) continue;
      out += cell->guidance + "," + cell->deployed + "," + format_fixed(cell->baseline_tpr, 6) + "," +
             format_fixed(cell->attacked_tpr, 6) + ",";
      out += cell->relative_drop ? format_fixed(*cell->relative_drop, 6) : std::string("undefined");
      out += "," + cell->note + "\n";
    }
  }
  return out;
}

TransferMatrix transfer_matrix(const std::map<RunKey, ScoredDataset>& runs,
                               const std::map<std::string, ScoredDataset>& baselines, double target_fpr) {
  TransferMatrix m;
  std::set<std::string> guidance;
  std::set<std::string> deployed;
  for (const auto& [key, _] : runs) {
    guidance.insert(key.first);
    deployed.insert(key.second);
  }
  if (guidance.erase(kSimpleParaphraseRow) > 0) m.rows.emplace_back(kSimpleParaphraseRow);
  m.rows.insert(m.rows.end(), guidance.begin(), guidance.end());
  m.columns.assign(deployed.begin(), deployed.end());
  m.cells.assign(m.rows.size(), std::vector<std::optional<TransferCell>>(m.columns.size()));

  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    for (std::size_t c = 0; c < m.columns.size(); ++c) {
      auto run = runs.find({m.rows[r], m.columns[c]});
      if (run == runs.end()) continue;
      TransferCell cell;
      cell.guidance = m.rows[r];
      cell.deployed = m.columns[c];
      cell.attacked_tpr = tpr_at_fpr(run->second, target_fpr);
      auto base = baselines.find(m.columns[c]);
      if (base == baselines.end()) {
        cell.note = "missing baseline";
      } else {
        cell.baseline_tpr = tpr_at_fpr(base->second, target_fpr);
        if (cell.baseline_tpr > 0.0) {
          cell.relative_drop = (cell.baseline_tpr - cell.attacked_tpr) / cell.baseline_tpr;
        } else {
          cell.note = "zero baseline";
        }
      }
      m.cells[r][c] = std::move(cell);
    }
  }
  return m;
}

}  // namespace advpara::eval
