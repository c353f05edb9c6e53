#pragma once

#include <string>
#include <vector>

#include "regimelab/analysis_types.hpp"
#include "regimelab/core.hpp"
#include "regimelab/theory.hpp"

namespace relab {

/// Grid output: one row per condition x planner,
/// planner,n_actions,B,b_ratio,tau2,sigma2,rho_mean,prs,hit1_mean,hit1_sem,
/// auc_mean,auc_sem.
std::string grid_csv(const std::vector<ConditionRow>& rows,
                     const std::vector<std::string>& planner_order);

/// Plot-ready regime map: benchmark_id,b_ratio,rho,prs,advantage,predicted,
/// empirical,in_boundary_zone.
std::string regime_map_csv(const std::vector<ConditionRow>& rows);

/// Parse a grid CSV back into condition rows (inverse of grid_csv).
std::vector<ConditionRow> parse_grid_csv(const std::string& text);

/// One ClosedFormResult per line, JSON.
std::string validation_jsonl(const std::vector<ClosedFormResult>& results);

/// One episode record as a single JSON line.
std::string record_jsonl_line(const std::string& planner, std::uint64_t seed,
                              int context, const RunRecord& record);

/// Machine-readable minimum-reporting block: the four regime variables plus
/// PRS and the regime classification, one JSON line per condition.
struct ProtocolEntry {
  std::string benchmark_id;
  std::string prior_condition;  // family name or "controlled-rho"
  double b_ratio = 0.0;
  int budget = 0;
  int n_actions = 0;
  int k_contexts = 0;
  std::string metric_terminal = "hit@1";
  double metric_terminal_value = 0.0;
  std::string metric_cumulative = "discovery_auc";
  double metric_cumulative_value = 0.0;
  bool rho_measured = false;
  double rho = 0.0;
  double prs = 0.0;
  std::string predicted;  // greedy | explore
  bool in_boundary_zone = false;
  bool k_sufficient = false;
};

std::string protocol_jsonl(const std::vector<ProtocolEntry>& entries);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Deterministic decimal formatting used in every CSV cell.
std::string format_double(double v);

}  // namespace relab
