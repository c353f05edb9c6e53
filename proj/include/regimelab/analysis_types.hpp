#pragma once

#include <map>
#include <string>

#include "regimelab/rank_stats.hpp"

namespace relab {

struct PlannerStats {
  double hit1_mean = 0.0;
  double hit1_sem = 0.0;
  double auc_mean = 0.0;
  double auc_sem = 0.0;
  int n_seeds = 0;
};

inline constexpr double kDefaultTieEpsilon = 0.01;

/// One aggregated evaluation condition: its regime coordinates, per-planner
/// metric summaries, and the predicted/empirical winner pair.
struct ConditionRow {
  std::string benchmark_id;
  int n_actions = 0;
  int budget = 0;
  double b_ratio = 0.0;  // realized B / |A|
  double tau2 = 0.0;     // prior-noise level of the condition (synthetic grids)
  double sigma2 = 0.0;   // observation-noise variance of the condition
  double rho = 0.0;      // realized mean Spearman(prior, truth)
  double prs = 0.0;

  std::map<std::string, PlannerStats> per_planner;

  double advantage = 0.0;  // Hit@1(explore planner) - Hit@1(greedy planner)
  double advantage_sem = 0.0;
  Winner predicted = Winner::explore;
  Winner empirical = Winner::tie;
  bool in_boundary_zone = false;
};

}  // namespace relab
