#include "regimelab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace relab {

int hit_at_k(const RunRecord& record, const OracleTable& table, int context,
             int k) {
  if (k < 1 || k > table.n_actions)
    throw BadK("k outside [1, n_actions]");
  const auto top = table.top_k_actions(context, k);
  std::set<int> top_set(top.begin(), top.end());
  for (const auto& q : record.queried)
    if (top_set.count(q.action)) return 1;
  return 0;
}

double discovery_auc(const RunRecord& record, const OracleTable& table,
                     int context) {
  if (record.queried.empty()) throw BadValue("empty record");
  const auto [lo, hi] = table.score_range(context);
  if (hi <= lo) return 1.0;  // constant scores: nothing to discover
  double best = -std::numeric_limits<double>::infinity();
  double area = 0.0;
  for (const auto& q : record.queried) {
    best = std::max(best, table.score(context, q.action));
    area += (best - lo) / (hi - lo);
  }
  return area / record.queried.size();
}

Advantage exploration_advantage(const ConditionRow& row,
                                const std::string& explore_planner,
                                const std::string& greedy_planner) {
  auto e = row.per_planner.find(explore_planner);
  auto g = row.per_planner.find(greedy_planner);
  if (e == row.per_planner.end())
    throw MissingPlanner("row lacks planner " + explore_planner);
  if (g == row.per_planner.end())
    throw MissingPlanner("row lacks planner " + greedy_planner);
  Advantage adv;
  adv.value = e->second.hit1_mean - g->second.hit1_mean;
  adv.sem = std::sqrt(e->second.hit1_sem * e->second.hit1_sem +
                      g->second.hit1_sem * g->second.hit1_sem);
  return adv;
}

void finalize_row(ConditionRow& row, const std::string& explore_planner,
                  const std::string& greedy_planner, double theta,
                  double tie_epsilon) {
  const Advantage adv = exploration_advantage(row, explore_planner,
                                              greedy_planner);
  row.advantage = adv.value;
  row.advantage_sem = adv.sem;
  if (std::abs(adv.value) < tie_epsilon)
    row.empirical = Winner::tie;
  else
    row.empirical = adv.value > 0 ? Winner::explore : Winner::greedy;
  row.predicted = row.prs >= theta ? Winner::explore : Winner::greedy;
  row.in_boundary_zone =
      row.prs >= kBoundaryZoneLow && row.prs < kBoundaryZoneHigh;
}

double mixture_weight(double cate_low, double cate_high, double target) {
  if (!(cate_low < 0.0 && cate_high > 0.0))
    throw PreconditionFailed("mixture needs cate_low < 0 < cate_high");
  if (target < cate_low || target > cate_high)
    throw TargetUnreachable("target outside [cate_low, cate_high]");
  return (target - cate_low) / (cate_high - cate_low);
}

EtaSquared eta_squared(
    const std::vector<std::vector<std::vector<double>>>& cells) {
  const std::size_t A = cells.size();
  if (A == 0) throw UnbalancedDesign("empty design");
  const std::size_t B = cells[0].size();
  if (B == 0) throw UnbalancedDesign("empty design");
  const std::size_t S = cells[0][0].size();
  if (S == 0) throw UnbalancedDesign("empty cells");
  for (const auto& rowv : cells) {
    if (rowv.size() != B) throw UnbalancedDesign("ragged factor levels");
    for (const auto& cell : rowv)
      if (cell.size() != S)
        throw UnbalancedDesign("unequal replicates per cell");
  }

  double grand = 0.0;
  for (const auto& rowv : cells)
    for (const auto& cell : rowv)
      for (double v : cell) grand += v;
  const double n_total = static_cast<double>(A * B * S);
  grand /= n_total;

  std::vector<double> mean_a(A, 0.0), mean_b(B, 0.0);
  std::vector<std::vector<double>> mean_ab(A, std::vector<double>(B, 0.0));
  for (std::size_t i = 0; i < A; ++i)
    for (std::size_t j = 0; j < B; ++j) {
      double m = 0.0;
      for (double v : cells[i][j]) m += v;
      m /= S;
      mean_ab[i][j] = m;
      mean_a[i] += m / B;
      mean_b[j] += m / A;
    }

  double ss_a = 0.0, ss_b = 0.0, ss_ab = 0.0, ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < A; ++i) ss_a += (mean_a[i] - grand) * (mean_a[i] - grand);
  ss_a *= static_cast<double>(B * S);
  for (std::size_t j = 0; j < B; ++j) ss_b += (mean_b[j] - grand) * (mean_b[j] - grand);
  ss_b *= static_cast<double>(A * S);
  for (std::size_t i = 0; i < A; ++i)
    for (std::size_t j = 0; j < B; ++j) {
      const double d = mean_ab[i][j] - mean_a[i] - mean_b[j] + grand;
      ss_ab += d * d;
      for (double v : cells[i][j]) {
        ss_res += (v - mean_ab[i][j]) * (v - mean_ab[i][j]);
        ss_tot += (v - grand) * (v - grand);
      }
    }
  ss_ab *= static_cast<double>(S);

  EtaSquared eta;
  if (ss_tot <= 0.0) return eta;  // all values identical
  eta.factor_a = ss_a / ss_tot;
  eta.factor_b = ss_b / ss_tot;
  eta.interaction = ss_ab / ss_tot;
  eta.residual = ss_res / ss_tot;
  return eta;
}

double threshold_b_dagger(double sigma2, int n, double alpha_explore,
                          double c_n, double c, double delta_min) {
  if (sigma2 <= 0.0 || n < 2 || alpha_explore <= 0.0 || c_n <= 0.0 ||
      c <= 0.0 || delta_min <= 0.0)
    throw BadValue("threshold inputs must be positive");
  const double gap_term = c * alpha_explore * delta_min * delta_min;
  const double log_arg =
      static_cast<double>(n) * n * gap_term / (c_n * sigma2);
  if (log_arg <= 1.0)
    throw OutOfRegime("threshold formula outside its regime (log arg <= 1)");
  const double b = sigma2 / gap_term * std::log(log_arg);
  return n * b;
}

RegimeAccuracy regime_accuracy(
    const std::vector<ConditionRow>& rows,
    const std::function<double(const ConditionRow&)>& theta_of_row,
    double tie_epsilon) {
  RegimeAccuracy acc;
  acc.n_rows = static_cast<int>(rows.size());
  int correct = 0, graded = 0;
  int in_correct = 0, in_graded = 0, out_correct = 0, out_graded = 0;
  for (const auto& row : rows) {
    const bool tie = std::abs(row.advantage) < tie_epsilon;
    if (tie) {
      ++acc.n_ties;
      continue;
    }
    const Winner empirical =
        row.advantage > 0 ? Winner::explore : Winner::greedy;
    const double theta = theta_of_row(row);
    const Winner predicted =
        row.prs >= theta ? Winner::explore : Winner::greedy;
    const bool boundary =
        row.prs >= kBoundaryZoneLow && row.prs < kBoundaryZoneHigh;
    const bool ok = predicted == empirical;
    ++graded;
    correct += ok;
    if (boundary) {
      ++in_graded;
      in_correct += ok;
    } else {
      ++out_graded;
      out_correct += ok;
    }
  }
  acc.n_correct = correct;
  if (graded > 0) acc.overall = static_cast<double>(correct) / graded;
  if (in_graded > 0)
    acc.inside_zone = static_cast<double>(in_correct) / in_graded;
  if (out_graded > 0)
    acc.outside_zone = static_cast<double>(out_correct) / out_graded;
  if (!rows.empty())
    acc.equivalence_fraction =
        static_cast<double>(acc.n_ties) / acc.n_rows;
  return acc;
}

RegimeAccuracy regime_accuracy(const std::vector<ConditionRow>& rows,
                               double theta, double tie_epsilon) {
  return regime_accuracy(
      rows, [theta](const ConditionRow&) { return theta; }, tie_epsilon);
}

double per_context_oracle(
    const std::map<std::string, std::vector<double>>& per_context_hits) {
  if (per_context_hits.empty())
    throw MisalignedRuns("oracle needs at least one planner");
  const std::size_t n = per_context_hits.begin()->second.size();
  for (const auto& [name, hits] : per_context_hits)
    if (hits.size() != n)
      throw MisalignedRuns("planner " + name + " covers different contexts");
  if (n == 0) throw MisalignedRuns("no contexts");
  double total = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [name, hits] : per_context_hits)
      best = std::max(best, hits[c]);
    total += best;
  }
  return total / n;
}

double prs_fl(double local_steps, double similarity_pct) {
  if (local_steps < 1.0) throw BadValue("local steps must be >= 1");
  if (similarity_pct < 0.0 || similarity_pct > 100.0)
    throw BadValue("similarity outside [0, 100]");
  return local_steps * (1.0 - similarity_pct / 100.0);
}

const std::vector<FlCondition>& fl_reference_table() {
  // Rounds to the 0.5-accuracy target; 1000 marks a run that did not reach
  // the target within the round limit.
  static const std::vector<FlCondition> kTable = {
      {1, 0, 258, 317},    {5, 0, 428, 317},   {10, 0, 711, 317},
      {20, 0, 1000, 317},  {1, 10, 74, 365},   {5, 10, 34, 365},
      {10, 10, 25, 365},   {20, 10, 18, 365},  {1, 100, 83, 416},
      {5, 100, 10, 416},   {10, 100, 6, 416},  {20, 100, 4, 416},
  };
  return kTable;
}

FlRetrodiction fl_retrodiction(double threshold) {
  FlRetrodiction out;
  for (const auto& row : fl_reference_table()) {
    const bool fedavg_wins = row.fedavg_rounds < row.sgd_rounds;
    const bool predicted_fedavg =
        prs_fl(row.local_steps, row.similarity_pct) < threshold;
    const bool ok = fedavg_wins == predicted_fedavg;
    out.row_correct.push_back(ok);
    out.correct += ok;
    ++out.total;
  }
  return out;
}

}  // namespace relab
