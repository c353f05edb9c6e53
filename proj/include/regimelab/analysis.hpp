#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regimelab/analysis_types.hpp"
#include "regimelab/core.hpp"

namespace relab {

struct BadK : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct MissingPlanner : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PreconditionFailed : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct TargetUnreachable : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct UnbalancedDesign : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct OutOfRegime : std::domain_error {
  using std::domain_error::domain_error;
};
struct MisalignedRuns : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Episode metrics
// ---------------------------------------------------------------------------

/// 1 iff any of the context's true top-k actions was queried at least once.
int hit_at_k(const RunRecord& record, const OracleTable& table, int context,
             int k);

/// Normalized area under the best-true-score-so-far curve: the mean over
/// steps of (best so far - min) / (max - min) over the context's score range.
/// A constant-score context returns 1.
double discovery_auc(const RunRecord& record, const OracleTable& table,
                     int context);

// ---------------------------------------------------------------------------
// Condition-level statistics
// ---------------------------------------------------------------------------

struct Advantage {
  double value = 0.0;  // Hit@1(explore) - Hit@1(greedy)
  double sem = 0.0;    // sqrt(sem_e^2 + sem_g^2)
};

/// Mean Hit@1 difference between an exploratory planner and greedy.
Advantage exploration_advantage(const ConditionRow& row,
                                const std::string& explore_planner = "ucb",
                                const std::string& greedy_planner = "greedy");

/// Fill a row's advantage/empirical-winner fields from two of its planners,
/// and its predicted winner from PRS at the given threshold.
void finalize_row(ConditionRow& row, const std::string& explore_planner,
                  const std::string& greedy_planner, double theta,
                  double tie_epsilon = kDefaultTieEpsilon);

/// Benchmark mixture weight that makes the averaged treatment effect hit the
/// target exactly: lambda * cate_high + (1 - lambda) * cate_low = target.
/// Requires a sign flip (cate_low < 0 < cate_high) and a reachable target.
double mixture_weight(double cate_low, double cate_high, double target);

// ---------------------------------------------------------------------------
// Variance decomposition
// ---------------------------------------------------------------------------

struct EtaSquared {
  double factor_a = 0.0;
  double factor_b = 0.0;
  double interaction = 0.0;
  double residual = 0.0;
};

/// Two-way fixed-effects decomposition of a balanced factorial:
/// cells[i][j] holds the replicate values of (level_a i, level_b j). Each
/// component is its sum of squares over the total; the four components sum
/// to one.
EtaSquared eta_squared(const std::vector<std::vector<std::vector<double>>>& cells);

// ---------------------------------------------------------------------------
// Budget threshold
// ---------------------------------------------------------------------------

/// Predicted crossover budget from the exploration-vs-greedy bound:
///   b+ = (sigma^2 / (c * alpha * delta_min^2))
///        * log(n^2 * c * alpha * delta_min^2 / (C_n * sigma^2)),
/// returned as a query count B+ = n * b+. Throws OutOfRegime when the log
/// argument is not > 1.
double threshold_b_dagger(double sigma2, int n, double alpha_explore,
                          double c_n, double c, double delta_min);

/// Calibration inputs for the drug-response-scale example: sigma^2 = 0.1,
/// n = 156, alpha = 0.5, C_n = 1, and a per-context score-spread proxy of
/// 0.16 for the minimum gap.
struct ThresholdCalibration {
  double sigma2 = 0.1;
  int n = 156;
  double alpha_explore = 0.5;
  double c_n = 1.0;
  double c = 300.0;
  double delta_min = 0.16;
};

// ---------------------------------------------------------------------------
// Regime accuracy
// ---------------------------------------------------------------------------

struct RegimeAccuracy {
  std::optional<double> overall;       // empty when every row is a tie
  std::optional<double> outside_zone;  // accuracy outside [0.05, 0.15)
  std::optional<double> inside_zone;
  double equivalence_fraction = 0.0;   // ties / all rows
  int n_rows = 0;
  int n_ties = 0;
  int n_correct = 0;
};

/// Fraction of non-tie rows whose predicted winner (PRS vs a per-row
/// threshold) matches the empirical winner. Ties are excluded from the
/// accuracy and reported as the equivalence fraction.
RegimeAccuracy regime_accuracy(
    const std::vector<ConditionRow>& rows,
    const std::function<double(const ConditionRow&)>& theta_of_row,
    double tie_epsilon = kDefaultTieEpsilon);

RegimeAccuracy regime_accuracy(const std::vector<ConditionRow>& rows,
                               double theta,
                               double tie_epsilon = kDefaultTieEpsilon);

/// Hindsight ceiling: mean over contexts of the best per-context outcome
/// among the choice set. All planners must cover identical contexts.
double per_context_oracle(
    const std::map<std::string, std::vector<double>>& per_context_hits);

// ---------------------------------------------------------------------------
// Federated-learning retrodiction
// ---------------------------------------------------------------------------

/// Drift-exposure analog of the regime score: local steps x heterogeneity,
/// PRS_FL = E * (1 - s/100).
double prs_fl(double local_steps, double similarity_pct);

struct FlCondition {
  double local_steps;     // E
  double similarity_pct;  // s
  double fedavg_rounds;   // rounds to target accuracy (1000 = not reached)
  double sgd_rounds;
};

/// The twelve published (E, s) conditions with rounds-to-target for the
/// local-update method and the plain-SGD baseline.
const std::vector<FlCondition>& fl_reference_table();

struct FlRetrodiction {
  int correct = 0;
  int total = 0;
  std::vector<bool> row_correct;
};

/// Prediction rule: the local-update method wins iff PRS_FL < threshold.
FlRetrodiction fl_retrodiction(double threshold = 5.0);

}  // namespace relab
