#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "regimelab/rng.hpp"

namespace relab {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IncompleteTable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DuplicateCell : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// ---------------------------------------------------------------------------
// Oracle table
// ---------------------------------------------------------------------------

/// Ground-truth score for every (context, action) pair plus the observation
/// noise level. This is the replay environment: every query is answered from
/// the table, optionally perturbed by Gaussian noise.
struct OracleTable {
  int n_contexts = 0;
  int n_actions = 0;
  std::vector<double> scores;  // row-major, scores[context * n_actions + action]
  double obs_noise_sd = 0.0;

  // External ids, in internal index order. Empty for synthetic tables.
  std::vector<std::string> context_ids;
  std::vector<std::string> action_ids;

  double score(int context, int action) const {
    check_indices(context, action);
    return scores[static_cast<std::size_t>(context) * n_actions + action];
  }

  /// True best action of a context; score ties break to the lowest index.
  int argmax_action(int context) const;

  /// The k best actions of a context, score-descending, ties by lowest index.
  std::vector<int> top_k_actions(int context, int k) const;

  /// Mean score of an action across all contexts (the oracle-prior mean).
  double cross_context_mean(int action) const;

  /// Min/max score within one context (used for metric normalization).
  std::pair<double, double> score_range(int context) const;

  /// Rescale each context's scores to [0, 1]. Off by default everywhere;
  /// exposed because it changes the minimum action gap.
  void normalize_per_context();

  void check_indices(int context, int action) const {
    if (context < 0 || context >= n_contexts || action < 0 ||
        action >= n_actions)
      throw IndexError("oracle index out of range");
  }
};

/// Load a replay oracle from CSV with header `context_id,action_id,score`.
/// External ids are arbitrary strings; internal indices are dense and
/// assigned in lexicographic id order so the mapping is stable under row
/// reordering.
OracleTable load_replay_oracle(const std::string& path,
                               double obs_noise_sd = 0.0);

/// Load per-action feature vectors from CSV with header `action_id,f1,...,fd`,
/// aligned to the table's action index order. Every action id in `action_ids`
/// must be present and all rows must share one dimension.
std::vector<std::vector<double>> load_action_features(
    const std::string& path, const std::vector<std::string>& action_ids);

/// One noisy query: score(context, action) + N(0, obs_noise_sd^2).
/// A zero noise level returns the exact score without consuming randomness.
double observe(const OracleTable& table, int context, int action, Rng& rng);

// ---------------------------------------------------------------------------
// Episode configuration and trace
// ---------------------------------------------------------------------------

enum class PriorFamily { flat, ema, structured, oracle };

const char* to_string(PriorFamily f);
PriorFamily prior_family_from_string(const std::string& s);

/// Per-context episode settings. The planner itself is passed separately to
/// the episode runner (see synthetic.hpp).
struct EpisodeConfig {
  int budget = 1;              // B queries per context
  int warm_start = 3;          // w uniform-random queries before adaptive selection
  PriorFamily prior_family = PriorFamily::flat;
  std::uint64_t seed = 0;
  bool allow_requery = true;   // adaptive greedy may revisit a queried action

  void validate(int n_actions) const {
    if (budget < 1) throw BadValue("budget must be >= 1");
    if (warm_start < 0) throw BadValue("warm_start must be >= 0");
    if (warm_start > budget) throw BadValue("warm_start must be <= budget");
    if (budget > 10 * n_actions)
      throw BadValue("budget exceeds 10x the action count");
  }
};

enum class Mode { explore, exploit };

const char* to_string(Mode m);

struct QueryEvent {
  int step;
  int action;
  double value;
};

/// Full trace of one episode: every query, the online rank-correlation and
/// PRS trajectories (when the planner estimates them), mode switches, and
/// terminal metrics.
struct RunRecord {
  std::vector<QueryEvent> queried;                  // exactly budget entries
  std::vector<std::pair<int, double>> rho_trajectory;
  std::vector<std::pair<int, double>> prs_trajectory;
  std::vector<std::pair<int, Mode>> mode_switches;  // strictly increasing steps
  std::map<int, int> hit_at_k;                      // k -> {0,1}
  double discovery_auc = 0.0;

  // Prior means at context start; kept so pilot estimation can pool
  // (prior mean, outcome) pairs without re-running the episode.
  std::vector<double> prior_means_at_start;

  int distinct_queried() const;

  /// Mean observed value per distinct queried action, index-aligned pairs
  /// (action, mean outcome).
  std::vector<std::pair<int, double>> mean_outcome_per_action() const;
};

}  // namespace relab
