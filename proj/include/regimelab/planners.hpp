#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "regimelab/core.hpp"
#include "regimelab/rank_stats.hpp"
#include "regimelab/rng.hpp"
#include "regimelab/surrogate.hpp"

namespace relab {

struct BadSpec : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct BadReward : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct BudgetExceedsActions : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class PlannerKind {
  greedy,
  ucb,
  thompson,
  reign,
  regime,
  epsilon_greedy,
  explore_then_exploit,
  random_switch,
  exp3_switch,
  budget_aware_ucb,
  oracle_prs,
  rank_greedy,
  two_phase,
  random,  // uniform exploration without repeats; the no-prior reference
};

const char* to_string(PlannerKind k);
PlannerKind planner_kind_from_string(const std::string& s);

/// Acquisition policy plus its hyperparameters. Defaults follow the
/// experiment conventions used throughout: beta = 2, epsilon = 0.1,
/// theta = 0.10, m = 3 distinct actions before the online rank estimate,
/// lambda = 0.5 and rho_w = 1.0 for the EI/uncertainty hybrid.
struct PlannerSpec {
  PlannerKind kind = PlannerKind::greedy;
  double beta = 2.0;            // ucb bonus weight (also beta_max for the budget-aware variant)
  double epsilon = 0.1;         // epsilon-greedy mixing rate
  double theta = 0.10;          // regime switching threshold
  double lambda_reign = 0.5;    // EI weight in the hybrid score
  double rho_reign = 1.0;       // cross-context variance weight in the hybrid
  double gamma_exp3 = 0.1;      // exploration floor of the meta-bandit
  double alpha_explore = 0.5;   // exploration fraction of the two-phase policy
  int m_min = 3;                // distinct actions before rho_hat is defined
  int k_min_contexts = 0;       // fall back to greedy on the first k contexts

  std::string name() const;  // stable label used in outputs

  void validate() const {
    if (epsilon < 0.0 || epsilon > 1.0) throw BadSpec("epsilon outside [0, 1]");
    if (beta < 0.0) throw BadSpec("beta must be >= 0");
    if (m_min < 2) throw BadSpec("m must be >= 2");
    if (lambda_reign < 0.0 || lambda_reign > 1.0)
      throw BadSpec("lambda outside [0, 1]");
    if (kind == PlannerKind::two_phase &&
        (alpha_explore <= 0.0 || alpha_explore >= 1.0))
      throw BadSpec("alpha_explore outside (0, 1)");
    if (gamma_exp3 < 0.0 || gamma_exp3 > 1.0)
      throw BadSpec("gamma outside [0, 1]");
  }
};

// ---------------------------------------------------------------------------
// Scoring primitives
// ---------------------------------------------------------------------------

inline double ucb_score(double mean, double sd, double beta) {
  return mean + beta * sd;
}

double normal_cdf(double x);
double normal_pdf(double x);

/// Gaussian expected improvement over the incumbent.
double expected_improvement(double mean, double sd, double best_observed);

/// EI/uncertainty hybrid:
///   lambda * EI(mean, sd, best) + (1 - lambda) * sd * (1 + rho_w * cross_var).
double reign_score(double mean, double sd, double best_observed,
                   double cross_context_var, double lambda, double rho_w);

/// Remaining-budget exploration schedule: beta_max * sqrt(r_t / B).
double budget_aware_beta(double beta_max, int remaining, int budget);

/// Thompson draw: one Gaussian sample per action, argmax, ties to the lowest
/// index. Zero-variance arms contribute their mean deterministically.
int thompson_draw(const PosteriorState& posterior, double sigma2, Rng& rng);

// ---------------------------------------------------------------------------
// EXP3 meta-bandit (arms = planner choices, reward = context Hit@1)
// ---------------------------------------------------------------------------

struct Exp3State {
  std::vector<double> weights;

  explicit Exp3State(int n_arms = 2) : weights(n_arms, 1.0) {}
  std::vector<double> probabilities(double gamma) const;
  int select(double gamma, Rng& rng) const;
};

/// Importance-weighted exponential update of the chosen arm; rewards must be
/// in [0, 1].
Exp3State exp3_update(Exp3State state, int chosen, double reward,
                      double gamma);

// ---------------------------------------------------------------------------
// Non-adaptive policies
// ---------------------------------------------------------------------------

/// The B actions with the highest prior means, descending, ties by lowest
/// index. Throws BudgetExceedsActions when B > |A|.
std::vector<int> rank_greedy_sequence(const PriorState& prior, int budget);

struct TwoPhasePlan {
  std::vector<int> explore_actions;  // one entry per exploration query
  int n_explore = 0;                 // floor(alpha * B)
};

/// Exploration schedule of the two-phase policy: floor(alpha*B) queries spread
/// round-robin over a uniformly random arm ordering (each arm floor or ceil of
/// B_e/n pulls; fewer queries than arms explore a random distinct subset).
/// The remaining budget exploits the updated posterior argmax.
TwoPhasePlan two_phase_policy(int n_actions, int budget, double alpha_explore,
                              Rng& rng);

// ---------------------------------------------------------------------------
// Regime planner step
// ---------------------------------------------------------------------------

struct StepDecision {
  int action = 0;
  Mode mode = Mode::explore;
  std::optional<double> rho_hat;  // set when the online estimate was defined
  std::optional<double> prs_t;
};

/// One step of the regime-switching rule. During warm start the action is
/// uniform over unqueried actions. Afterwards the online Spearman estimate
/// over distinct queried actions sets PRS_t = b_ratio * (1 - rho_hat); the
/// planner exploits (posterior-mean argmax) iff PRS_t < theta and otherwise
/// explores with the UCB rule. An undefined rho_hat keeps the planner in
/// explore mode.
StepDecision regime_planner_step(const PriorState& prior,
                                 const PosteriorState& posterior,
                                 const std::vector<std::pair<int, double>>&
                                     mean_outcomes,  // per distinct action
                                 int t, const PlannerSpec& spec,
                                 const EpisodeConfig& config, double b_ratio,
                                 double sigma2, const std::vector<char>& queried,
                                 int context_index, Rng& rng);

// ---------------------------------------------------------------------------
// Episode-level planner runtime
// ---------------------------------------------------------------------------

/// State shared across the contexts of a chain: the EXP3 meta-bandit and the
/// per-action spread of context means (the cross-context variance used by the
/// hybrid score).
struct ChainShared {
  Exp3State exp3{2};      // arms: 0 = greedy, 1 = ucb
  int last_meta_arm = -1; // arm drawn by the most recent exp3 episode
  std::vector<long long> ctx_n;     // per action: contexts with an observation
  std::vector<double> ctx_mean;     // running mean of context means
  std::vector<double> ctx_m2;       // running sum of squared deviations

  void init(int n_actions);
  void absorb_context_means(const std::vector<std::optional<double>>& means);
  double cross_context_var(int action) const;
};

/// Per-episode planner driver. Owns the transient state a policy needs inside
/// one context (two-phase plan, per-episode coin flips, rho trajectory).
class PlannerRuntime {
 public:
  PlannerRuntime(const PlannerSpec& spec, const EpisodeConfig& config,
                 int n_actions, int context_index, const double* true_scores,
                 const PriorState& prior, ChainShared* shared, Rng& rng);

  StepDecision select(int t, const PosteriorState& posterior, double sigma2,
                      const std::vector<char>& queried,
                      const std::vector<std::pair<int, double>>& mean_outcomes,
                      double best_observed, Rng& rng);

  /// EXP3 arm chosen for this episode, if the policy is the meta-bandit.
  std::optional<int> exp3_arm() const { return exp3_arm_; }

 private:
  int argmax_posterior_mean(const PosteriorState& post, double sigma2,
                            const std::vector<char>& queried) const;
  int argmax_ucb(const PosteriorState& post, double sigma2, double beta,
                 const std::vector<char>& queried) const;
  int uniform_unqueried(const std::vector<char>& queried, Rng& rng) const;

  const PlannerSpec& spec_;
  const EpisodeConfig& config_;
  int n_;
  int budget_;
  int context_index_;
  const double* true_scores_;  // may be null when the truth is hidden
  const PriorState& prior_;
  ChainShared* shared_;

  PlannerKind effective_kind_;       // after per-episode coin / meta choice
  std::optional<int> exp3_arm_;
  std::optional<double> true_rho_;   // oracle_prs: Spearman(prior, truth)
  TwoPhasePlan two_phase_;
  std::vector<int> rank_sequence_;
};

}  // namespace relab
