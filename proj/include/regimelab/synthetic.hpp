#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regimelab/analysis_types.hpp"
#include "regimelab/core.hpp"
#include "regimelab/planners.hpp"
#include "regimelab/rng.hpp"
#include "regimelab/surrogate.hpp"

namespace relab {

struct MissingBaseline : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Controlled-correlation Gaussian bandits
// ---------------------------------------------------------------------------

/// One synthetic context: true means, prior scores, and the observation
/// noise level.
struct BanditInstance {
  std::vector<double> true_means;   // mu_a ~ N(0, eta2) iid
  std::vector<double> prior_means;  // correlated prior scores
  double obs_noise_sd = 0.0;
  double eta2 = 1.0;

  int n_actions() const { return static_cast<int>(true_means.size()); }
  OracleTable as_table() const;
};

/// Pearson parameterization: mu_hat = rho * mu + sqrt(1 - rho^2) * eps with
/// eps ~ N(0, eta2), so corr(mu_hat, mu) = rho exactly in expectation.
BanditInstance gen_bandit(int n, double eta2, double rho_pearson,
                          double obs_noise_sd, Rng& rng);

/// Additive parameterization: mu_hat = mu + eps with eps ~ N(0, tau2); the
/// implied correlation is eta / sqrt(eta^2 + tau^2).
BanditInstance gen_bandit_tau(int n, double eta2, double tau2,
                              double obs_noise_sd, Rng& rng);

// ---------------------------------------------------------------------------
// Episode and chain runners
// ---------------------------------------------------------------------------

struct EpisodeParams {
  double sigma2_model = kDefaultObsNoiseVar;  // surrogate noise variance
  std::vector<int> hit_ks = {1, 5, 10};       // ks evaluated (clipped to |A|)
};

/// One context under one planner. The prior is taken as given; the posterior
/// starts from it, warm-start queries precede adaptive selection, and every
/// query is answered by the table. Identical inputs (including the stream)
/// produce identical records.
RunRecord run_episode(const OracleTable& table, int context,
                      const PriorState& prior, const PlannerSpec& planner,
                      const EpisodeConfig& config, const EpisodeParams& params,
                      Rng& rng, ChainShared* shared = nullptr,
                      int context_index = 0);

/// Convenience wrapper for a single synthetic context.
RunRecord run_episode(const BanditInstance& instance,
                      const PlannerSpec& planner, const EpisodeConfig& config,
                      const EpisodeParams& params, Rng& rng);

struct ChainConfig {
  PriorFamily family = PriorFamily::ema;
  double alpha = kDefaultEmaAlpha;
  double tau2 = kDefaultPriorVar;
  // structured-prior ingredients (used when family == structured)
  const std::vector<std::vector<double>>* features = nullptr;
  Kernel kernel = Kernel::tanimoto_binary;
};

struct ChainResult {
  std::vector<RunRecord> records;        // one per context, in order
  std::vector<double> per_context_hit1;  // terminal Hit@1 per context
  std::vector<double> per_context_auc;
  PriorState final_prior;
};

/// Sequential contexts with cross-context transfer. The ema family propagates
/// posterior means by exponential moving average; structured priors are
/// re-fit from accumulated (action, cross-context mean) anchors; flat and
/// oracle priors are rebuilt each context.
ChainResult run_chain(const OracleTable& table, const PlannerSpec& planner,
                      const EpisodeConfig& config, const ChainConfig& chain,
                      const EpisodeParams& params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic validation grid
// ---------------------------------------------------------------------------

/// Sweep definition. Defaults reproduce the 3 x 10 x 7 x 3 = 630 condition
/// grid: action counts {50, 100, 200}, ten budget ratios in [0.05, 0.70],
/// seven log-spaced prior-noise levels in [0.05, 5.0], observation noise
/// {0.1, 0.5, 1.0}, 200 seeds per condition.
struct GridSpec {
  std::vector<int> n_actions_set = {50, 100, 200};
  std::vector<double> budget_ratios;  // filled by defaults()
  std::vector<double> tau2_set;       // filled by defaults()
  std::vector<double> sigma2_set = {0.1, 0.5, 1.0};
  double eta2 = 1.0;
  int seeds_per_condition = 200;
  std::uint64_t master_seed = 0;

  static GridSpec defaults();
  /// Scaled-down tier: 3 x 5 x 7 x 1 = 105 conditions, 50 seeds.
  static GridSpec ci_tier();

  std::size_t n_conditions() const {
    return n_actions_set.size() * budget_ratios.size() * tau2_set.size() *
           sigma2_set.size();
  }

  struct Condition {
    int index;
    int n_actions;
    int budget;       // round(b * n), at least 1
    double b_ratio;   // requested ratio
    double tau2;
    double sigma2;
  };
  std::vector<Condition> conditions() const;

  void validate() const;
};

/// One row per condition: realized mean rank correlation, PRS, and
/// per-planner metric summaries over the condition's seeds.
std::vector<ConditionRow> run_grid(const GridSpec& spec,
                                   const std::vector<PlannerSpec>& planners,
                                   const EpisodeConfig& episode_defaults,
                                   int n_threads = 0);

/// Serial reference for the parallel runner; kept for testing. Produces
/// bit-identical rows.
std::vector<ConditionRow> run_grid_serial(
    const GridSpec& spec, const std::vector<PlannerSpec>& planners,
    const EpisodeConfig& episode_defaults);

/// Hit@1 gain of prior-guided selection over uniform exploration:
/// mean Hit@1(rank_greedy) - mean Hit@1(random). Both planners must be
/// present in the row.
double prior_benefit(const ConditionRow& row);

}  // namespace relab
