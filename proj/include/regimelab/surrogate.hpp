#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "regimelab/core.hpp"

namespace relab {

struct NoAnchors : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DegenerateFeature : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct BadKernel : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Default surrogate constants; all overridable through configuration.
inline constexpr double kDefaultObsNoiseVar = 0.1;   // sigma^2
inline constexpr double kDefaultPriorVar = 1.0;      // tau^2
inline constexpr double kDefaultEmaAlpha = 0.9;      // memory weight

// ---------------------------------------------------------------------------
// Prior state
// ---------------------------------------------------------------------------

/// Per-action belief carried between contexts.
struct PriorState {
  PriorFamily family = PriorFamily::flat;
  std::vector<double> mean;
  std::vector<double> variance;
  double alpha = kDefaultEmaAlpha;  // EMA memory weight, used by the ema family

  int n_actions() const { return static_cast<int>(mean.size()); }

  static PriorState flat(int n, double tau2 = kDefaultPriorVar);
  static PriorState from_means(PriorFamily family,
                               std::vector<double> means,
                               double tau2 = kDefaultPriorVar,
                               double alpha = kDefaultEmaAlpha);
  /// Oracle family: per-action cross-context mean of the table.
  static PriorState oracle(const OracleTable& table,
                           double tau2 = kDefaultPriorVar);
};

/// EMA transfer: mean' = alpha * mean + (1 - alpha) * ybar for every action
/// with an observed context mean; actions unobserved in the context are left
/// unchanged. Requires an ema-family prior.
PriorState ema_transfer(const PriorState& prior,
                        const std::vector<std::optional<double>>& context_means);

// ---------------------------------------------------------------------------
// Posterior state
// ---------------------------------------------------------------------------

/// Independent-arm conjugate Gaussian posterior over the prior. Arms with no
/// observations keep their prior mean and variance.
struct PosteriorState {
  std::vector<double> prior_mean;
  std::vector<double> prior_var;
  std::vector<int> obs_count;
  std::vector<double> obs_sum;

  static PosteriorState from_prior(const PriorState& prior);

  int n_actions() const { return static_cast<int>(prior_mean.size()); }

  double mean(int action, double sigma2) const;
  double variance(int action, double sigma2) const;

  void observe(int action, double y, double sigma2);
};

/// Functional form of the conjugate update:
///   mean' = (mu/v + sum_y/sigma^2) / (1/v + n/sigma^2)
///   var'  = 1 / (1/v + n/sigma^2)
/// with v the prior variance, n the pull count and sum_y including y.
PosteriorState posterior_update(PosteriorState state, int action, double y,
                                double sigma2);

// ---------------------------------------------------------------------------
// Structured priors
// ---------------------------------------------------------------------------

enum class Kernel { tanimoto_binary, cosine, rbf };

Kernel kernel_from_string(const std::string& s);

struct Anchor {
  int action;
  double value;
};

/// Kernel-weighted regression of anchor values onto every action. The prior
/// variance shrinks with the best similarity to any anchor:
///   var_a = clamp(tau^2 * (1 - max_j sim(a, anchor_j)), tau2_min, tau^2).
/// An action identical to an anchor (similarity 1) takes the anchor value
/// exactly; an action with zero similarity to every anchor falls back to the
/// global anchor mean at full variance.
PriorState make_structured_prior(const std::vector<std::vector<double>>& features,
                                 Kernel kernel,
                                 const std::vector<Anchor>& anchors,
                                 double tau2 = kDefaultPriorVar,
                                 double tau2_min = 1e-4,
                                 double rbf_length = 1.0);

/// Pairwise kernel matrix over action features (row-major n x n).
std::vector<double> kernel_matrix(const std::vector<std::vector<double>>& features,
                                  Kernel kernel, double rbf_length = 1.0);

/// Spectral concentration of a symmetric PSD kernel: lambda_max / trace,
/// in [1/n, 1]. A flat prior sits at the lower bound, a rank-one kernel at 1.
double spectral_concentration(const std::vector<double>& kernel, int n);

/// Noise-degraded rank correlation: rho0 / (1 + sigma2_obs / (kappa * eta2)).
double effective_rho(double rho0, double kappa, double eta2,
                     double sigma2_obs);

}  // namespace relab
