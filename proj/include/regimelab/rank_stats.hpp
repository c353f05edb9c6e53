#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "regimelab/core.hpp"

namespace relab {

struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct UndefinedCorrelation : std::domain_error {
  using std::domain_error::domain_error;
};
struct EmptyPilot : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Average ranks (1-based); tied values receive the mean of their rank span.
std::vector<double> average_ranks(const std::vector<double>& x);

/// Spearman rank correlation: Pearson correlation of average ranks.
/// Throws LengthMismatch on size mismatch or size < 2, UndefinedCorrelation
/// when either input is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Portable regime score (B/|A|)(1 - rho). A negative rho (anti-informative
/// prior) pushes the score above the bare budget ratio.
double prs(int budget, int n_actions, double rho);

/// Online rank-correlation estimate over distinct queried actions. Undefined
/// (nullopt) below m_min distinct actions or when either vector is constant;
/// undefined is a value here, not an error.
std::optional<double> estimate_rho_online(
    const std::vector<double>& prior_means,
    const std::vector<double>& outcomes, int m_min);

struct PilotEstimate {
  double prs = 0.0;
  double rho_hat = 0.0;
  bool rho_defined = false;  // false -> rho treated as 0 and flagged
  int n_pairs = 0;
  bool k0_below_recommended = false;  // fewer than 3 pilot contexts
};

/// Pool (prior mean, mean outcome) pairs of queried actions across pilot
/// contexts and convert the pooled rank correlation into a PRS estimate.
/// Records must carry their context-start prior means.
PilotEstimate pilot_prs(const std::vector<RunRecord>& pilot_records,
                        int budget, int n_actions);

enum class Winner { greedy, explore, tie };
const char* to_string(Winner w);

struct RegimeClassification {
  double prs = 0.0;
  double theta = 0.10;
  Winner predicted = Winner::explore;  // explore iff prs >= theta
  bool in_boundary_zone = false;       // prs in [0.05, 0.15)
  bool k_sufficient = false;           // K >= c_k * |A| / B, c_k = 2
};

inline constexpr double kBoundaryZoneLow = 0.05;
inline constexpr double kBoundaryZoneHigh = 0.15;
inline constexpr double kKSufficiencyFactor = 2.0;  // lower edge of the 2..4 band

RegimeClassification classify_regime(double prs_value, double theta, int K,
                                     int B, int n_actions);

}  // namespace relab
