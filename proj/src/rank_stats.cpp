#include "regimelab/rank_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace relab {

std::vector<double> average_ranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double mean_rank = 0.5 * (static_cast<double>(i) + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UndefinedCorrelation("constant vector has no rank correlation");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw LengthMismatch("spearman inputs differ in length");
  if (x.size() < 2) throw LengthMismatch("spearman needs at least 2 pairs");
  return pearson(average_ranks(x), average_ranks(y));
}

double prs(int budget, int n_actions, double rho) {
  if (budget < 1) throw BadValue("budget must be >= 1");
  if (n_actions < 2) throw BadValue("need at least 2 actions");
  if (rho < -1.0 || rho > 1.0) throw BadValue("rho outside [-1, 1]");
  return (static_cast<double>(budget) / n_actions) * (1.0 - rho);
}

std::optional<double> estimate_rho_online(
    const std::vector<double>& prior_means,
    const std::vector<double>& outcomes, int m_min) {
  if (prior_means.size() != outcomes.size())
    throw LengthMismatch("online rho inputs differ in length");
  if (static_cast<int>(prior_means.size()) < std::max(m_min, 2))
    return std::nullopt;
  try {
    return spearman(prior_means, outcomes);
  } catch (const UndefinedCorrelation&) {
    return std::nullopt;
  }
}

PilotEstimate pilot_prs(const std::vector<RunRecord>& pilot_records,
                        int budget, int n_actions) {
  std::vector<double> priors, outcomes;
  for (const auto& rec : pilot_records) {
    for (const auto& [action, mean_y] : rec.mean_outcome_per_action()) {
      if (action < 0 ||
          action >= static_cast<int>(rec.prior_means_at_start.size()))
        throw IndexError("pilot record action outside prior snapshot");
      priors.push_back(rec.prior_means_at_start[action]);
      outcomes.push_back(mean_y);
    }
  }
  if (priors.empty()) throw EmptyPilot("pilot contexts queried nothing");

  PilotEstimate est;
  est.n_pairs = static_cast<int>(priors.size());
  est.k0_below_recommended = pilot_records.size() < 3;
  auto rho = estimate_rho_online(priors, outcomes, 2);
  if (rho.has_value()) {
    est.rho_hat = *rho;
    est.rho_defined = true;
  } else {
    // Conservative fallback: an unmeasurable correlation is treated as zero,
    // which maximizes PRS for any non-negative prior.
    est.rho_hat = 0.0;
    est.rho_defined = false;
  }
  est.prs = prs(budget, n_actions, est.rho_hat);
  return est;
}

const char* to_string(Winner w) {
  switch (w) {
    case Winner::greedy: return "greedy";
    case Winner::explore: return "explore";
    case Winner::tie: return "tie";
  }
  return "?";
}

RegimeClassification classify_regime(double prs_value, double theta, int K,
                                     int B, int n_actions) {
  RegimeClassification c;
  c.prs = prs_value;
  c.theta = theta;
  c.predicted = prs_value >= theta ? Winner::explore : Winner::greedy;
  c.in_boundary_zone =
      prs_value >= kBoundaryZoneLow && prs_value < kBoundaryZoneHigh;
  c.k_sufficient =
      B > 0 && K >= kKSufficiencyFactor * static_cast<double>(n_actions) / B;
  return c;
}

}  // namespace relab
