#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regimelab/rng.hpp"

namespace relab {

/// One analytic-vs-Monte-Carlo comparison. Passing means the estimate lies
/// within three standard errors of the closed form (exact checks carry a
/// zero standard error and must match exactly).
struct ClosedFormResult {
  std::string name;
  double analytic = 0.0;
  double mc_estimate = 0.0;
  double mc_se = 0.0;
  long long n_draws = 0;
  bool pass = false;
};

/// Two-arm greedy success probability under a rank-rho prior:
/// 1/2 + arcsin(rho) / pi.
double sheppard_hit1(double rho);

/// Simulates the two-arm construction (correlated prior scores, one greedy
/// pick) and compares the success frequency against sheppard_hit1.
ClosedFormResult mc_two_arm_greedy(double rho, long long n_draws,
                                   std::uint64_t seed);

/// Variance of the EMA prior error after K contexts:
/// alpha^(2K) tau^2 + sigma^2 (1-alpha)(1 - alpha^(2K)) / (1+alpha).
double ema_variance(double alpha, int K, double tau2, double sigma2);

/// Simulates the scalar EMA recursion with fresh Gaussian context errors and
/// compares the sample variance of the terminal error to the closed form.
ClosedFormResult mc_ema_variance(double alpha, int K, double tau2,
                                 double sigma2, long long n_reps,
                                 std::uint64_t seed);

/// MC estimate of P(prior rank of the best arm <= B) under the controlled-
/// correlation construction. Exact references: b at rho = 0, 1 at rho = 1,
/// and the two-arm closed form at n = 2, b = 0.5.
ClosedFormResult mc_rank_greedy(double b, double rho, int n, long long n_reps,
                                std::uint64_t seed);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  long long n = 0;
  double lo95() const { return mean - 1.96 * se; }
  double hi95() const { return mean + 1.96 * se; }
};

/// Rank-greedy hit probability as a plain estimate (for monotonicity grids).
McEstimate mc_rank_greedy_estimate(double b, double rho, int n,
                                   long long n_reps, std::uint64_t seed);

/// Success probability of the two-phase policy in its identification regime:
/// floor(alpha*B)/n uniform pulls per arm, then the exploitation phase
/// queries the posterior argmax; success means the best arm is identified.
/// Rises with the budget ratio and falls with observation noise.
McEstimate mc_two_phase_success(int n, double b, double alpha_explore,
                                double sigma2, long long n_reps,
                                std::uint64_t seed);

/// Every registered validator with its default inputs, seed-pinned.
std::vector<ClosedFormResult> run_all_validators(std::uint64_t seed,
                                                 bool inject_error = false);

/// Number of validators run_all_validators emits.
int validator_count();

}  // namespace relab
