#include "regimelab/theory.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "regimelab/core.hpp"
#include "regimelab/synthetic.hpp"

namespace relab {

namespace {

constexpr double kPi = 3.14159265358979323846;

ClosedFormResult make_result(std::string name, double analytic, double est,
                             double se, long long n) {
  ClosedFormResult r;
  r.name = std::move(name);
  r.analytic = analytic;
  r.mc_estimate = est;
  r.mc_se = se;
  r.n_draws = n;
  r.pass = std::abs(analytic - est) <= 3.0 * se ||
           (se == 0.0 && analytic == est);
  return r;
}

double freq_se(double p_hat, long long n) {
  return std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) / n);
}

}  // namespace

double sheppard_hit1(double rho) {
  if (rho < -1.0 || rho > 1.0) throw BadValue("rho outside [-1, 1]");
  return 0.5 + std::asin(rho) / kPi;
}

ClosedFormResult mc_two_arm_greedy(double rho, long long n_draws,
                                   std::uint64_t seed) {
  long long hits = 0;
  // Per-rep derived streams keep the count independent of thread schedule.
#pragma omp parallel for reduction(+ : hits) schedule(static)
  for (long long i = 0; i < n_draws; ++i) {
    Rng rng = Rng::keyed(seed, 0x2a72, static_cast<std::uint64_t>(i));
    const BanditInstance inst = gen_bandit(2, 1.0, rho, 0.0, rng);
    const int pick = inst.prior_means[0] >= inst.prior_means[1] ? 0 : 1;
    const int best = inst.true_means[0] >= inst.true_means[1] ? 0 : 1;
    hits += pick == best;
  }
  const double p = static_cast<double>(hits) / n_draws;
  return make_result("two_arm_greedy rho=" + std::to_string(rho),
                     sheppard_hit1(rho), p, freq_se(p, n_draws), n_draws);
}

double ema_variance(double alpha, int K, double tau2, double sigma2) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw BadValue("alpha outside (0, 1)");
  if (K < 0) throw BadValue("K must be >= 0");
  const double a2k = std::pow(alpha, 2.0 * K);
  return a2k * tau2 + sigma2 * (1.0 - alpha) / (1.0 + alpha) * (1.0 - a2k);
}

ClosedFormResult mc_ema_variance(double alpha, int K, double tau2,
                                 double sigma2, long long n_reps,
                                 std::uint64_t seed) {
  std::vector<double> terminal(n_reps);
  const double tau = std::sqrt(tau2);
  const double sigma = std::sqrt(sigma2);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n_reps; ++i) {
    Rng rng = Rng::keyed(seed, 0x656d61, static_cast<std::uint64_t>(i));
    double e = tau * rng.next_gaussian();
    for (int k = 0; k < K; ++k)
      e = alpha * e + (1.0 - alpha) * sigma * rng.next_gaussian();
    terminal[i] = e;
  }
  double mean = 0.0;
  for (double v : terminal) mean += v;
  mean /= n_reps;
  double var = 0.0;
  for (double v : terminal) var += (v - mean) * (v - mean);
  var /= (n_reps - 1);
  // Sample variance of a Gaussian has SE ~ var * sqrt(2 / (n - 1)).
  const double se = var * std::sqrt(2.0 / (n_reps - 1));
  return make_result("ema_variance alpha=" + std::to_string(alpha) +
                         " K=" + std::to_string(K),
                     ema_variance(alpha, K, tau2, sigma2), var, se, n_reps);
}

McEstimate mc_rank_greedy_estimate(double b, double rho, int n,
                                   long long n_reps, std::uint64_t seed) {
  const int B = std::max(1, static_cast<int>(std::lround(b * n)));
  long long hits = 0;
#pragma omp parallel for reduction(+ : hits) schedule(static)
  for (long long i = 0; i < n_reps; ++i) {
    Rng rng = Rng::keyed(seed, 0x726b67, static_cast<std::uint64_t>(i));
    const BanditInstance inst = gen_bandit(n, 1.0, rho, 0.0, rng);
    int best = 0;
    for (int a = 1; a < n; ++a)
      if (inst.true_means[a] > inst.true_means[best]) best = a;
    // Prior rank of the best arm: 1 + #{a : prior_a > prior_best}, ties
    // resolved toward lower indices as everywhere else.
    int rank = 1;
    const double pb = inst.prior_means[best];
    for (int a = 0; a < n; ++a) {
      if (a == best) continue;
      if (inst.prior_means[a] > pb ||
          (inst.prior_means[a] == pb && a < best))
        ++rank;
    }
    hits += rank <= B;
  }
  McEstimate est;
  est.n = n_reps;
  est.mean = static_cast<double>(hits) / n_reps;
  est.se = freq_se(est.mean, n_reps);
  return est;
}

ClosedFormResult mc_rank_greedy(double b, double rho, int n, long long n_reps,
                                std::uint64_t seed) {
  const McEstimate est = mc_rank_greedy_estimate(b, rho, n, n_reps, seed);
  double analytic;
  std::string label;
  if (rho == 0.0) {
    const int B = std::max(1, static_cast<int>(std::lround(b * n)));
    analytic = static_cast<double>(B) / n;
    label = "rank_greedy G(b,0)=b";
  } else if (rho == 1.0) {
    analytic = 1.0;
    label = "rank_greedy G(b,1)=1";
  } else if (n == 2) {
    analytic = sheppard_hit1(rho);
    label = "rank_greedy two-arm closed form";
  } else {
    // No closed form beyond the boundary cases; report the estimate against
    // itself so the record is still emitted.
    analytic = est.mean;
    label = "rank_greedy estimate";
  }
  return make_result(label + " b=" + std::to_string(b) +
                         " rho=" + std::to_string(rho) +
                         " n=" + std::to_string(n),
                     analytic, est.mean, est.se, n_reps);
}

McEstimate mc_two_phase_success(int n, double b, double alpha_explore,
                                double sigma2, long long n_reps,
                                std::uint64_t seed) {
  if (alpha_explore <= 0.0 || alpha_explore >= 1.0)
    throw BadValue("alpha_explore outside (0, 1)");
  const int B = std::max(1, static_cast<int>(std::lround(b * n)));
  const int B_e = static_cast<int>(std::floor(alpha_explore * B));
  const double sigma = std::sqrt(sigma2);
  long long hits = 0;
#pragma omp parallel for reduction(+ : hits) schedule(static)
  for (long long i = 0; i < n_reps; ++i) {
    Rng rng = Rng::keyed(seed, 0x747068, static_cast<std::uint64_t>(i));
    std::vector<double> mu(n);
    for (int a = 0; a < n; ++a) mu[a] = rng.next_gaussian();
    int best = 0;
    for (int a = 1; a < n; ++a)
      if (mu[a] > mu[best]) best = a;

    // Uniform exploration round-robin over a random ordering.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int j = n - 1; j > 0; --j) {
      const int k = static_cast<int>(rng.next_index(j + 1));
      std::swap(order[j], order[k]);
    }
    std::vector<double> sum(n, 0.0);
    std::vector<int> cnt(n, 0);
    for (int q = 0; q < B_e; ++q) {
      const int a = order[q % n];
      sum[a] += mu[a] + sigma * rng.next_gaussian();
      cnt[a] += 1;
    }
    // Identification: the exploitation phase queries the posterior argmax
    // (flat prior, mean zero for unexplored arms).
    int pick = 0;
    double best_mean = -1e300;
    for (int a = 0; a < n; ++a) {
      const double m = cnt[a] > 0 ? sum[a] / (cnt[a] + sigma2) : 0.0;
      if (m > best_mean) {
        best_mean = m;
        pick = a;
      }
    }
    hits += pick == best;
  }
  McEstimate est;
  est.n = n_reps;
  est.mean = static_cast<double>(hits) / n_reps;
  est.se = freq_se(est.mean, n_reps);
  return est;
}

std::vector<ClosedFormResult> run_all_validators(std::uint64_t seed,
                                                 bool inject_error) {
  std::vector<ClosedFormResult> out;
  const long long kDraws = 100000;

  for (double rho : {0.0, 0.25, 0.5, 0.75, 0.95})
    out.push_back(mc_two_arm_greedy(rho, kDraws, seed + 1));

  for (double alpha : {0.5, 0.9})
    for (int K : {1, 5, 15})
      out.push_back(mc_ema_variance(alpha, K, 1.0, 0.1, kDraws, seed + 2));

  for (double b : {0.1, 0.3, 0.5})
    out.push_back(mc_rank_greedy(b, 0.0, 100, kDraws, seed + 3));
  out.push_back(mc_rank_greedy(0.3, 1.0, 100, 10000, seed + 4));
  for (double rho : {0.3, 0.6})
    out.push_back(mc_rank_greedy(0.5, rho, 2, kDraws, seed + 5));

  if (inject_error && !out.empty()) {
    // Test hook: corrupt one closed form so the failure path is exercised.
    out.front().analytic += 0.05;
    out.front().pass =
        std::abs(out.front().analytic - out.front().mc_estimate) <=
        3.0 * out.front().mc_se;
  }
  return out;
}

int validator_count() { return 5 + 6 + 3 + 1 + 2; }

}  // namespace relab
