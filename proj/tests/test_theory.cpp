#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "regimelab/theory.hpp"

using namespace relab;

TEST_CASE("two-arm closed form") {
  CHECK(sheppard_hit1(0.0) == doctest::Approx(0.5));
  CHECK(sheppard_hit1(1.0) == doctest::Approx(1.0));
  CHECK(sheppard_hit1(0.5) == doctest::Approx(2.0 / 3.0));
  CHECK(sheppard_hit1(-1.0) == doctest::Approx(0.0));
}

TEST_CASE("two-arm MC agrees with the closed form") {
  for (double rho : {0.0, 0.5, 0.95}) {
    const ClosedFormResult r = mc_two_arm_greedy(rho, 100000, 314);
    CHECK(r.pass);
    CHECK(std::abs(r.mc_estimate - sheppard_hit1(rho)) <= 3.0 * r.mc_se);
  }
}

TEST_CASE("ema variance closed form boundary values") {
  CHECK(ema_variance(0.9, 0, 1.7, 0.1) == doctest::Approx(1.7));
  // Transient factor 0.9^30 and the steady-state floor.
  CHECK(std::pow(0.9, 30) == doctest::Approx(0.0424).epsilon(1e-2));
  const double floor = 0.1 * (1 - 0.9) / (1 + 0.9);
  CHECK(floor == doctest::Approx(0.00526).epsilon(1e-2));
  CHECK(ema_variance(0.9, 500, 1.0, 0.1) == doctest::Approx(floor));
  // One-step unrolling at alpha near 1.
  CHECK(ema_variance(0.99, 1, 1.0, 0.1) ==
        doctest::Approx(0.9801 + 0.1 * 0.01 / 1.99 * (1 - 0.9801)));
}

TEST_CASE("ema variance MC within 2 percent") {
  for (const auto& [alpha, K] :
       std::vector<std::pair<double, int>>{{0.9, 15}, {0.5, 5}}) {
    const ClosedFormResult r = mc_ema_variance(alpha, K, 1.0, 0.5, 100000, 9);
    CHECK(r.pass);
    CHECK(std::abs(r.mc_estimate - r.analytic) / r.analytic < 0.02);
  }
}

TEST_CASE("rank-greedy boundary values") {
  const ClosedFormResult zero = mc_rank_greedy(0.3, 0.0, 100, 50000, 77);
  CHECK(zero.pass);

  const ClosedFormResult one = mc_rank_greedy(0.3, 1.0, 100, 5000, 78);
  CHECK(one.mc_estimate == doctest::Approx(1.0));

  const ClosedFormResult two_arm = mc_rank_greedy(0.5, 0.6, 2, 50000, 79);
  CHECK(two_arm.pass);
  CHECK(two_arm.analytic == doctest::Approx(sheppard_hit1(0.6)));
}

TEST_CASE("rank-greedy estimate nondecreasing in rho") {
  double prev_hi = -1.0;
  for (double rho : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const McEstimate est = mc_rank_greedy_estimate(0.2, rho, 80, 20000, 55);
    // Non-crossing 95% bands against the previous point.
    CHECK(est.hi95() >= prev_hi - 1e-12);
    prev_hi = est.lo95();
  }
}

TEST_CASE("two-phase success directional checks") {
  // Rising in the budget ratio.
  double prev_hi = -1.0;
  for (double b : {1.0, 2.0, 4.0}) {
    const McEstimate est = mc_two_phase_success(50, b, 0.5, 0.5, 20000, 61);
    CHECK(est.hi95() >= prev_hi);
    prev_hi = est.lo95();
  }
  // Falling in observation noise.
  double prev_lo = 2.0;
  for (double s2 : {0.1, 1.0, 4.0}) {
    const McEstimate est = mc_two_phase_success(50, 2.0, 0.5, s2, 20000, 62);
    CHECK(est.lo95() <= prev_lo);
    prev_lo = est.hi95();
  }
}

TEST_CASE("validator registry") {
  const auto all = run_all_validators(20240901);
  CHECK(static_cast<int>(all.size()) == validator_count());
  for (const auto& r : all) CHECK(r.pass);

  // Injected error flips at least one check.
  const auto broken = run_all_validators(20240901, true);
  int failures = 0;
  for (const auto& r : broken) failures += !r.pass;
  CHECK(failures >= 1);
}
