#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "regimelab/analysis.hpp"
#include "regimelab/rng.hpp"

using namespace relab;

namespace {

OracleTable three_action_table() {
  OracleTable t;
  t.n_contexts = 1;
  t.n_actions = 3;
  t.scores = {0.0, 0.5, 1.0};
  return t;
}

RunRecord record_of(std::initializer_list<int> actions) {
  RunRecord rec;
  int t = 0;
  for (int a : actions) rec.queried.push_back({t++, a, 0.0});
  return rec;
}

}  // namespace

TEST_CASE("hit at k") {
  const OracleTable t = three_action_table();
  CHECK(hit_at_k(record_of({2}), t, 0, 1) == 1);
  CHECK(hit_at_k(record_of({0}), t, 0, 1) == 0);
  CHECK(hit_at_k(record_of({0, 1}), t, 0, 2) == 1);
  CHECK_THROWS_AS(hit_at_k(record_of({0}), t, 0, 4), BadK);
  CHECK_THROWS_AS(hit_at_k(record_of({0}), t, 0, 0), BadK);

  // Monotone nondecreasing in k.
  const RunRecord rec = record_of({1});
  int prev = 0;
  for (int k = 1; k <= 3; ++k) {
    const int h = hit_at_k(rec, t, 0, k);
    CHECK(h >= prev);
    prev = h;
  }
}

TEST_CASE("discovery auc reference curves") {
  const OracleTable t = three_action_table();
  CHECK(discovery_auc(record_of({2, 0, 1}), t, 0) == doctest::Approx(1.0));
  CHECK(discovery_auc(record_of({0, 1, 2}), t, 0) == doctest::Approx(0.5));

  OracleTable flat;
  flat.n_contexts = 1;
  flat.n_actions = 3;
  flat.scores = {0.4, 0.4, 0.4};
  CHECK(discovery_auc(record_of({0, 1}), flat, 0) == doctest::Approx(1.0));
}

TEST_CASE("discovery auc monotone under best-first prepending") {
  const OracleTable t = three_action_table();
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    RunRecord any;
    const int len = 1 + static_cast<int>(rng.next_index(6));
    for (int i = 0; i < len; ++i)
      any.queried.push_back({i, static_cast<int>(rng.next_index(3)), 0.0});
    RunRecord best_first;
    best_first.queried.push_back({0, 2, 0.0});
    for (const auto& q : any.queried)
      best_first.queried.push_back({q.step + 1, q.action, q.value});
    CHECK(discovery_auc(best_first, t, 0) >= discovery_auc(any, t, 0));
    const double auc = discovery_auc(any, t, 0);
    CHECK(auc >= 0.0);
    CHECK(auc <= 1.0);
  }
}

TEST_CASE("exploration advantage arithmetic") {
  ConditionRow row;
  PlannerStats g, u;
  g.hit1_mean = 0.389;
  u.hit1_mean = 0.339;
  row.per_planner["greedy"] = g;
  row.per_planner["ucb"] = u;
  CHECK(exploration_advantage(row).value == doctest::Approx(-0.050));

  row.per_planner["ucb"].hit1_mean = 0.687;
  row.per_planner["greedy"].hit1_mean = 0.652;
  CHECK(exploration_advantage(row).value == doctest::Approx(0.035));

  row.per_planner["greedy"].hit1_mean = row.per_planner["ucb"].hit1_mean;
  CHECK(exploration_advantage(row).value == doctest::Approx(0.0));

  CHECK_THROWS_AS(exploration_advantage(row, "thompson"), MissingPlanner);
}

TEST_CASE("mixture weight closed form") {
  // Sign-flipped pair from a budget reversal: any target in between is
  // achievable exactly.
  const double lambda = mixture_weight(-0.050, 0.035, 0.0);
  CHECK(lambda == doctest::Approx(0.5882).epsilon(1e-3));
  CHECK(lambda * 0.035 + (1 - lambda) * -0.050 == doctest::Approx(0.0));

  CHECK(mixture_weight(-0.050, 0.035, 0.035) == doctest::Approx(1.0));
  CHECK(mixture_weight(-0.050, 0.035, -0.050) == doctest::Approx(0.0));

  CHECK_THROWS_AS(mixture_weight(0.01, 0.05, 0.02), PreconditionFailed);
  CHECK_THROWS_AS(mixture_weight(-0.05, 0.035, 0.05), TargetUnreachable);
}

TEST_CASE("mixture weight reproduces targets exactly over random pairs") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const double lo = -(0.001 + rng.next_double());
    const double hi = 0.001 + rng.next_double();
    const double target = lo + rng.next_double() * (hi - lo);
    const double lambda = mixture_weight(lo, hi, target);
    CHECK(lambda >= 0.0);
    CHECK(lambda <= 1.0);
    CHECK(std::abs(lambda * hi + (1 - lambda) * lo - target) < 1e-12);
  }
}

TEST_CASE("eta squared decomposition") {
  using Cells = std::vector<std::vector<std::vector<double>>>;

  // Values vary only across factor A levels.
  Cells a_only = {{{1, 1}, {1, 1}}, {{3, 3}, {3, 3}}};
  const EtaSquared ea = eta_squared(a_only);
  CHECK(ea.factor_a == doctest::Approx(1.0));
  CHECK(ea.factor_b == doctest::Approx(0.0));
  CHECK(ea.interaction == doctest::Approx(0.0));
  CHECK(ea.residual == doctest::Approx(0.0));

  // Pure iid noise: the residual carries nearly everything.
  Rng rng(13);
  Cells noise(3, std::vector<std::vector<double>>(3));
  for (auto& rowv : noise)
    for (auto& cell : rowv)
      for (int s = 0; s < 200; ++s) cell.push_back(rng.next_gaussian());
  const EtaSquared en = eta_squared(noise);
  CHECK(en.residual > 0.97);

  // Hand-built 2 x 2 with 2 replicates against a brute-force SS oracle.
  Cells hand = {{{1.0, 2.0}, {3.0, 5.0}}, {{2.0, 2.0}, {7.0, 9.0}}};
  std::vector<double> all;
  for (auto& rowv : hand)
    for (auto& cell : rowv)
      for (double v : cell) all.push_back(v);
  double grand = 0;
  for (double v : all) grand += v;
  grand /= all.size();
  double ss_tot = 0;
  for (double v : all) ss_tot += (v - grand) * (v - grand);
  const double ma0 = (1 + 2 + 3 + 5) / 4.0, ma1 = (2 + 2 + 7 + 9) / 4.0;
  const double mb0 = (1 + 2 + 2 + 2) / 4.0, mb1 = (3 + 5 + 7 + 9) / 4.0;
  const double ss_a = 4 * ((ma0 - grand) * (ma0 - grand) +
                           (ma1 - grand) * (ma1 - grand));
  const double ss_b = 4 * ((mb0 - grand) * (mb0 - grand) +
                           (mb1 - grand) * (mb1 - grand));
  const EtaSquared eh = eta_squared(hand);
  CHECK(eh.factor_a == doctest::Approx(ss_a / ss_tot));
  CHECK(eh.factor_b == doctest::Approx(ss_b / ss_tot));
  CHECK(eh.factor_a + eh.factor_b + eh.interaction + eh.residual ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(eh.factor_a >= 0.0);
  CHECK(eh.factor_b >= 0.0);
  CHECK(eh.interaction >= 0.0);
  CHECK(eh.residual >= 0.0);

  Cells ragged = {{{1, 2}, {3}}, {{4, 5}, {6, 7}}};
  CHECK_THROWS_AS(eta_squared(ragged), UnbalancedDesign);
}

TEST_CASE("threshold budget formula") {
  const ThresholdCalibration cal;
  const double b_dagger = threshold_b_dagger(
      cal.sigma2, cal.n, cal.alpha_explore, cal.c_n, cal.c, cal.delta_min);
  CHECK(b_dagger > 45.0);
  CHECK(b_dagger < 65.0);

  // Strictly increasing in sigma2 over [0.05, 1].
  double prev = 0.0;
  for (double s2 = 0.05; s2 <= 1.0; s2 += 0.05) {
    const double cur = threshold_b_dagger(s2, cal.n, cal.alpha_explore,
                                          cal.c_n, cal.c, cal.delta_min);
    CHECK(cur > prev);
    prev = cur;
  }

  // Doubling c halves the prefactor and shifts the log by log 2.
  const double c1 = threshold_b_dagger(0.1, 156, 0.5, 1.0, 300.0, 0.16);
  const double c2 = threshold_b_dagger(0.1, 156, 0.5, 1.0, 600.0, 0.16);
  const double gap = c1 / 2.0 + 156 * (0.1 / (300.0 * 0.5 * 0.16 * 0.16)) *
                                    0.5 * std::log(2.0);
  CHECK(c2 == doctest::Approx(gap).epsilon(1e-9));

  CHECK_THROWS_AS(threshold_b_dagger(1e9, 2, 0.5, 1.0, 1.0, 1e-6),
                  OutOfRegime);
}

TEST_CASE("regime accuracy bookkeeping") {
  auto make_row = [](double prs, double advantage) {
    ConditionRow r;
    r.prs = prs;
    r.advantage = advantage;
    return r;
  };
  std::vector<ConditionRow> rows = {
      make_row(0.02, -0.2),  // predicted greedy, greedy wins
      make_row(0.30, 0.2),   // predicted explore, explore wins
      make_row(0.30, -0.2),  // predicted explore, greedy wins
      make_row(0.08, 0.001), // tie
  };
  const RegimeAccuracy acc = regime_accuracy(rows, 0.10);
  CHECK(acc.n_ties == 1);
  CHECK(acc.equivalence_fraction == doctest::Approx(0.25));
  REQUIRE(acc.overall.has_value());
  CHECK(*acc.overall == doctest::Approx(2.0 / 3.0));

  const std::vector<ConditionRow> all_tied = {make_row(0.2, 0.0),
                                              make_row(0.1, 0.005)};
  const RegimeAccuracy tied = regime_accuracy(all_tied, 0.10);
  CHECK_FALSE(tied.overall.has_value());
  CHECK(tied.equivalence_fraction == doctest::Approx(1.0));

  const std::vector<ConditionRow> all_right = {make_row(0.02, -0.1),
                                               make_row(0.25, 0.1),
                                               make_row(0.18, 0.05)};
  CHECK(*regime_accuracy(all_right, 0.10).overall == doctest::Approx(1.0));
}

TEST_CASE("per-context oracle") {
  std::map<std::string, std::vector<double>> same = {
      {"greedy", {1, 0, 1}}, {"ucb", {1, 0, 1}}};
  CHECK(per_context_oracle(same) == doctest::Approx(2.0 / 3.0));

  std::map<std::string, std::vector<double>> disjoint = {
      {"greedy", {1, 0}}, {"ucb", {0, 1}}};
  CHECK(per_context_oracle(disjoint) == doctest::Approx(1.0));

  std::map<std::string, std::vector<double>> three = {
      {"a", {1, 0, 0}}, {"b", {0, 0, 1}}};
  CHECK(per_context_oracle(three) == doctest::Approx(2.0 / 3.0));

  std::map<std::string, std::vector<double>> bad = {{"a", {1, 0}},
                                                    {"b", {1}}};
  CHECK_THROWS_AS(per_context_oracle(bad), MisalignedRuns);
}

TEST_CASE("federated drift score and retrodiction") {
  CHECK(prs_fl(1, 0) == doctest::Approx(1.0));
  CHECK(prs_fl(10, 10) == doctest::Approx(9.0));
  CHECK(prs_fl(20, 100) == doctest::Approx(0.0));
  CHECK_THROWS_AS(prs_fl(0.5, 10), BadValue);
  CHECK_THROWS_AS(prs_fl(5, 120), BadValue);

  const FlRetrodiction retro = fl_retrodiction(5.0);
  CHECK(retro.total == 12);
  CHECK(retro.correct == 10);
  // The two misses are the intermediate-similarity, many-local-steps rows.
  const auto& table = fl_reference_table();
  for (int i = 0; i < retro.total; ++i) {
    const bool is_miss = table[i].similarity_pct == 10.0 &&
                         table[i].local_steps >= 10.0;
    CHECK(retro.row_correct[i] == !is_miss);
  }
}
