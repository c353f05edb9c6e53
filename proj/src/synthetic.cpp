#include "regimelab/synthetic.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "regimelab/analysis.hpp"

namespace relab {

OracleTable BanditInstance::as_table() const {
  OracleTable t;
  t.n_contexts = 1;
  t.n_actions = n_actions();
  t.scores = true_means;
  t.obs_noise_sd = obs_noise_sd;
  return t;
}

BanditInstance gen_bandit(int n, double eta2, double rho_pearson,
                          double obs_noise_sd, Rng& rng) {
  if (rho_pearson < -1.0 || rho_pearson > 1.0)
    throw BadValue("rho outside [-1, 1]");
  if (eta2 <= 0.0) throw BadValue("eta2 must be > 0");
  BanditInstance inst;
  inst.eta2 = eta2;
  inst.obs_noise_sd = obs_noise_sd;
  inst.true_means.resize(n);
  inst.prior_means.resize(n);
  const double eta = std::sqrt(eta2);
  const double mix = std::sqrt(1.0 - rho_pearson * rho_pearson);
  for (int a = 0; a < n; ++a) {
    inst.true_means[a] = eta * rng.next_gaussian();
    inst.prior_means[a] =
        rho_pearson * inst.true_means[a] + mix * eta * rng.next_gaussian();
  }
  return inst;
}

BanditInstance gen_bandit_tau(int n, double eta2, double tau2,
                              double obs_noise_sd, Rng& rng) {
  if (eta2 <= 0.0) throw BadValue("eta2 must be > 0");
  if (tau2 < 0.0) throw BadValue("tau2 must be >= 0");
  BanditInstance inst;
  inst.eta2 = eta2;
  inst.obs_noise_sd = obs_noise_sd;
  inst.true_means.resize(n);
  inst.prior_means.resize(n);
  const double eta = std::sqrt(eta2);
  const double tau = std::sqrt(tau2);
  for (int a = 0; a < n; ++a) {
    inst.true_means[a] = eta * rng.next_gaussian();
    inst.prior_means[a] = inst.true_means[a] + tau * rng.next_gaussian();
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Episode runner
// ---------------------------------------------------------------------------

RunRecord run_episode(const OracleTable& table, int context,
                      const PriorState& prior, const PlannerSpec& planner,
                      const EpisodeConfig& config, const EpisodeParams& params,
                      Rng& rng, ChainShared* shared, int context_index) {
  const int n = table.n_actions;
  config.validate(n);
  if (prior.n_actions() != n) throw BadValue("prior size mismatch");
  const int B = config.budget;
  const double sigma2 = params.sigma2_model > 0.0 ? params.sigma2_model : 1e-9;

  const double* truth =
      table.scores.data() + static_cast<std::size_t>(context) * n;
  PlannerRuntime runtime(planner, config, n, context_index, truth, prior,
                         shared, rng);

  PosteriorState post = PosteriorState::from_prior(prior);
  std::vector<char> queried(n, 0);
  std::vector<double> sum_y(n, 0.0);
  std::vector<int> cnt_y(n, 0);
  std::vector<std::pair<int, double>> mean_outcomes;  // distinct, ascending
  double best_observed = -std::numeric_limits<double>::infinity();

  RunRecord rec;
  rec.prior_means_at_start = prior.mean;
  rec.queried.reserve(B);

  std::optional<Mode> last_mode;
  for (int t = 0; t < B; ++t) {
    mean_outcomes.clear();
    for (int a = 0; a < n; ++a)
      if (cnt_y[a] > 0) mean_outcomes.emplace_back(a, sum_y[a] / cnt_y[a]);

    const StepDecision d = runtime.select(t, post, sigma2, queried,
                                          mean_outcomes, best_observed, rng);
    const double y = observe(table, context, d.action, rng);

    rec.queried.push_back({t, d.action, y});
    if (d.rho_hat.has_value()) rec.rho_trajectory.emplace_back(t, *d.rho_hat);
    if (d.prs_t.has_value()) rec.prs_trajectory.emplace_back(t, *d.prs_t);
    if (!last_mode.has_value() || *last_mode != d.mode) {
      rec.mode_switches.emplace_back(t, d.mode);
      last_mode = d.mode;
    }

    post.observe(d.action, y, sigma2);
    queried[d.action] = 1;
    sum_y[d.action] += y;
    cnt_y[d.action] += 1;
    best_observed = std::max(best_observed, y);
  }

  for (int k : params.hit_ks)
    if (k >= 1 && k <= n) rec.hit_at_k[k] = hit_at_k(rec, table, context, k);
  rec.discovery_auc = discovery_auc(rec, table, context);
  return rec;
}

RunRecord run_episode(const BanditInstance& instance,
                      const PlannerSpec& planner, const EpisodeConfig& config,
                      const EpisodeParams& params, Rng& rng) {
  const OracleTable t = instance.as_table();
  PriorState prior = PriorState::from_means(PriorFamily::flat,
                                            instance.prior_means);
  return run_episode(t, 0, prior, planner, config, params, rng);
}

// ---------------------------------------------------------------------------
// Chain runner
// ---------------------------------------------------------------------------

ChainResult run_chain(const OracleTable& table, const PlannerSpec& planner,
                      const EpisodeConfig& config, const ChainConfig& chain,
                      const EpisodeParams& params, std::uint64_t seed) {
  const int n = table.n_actions;
  ChainResult result;
  result.records.reserve(table.n_contexts);

  ChainShared shared;
  shared.init(n);

  PriorState prior;
  switch (chain.family) {
    case PriorFamily::flat:
      prior = PriorState::flat(n, chain.tau2);
      break;
    case PriorFamily::ema:
      prior = PriorState::flat(n, chain.tau2);
      prior.family = PriorFamily::ema;
      prior.alpha = chain.alpha;
      break;
    case PriorFamily::oracle:
      prior = PriorState::oracle(table, chain.tau2);
      break;
    case PriorFamily::structured:
      if (chain.features == nullptr)
        throw BadValue("structured chain needs action features");
      // No anchors yet: start flat, refit after the first context.
      prior = PriorState::flat(n, chain.tau2);
      prior.family = PriorFamily::structured;
      break;
  }

  for (int c = 0; c < table.n_contexts; ++c) {
    Rng rng = Rng::keyed(seed, 0x636861696eULL, static_cast<std::uint64_t>(c));
    RunRecord rec = run_episode(table, c, prior, planner, config, params, rng,
                                &shared, c);
    result.per_context_hit1.push_back(
        rec.hit_at_k.count(1) ? rec.hit_at_k.at(1) : 0);
    result.per_context_auc.push_back(rec.discovery_auc);

    // Cross-context bookkeeping from this context's distinct observations.
    std::vector<std::optional<double>> context_means(n);
    for (const auto& [a, ybar] : rec.mean_outcome_per_action())
      context_means[a] = ybar;
    shared.absorb_context_means(context_means);

    if (chain.family == PriorFamily::ema) {
      prior = ema_transfer(prior, context_means);
    } else if (chain.family == PriorFamily::structured) {
      std::vector<Anchor> anchors;
      for (int a = 0; a < n; ++a)
        if (shared.ctx_n[a] > 0)
          anchors.push_back({a, shared.ctx_mean[a]});
      if (!anchors.empty()) {
        prior = make_structured_prior(*chain.features, chain.kernel, anchors,
                                      chain.tau2);
      }
    }

    if (planner.kind == PlannerKind::exp3_switch &&
        shared.last_meta_arm >= 0) {
      // Meta-bandit reward is the context's terminal Hit@1.
      shared.exp3 = exp3_update(shared.exp3, shared.last_meta_arm,
                                result.per_context_hit1.back(),
                                planner.gamma_exp3);
    }

    result.records.push_back(std::move(rec));
  }
  result.final_prior = prior;
  return result;
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

GridSpec GridSpec::defaults() {
  GridSpec g;
  g.budget_ratios.resize(10);
  for (int i = 0; i < 10; ++i)
    g.budget_ratios[i] = 0.05 + i * (0.70 - 0.05) / 9.0;
  g.tau2_set.resize(7);
  const double lo = std::log(0.05), hi = std::log(5.0);
  for (int i = 0; i < 7; ++i)
    g.tau2_set[i] = std::exp(lo + i * (hi - lo) / 6.0);
  return g;
}

GridSpec GridSpec::ci_tier() {
  GridSpec g = defaults();
  g.budget_ratios.resize(5);
  for (int i = 0; i < 5; ++i)
    g.budget_ratios[i] = 0.05 + i * (0.70 - 0.05) / 4.0;
  g.sigma2_set = {0.1};
  g.seeds_per_condition = 50;
  return g;
}

void GridSpec::validate() const {
  for (int n : n_actions_set)
    if (n < 2) throw BadValue("grid action count must be >= 2");
  for (double b : budget_ratios) {
    if (b <= 0.0) throw BadValue("budget ratio must be > 0");
    for (int n : n_actions_set)
      if (std::lround(b * n) < 1)
        throw BadValue("budget ratio produces an empty budget");
  }
  for (double t : tau2_set)
    if (t < 0.0) throw BadValue("tau2 must be >= 0");
  for (double s : sigma2_set)
    if (s < 0.0) throw BadValue("sigma2 must be >= 0");
  if (seeds_per_condition < 1) throw BadValue("need at least one seed");
}

std::vector<GridSpec::Condition> GridSpec::conditions() const {
  std::vector<Condition> out;
  out.reserve(n_conditions());
  int idx = 0;
  for (int n : n_actions_set)
    for (double b : budget_ratios)
      for (double tau2 : tau2_set)
        for (double sigma2 : sigma2_set) {
          Condition c;
          c.index = idx++;
          c.n_actions = n;
          c.budget = std::max(1, static_cast<int>(std::lround(b * n)));
          c.b_ratio = b;
          c.tau2 = tau2;
          c.sigma2 = sigma2;
          out.push_back(c);
        }
  return out;
}

namespace {

struct SeedOutcome {
  double rho;  // Spearman(prior, truth) of the instance
  std::vector<double> hit1;  // per planner
  std::vector<double> auc;
};

SeedOutcome run_grid_task(const GridSpec& spec,
                          const GridSpec::Condition& cond,
                          const std::vector<PlannerSpec>& planners,
                          const EpisodeConfig& episode_defaults, int seed_idx) {
  Rng instance_rng = Rng::keyed(spec.master_seed,
                                static_cast<std::uint64_t>(cond.index),
                                static_cast<std::uint64_t>(seed_idx),
                                0xFFFFULL);
  const BanditInstance inst =
      gen_bandit_tau(cond.n_actions, spec.eta2, cond.tau2,
                     std::sqrt(cond.sigma2), instance_rng);

  SeedOutcome out;
  try {
    out.rho = spearman(inst.prior_means, inst.true_means);
  } catch (const UndefinedCorrelation&) {
    out.rho = 0.0;
  }

  EpisodeConfig config = episode_defaults;
  config.budget = cond.budget;
  config.warm_start = std::min(episode_defaults.warm_start, cond.budget);

  EpisodeParams params;
  params.sigma2_model = std::max(cond.sigma2, 1e-9);
  params.hit_ks = {1};

  const OracleTable table = inst.as_table();
  const PriorState prior =
      PriorState::from_means(PriorFamily::flat, inst.prior_means);

  out.hit1.resize(planners.size());
  out.auc.resize(planners.size());
  for (std::size_t p = 0; p < planners.size(); ++p) {
    Rng rng = Rng::keyed(spec.master_seed,
                         static_cast<std::uint64_t>(cond.index),
                         static_cast<std::uint64_t>(seed_idx),
                         static_cast<std::uint64_t>(p));
    const RunRecord rec = run_episode(table, 0, prior, planners[p], config,
                                      params, rng);
    out.hit1[p] = rec.hit_at_k.at(1);
    out.auc[p] = rec.discovery_auc;
  }
  return out;
}

std::vector<ConditionRow> reduce_grid(
    const GridSpec& spec, const std::vector<GridSpec::Condition>& conds,
    const std::vector<PlannerSpec>& planners,
    const std::vector<SeedOutcome>& outcomes) {
  const int S = spec.seeds_per_condition;
  std::vector<ConditionRow> rows;
  rows.reserve(conds.size());
  for (const auto& cond : conds) {
    ConditionRow row;
    row.benchmark_id = "synthetic";
    row.n_actions = cond.n_actions;
    row.budget = cond.budget;
    row.b_ratio = static_cast<double>(cond.budget) / cond.n_actions;
    row.tau2 = cond.tau2;
    row.sigma2 = cond.sigma2;

    double rho_sum = 0.0;
    std::vector<double> h_sum(planners.size(), 0.0),
        h_sq(planners.size(), 0.0), a_sum(planners.size(), 0.0),
        a_sq(planners.size(), 0.0);
    for (int s = 0; s < S; ++s) {
      const auto& o = outcomes[static_cast<std::size_t>(cond.index) * S + s];
      rho_sum += o.rho;
      for (std::size_t p = 0; p < planners.size(); ++p) {
        h_sum[p] += o.hit1[p];
        h_sq[p] += o.hit1[p] * o.hit1[p];
        a_sum[p] += o.auc[p];
        a_sq[p] += o.auc[p] * o.auc[p];
      }
    }
    row.rho = rho_sum / S;
    row.prs = row.b_ratio * (1.0 - row.rho);
    row.in_boundary_zone =
        row.prs >= kBoundaryZoneLow && row.prs < kBoundaryZoneHigh;

    for (std::size_t p = 0; p < planners.size(); ++p) {
      PlannerStats st;
      st.n_seeds = S;
      st.hit1_mean = h_sum[p] / S;
      st.auc_mean = a_sum[p] / S;
      if (S > 1) {
        const double hv =
            (h_sq[p] - S * st.hit1_mean * st.hit1_mean) / (S - 1);
        const double av = (a_sq[p] - S * st.auc_mean * st.auc_mean) / (S - 1);
        st.hit1_sem = std::sqrt(std::max(hv, 0.0) / S);
        st.auc_sem = std::sqrt(std::max(av, 0.0) / S);
      }
      row.per_planner[planners[p].name()] = st;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<ConditionRow> run_grid(const GridSpec& spec,
                                   const std::vector<PlannerSpec>& planners,
                                   const EpisodeConfig& episode_defaults,
                                   int n_threads) {
  spec.validate();
  const auto conds = spec.conditions();
  const int S = spec.seeds_per_condition;
  const std::size_t n_tasks = conds.size() * static_cast<std::size_t>(S);
  std::vector<SeedOutcome> outcomes(n_tasks);

  if (n_threads > 0) omp_set_num_threads(n_threads);

  // Results land in task-index slots, so the reduction below is independent
  // of the schedule.
#pragma omp parallel for schedule(dynamic, 4)
  for (long long task = 0; task < static_cast<long long>(n_tasks); ++task) {
    const auto& cond = conds[static_cast<std::size_t>(task) / S];
    const int seed_idx = static_cast<int>(task % S);
    outcomes[task] =
        run_grid_task(spec, cond, planners, episode_defaults, seed_idx);
  }
  return reduce_grid(spec, conds, planners, outcomes);
}

std::vector<ConditionRow> run_grid_serial(
    const GridSpec& spec, const std::vector<PlannerSpec>& planners,
    const EpisodeConfig& episode_defaults) {
  spec.validate();
  const auto conds = spec.conditions();
  const int S = spec.seeds_per_condition;
  const std::size_t n_tasks = conds.size() * static_cast<std::size_t>(S);
  std::vector<SeedOutcome> outcomes(n_tasks);
  for (std::size_t task = 0; task < n_tasks; ++task) {
    const auto& cond = conds[task / S];
    outcomes[task] = run_grid_task(spec, cond, planners, episode_defaults,
                                   static_cast<int>(task % S));
  }
  return reduce_grid(spec, conds, planners, outcomes);
}

double prior_benefit(const ConditionRow& row) {
  auto rg = row.per_planner.find("rank_greedy");
  auto rnd = row.per_planner.find("random");
  if (rg == row.per_planner.end() || rnd == row.per_planner.end())
    throw MissingBaseline(
        "prior_benefit needs rank_greedy and random planner results");
  return rg->second.hit1_mean - rnd->second.hit1_mean;
}

}  // namespace relab
