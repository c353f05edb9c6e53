#include "regimelab/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace relab {

const char* to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::greedy: return "greedy";
    case PlannerKind::ucb: return "ucb";
    case PlannerKind::thompson: return "thompson";
    case PlannerKind::reign: return "reign";
    case PlannerKind::regime: return "regime";
    case PlannerKind::epsilon_greedy: return "epsilon_greedy";
    case PlannerKind::explore_then_exploit: return "explore_then_exploit";
    case PlannerKind::random_switch: return "random_switch";
    case PlannerKind::exp3_switch: return "exp3_switch";
    case PlannerKind::budget_aware_ucb: return "budget_aware_ucb";
    case PlannerKind::oracle_prs: return "oracle_prs";
    case PlannerKind::rank_greedy: return "rank_greedy";
    case PlannerKind::two_phase: return "two_phase";
    case PlannerKind::random: return "random";
  }
  return "?";
}

PlannerKind planner_kind_from_string(const std::string& s) {
  static const std::map<std::string, PlannerKind> kMap = {
      {"greedy", PlannerKind::greedy},
      {"ucb", PlannerKind::ucb},
      {"thompson", PlannerKind::thompson},
      {"reign", PlannerKind::reign},
      {"regime", PlannerKind::regime},
      {"epsilon_greedy", PlannerKind::epsilon_greedy},
      {"explore_then_exploit", PlannerKind::explore_then_exploit},
      {"random_switch", PlannerKind::random_switch},
      {"exp3_switch", PlannerKind::exp3_switch},
      {"budget_aware_ucb", PlannerKind::budget_aware_ucb},
      {"oracle_prs", PlannerKind::oracle_prs},
      {"rank_greedy", PlannerKind::rank_greedy},
      {"two_phase", PlannerKind::two_phase},
      {"random", PlannerKind::random},
  };
  auto it = kMap.find(s);
  if (it == kMap.end()) throw BadSpec("unknown planner: " + s);
  return it->second;
}

std::string PlannerSpec::name() const { return to_string(kind); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) {
  static const double kInvSqrt2Pi = 0.3989422804014327;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double expected_improvement(double mean, double sd, double best_observed) {
  if (sd < 0.0) throw BadValue("sd must be >= 0");
  const double gap = mean - best_observed;
  if (sd == 0.0) return std::max(gap, 0.0);
  const double z = gap / sd;
  return gap * normal_cdf(z) + sd * normal_pdf(z);
}

double reign_score(double mean, double sd, double best_observed,
                   double cross_context_var, double lambda, double rho_w) {
  return lambda * expected_improvement(mean, sd, best_observed) +
         (1.0 - lambda) * sd * (1.0 + rho_w * cross_context_var);
}

double budget_aware_beta(double beta_max, int remaining, int budget) {
  if (remaining < 0 || remaining > budget)
    throw BadValue("remaining queries outside [0, budget]");
  return beta_max * std::sqrt(static_cast<double>(remaining) / budget);
}

int thompson_draw(const PosteriorState& posterior, double sigma2, Rng& rng) {
  const int n = posterior.n_actions();
  int best = 0;
  double best_draw = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    const double sd = std::sqrt(posterior.variance(a, sigma2));
    const double draw = posterior.mean(a, sigma2) + sd * rng.next_gaussian();
    if (draw > best_draw) {
      best_draw = draw;
      best = a;
    }
  }
  return best;
}

std::vector<double> Exp3State::probabilities(double gamma) const {
  const int n = static_cast<int>(weights.size());
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i)
    p[i] = (1.0 - gamma) * weights[i] / total + gamma / n;
  return p;
}

int Exp3State::select(double gamma, Rng& rng) const {
  const auto p = probabilities(gamma);
  const double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

Exp3State exp3_update(Exp3State state, int chosen, double reward,
                      double gamma) {
  if (reward < 0.0 || reward > 1.0) throw BadReward("reward outside [0, 1]");
  if (chosen < 0 || chosen >= static_cast<int>(state.weights.size()))
    throw IndexError("exp3 arm out of range");
  const int n = static_cast<int>(state.weights.size());
  const auto p = state.probabilities(gamma);
  const double xhat = reward / p[chosen];
  state.weights[chosen] *= std::exp(gamma * xhat / n);
  return state;
}

std::vector<int> rank_greedy_sequence(const PriorState& prior, int budget) {
  const int n = prior.n_actions();
  if (budget > n)
    throw BudgetExceedsActions("rank-greedy budget exceeds the action count");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&prior](int a, int b) {
    if (prior.mean[a] != prior.mean[b]) return prior.mean[a] > prior.mean[b];
    return a < b;
  });
  idx.resize(budget);
  return idx;
}

TwoPhasePlan two_phase_policy(int n_actions, int budget, double alpha_explore,
                              Rng& rng) {
  if (alpha_explore <= 0.0 || alpha_explore >= 1.0)
    throw BadSpec("alpha_explore outside (0, 1)");
  TwoPhasePlan plan;
  plan.n_explore = static_cast<int>(std::floor(alpha_explore * budget));

  // Fisher-Yates over all arms; the first B_e (mod n) slots of the shuffled
  // ordering receive the extra pull when B_e is not a multiple of n.
  std::vector<int> order(n_actions);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n_actions - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_index(i + 1));
    std::swap(order[i], order[j]);
  }
  plan.explore_actions.reserve(plan.n_explore);
  for (int q = 0; q < plan.n_explore; ++q)
    plan.explore_actions.push_back(order[q % n_actions]);
  return plan;
}

StepDecision regime_planner_step(
    const PriorState& prior, const PosteriorState& posterior,
    const std::vector<std::pair<int, double>>& mean_outcomes, int t,
    const PlannerSpec& spec, const EpisodeConfig& config, double b_ratio,
    double sigma2, const std::vector<char>& queried, int context_index,
    Rng& rng) {
  const int n = posterior.n_actions();
  StepDecision d;

  auto uniform_unqueried = [&]() {
    std::vector<int> open;
    open.reserve(n);
    for (int a = 0; a < n; ++a)
      if (!queried[a]) open.push_back(a);
    if (open.empty()) return static_cast<int>(rng.next_index(n));
    return open[rng.next_index(open.size())];
  };
  auto greedy_pick = [&]() {
    int best = -1;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      if (!config.allow_requery && queried[a]) continue;
      const double m = posterior.mean(a, sigma2);
      if (m > best_mean) {
        best_mean = m;
        best = a;
      }
    }
    return best >= 0 ? best : 0;
  };
  auto ucb_pick = [&]() {
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      if (!config.allow_requery && queried[a]) continue;
      const double s = ucb_score(posterior.mean(a, sigma2),
                                 std::sqrt(posterior.variance(a, sigma2)),
                                 spec.beta);
      if (s > best_score) {
        best_score = s;
        best = a;
      }
    }
    return best >= 0 ? best : 0;
  };

  if (t < config.warm_start) {
    d.action = uniform_unqueried();
    d.mode = Mode::explore;
    return d;
  }

  // Deployment guard: treat the first k contexts of a chain as too early for
  // a trustworthy estimate and exploit. Disabled by default.
  if (context_index < spec.k_min_contexts) {
    d.mode = Mode::exploit;
    d.action = greedy_pick();
    return d;
  }

  std::vector<double> pri, out;
  pri.reserve(mean_outcomes.size());
  out.reserve(mean_outcomes.size());
  for (const auto& [a, y] : mean_outcomes) {
    pri.push_back(prior.mean[a]);
    out.push_back(y);
  }
  const auto rho = estimate_rho_online(pri, out, spec.m_min);
  if (rho.has_value()) {
    d.rho_hat = *rho;
    d.prs_t = b_ratio * (1.0 - *rho);
    if (*d.prs_t < spec.theta) {
      d.mode = Mode::exploit;
      d.action = greedy_pick();
      return d;
    }
  }
  // Undefined estimate or PRS at/above threshold: explore with the UCB rule.
  d.mode = Mode::explore;
  d.action = ucb_pick();
  return d;
}

// ---------------------------------------------------------------------------
// ChainShared
// ---------------------------------------------------------------------------

void ChainShared::init(int n_actions) {
  ctx_n.assign(n_actions, 0);
  ctx_mean.assign(n_actions, 0.0);
  ctx_m2.assign(n_actions, 0.0);
}

void ChainShared::absorb_context_means(
    const std::vector<std::optional<double>>& means) {
  for (std::size_t a = 0; a < means.size(); ++a) {
    if (!means[a].has_value()) continue;
    ++ctx_n[a];
    const double delta = *means[a] - ctx_mean[a];
    ctx_mean[a] += delta / ctx_n[a];
    ctx_m2[a] += delta * (*means[a] - ctx_mean[a]);
  }
}

double ChainShared::cross_context_var(int action) const {
  if (ctx_n.empty() || ctx_n[action] < 2) return 0.0;
  return ctx_m2[action] / (ctx_n[action] - 1);
}

// ---------------------------------------------------------------------------
// PlannerRuntime
// ---------------------------------------------------------------------------

PlannerRuntime::PlannerRuntime(const PlannerSpec& spec,
                               const EpisodeConfig& config, int n_actions,
                               int context_index, const double* true_scores,
                               const PriorState& prior, ChainShared* shared,
                               Rng& rng)
    : spec_(spec),
      config_(config),
      n_(n_actions),
      budget_(config.budget),
      context_index_(context_index),
      true_scores_(true_scores),
      prior_(prior),
      shared_(shared),
      effective_kind_(spec.kind) {
  spec.validate();
  switch (spec.kind) {
    case PlannerKind::random_switch:
      effective_kind_ = rng.next_double() < 0.5 ? PlannerKind::greedy
                                                : PlannerKind::ucb;
      break;
    case PlannerKind::exp3_switch: {
      Exp3State local(2);
      const Exp3State& st = shared_ ? shared_->exp3 : local;
      exp3_arm_ = st.select(spec.gamma_exp3, rng);
      if (shared_) shared_->last_meta_arm = *exp3_arm_;
      effective_kind_ =
          *exp3_arm_ == 0 ? PlannerKind::greedy : PlannerKind::ucb;
      break;
    }
    case PlannerKind::oracle_prs: {
      if (true_scores_ != nullptr) {
        std::vector<double> truth(true_scores_, true_scores_ + n_);
        try {
          true_rho_ = spearman(prior.mean, truth);
        } catch (const UndefinedCorrelation&) {
          true_rho_ = std::nullopt;
        }
      }
      break;
    }
    case PlannerKind::two_phase:
      two_phase_ = two_phase_policy(n_, budget_, spec.alpha_explore, rng);
      break;
    case PlannerKind::rank_greedy:
      rank_sequence_ = rank_greedy_sequence(prior, budget_);
      break;
    default:
      break;
  }
}

int PlannerRuntime::argmax_posterior_mean(
    const PosteriorState& post, double sigma2,
    const std::vector<char>& queried) const {
  int best = -1;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < n_; ++a) {
    if (!config_.allow_requery && queried[a]) continue;
    const double m = post.mean(a, sigma2);
    if (m > best_mean) {
      best_mean = m;
      best = a;
    }
  }
  return best >= 0 ? best : 0;
}

int PlannerRuntime::argmax_ucb(const PosteriorState& post, double sigma2,
                               double beta,
                               const std::vector<char>& queried) const {
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < n_; ++a) {
    if (!config_.allow_requery && queried[a]) continue;
    const double s = ucb_score(post.mean(a, sigma2),
                               std::sqrt(post.variance(a, sigma2)), beta);
    if (s > best_score) {
      best_score = s;
      best = a;
    }
  }
  return best >= 0 ? best : 0;
}

int PlannerRuntime::uniform_unqueried(const std::vector<char>& queried,
                                      Rng& rng) const {
  std::vector<int> open;
  open.reserve(n_);
  for (int a = 0; a < n_; ++a)
    if (!queried[a]) open.push_back(a);
  if (open.empty()) return static_cast<int>(rng.next_index(n_));
  return open[rng.next_index(open.size())];
}

StepDecision PlannerRuntime::select(
    int t, const PosteriorState& posterior, double sigma2,
    const std::vector<char>& queried,
    const std::vector<std::pair<int, double>>& mean_outcomes,
    double best_observed, Rng& rng) {
  StepDecision d;

  // Fully scheduled policies ignore the warm start; their query plan is the
  // policy.
  if (effective_kind_ == PlannerKind::rank_greedy) {
    d.action = rank_sequence_[t];
    d.mode = Mode::exploit;
    return d;
  }
  if (effective_kind_ == PlannerKind::two_phase) {
    if (t < two_phase_.n_explore) {
      d.action = two_phase_.explore_actions[t];
      d.mode = Mode::explore;
    } else {
      d.action = argmax_posterior_mean(posterior, sigma2, queried);
      d.mode = Mode::exploit;
    }
    return d;
  }
  if (effective_kind_ == PlannerKind::random) {
    d.action = uniform_unqueried(queried, rng);
    d.mode = Mode::explore;
    return d;
  }

  if (t < config_.warm_start) {
    d.action = uniform_unqueried(queried, rng);
    d.mode = Mode::explore;
    return d;
  }

  switch (effective_kind_) {
    case PlannerKind::greedy:
      d.action = argmax_posterior_mean(posterior, sigma2, queried);
      d.mode = Mode::exploit;
      break;
    case PlannerKind::ucb:
      d.action = argmax_ucb(posterior, sigma2, spec_.beta, queried);
      d.mode = Mode::explore;
      break;
    case PlannerKind::thompson: {
      // Honors the requery flag by re-drawing argmax over eligible actions.
      if (config_.allow_requery) {
        d.action = thompson_draw(posterior, sigma2, rng);
      } else {
        int best = -1;
        double best_draw = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < n_; ++a) {
          const double sd = std::sqrt(posterior.variance(a, sigma2));
          const double draw =
              posterior.mean(a, sigma2) + sd * rng.next_gaussian();
          if (queried[a]) continue;
          if (draw > best_draw) {
            best_draw = draw;
            best = a;
          }
        }
        d.action = best >= 0 ? best : 0;
      }
      d.mode = Mode::explore;
      break;
    }
    case PlannerKind::reign: {
      int best = -1;
      double best_score = -std::numeric_limits<double>::infinity();
      const bool have_obs = std::isfinite(best_observed);
      for (int a = 0; a < n_; ++a) {
        if (!config_.allow_requery && queried[a]) continue;
        const double m = posterior.mean(a, sigma2);
        const double sd = std::sqrt(posterior.variance(a, sigma2));
        const double cv = shared_ ? shared_->cross_context_var(a) : 0.0;
        // Before any observation the incumbent is undefined; rank by mean so
        // the first pick degrades to greedy.
        const double s =
            have_obs ? reign_score(m, sd, best_observed, cv,
                                   spec_.lambda_reign, spec_.rho_reign)
                     : spec_.lambda_reign * m +
                           (1.0 - spec_.lambda_reign) * sd *
                               (1.0 + spec_.rho_reign * cv);
        if (s > best_score) {
          best_score = s;
          best = a;
        }
      }
      d.action = best >= 0 ? best : 0;
      d.mode = Mode::explore;
      break;
    }
    case PlannerKind::epsilon_greedy: {
      if (spec_.epsilon > 0.0 && rng.next_double() < spec_.epsilon) {
        d.action = config_.allow_requery
                       ? static_cast<int>(rng.next_index(n_))
                       : uniform_unqueried(queried, rng);
        d.mode = Mode::explore;
      } else {
        d.action = argmax_posterior_mean(posterior, sigma2, queried);
        d.mode = Mode::exploit;
      }
      break;
    }
    case PlannerKind::explore_then_exploit: {
      const int explore_steps = (budget_ + 1) / 2;  // ceil(B/2)
      if (t < explore_steps) {
        d.action = uniform_unqueried(queried, rng);
        d.mode = Mode::explore;
      } else {
        d.action = argmax_posterior_mean(posterior, sigma2, queried);
        d.mode = Mode::exploit;
      }
      break;
    }
    case PlannerKind::budget_aware_ucb: {
      const double beta_t = budget_aware_beta(spec_.beta, budget_ - t, budget_);
      d.action = argmax_ucb(posterior, sigma2, beta_t, queried);
      d.mode = Mode::explore;
      break;
    }
    case PlannerKind::oracle_prs: {
      const double b_ratio = static_cast<double>(budget_) / n_;
      if (true_rho_.has_value()) {
        d.rho_hat = *true_rho_;
        d.prs_t = b_ratio * (1.0 - *true_rho_);
      }
      if (d.prs_t.has_value() && *d.prs_t < spec_.theta) {
        d.mode = Mode::exploit;
        d.action = argmax_posterior_mean(posterior, sigma2, queried);
      } else {
        d.mode = Mode::explore;
        d.action = argmax_ucb(posterior, sigma2, spec_.beta, queried);
      }
      break;
    }
    case PlannerKind::regime: {
      const double b_ratio = static_cast<double>(budget_) / n_;
      d = regime_planner_step(prior_, posterior, mean_outcomes, t, spec_,
                              config_, b_ratio, sigma2, queried,
                              context_index_, rng);
      break;
    }
    default:
      throw BadSpec("planner not dispatchable");
  }
  return d;
}

}  // namespace relab
