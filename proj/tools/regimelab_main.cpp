// Command-line front end: experiment orchestration, deterministic parallel
// execution, and report emission.
//
// Exit codes: 0 ok, 1 validation failure, 2 config error, 3 I/O error.

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

#include "regimelab/analysis.hpp"
#include "regimelab/config.hpp"
#include "regimelab/report.hpp"
#include "regimelab/synthetic.hpp"
#include "regimelab/theory.hpp"

namespace fs = std::filesystem;
using namespace relab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitIoError = 3;

struct EpisodeTaskResult {
  std::string planner;
  std::uint64_t seed = 0;
  std::vector<RunRecord> records;  // one per context
};

ExperimentConfig load_config(const std::string& path,
                             std::optional<std::uint64_t> seed_override,
                             std::optional<int> workers_override,
                             const std::string& out_override) {
  ExperimentConfig cfg = ExperimentConfig::from_json_text(read_file(path));
  if (seed_override.has_value()) cfg.master_seed = *seed_override;
  if (workers_override.has_value()) cfg.workers = *workers_override;
  if (!out_override.empty()) cfg.out_dir = out_override;
  return cfg;
}

struct RunOutputs {
  std::string records;
  std::string summary;
  std::string protocol;
};

PlannerStats stats_from(const std::vector<double>& xs) {
  PlannerStats st;
  st.n_seeds = static_cast<int>(xs.size());
  if (xs.empty()) return st;
  double sum = 0, sq = 0;
  for (double v : xs) {
    sum += v;
    sq += v * v;
  }
  st.hit1_mean = sum / xs.size();
  if (xs.size() > 1) {
    const double var =
        (sq - xs.size() * st.hit1_mean * st.hit1_mean) / (xs.size() - 1);
    st.hit1_sem = std::sqrt(std::max(var, 0.0) / xs.size());
  }
  return st;
}

/// run mode: replay chains or single-condition synthetic episodes, one task
/// per (planner, seed). Task slots are pre-sized so output order does not
/// depend on the schedule.
RunOutputs execute_run(const ExperimentConfig& cfg) {
  const bool replay = cfg.oracle.type == "replay";

  OracleTable table;
  std::vector<std::vector<double>> features;
  if (replay) {
    table = load_replay_oracle(cfg.oracle.path, cfg.oracle.obs_noise_sd);
    if (cfg.oracle.normalize_per_context) table.normalize_per_context();
    if (!cfg.oracle.features_path.empty())
      features = load_action_features(cfg.oracle.features_path,
                                      table.action_ids);
  }

  EpisodeConfig econf;
  econf.budget = cfg.episode.budget;
  econf.warm_start = std::min(cfg.episode.warm_start, cfg.episode.budget);
  econf.allow_requery = cfg.episode.allow_requery;
  econf.prior_family = cfg.episode.prior_family;

  EpisodeParams params;
  params.sigma2_model = cfg.episode.sigma2_model;
  params.hit_ks = cfg.episode.hit_ks;

  if (replay && cfg.episode.prior_family == PriorFamily::structured &&
      features.empty())
    throw ConfigError("structured prior needs a features file");

  const int S = cfg.episode.seeds;
  const std::size_t n_tasks = cfg.planners.size() * static_cast<std::size_t>(S);
  std::vector<EpisodeTaskResult> results(n_tasks);

  if (cfg.workers > 0) omp_set_num_threads(cfg.workers);

#pragma omp parallel for schedule(dynamic)
  for (long long task = 0; task < static_cast<long long>(n_tasks); ++task) {
    const std::size_t p = static_cast<std::size_t>(task) / S;
    const int seed_idx = static_cast<int>(task % S);
    const PlannerSpec& planner = cfg.planners[p];
    EpisodeTaskResult r;
    r.planner = planner.name();
    r.seed = static_cast<std::uint64_t>(seed_idx);
    const std::uint64_t chain_seed =
        cfg.master_seed ^ (0x636673ULL + 0x9e3779b97f4a7c15ULL * (p + 1)) ^
        static_cast<std::uint64_t>(seed_idx);

    if (replay) {
      ChainConfig chain;
      chain.family = cfg.episode.prior_family;
      chain.alpha = cfg.episode.alpha;
      chain.tau2 = cfg.episode.tau2;
      if (chain.family == PriorFamily::structured) chain.features = &features;
      ChainResult cr = run_chain(table, planner, econf, chain, params,
                                 chain_seed);
      r.records = std::move(cr.records);
    } else {
      Rng inst_rng = Rng::keyed(cfg.master_seed, 0xbadc0ffeULL,
                                static_cast<std::uint64_t>(seed_idx));
      const BanditInstance inst =
          cfg.oracle.rho_pearson.has_value()
              ? gen_bandit(cfg.oracle.n_actions, cfg.oracle.eta2,
                           *cfg.oracle.rho_pearson,
                           std::sqrt(cfg.oracle.sigma2), inst_rng)
              : gen_bandit_tau(cfg.oracle.n_actions, cfg.oracle.eta2,
                               cfg.oracle.tau2, std::sqrt(cfg.oracle.sigma2),
                               inst_rng);
      const OracleTable t = inst.as_table();
      const PriorState prior =
          PriorState::from_means(PriorFamily::flat, inst.prior_means);
      Rng rng = Rng::keyed(cfg.master_seed, static_cast<std::uint64_t>(p),
                           static_cast<std::uint64_t>(seed_idx));
      r.records.push_back(
          run_episode(t, 0, prior, planner, econf, params, rng));
    }
    results[task] = std::move(r);
  }

  // Records, in fixed task order.
  std::ostringstream records_out;
  for (const auto& r : results)
    for (std::size_t c = 0; c < r.records.size(); ++c)
      records_out << record_jsonl_line(r.planner, r.seed, static_cast<int>(c),
                                       r.records[c])
                  << '\n';

  const int n_actions = replay ? table.n_actions : cfg.oracle.n_actions;
  const int K = replay ? table.n_contexts : 1;
  const double b_ratio = static_cast<double>(econf.budget) / n_actions;

  // Pilot estimate from the greedy planner when present (first planner
  // otherwise), pooled over the first three contexts of seed 0.
  std::size_t pilot_planner = 0;
  for (std::size_t p = 0; p < cfg.planners.size(); ++p)
    if (cfg.planners[p].kind == PlannerKind::greedy) pilot_planner = p;
  std::optional<PilotEstimate> pilot;
  {
    const auto& recs = results[pilot_planner * S].records;
    std::vector<RunRecord> first(recs.begin(),
                                 recs.begin() + std::min<std::size_t>(
                                                    3, recs.size()));
    try {
      pilot = pilot_prs(first, econf.budget, n_actions);
    } catch (const EmptyPilot&) {
    }
  }

  // Per-planner summaries over seeds (chain means for replay).
  std::ostringstream summary;
  summary << "planner,prior_family,n_actions,K,B,b_ratio,seeds,"
             "hit1_mean,hit1_sem,auc_mean,auc_sem,pilot_planner,pilot_rho,"
             "pilot_rho_defined,pilot_prs\n";
  std::vector<ProtocolEntry> protocol;
  for (std::size_t p = 0; p < cfg.planners.size(); ++p) {
    std::vector<double> hit, auc;
    for (int s = 0; s < S; ++s) {
      const auto& recs = results[p * S + s].records;
      double h = 0, a = 0;
      for (const auto& rec : recs) {
        h += rec.hit_at_k.count(1) ? rec.hit_at_k.at(1) : 0;
        a += rec.discovery_auc;
      }
      hit.push_back(h / recs.size());
      auc.push_back(a / recs.size());
    }
    const PlannerStats hs = stats_from(hit);
    const PlannerStats as = stats_from(auc);
    summary << cfg.planners[p].name() << ','
            << to_string(cfg.episode.prior_family) << ',' << n_actions << ','
            << K << ',' << econf.budget << ',' << format_double(b_ratio)
            << ',' << S << ',' << format_double(hs.hit1_mean) << ','
            << format_double(hs.hit1_sem) << ',' << format_double(as.hit1_mean)
            << ',' << format_double(as.hit1_sem) << ','
            << cfg.planners[pilot_planner].name() << ','
            << format_double(pilot ? pilot->rho_hat : 0.0) << ','
            << (pilot && pilot->rho_defined ? 1 : 0) << ','
            << format_double(pilot ? pilot->prs : b_ratio) << '\n';

    ProtocolEntry e;
    e.benchmark_id =
        replay ? fs::path(cfg.oracle.path).stem().string() : "synthetic";
    e.prior_condition = replay ? to_string(cfg.episode.prior_family)
                               : "controlled-rho";
    e.b_ratio = b_ratio;
    e.budget = econf.budget;
    e.n_actions = n_actions;
    e.k_contexts = K;
    e.metric_terminal_value = hs.hit1_mean;
    e.metric_cumulative_value = as.hit1_mean;
    e.rho_measured = pilot.has_value() && pilot->rho_defined;
    e.rho = pilot ? pilot->rho_hat : 0.0;
    e.prs = pilot ? pilot->prs : b_ratio;
    const RegimeClassification cls =
        classify_regime(e.prs, 0.10, K, econf.budget, n_actions);
    e.predicted = to_string(cls.predicted);
    e.in_boundary_zone = cls.in_boundary_zone;
    e.k_sufficient = cls.k_sufficient;
    protocol.push_back(e);
  }

  RunOutputs out;
  out.records = records_out.str();
  out.summary = summary.str();
  out.protocol = protocol_jsonl(protocol);
  return out;
}

int cmd_run(const ExperimentConfig& cfg) {
  const RunOutputs out = execute_run(cfg);
  fs::create_directories(cfg.out_dir);
  write_file(cfg.out_dir + "/records.jsonl", out.records);
  write_file(cfg.out_dir + "/summary.csv", out.summary);
  write_file(cfg.out_dir + "/protocol.jsonl", out.protocol);
  std::cout << "wrote " << cfg.out_dir << "/records.jsonl, summary.csv, "
            << "protocol.jsonl\n";
  return kExitOk;
}

int cmd_grid(const ExperimentConfig& cfg, const std::string& tier,
             double theta, double tie_eps, const std::string& explore_planner,
             const std::string& greedy_planner) {
  GridSpec spec = cfg.grid.value_or(GridSpec::defaults());
  if (tier == "ci")
    spec = GridSpec::ci_tier();
  else if (tier == "full")
    spec = GridSpec::defaults();
  else if (tier != "config")
    throw ConfigError("tier must be config, ci, or full");
  spec.master_seed = cfg.master_seed;

  EpisodeConfig econf;
  econf.budget = 1;  // set per condition by the runner
  econf.warm_start = cfg.episode.warm_start;
  econf.allow_requery = cfg.episode.allow_requery;

  auto rows = run_grid(spec, cfg.planners, econf, cfg.workers);

  std::vector<std::string> order;
  for (const auto& p : cfg.planners) order.push_back(p.name());

  const bool have_pair =
      !rows.empty() && rows.front().per_planner.count(explore_planner) &&
      rows.front().per_planner.count(greedy_planner);
  if (have_pair)
    for (auto& row : rows)
      finalize_row(row, explore_planner, greedy_planner, theta, tie_eps);

  fs::create_directories(cfg.out_dir);
  write_file(cfg.out_dir + "/grid.csv", grid_csv(rows, order));
  if (have_pair)
    write_file(cfg.out_dir + "/regime_map.csv", regime_map_csv(rows));
  std::cout << "wrote " << cfg.out_dir << "/grid.csv ("
            << spec.n_conditions() << " conditions x " << order.size()
            << " planners)\n";
  return kExitOk;
}

int cmd_analyze(const std::string& grid_path, const std::string& out_dir,
                const std::string& explore_planner,
                const std::string& greedy_planner, double theta,
                bool noise_threshold, double noise_c, double tie_eps) {
  auto rows = parse_grid_csv(read_file(grid_path));
  auto theta_of_row = [&](const ConditionRow& row) {
    return noise_threshold ? noise_c * row.sigma2 / (row.tau2 + row.sigma2)
                           : theta;
  };
  for (auto& row : rows)
    finalize_row(row, explore_planner, greedy_planner, theta_of_row(row),
                 tie_eps);
  const RegimeAccuracy acc = regime_accuracy(rows, theta_of_row, tie_eps);

  fs::create_directories(out_dir);
  write_file(out_dir + "/regime_map.csv", regime_map_csv(rows));

  nlohmann::json j;
  j["n_conditions"] = acc.n_rows;
  j["n_ties"] = acc.n_ties;
  j["equivalence_fraction"] = acc.equivalence_fraction;
  if (acc.overall.has_value()) j["accuracy"] = *acc.overall;
  if (acc.outside_zone.has_value()) j["accuracy_outside_zone"] = *acc.outside_zone;
  if (acc.inside_zone.has_value()) j["accuracy_inside_zone"] = *acc.inside_zone;
  write_file(out_dir + "/accuracy.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_validate(std::uint64_t seed, const std::string& out_path,
                 bool inject_error) {
  const auto results = run_all_validators(seed, inject_error);
  const std::string report = validation_jsonl(results);
  if (!out_path.empty())
    write_file(out_path, report);
  else
    std::cout << report;
  int failures = 0;
  for (const auto& r : results) failures += !r.pass;
  if (failures > 0) {
    std::cerr << failures << " of " << results.size()
              << " closed-form checks failed\n";
    return kExitValidationFailure;
  }
  std::cerr << "all " << results.size() << " closed-form checks passed\n";
  return kExitOk;
}

int cmd_mixture(double cate_low, double cate_high, double target) {
  const double lambda = mixture_weight(cate_low, cate_high, target);
  const double ate = lambda * cate_high + (1.0 - lambda) * cate_low;
  nlohmann::json j;
  j["lambda"] = lambda;
  j["ate"] = ate;
  j["target"] = target;
  j["residual"] = ate - target;
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_report_protocol(const std::string& summary_path,
                        const std::string& out_path) {
  // The run-mode summary already carries the regime variables; re-emit them
  // as the machine-readable block.
  const std::string text = read_file(summary_path);
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty summary");
  if (header.rfind("planner,prior_family", 0) != 0)
    throw ConfigError("not a run summary csv: " + summary_path);

  std::vector<ProtocolEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 15) throw IoError("bad summary row: " + line);
    ProtocolEntry e;
    e.benchmark_id = "summary";
    e.prior_condition = f[1];
    e.n_actions = std::stoi(f[2]);
    e.k_contexts = std::stoi(f[3]);
    e.budget = std::stoi(f[4]);
    e.b_ratio = std::stod(f[5]);
    e.metric_terminal_value = std::stod(f[7]);
    e.metric_cumulative_value = std::stod(f[9]);
    e.rho = std::stod(f[12]);
    e.rho_measured = f[13] == "1";
    e.prs = std::stod(f[14]);
    const RegimeClassification cls =
        classify_regime(e.prs, 0.10, e.k_contexts, e.budget, e.n_actions);
    e.predicted = to_string(cls.predicted);
    e.in_boundary_zone = cls.in_boundary_zone;
    e.k_sufficient = cls.k_sufficient;
    entries.push_back(e);
  }
  const std::string block = protocol_jsonl(entries);
  if (!out_path.empty())
    write_file(out_path, block);
  else
    std::cout << block;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-context bandit regime laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_override, tier = "config";
  std::optional<std::uint64_t> seed_override;
  std::optional<int> workers_override;
  bool echo_config = false;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "JSON config file");
    if (needs_config) opt->required();
    sub->add_option("--seed", seed_override, "master seed override");
    sub->add_option("--workers", workers_override, "worker thread count");
    sub->add_option("--out", out_override, "output directory override");
  };

  auto* run = app.add_subcommand("run", "replay or single-condition episodes");
  add_common(run, true);
  run->add_flag("--echo-config", echo_config,
                "print the normalized config and exit");

  auto* grid = app.add_subcommand("grid", "synthetic validation sweep");
  add_common(grid, true);
  grid->add_option("--tier", tier, "config | ci | full");
  double grid_theta = 0.10, grid_tie = kDefaultTieEpsilon;
  std::string grid_explore = "ucb", grid_greedy = "greedy";
  grid->add_option("--theta", grid_theta, "classification threshold");
  grid->add_option("--tie-eps", grid_tie, "equivalence-zone width");
  grid->add_option("--explore-planner", grid_explore);
  grid->add_option("--greedy-planner", grid_greedy);

  auto* analyze = app.add_subcommand("analyze", "regime map from a grid csv");
  std::string grid_csv_path, analyze_out = "out";
  std::string an_explore = "ucb", an_greedy = "greedy";
  double an_theta = 0.10, an_tie = kDefaultTieEpsilon, an_c = 2.0;
  bool an_noise = false;
  analyze->add_option("--grid-csv", grid_csv_path)->required();
  analyze->add_option("--out", analyze_out);
  analyze->add_option("--explore-planner", an_explore);
  analyze->add_option("--greedy-planner", an_greedy);
  analyze->add_option("--theta", an_theta, "fixed threshold");
  analyze->add_flag("--noise-threshold", an_noise,
                    "use C * sigma2 / (tau2 + sigma2) per condition");
  analyze->add_option("--threshold-c", an_c, "C of the noise threshold");
  analyze->add_option("--tie-eps", an_tie);

  auto* validate = app.add_subcommand("validate", "closed-form MC checks");
  std::uint64_t validate_seed = 20240901;
  std::string validate_out;
  bool inject = false;
  validate->add_option("--seed", validate_seed);
  validate->add_option("--out", validate_out, "report path (JSON lines)");
  validate->add_flag("--inject-error", inject,
                     "corrupt one closed form (failure-path test hook)");

  auto* mixture = app.add_subcommand("mixture", "benchmark mixture weight");
  double cate_low = 0.0, cate_high = 0.0, target = 0.0;
  mixture->add_option("--cate-low", cate_low)->required();
  mixture->add_option("--cate-high", cate_high)->required();
  mixture->add_option("--target", target)->required();

  auto* protocol = app.add_subcommand("report-protocol",
                                      "minimum-reporting block from a summary");
  std::string summary_path, protocol_out;
  protocol->add_option("--summary", summary_path)->required();
  protocol->add_option("--out", protocol_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const ExperimentConfig cfg = load_config(config_path, seed_override,
                                               workers_override, out_override);
      if (echo_config) {
        std::cout << cfg.to_json_text();
        return kExitOk;
      }
      return cmd_run(cfg);
    }
    if (grid->parsed()) {
      const ExperimentConfig cfg = load_config(config_path, seed_override,
                                               workers_override, out_override);
      return cmd_grid(cfg, tier, grid_theta, grid_tie, grid_explore,
                      grid_greedy);
    }
    if (analyze->parsed())
      return cmd_analyze(grid_csv_path, analyze_out, an_explore, an_greedy,
                         an_theta, an_noise, an_c, an_tie);
    if (validate->parsed())
      return cmd_validate(validate_seed, validate_out, inject);
    if (mixture->parsed()) return cmd_mixture(cate_low, cate_high, target);
    if (protocol->parsed())
      return cmd_report_protocol(summary_path, protocol_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const BadSpec& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const PreconditionFailed& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const TargetUnreachable& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
