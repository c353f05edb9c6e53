#include "regimelab/config.hpp"

#include <json.hpp>

namespace relab {

using nlohmann::json;

namespace {

PlannerSpec planner_from_json(const json& j) {
  PlannerSpec p;
  if (j.is_string()) {
    p.kind = planner_kind_from_string(j.get<std::string>());
    return p;
  }
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("planner entry needs a 'kind'");
  p.kind = planner_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("beta")) p.beta = j.at("beta").get<double>();
  if (j.contains("epsilon")) p.epsilon = j.at("epsilon").get<double>();
  if (j.contains("theta")) p.theta = j.at("theta").get<double>();
  if (j.contains("lambda")) p.lambda_reign = j.at("lambda").get<double>();
  if (j.contains("rho_w")) p.rho_reign = j.at("rho_w").get<double>();
  if (j.contains("gamma")) p.gamma_exp3 = j.at("gamma").get<double>();
  if (j.contains("alpha_explore"))
    p.alpha_explore = j.at("alpha_explore").get<double>();
  if (j.contains("m")) p.m_min = j.at("m").get<int>();
  if (j.contains("k_min_contexts"))
    p.k_min_contexts = j.at("k_min_contexts").get<int>();
  try {
    p.validate();
  } catch (const BadSpec& e) {
    throw ConfigError(std::string("bad planner parameters: ") + e.what());
  }
  return p;
}

json planner_to_json(const PlannerSpec& p) {
  json j;
  j["kind"] = to_string(p.kind);
  j["beta"] = p.beta;
  j["epsilon"] = p.epsilon;
  j["theta"] = p.theta;
  j["lambda"] = p.lambda_reign;
  j["rho_w"] = p.rho_reign;
  j["gamma"] = p.gamma_exp3;
  j["alpha_explore"] = p.alpha_explore;
  j["m"] = p.m_min;
  j["k_min_contexts"] = p.k_min_contexts;
  return j;
}

GridSpec grid_from_json(const json& j) {
  GridSpec g = GridSpec::defaults();
  if (j.contains("n_actions"))
    g.n_actions_set = j.at("n_actions").get<std::vector<int>>();
  if (j.contains("budget_ratios"))
    g.budget_ratios = j.at("budget_ratios").get<std::vector<double>>();
  if (j.contains("tau2")) g.tau2_set = j.at("tau2").get<std::vector<double>>();
  if (j.contains("sigma2"))
    g.sigma2_set = j.at("sigma2").get<std::vector<double>>();
  if (j.contains("eta2")) g.eta2 = j.at("eta2").get<double>();
  if (j.contains("seeds_per_condition"))
    g.seeds_per_condition = j.at("seeds_per_condition").get<int>();
  return g;
}

json grid_to_json(const GridSpec& g) {
  json j;
  j["n_actions"] = g.n_actions_set;
  j["budget_ratios"] = g.budget_ratios;
  j["tau2"] = g.tau2_set;
  j["sigma2"] = g.sigma2_set;
  j["eta2"] = g.eta2;
  j["seeds_per_condition"] = g.seeds_per_condition;
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("mode")) c.mode = j.at("mode").get<std::string>();
    if (c.mode != "run" && c.mode != "grid")
      throw ConfigError("mode must be 'run' or 'grid'");
    if (j.contains("master_seed"))
      c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();

    if (j.contains("oracle")) {
      const auto& o = j.at("oracle");
      if (o.contains("type")) c.oracle.type = o.at("type").get<std::string>();
      if (c.oracle.type != "replay" && c.oracle.type != "synthetic")
        throw ConfigError("oracle.type must be 'replay' or 'synthetic'");
      if (o.contains("path")) c.oracle.path = o.at("path").get<std::string>();
      if (o.contains("features"))
        c.oracle.features_path = o.at("features").get<std::string>();
      if (o.contains("obs_noise_sd"))
        c.oracle.obs_noise_sd = o.at("obs_noise_sd").get<double>();
      if (o.contains("normalize_per_context"))
        c.oracle.normalize_per_context =
            o.at("normalize_per_context").get<bool>();
      if (o.contains("n_actions"))
        c.oracle.n_actions = o.at("n_actions").get<int>();
      if (o.contains("tau2")) c.oracle.tau2 = o.at("tau2").get<double>();
      if (o.contains("rho_pearson"))
        c.oracle.rho_pearson = o.at("rho_pearson").get<double>();
      if (o.contains("sigma2")) c.oracle.sigma2 = o.at("sigma2").get<double>();
      if (o.contains("eta2")) c.oracle.eta2 = o.at("eta2").get<double>();
    }

    if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));

    if (j.contains("planners")) {
      for (const auto& pj : j.at("planners"))
        c.planners.push_back(planner_from_json(pj));
    }
    if (c.planners.empty())
      throw ConfigError("config needs at least one planner");

    if (j.contains("episode")) {
      const auto& e = j.at("episode");
      if (e.contains("budget")) c.episode.budget = e.at("budget").get<int>();
      if (e.contains("warm_start"))
        c.episode.warm_start = e.at("warm_start").get<int>();
      if (e.contains("allow_requery"))
        c.episode.allow_requery = e.at("allow_requery").get<bool>();
      if (e.contains("seeds")) c.episode.seeds = e.at("seeds").get<int>();
      if (e.contains("prior_family"))
        c.episode.prior_family =
            prior_family_from_string(e.at("prior_family").get<std::string>());
      if (e.contains("alpha")) c.episode.alpha = e.at("alpha").get<double>();
      if (e.contains("tau2")) c.episode.tau2 = e.at("tau2").get<double>();
      if (e.contains("sigma2_model"))
        c.episode.sigma2_model = e.at("sigma2_model").get<double>();
      if (e.contains("hit_ks"))
        c.episode.hit_ks = e.at("hit_ks").get<std::vector<int>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  } catch (const BadValue& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const BadSpec& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (c.mode == "grid" && !c.grid.has_value()) c.grid = GridSpec::defaults();
  return c;
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["mode"] = mode;
  j["master_seed"] = master_seed;
  j["workers"] = workers;
  j["out_dir"] = out_dir;

  json o;
  o["type"] = oracle.type;
  if (oracle.type == "replay") {
    o["path"] = oracle.path;
    if (!oracle.features_path.empty()) o["features"] = oracle.features_path;
    o["obs_noise_sd"] = oracle.obs_noise_sd;
    o["normalize_per_context"] = oracle.normalize_per_context;
  } else {
    o["n_actions"] = oracle.n_actions;
    if (oracle.rho_pearson.has_value())
      o["rho_pearson"] = *oracle.rho_pearson;
    else
      o["tau2"] = oracle.tau2;
    o["sigma2"] = oracle.sigma2;
    o["eta2"] = oracle.eta2;
  }
  j["oracle"] = o;

  if (grid.has_value()) j["grid"] = grid_to_json(*grid);

  json ps = json::array();
  for (const auto& p : planners) ps.push_back(planner_to_json(p));
  j["planners"] = ps;

  json e;
  e["budget"] = episode.budget;
  e["warm_start"] = episode.warm_start;
  e["allow_requery"] = episode.allow_requery;
  e["seeds"] = episode.seeds;
  e["prior_family"] = to_string(episode.prior_family);
  e["alpha"] = episode.alpha;
  e["tau2"] = episode.tau2;
  e["sigma2_model"] = episode.sigma2_model;
  e["hit_ks"] = episode.hit_ks;
  j["episode"] = e;

  return j.dump(2) + "\n";
}

PlannerSpec planner_spec_from_json_text(const std::string& text) {
  try {
    return planner_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad planner json: ") + e.what());
  }
}

}  // namespace relab
