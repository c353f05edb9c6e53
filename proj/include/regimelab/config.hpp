#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regimelab/core.hpp"
#include "regimelab/planners.hpp"
#include "regimelab/synthetic.hpp"

namespace relab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full experiment description. Every output row is reproducible from the
/// config file and the master seed alone.
struct ExperimentConfig {
  std::string mode = "run";  // run | grid
  std::uint64_t master_seed = 0;
  int workers = 0;  // 0 = library default
  std::string out_dir = "out";

  // Oracle: either a replay table or a synthetic description.
  struct Oracle {
    std::string type = "synthetic";  // replay | synthetic
    // replay
    std::string path;
    std::string features_path;
    double obs_noise_sd = 0.0;
    bool normalize_per_context = false;
    // synthetic single condition (run mode)
    int n_actions = 100;
    double tau2 = 1.0;
    std::optional<double> rho_pearson;  // alternative to tau2
    double sigma2 = 0.1;
    double eta2 = 1.0;
  } oracle;

  std::optional<GridSpec> grid;  // grid mode

  std::vector<PlannerSpec> planners;

  struct Episode {
    int budget = 50;
    int warm_start = 3;
    bool allow_requery = true;
    int seeds = 50;
    PriorFamily prior_family = PriorFamily::ema;
    double alpha = kDefaultEmaAlpha;
    double tau2 = kDefaultPriorVar;
    double sigma2_model = kDefaultObsNoiseVar;
    std::vector<int> hit_ks = {1, 5, 10};
  } episode;

  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;  // normalized re-emission
};

PlannerSpec planner_spec_from_json_text(const std::string& text);

}  // namespace relab
