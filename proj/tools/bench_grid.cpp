// Throughput comparison of the serial reference grid runner against the
// OpenMP runner, plus a result-equality check between the two.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "regimelab/synthetic.hpp"

using namespace relab;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

bool rows_equal(const std::vector<ConditionRow>& a,
                const std::vector<ConditionRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rho != b[i].rho) return false;
    for (const auto& [name, st] : a[i].per_planner) {
      const auto& other = b[i].per_planner.at(name);
      if (st.hit1_mean != other.hit1_mean || st.auc_mean != other.auc_mean)
        return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int seeds = 100;
  if (argc > 1) seeds = std::atoi(argv[1]);

  GridSpec spec = GridSpec::ci_tier();
  spec.seeds_per_condition = seeds;
  spec.master_seed = 7;

  std::vector<PlannerSpec> planners;
  for (auto kind : {PlannerKind::greedy, PlannerKind::ucb,
                    PlannerKind::rank_greedy, PlannerKind::random}) {
    PlannerSpec p;
    p.kind = kind;
    planners.push_back(p);
  }
  EpisodeConfig episode;
  episode.warm_start = 3;

  std::printf("grid: %zu conditions x %d seeds x %zu planners\n",
              spec.n_conditions(), spec.seeds_per_condition, planners.size());

  auto t0 = std::chrono::steady_clock::now();
  const auto serial = run_grid_serial(spec, planners, episode);
  const double t_serial = seconds_since(t0);
  std::printf("serial reference: %8.2f s\n", t_serial);

  const int max_threads = omp_get_max_threads();
  for (int threads : {1, 2, 4, max_threads}) {
    if (threads > max_threads) continue;
    t0 = std::chrono::steady_clock::now();
    const auto parallel = run_grid(spec, planners, episode, threads);
    const double t_par = seconds_since(t0);
    std::printf("openmp %2d threads: %8.2f s  speedup %5.2fx  %s\n", threads,
                t_par, t_serial / t_par,
                rows_equal(serial, parallel) ? "results identical"
                                             : "RESULTS DIFFER");
  }
  return 0;
}
