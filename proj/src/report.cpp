#include "regimelab/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "regimelab/rank_stats.hpp"

namespace relab {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string grid_csv(const std::vector<ConditionRow>& rows,
                     const std::vector<std::string>& planner_order) {
  std::ostringstream out;
  out << "planner,n_actions,B,b_ratio,tau2,sigma2,rho_mean,prs,"
         "hit1_mean,hit1_sem,auc_mean,auc_sem\n";
  for (const auto& row : rows) {
    for (const auto& name : planner_order) {
      auto it = row.per_planner.find(name);
      if (it == row.per_planner.end()) continue;
      const auto& st = it->second;
      out << name << ',' << row.n_actions << ',' << row.budget << ','
          << format_double(row.b_ratio) << ',' << format_double(row.tau2)
          << ',' << format_double(row.sigma2) << ',' << format_double(row.rho)
          << ',' << format_double(row.prs) << ','
          << format_double(st.hit1_mean) << ',' << format_double(st.hit1_sem)
          << ',' << format_double(st.auc_mean) << ','
          << format_double(st.auc_sem) << '\n';
    }
  }
  return out.str();
}

std::string regime_map_csv(const std::vector<ConditionRow>& rows) {
  std::ostringstream out;
  out << "benchmark_id,b_ratio,rho,prs,advantage,predicted,empirical,"
         "in_boundary_zone\n";
  for (const auto& row : rows) {
    out << row.benchmark_id << ',' << format_double(row.b_ratio) << ','
        << format_double(row.rho) << ',' << format_double(row.prs) << ','
        << format_double(row.advantage) << ',' << to_string(row.predicted)
        << ',' << to_string(row.empirical) << ','
        << (row.in_boundary_zone ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<ConditionRow> parse_grid_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty grid csv");

  struct Key {
    int n_actions;
    int budget;
    std::string tau2, sigma2;  // textual keys keep grouping exact
    bool operator<(const Key& o) const {
      return std::tie(n_actions, budget, tau2, sigma2) <
             std::tie(o.n_actions, o.budget, o.tau2, o.sigma2);
    }
  };
  std::map<Key, ConditionRow> grouped;
  std::vector<Key> order;

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 12) throw IoError("bad grid csv row: " + line);

    Key key{std::stoi(f[1]), std::stoi(f[2]), f[4], f[5]};
    auto it = grouped.find(key);
    if (it == grouped.end()) {
      ConditionRow row;
      row.benchmark_id = "synthetic";
      row.n_actions = key.n_actions;
      row.budget = key.budget;
      row.b_ratio = std::stod(f[3]);
      row.tau2 = std::stod(f[4]);
      row.sigma2 = std::stod(f[5]);
      row.rho = std::stod(f[6]);
      row.prs = std::stod(f[7]);
      it = grouped.emplace(key, std::move(row)).first;
      order.push_back(key);
    }
    PlannerStats st;
    st.hit1_mean = std::stod(f[8]);
    st.hit1_sem = std::stod(f[9]);
    st.auc_mean = std::stod(f[10]);
    st.auc_sem = std::stod(f[11]);
    it->second.per_planner[f[0]] = st;
  }

  std::vector<ConditionRow> rows;
  rows.reserve(order.size());
  for (const auto& k : order) rows.push_back(grouped.at(k));
  return rows;
}

std::string validation_jsonl(const std::vector<ClosedFormResult>& results) {
  std::ostringstream out;
  for (const auto& r : results) {
    json j;
    j["name"] = r.name;
    j["analytic"] = r.analytic;
    j["mc_estimate"] = r.mc_estimate;
    j["mc_se"] = r.mc_se;
    j["n_draws"] = r.n_draws;
    j["pass"] = r.pass;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::string record_jsonl_line(const std::string& planner, std::uint64_t seed,
                              int context, const RunRecord& record) {
  json j;
  j["planner"] = planner;
  j["seed"] = seed;
  j["context"] = context;
  json queried = json::array();
  for (const auto& q : record.queried)
    queried.push_back({q.step, q.action, q.value});
  j["queried"] = queried;
  json rho = json::array();
  for (const auto& [t, v] : record.rho_trajectory) rho.push_back({t, v});
  j["rho_trajectory"] = rho;
  json prs = json::array();
  for (const auto& [t, v] : record.prs_trajectory) prs.push_back({t, v});
  j["prs_trajectory"] = prs;
  json modes = json::array();
  for (const auto& [t, m] : record.mode_switches)
    modes.push_back({t, to_string(m)});
  j["mode_switches"] = modes;
  json hits;
  for (const auto& [k, v] : record.hit_at_k) hits[std::to_string(k)] = v;
  j["hit_at_k"] = hits;
  j["discovery_auc"] = record.discovery_auc;
  return j.dump();
}

std::string protocol_jsonl(const std::vector<ProtocolEntry>& entries) {
  std::ostringstream out;
  for (const auto& e : entries) {
    json j;
    j["benchmark_id"] = e.benchmark_id;
    j["prior_condition"] = e.prior_condition;
    j["budget_ratio"] = e.b_ratio;
    j["budget"] = e.budget;
    j["n_actions"] = e.n_actions;
    j["context_count"] = e.k_contexts;
    j["metric"] = {{e.metric_terminal, e.metric_terminal_value},
                   {e.metric_cumulative, e.metric_cumulative_value}};
    if (e.rho_measured)
      j["rho"] = e.rho;
    else
      j["rho"] = "unmeasured";
    j["prs"] = e.prs;
    j["classification"] = {{"predicted", e.predicted},
                           {"in_boundary_zone", e.in_boundary_zone},
                           {"k_sufficient", e.k_sufficient}};
    out << j.dump() << '\n';
  }
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace relab
