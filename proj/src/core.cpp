#include "regimelab/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace relab {

int OracleTable::argmax_action(int context) const {
  check_indices(context, 0);
  const double* row = scores.data() + static_cast<std::size_t>(context) * n_actions;
  int best = 0;
  for (int a = 1; a < n_actions; ++a)
    if (row[a] > row[best]) best = a;
  return best;
}

std::vector<int> OracleTable::top_k_actions(int context, int k) const {
  check_indices(context, 0);
  if (k < 1 || k > n_actions) throw IndexError("top-k out of range");
  std::vector<int> idx(n_actions);
  std::iota(idx.begin(), idx.end(), 0);
  const double* row = scores.data() + static_cast<std::size_t>(context) * n_actions;
  std::stable_sort(idx.begin(), idx.end(), [row](int a, int b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return a < b;
  });
  idx.resize(k);
  return idx;
}

double OracleTable::cross_context_mean(int action) const {
  check_indices(0, action);
  double s = 0.0;
  for (int c = 0; c < n_contexts; ++c)
    s += scores[static_cast<std::size_t>(c) * n_actions + action];
  return s / n_contexts;
}

std::pair<double, double> OracleTable::score_range(int context) const {
  check_indices(context, 0);
  const double* row = scores.data() + static_cast<std::size_t>(context) * n_actions;
  double lo = row[0], hi = row[0];
  for (int a = 1; a < n_actions; ++a) {
    lo = std::min(lo, row[a]);
    hi = std::max(hi, row[a]);
  }
  return {lo, hi};
}

void OracleTable::normalize_per_context() {
  for (int c = 0; c < n_contexts; ++c) {
    auto [lo, hi] = score_range(c);
    double* row = scores.data() + static_cast<std::size_t>(c) * n_actions;
    if (hi > lo) {
      for (int a = 0; a < n_actions; ++a) row[a] = (row[a] - lo) / (hi - lo);
    } else {
      for (int a = 0; a < n_actions; ++a) row[a] = 0.0;
    }
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_score(const std::string& s, const std::string& where) {
  double v;
  try {
    std::size_t pos = 0;
    v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw BadValue("non-numeric score at " + where + ": '" + s + "'");
  }
  if (!std::isfinite(v)) throw BadValue("non-finite score at " + where);
  return v;
}

}  // namespace

OracleTable load_replay_oracle(const std::string& path, double obs_noise_sd) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open replay file: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw IncompleteTable("empty replay file: " + path);

  struct Row {
    std::string context, action;
    double score;
  };
  std::vector<Row> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw BadValue("expected 3 fields on line " + std::to_string(line_no));
    rows.push_back({strip(fields[0]), strip(fields[1]),
                    parse_score(strip(fields[2]),
                                "line " + std::to_string(line_no))});
  }
  if (rows.empty()) throw IncompleteTable("replay file has no data rows");

  std::vector<std::string> ctx_ids, act_ids;
  for (const auto& r : rows) {
    ctx_ids.push_back(r.context);
    act_ids.push_back(r.action);
  }
  auto uniq_sort = [](std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq_sort(ctx_ids);
  uniq_sort(act_ids);

  OracleTable t;
  t.n_contexts = static_cast<int>(ctx_ids.size());
  t.n_actions = static_cast<int>(act_ids.size());
  if (t.n_actions < 2)
    throw IncompleteTable("replay table needs at least 2 actions");
  t.context_ids = ctx_ids;
  t.action_ids = act_ids;
  t.obs_noise_sd = obs_noise_sd;
  t.scores.assign(static_cast<std::size_t>(t.n_contexts) * t.n_actions,
                  std::numeric_limits<double>::quiet_NaN());

  std::map<std::string, int> ctx_index, act_index;
  for (int i = 0; i < t.n_contexts; ++i) ctx_index[ctx_ids[i]] = i;
  for (int i = 0; i < t.n_actions; ++i) act_index[act_ids[i]] = i;

  std::vector<char> seen(t.scores.size(), 0);
  for (const auto& r : rows) {
    std::size_t cell =
        static_cast<std::size_t>(ctx_index[r.context]) * t.n_actions +
        act_index[r.action];
    if (seen[cell])
      throw DuplicateCell("duplicate cell (" + r.context + ", " + r.action +
                          ")");
    seen[cell] = 1;
    t.scores[cell] = r.score;
  }

  for (int c = 0; c < t.n_contexts; ++c)
    for (int a = 0; a < t.n_actions; ++a)
      if (!seen[static_cast<std::size_t>(c) * t.n_actions + a])
        throw IncompleteTable("missing cell (" + ctx_ids[c] + ", " +
                              act_ids[a] + ")");
  return t;
}

std::vector<std::vector<double>> load_action_features(
    const std::string& path, const std::vector<std::string>& action_ids) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open features file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw IncompleteTable("empty features file");
  const std::size_t dim = split_csv_line(line).size() - 1;
  if (dim < 1) throw BadValue("features file needs at least one feature column");

  std::map<std::string, std::vector<double>> by_id;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != dim + 1)
      throw BadValue("inconsistent feature dimension on line " +
                     std::to_string(line_no));
    std::vector<double> f(dim);
    for (std::size_t j = 0; j < dim; ++j)
      f[j] = parse_score(strip(fields[j + 1]),
                         "line " + std::to_string(line_no));
    if (!by_id.emplace(strip(fields[0]), std::move(f)).second)
      throw DuplicateCell("duplicate feature row for action " +
                          strip(fields[0]));
  }

  std::vector<std::vector<double>> out;
  out.reserve(action_ids.size());
  for (const auto& id : action_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw IncompleteTable("no features for action " + id);
    out.push_back(it->second);
  }
  return out;
}

double observe(const OracleTable& table, int context, int action, Rng& rng) {
  const double s = table.score(context, action);
  if (table.obs_noise_sd <= 0.0) return s;
  return s + table.obs_noise_sd * rng.next_gaussian();
}

const char* to_string(PriorFamily f) {
  switch (f) {
    case PriorFamily::flat: return "flat";
    case PriorFamily::ema: return "ema";
    case PriorFamily::structured: return "structured";
    case PriorFamily::oracle: return "oracle";
  }
  return "?";
}

PriorFamily prior_family_from_string(const std::string& s) {
  if (s == "flat") return PriorFamily::flat;
  if (s == "ema") return PriorFamily::ema;
  if (s == "structured") return PriorFamily::structured;
  if (s == "oracle") return PriorFamily::oracle;
  throw BadValue("unknown prior family: " + s);
}

const char* to_string(Mode m) {
  return m == Mode::explore ? "explore" : "exploit";
}

int RunRecord::distinct_queried() const {
  std::vector<int> acts;
  acts.reserve(queried.size());
  for (const auto& q : queried) acts.push_back(q.action);
  std::sort(acts.begin(), acts.end());
  acts.erase(std::unique(acts.begin(), acts.end()), acts.end());
  return static_cast<int>(acts.size());
}

std::vector<std::pair<int, double>> RunRecord::mean_outcome_per_action()
    const {
  std::map<int, std::pair<double, int>> acc;  // action -> (sum, count)
  for (const auto& q : queried) {
    auto& e = acc[q.action];
    e.first += q.value;
    e.second += 1;
  }
  std::vector<std::pair<int, double>> out;
  out.reserve(acc.size());
  for (const auto& [a, e] : acc) out.emplace_back(a, e.first / e.second);
  return out;
}

}  // namespace relab
