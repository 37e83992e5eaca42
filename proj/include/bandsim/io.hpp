#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bandsim/cluster.hpp"
#include "bandsim/cover.hpp"
#include "bandsim/harness.hpp"
#include "bandsim/replay.hpp"

namespace bandsim {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline nlohmann::json to_json(const ResolvedRunConfig& rc) {
  nlohmann::json j;
  j["env"] = to_json(rc.base.env);
  j["policy"] = rc.base.policy.name;
  if (rc.base.policy.name == "fixed")
    j["fixed_message"] = rc.base.policy.fixed_message + 1;
  j["T"] = rc.base.horizon;
  j["tau"] = rc.base.tau;
  j["seed"] = rc.base.seed;
  j["record_every"] = rc.record_every;
  j["delta_lower"] = rc.delta_lower;
  j["nu_lower"] = rc.nu_lower;
  j["exploration_cap"] = rc.base.exploration_cap;
  return j;
}

inline nlohmann::json to_json(const RegretSummary& s) {
  return nlohmann::json{
      {"learning_regret", s.learning_regret},
      {"exploitation_regret", s.exploitation_regret},
      {"total_regret", s.total_regret},
      {"realized_learning_regret", s.realized_learning_regret},
      {"realized_reward_total", s.realized_reward_total},
      {"timeslots", s.timeslots},
  };
}

inline nlohmann::json run_summary_json(const RunResult& r) {
  nlohmann::json j;
  j["config"] = to_json(r.resolved);
  j["results"] = to_json(r.summary);
  j["results"]["exploration_slots"] = r.exploration_slots;
  j["results"]["exploit_slots"] = r.exploit_slots;
  j["results"]["mixed_slots"] = r.mixed_slots;
  j["results"]["exploit_match_rate"] = r.exploit_match_rate;
  j["results"]["reward_samples"] = r.reward_samples;
  j["flags"] = nlohmann::json{{"budget_capped", r.budget_capped},
                              {"grid_exempt", r.grid_exempt}};
  return j;
}

// Time series with the resolved config echoed in a leading comment line.
inline void write_run_csv(std::ostream& os, const RunResult& r) {
  os << "# config: " << to_json(r.resolved).dump() << '\n';
  os << "t,R_step,B_step,R_cum,B_cum,L_cum\n";
  for (const SeriesRow& row : r.series)
    os << row.t << ',' << format_double(row.r_step) << ','
       << format_double(row.b_step) << ',' << format_double(row.r_cum) << ','
       << format_double(row.b_cum) << ',' << format_double(row.l_cum) << '\n';
}

inline nlohmann::json sweep_json(const SweepResult& s, const RunConfig& base,
                                 const std::vector<int>& taus,
                                 const std::vector<std::uint64_t>& seeds) {
  nlohmann::json j;
  {
    EnvironmentInstance env = build_environment(base.env, base.seed);
    RunConfig b = base;
    b.tau = taus.empty() ? 1 : taus.front();
    j["config"] = to_json(resolve_run_config(b, env));
  }
  j["tau_values"] = taus;
  j["seeds"] = seeds;
  nlohmann::json cells = nlohmann::json::array();
  for (const SweepCell& c : s.cells)
    cells.push_back({{"tau", c.tau},
                     {"seed", c.seed},
                     {"learning_regret", c.learning_regret},
                     {"exploitation_regret", c.exploitation_regret},
                     {"total_regret", c.total_regret},
                     {"budget_capped", c.budget_capped}});
  j["cells"] = std::move(cells);
  nlohmann::json rows = nlohmann::json::array();
  for (const SweepRow& r : s.rows)
    rows.push_back({{"tau", r.tau},
                    {"mean_R", r.learning.mean},
                    {"std_R", r.learning.stddev},
                    {"min_R", r.learning.min},
                    {"max_R", r.learning.max},
                    {"mean_B", r.exploitation.mean},
                    {"mean_L", r.total.mean}});
  j["table"] = std::move(rows);
  return j;
}

// Plot-ready trade-off table.
inline void write_sweep_csv(std::ostream& os, const SweepResult& s) {
  os << "tau,mean_R,std_R,mean_B,mean_L\n";
  for (const SweepRow& r : s.rows)
    os << r.tau << ',' << format_double(r.learning.mean) << ','
       << format_double(r.learning.stddev) << ','
       << format_double(r.exploitation.mean) << ','
       << format_double(r.total.mean) << '\n';
}

inline nlohmann::json to_json(const ContentTypePartition& p) {
  nlohmann::json types = nlohmann::json::array();
  for (const auto& t : p.types) {
    nlohmann::json ids = nlohmann::json::array();
    for (int m : t) ids.push_back(m + 1);
    types.push_back(std::move(ids));
  }
  nlohmann::json reps = nlohmann::json::array();
  for (int r : p.representatives) reps.push_back(r + 1);
  return nlohmann::json{{"types", std::move(types)},
                        {"representatives", std::move(reps)}};
}

inline nlohmann::json to_json(const CoverSolution& sol) {
  nlohmann::json j;
  j["messages"] = sol.num_messages;
  j["contexts"] = sol.num_contexts;
  j["s"] = sol.subset_size;
  nlohmann::json subsets = nlohmann::json::array();
  for (const auto& subset : sol.subsets) {
    nlohmann::json ids = nlohmann::json::array();
    for (int m : subset) ids.push_back(m + 1);
    subsets.push_back(std::move(ids));
  }
  j["subsets"] = std::move(subsets);
  nlohmann::json assignment = nlohmann::json::array();
  for (int m1 = 0; m1 < sol.num_messages; ++m1)
    for (int m2 = m1 + 1; m2 < sol.num_messages; ++m2)
      assignment.push_back(
          {{"pair", {m1 + 1, m2 + 1}},
           {"context",
            sol.pair_context[pair_index(m1, m2, sol.num_messages)] + 1}});
  j["assignment"] = std::move(assignment);
  return j;
}

inline nlohmann::json to_json(const ReplaySummary& s) {
  return nlohmann::json{
      {"total_records", s.total_records},
      {"matched_rounds", s.matched_rounds},
      {"policy_ctr", s.policy_ctr},
      {"random_ctr", s.random_ctr},
      {"relative_accuracy", s.relative_accuracy},
  };
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("out: cannot open '" + path + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw std::runtime_error("out: failed writing '" + path + "'");
}

}  // namespace bandsim
