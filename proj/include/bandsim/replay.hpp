#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandsim/env.hpp"
#include "bandsim/policy.hpp"

namespace bandsim {

// One logged interaction under a uniform logging policy.
struct LogRecord {
  std::int64_t timestamp = 0;
  int context_id = 0;          // 0-based internally, 1-based on the wire
  int logged_action = 0;
  double reward = 0.0;
  std::vector<int> candidate_set;
  double propensity = 1.0;
};

struct ReplaySummary {
  std::int64_t total_records = 0;
  std::int64_t matched_rounds = 0;
  double policy_ctr = 0.0;  // mean reward over matched rounds
  double random_ctr = 0.0;  // mean logged reward (uniform logging)
  double relative_accuracy = 0.0;
};

// Synthetic log: per record, one context from the environment's arrival
// process, one uniformly chosen action over all M messages, and a reward
// drawn from the payoff model. Deterministic given the seed.
inline std::vector<LogRecord> generate_log(const EnvironmentInstance& env,
                                           std::int64_t num_records,
                                           std::uint64_t seed) {
  if (num_records < 0) throw std::invalid_argument("records: must be >= 0");
  const int m_count = env.num_messages();
  const int k_count = env.num_contexts();
  std::vector<int> candidates(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) candidates[static_cast<std::size_t>(m)] = m;

  Rng rng(mix_seed(seed, rng_tag::kLog));
  std::vector<LogRecord> log;
  log.reserve(static_cast<std::size_t>(num_records));
  const auto& arr = env.arrivals;
  for (std::int64_t i = 0; i < num_records; ++i) {
    LogRecord rec;
    rec.timestamp = i + 1;
    rec.context_id = arr.kind == ArrivalKind::kIidCategorical
                         ? rng.categorical(arr.rates, static_cast<double>(arr.group_size))
                         : static_cast<int>(rng.next_below(k_count));
    rec.logged_action = static_cast<int>(rng.next_below(m_count));
    rec.reward = sample_reward_with(env.payoff, rec.context_id, rec.logged_action, rng);
    rec.candidate_set = candidates;
    rec.propensity = 1.0 / m_count;
    log.push_back(std::move(rec));
  }
  return log;
}

// Rejection-sampling replay: present each record's context to the policy; on
// a match, feed the logged reward to the policy and count the round;
// otherwise skip the record entirely. Threshold formulas run on matched-round
// time, since skipped rounds carry no information.
inline ReplaySummary replay(Policy& policy, std::span<const LogRecord> log) {
  ReplaySummary s;
  s.total_records = static_cast<std::int64_t>(log.size());
  double matched_reward = 0.0;
  double total_reward = 0.0;
  int ctx[1];
  for (const LogRecord& rec : log) {
    bool in_candidates = false;
    for (int c : rec.candidate_set) in_candidates = in_candidates || c == rec.logged_action;
    if (!in_candidates)
      throw std::invalid_argument(
          "log: malformed record, logged_action outside candidate_set (timestamp " +
          std::to_string(rec.timestamp) + ")");
    total_reward += rec.reward;
    ctx[0] = rec.context_id;
    const int choice = policy.decide(std::span<const int>(ctx, 1), s.matched_rounds + 1);
    if (choice != rec.logged_action) continue;
    ++s.matched_rounds;
    matched_reward += rec.reward;
    policy.observe(rec.context_id, rec.logged_action, rec.reward);
  }
  s.policy_ctr = s.matched_rounds > 0
                     ? matched_reward / static_cast<double>(s.matched_rounds)
                     : 0.0;
  s.random_ctr = s.total_records > 0
                     ? total_reward / static_cast<double>(s.total_records)
                     : 0.0;
  s.relative_accuracy = s.random_ctr > 0.0 ? s.policy_ctr / s.random_ctr : 0.0;
  return s;
}

inline double relative_accuracy(const ReplaySummary& s) {
  if (!(s.random_ctr > 0.0))
    throw std::invalid_argument("random_ctr: relative accuracy undefined at zero");
  return s.policy_ctr / s.random_ctr;
}

// JSON-lines serialization, one record per line, 1-based ids on the wire.
inline void write_log_jsonl(std::ostream& os, std::span<const LogRecord> log) {
  for (const LogRecord& rec : log) {
    nlohmann::json j;
    j["timestamp"] = rec.timestamp;
    j["context_id"] = rec.context_id + 1;
    j["logged_action"] = rec.logged_action + 1;
    j["reward"] = rec.reward;
    nlohmann::json cands = nlohmann::json::array();
    for (int c : rec.candidate_set) cands.push_back(c + 1);
    j["candidate_set"] = std::move(cands);
    j["propensity"] = rec.propensity;
    os << j.dump() << '\n';
  }
}

inline std::vector<LogRecord> read_log_jsonl(std::istream& is) {
  std::vector<LogRecord> log;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument("log: line " + std::to_string(line_no) +
                                  " is not valid JSON: " + e.what());
    }
    try {
      LogRecord rec;
      rec.timestamp = j.at("timestamp").get<std::int64_t>();
      rec.context_id = j.at("context_id").get<int>() - 1;
      rec.logged_action = j.at("logged_action").get<int>() - 1;
      rec.reward = j.at("reward").get<double>();
      for (const auto& c : j.at("candidate_set"))
        rec.candidate_set.push_back(c.get<int>() - 1);
      rec.propensity = j.at("propensity").get<double>();
      if (rec.context_id < 0)
        throw std::invalid_argument("context_id: must be >= 1");
      if (rec.reward < 0.0 || rec.reward > 1.0)
        throw std::invalid_argument("reward: must lie in [0, 1]");
      if (!(rec.propensity > 0.0 && rec.propensity <= 1.0))
        throw std::invalid_argument("propensity: must lie in (0, 1]");
      log.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("log: line " + std::to_string(line_no) +
                                  " is missing fields: " + e.what());
    }
  }
  return log;
}

}  // namespace bandsim
