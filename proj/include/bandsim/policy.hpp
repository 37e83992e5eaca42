#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "bandsim/env.hpp"
#include "bandsim/estimator.hpp"
#include "bandsim/rng.hpp"

namespace bandsim {

// One timeslot's broadcast schedule: tau disjoint user groups covering
// [0, N) and the message each group receives.
struct TransmissionPlan {
  std::vector<std::vector<int>> groups;
  std::vector<int> message_for_group;

  int num_transmissions() const { return static_cast<int>(groups.size()); }
};

struct PolicyConfig {
  std::int64_t horizon = 1;       // T (sub-timeslots for reduced instances)
  double delta_lower = 1.0;       // known lower bound on the payoff gap
  double nu_lower = 1.0;          // known lower bound on context arrival rates
  int num_transmissions = 1;      // tau
  double exploration_cap = 0.5;   // exploration budgets are clipped to cap*T
  int group_size = 1;             // N (users per decision for this instance)
  std::uint64_t structure_seed = 0;  // drives Routine-1 restarts only
};

inline void validate_policy_config(const PolicyConfig& c) {
  if (c.horizon < 1) throw std::invalid_argument("T: must be >= 1");
  if (!(c.delta_lower > 0.0 && c.delta_lower <= 1.0))
    throw std::invalid_argument("delta_lower: must lie in (0, 1]");
  if (!(c.nu_lower > 0.0)) throw std::invalid_argument("nu_lower: must be > 0");
  if (c.num_transmissions < 1) throw std::invalid_argument("tau: must be >= 1");
  if (!(c.exploration_cap > 0.0 && c.exploration_cap <= 1.0))
    throw std::invalid_argument("exploration_cap: must lie in (0, 1]");
  if (c.group_size < 1) throw std::invalid_argument("N: must be >= 1");
}

enum class DecisionPhase { kExplore1, kExplore2, kExploit };

// A sequential decision rule. `step` is the 1-based decision counter: the
// timeslot for single-group runs, or the sub-timeslot (t-1)*tau + s when the
// slot is split into tau subgroup decisions.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual int decide(std::span<const int> contexts, std::int64_t step) = 0;
  virtual void observe(int context, int message, double reward) = 0;
  virtual DecisionPhase last_phase() const = 0;

  virtual bool budget_capped() const { return false; }
  virtual const EstimatorTable* table() const { return nullptr; }
  // Hash of the semantic policy state (estimates, phase markers); derived
  // caches are excluded so memoization stays invisible.
  virtual std::uint64_t state_hash() const = 0;
};

// Random balanced partition of [0, N) into tau groups; sizes differ by at
// most one, larger groups first.
inline std::vector<std::vector<int>> split_into_subgroups(int group_size,
                                                          int tau, Rng& rng) {
  if (tau < 1) throw std::invalid_argument("tau: must be >= 1");
  if (tau > group_size)
    throw std::invalid_argument("tau: must satisfy tau <= N");
  std::vector<int> users(static_cast<std::size_t>(group_size));
  std::iota(users.begin(), users.end(), 0);
  rng.shuffle(std::span<int>(users));
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(tau));
  const int base = group_size / tau;
  const int extra = group_size % tau;
  std::size_t next = 0;
  for (int g = 0; g < tau; ++g) {
    const int size = base + (g < extra ? 1 : 0);
    auto& grp = groups[static_cast<std::size_t>(g)];
    grp.assign(users.begin() + static_cast<std::ptrdiff_t>(next),
               users.begin() + static_cast<std::ptrdiff_t>(next + size));
    next += static_cast<std::size_t>(size);
  }
  return groups;
}

inline std::vector<std::vector<int>> split_into_subgroups(int group_size,
                                                          int tau,
                                                          std::uint64_t seed) {
  Rng rng(seed);
  return split_into_subgroups(group_size, tau, rng);
}

// Best message for a set of users under known payoffs: argmax_m of the sum of
// mu(context, m) over the users, ties to the lowest id.
inline int oracle_message(const PayoffModel& payoff,
                          std::span<const int> contexts,
                          std::span<const int> users, double* value_out) {
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < payoff.num_messages; ++m) {
    double v = 0.0;
    for (int u : users) v += payoff.value(contexts[static_cast<std::size_t>(u)], m);
    if (v > best_value) {
      best_value = v;
      best = m;
    }
  }
  if (value_out != nullptr) *value_out = best_value;
  return best;
}

// The best tau-broadcast strategy for arrival vector x_t and a given grouping.
inline TransmissionPlan oracle_plan(const PayoffModel& payoff,
                                    std::span<const int> contexts,
                                    const std::vector<std::vector<int>>& grouping) {
  TransmissionPlan plan;
  plan.groups = grouping;
  plan.message_for_group.reserve(grouping.size());
  for (const auto& group : grouping)
    plan.message_for_group.push_back(
        oracle_message(payoff, contexts, group, nullptr));
  return plan;
}

inline TransmissionPlan oracle_plan(const EnvironmentInstance& env,
                                    std::span<const int> contexts,
                                    const std::vector<std::vector<int>>& grouping) {
  return oracle_plan(env.payoff, contexts, grouping);
}

}  // namespace bandsim
