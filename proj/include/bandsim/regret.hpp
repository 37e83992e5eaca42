#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bandsim/policy.hpp"

namespace bandsim {

namespace detail {

inline void check_grouping(const std::vector<std::vector<int>>& grouping,
                           int group_size) {
  std::vector<char> seen(static_cast<std::size_t>(group_size), 0);
  int total = 0;
  for (const auto& g : grouping) {
    for (int u : g) {
      if (u < 0 || u >= group_size || seen[static_cast<std::size_t>(u)])
        throw std::invalid_argument("grouping: must partition the N users");
      seen[static_cast<std::size_t>(u)] = 1;
      ++total;
    }
  }
  if (total != group_size)
    throw std::invalid_argument("grouping: must partition the N users");
}

}  // namespace detail

// Per-timeslot regret decomposition against the tau-broadcast oracle that
// uses the same grouping.
struct RegretStep {
  double learning = 0.0;      // group-oracle value minus plan value
  double exploitation = 0.0;  // per-user optimum minus group-oracle value
  double plan_value = 0.0;    // expected payoff sum of the plan
  double oracle_value = 0.0;  // expected payoff sum of the group oracle
};

inline RegretStep regret_step(const PayoffModel& payoff,
                              std::span<const int> contexts,
                              const TransmissionPlan& plan) {
  RegretStep out;
  double per_user_best = 0.0;
  for (int ctx : contexts) {
    double best = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < payoff.num_messages; ++m)
      best = std::max(best, payoff.value(ctx, m));
    per_user_best += best;
  }
  for (std::size_t g = 0; g < plan.groups.size(); ++g) {
    double oracle_value = 0.0;
    oracle_message(payoff, contexts, plan.groups[g], &oracle_value);
    out.oracle_value += oracle_value;
    const int m = plan.message_for_group[g];
    double group_value = 0.0;  // summed per group, same order as the oracle
    for (int u : plan.groups[g])
      group_value += payoff.value(contexts[static_cast<std::size_t>(u)], m);
    out.plan_value += group_value;
  }
  out.learning = out.oracle_value - out.plan_value;
  out.exploitation = per_user_best - out.oracle_value;
  return out;
}

// Expected-payoff (pseudo) learning regret of one timeslot. The plan must use
// exactly the grouping the oracle is evaluated on.
inline double learning_regret_step(const EnvironmentInstance& env,
                                   std::span<const int> contexts,
                                   const TransmissionPlan& plan,
                                   const std::vector<std::vector<int>>& grouping) {
  if (plan.groups != grouping)
    throw std::invalid_argument("grouping: plan and oracle groupings differ");
  detail::check_grouping(grouping, static_cast<int>(contexts.size()));
  return regret_step(env.payoff, contexts, plan).learning;
}

// Loss of the best tau-broadcast strategy relative to per-user optima;
// independent of any policy.
inline double exploitation_regret_step(const EnvironmentInstance& env,
                                       std::span<const int> contexts,
                                       int tau,
                                       const std::vector<std::vector<int>>& grouping) {
  if (static_cast<int>(grouping.size()) != tau)
    throw std::invalid_argument("tau: grouping must have tau groups");
  detail::check_grouping(grouping, static_cast<int>(contexts.size()));
  TransmissionPlan plan = oracle_plan(env.payoff, contexts, grouping);
  return regret_step(env.payoff, contexts, plan).exploitation;
}

struct SeriesRow {
  std::int64_t t = 0;
  double r_step = 0.0;
  double b_step = 0.0;
  double r_cum = 0.0;
  double b_cum = 0.0;
  double l_cum = 0.0;
};

struct RegretSummary {
  double learning_regret = 0.0;        // R(T), pseudo form
  double exploitation_regret = 0.0;    // B(T)
  double total_regret = 0.0;           // L(T) = R(T) + B(T)
  double realized_learning_regret = 0.0;
  double realized_reward_total = 0.0;
  std::int64_t timeslots = 0;
};

// Accumulates per-timeslot regret terms; the time series is thinned to every
// record_every-th slot (plus the final slot) while cumulative totals stay
// exact.
class RegretLedger {
 public:
  explicit RegretLedger(std::int64_t record_every = 1)
      : record_every_(record_every < 1 ? 1 : record_every) {}

  void add(std::int64_t t, const RegretStep& step, double realized_sum) {
    r_cum_ += step.learning;
    b_cum_ += step.exploitation;
    realized_cum_ += step.oracle_value - realized_sum;
    realized_reward_ += realized_sum;
    last_t_ = t;
    if (t % record_every_ == 0)
      series_.push_back({t, step.learning, step.exploitation, r_cum_, b_cum_,
                         r_cum_ + b_cum_});
    else
      pending_ = {t, step.learning, step.exploitation, r_cum_, b_cum_,
                  r_cum_ + b_cum_};
  }

  double learning_cum() const { return r_cum_; }
  double exploitation_cum() const { return b_cum_; }
  double total_cum() const { return r_cum_ + b_cum_; }

  RegretSummary finalize() {
    if (last_t_ > 0 && (series_.empty() || series_.back().t != last_t_))
      series_.push_back(pending_);
    RegretSummary s;
    s.learning_regret = r_cum_;
    s.exploitation_regret = b_cum_;
    s.total_regret = r_cum_ + b_cum_;
    s.realized_learning_regret = realized_cum_;
    s.realized_reward_total = realized_reward_;
    s.timeslots = last_t_;
    return s;
  }

  const std::vector<SeriesRow>& series() const { return series_; }

 private:
  std::int64_t record_every_;
  std::vector<SeriesRow> series_;
  SeriesRow pending_;
  double r_cum_ = 0.0;
  double b_cum_ = 0.0;
  double realized_cum_ = 0.0;
  double realized_reward_ = 0.0;
  std::int64_t last_t_ = 0;
};

}  // namespace bandsim
