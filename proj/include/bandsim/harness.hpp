#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bandsim/config.hpp"
#include "bandsim/policies.hpp"
#include "bandsim/regret.hpp"

namespace bandsim {

struct RunConfig {
  EnvSpec env;
  PolicySpec policy;
  std::int64_t horizon = 1000;  // T
  int tau = 1;
  std::uint64_t seed = 0;
  std::int64_t record_every = 0;  // 0 -> max(1, T / 10000)
  std::optional<double> delta_lower;  // default: env grid step
  std::optional<double> nu_lower;     // default: smallest true arrival rate
  double exploration_cap = 0.5;
};

// Config with every default filled in; echoed into all outputs.
struct ResolvedRunConfig {
  RunConfig base;
  std::int64_t record_every = 1;
  double delta_lower = 1.0;
  double nu_lower = 1.0;
  // Reduced-instance parameters per Appendix-B style subgroup splitting:
  // every subgroup decision is one sub-timeslot of a single-transmission
  // instance with tau*T decisions and ceil(N/tau)-user groups.
  PolicyConfig policy_config;
};

struct RunResult {
  RegretSummary summary;
  std::vector<SeriesRow> series;
  std::int64_t exploration_slots = 0;  // no group decision exploited
  std::int64_t exploit_slots = 0;      // every group decision exploited
  std::int64_t mixed_slots = 0;
  std::int64_t exploit_match_slots = 0;  // exploit slots with zero pseudo-regret
  double exploit_match_rate = 0.0;
  bool budget_capped = false;
  bool grid_exempt = false;
  std::int64_t reward_samples = 0;
  // Cumulative pseudo learning regret sampled at requested timeslots.
  std::map<std::int64_t, double> learning_cum_probes;
  ResolvedRunConfig resolved;
};

inline ResolvedRunConfig resolve_run_config(const RunConfig& cfg,
                                            const EnvironmentInstance& env) {
  ResolvedRunConfig r;
  r.base = cfg;
  if (cfg.horizon < 1) throw std::invalid_argument("T: must be >= 1");
  const int n = env.group_size();
  if (cfg.tau < 1 || cfg.tau > n)
    throw std::invalid_argument("tau: must satisfy 1 <= tau <= N (got tau=" +
                                std::to_string(cfg.tau) +
                                ", N=" + std::to_string(n) + ")");
  r.record_every = cfg.record_every > 0
                       ? cfg.record_every
                       : std::max<std::int64_t>(1, cfg.horizon / 10000);
  r.delta_lower = cfg.delta_lower.value_or(env.payoff.grid_step);
  r.nu_lower = cfg.nu_lower.value_or(min_arrival_rate(env));

  const int group = (n + cfg.tau - 1) / cfg.tau;  // ceil(N / tau)
  PolicyConfig pc;
  pc.horizon = cfg.horizon * cfg.tau;
  pc.delta_lower = r.delta_lower;
  pc.nu_lower = r.nu_lower * group / n;  // subgroup share of each context rate
  pc.num_transmissions = cfg.tau;
  pc.exploration_cap = cfg.exploration_cap;
  pc.group_size = group;
  pc.structure_seed = cfg.env.seed;
  validate_policy_config(pc);
  r.policy_config = pc;

  if (cfg.policy.name == "alg2" && (n != 1 || cfg.tau != 1))
    throw std::invalid_argument("policy: alg2 requires N == 1 and tau == 1");
  return r;
}

// Executes exactly T timeslots of the interaction loop: sample arrivals,
// split subgroups, one policy decision per subgroup, rewards for every user,
// estimator updates, regret accounting. Fully deterministic given the seed.
inline RunResult run(const RunConfig& cfg, Policy* external_policy = nullptr,
                     std::span<const std::int64_t> probe_ts = {}) {
  EnvironmentInstance env = build_environment(cfg.env, cfg.seed);
  ResolvedRunConfig rc = resolve_run_config(cfg, env);
  const int n = env.group_size();
  const int tau = cfg.tau;
  const std::int64_t horizon = cfg.horizon;

  std::unique_ptr<Policy> owned;
  Policy* policy = external_policy;
  if (policy == nullptr) {
    PolicySpec spec = cfg.policy;
    spec.random_seed = cfg.seed;
    owned = make_policy(spec, rc.policy_config, env.num_contexts(),
                        env.num_messages(), &env.payoff);
    policy = owned.get();
  }

  RunResult result;
  result.resolved = rc;
  RegretLedger ledger(rc.record_every);

  std::vector<std::int64_t> probes(probe_ts.begin(), probe_ts.end());
  std::sort(probes.begin(), probes.end());
  std::size_t next_probe = 0;

  // Fixed groupings for the degenerate taus; random balanced re-draw otherwise.
  std::vector<std::vector<int>> grouping;
  const bool fixed_grouping = (tau == 1 || tau == n);
  if (tau == 1) {
    grouping.resize(1);
    grouping[0].resize(static_cast<std::size_t>(n));
    std::iota(grouping[0].begin(), grouping[0].end(), 0);
  } else if (tau == n) {
    grouping.resize(static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u) grouping[static_cast<std::size_t>(u)] = {u};
  }

  Arrivals arr;
  std::vector<int> group_ctx;
  std::vector<int> message_for_user(static_cast<std::size_t>(n));
  TransmissionPlan plan;
  const std::uint64_t grouping_seed = mix_seed(cfg.seed, rng_tag::kGrouping);

  for (std::int64_t t = 1; t <= horizon; ++t) {
    sample_arrivals_into(env, t, arr);
    if (!fixed_grouping) {
      Rng rng(mix_seed(grouping_seed, static_cast<std::uint64_t>(t)));
      grouping = split_into_subgroups(n, tau, rng);
    }

    plan.groups = grouping;
    plan.message_for_group.clear();
    bool any_exploit = false;
    bool all_exploit = true;
    for (int g = 0; g < tau; ++g) {
      const auto& group = grouping[static_cast<std::size_t>(g)];
      group_ctx.clear();
      for (int u : group) group_ctx.push_back(arr.contexts[static_cast<std::size_t>(u)]);
      const std::int64_t step = (t - 1) * tau + g + 1;
      const int msg = policy->decide(group_ctx, step);
      if (msg < 0 || msg >= env.num_messages())
        throw std::runtime_error("policy: decision out of range");
      plan.message_for_group.push_back(msg);
      const bool exploit = policy->last_phase() == DecisionPhase::kExploit;
      any_exploit = any_exploit || exploit;
      all_exploit = all_exploit && exploit;
      for (int u : group) message_for_user[static_cast<std::size_t>(u)] = msg;
    }

    double realized = 0.0;
    for (int u = 0; u < n; ++u) {
      const int ctx = arr.contexts[static_cast<std::size_t>(u)];
      const int msg = message_for_user[static_cast<std::size_t>(u)];
      const double r = sample_reward(env, ctx, msg);
      realized += r;
      policy->observe(ctx, msg, r);
      ++result.reward_samples;
    }

    const RegretStep step = regret_step(env.payoff, arr.contexts, plan);
    ledger.add(t, step, realized);

    if (all_exploit) {
      ++result.exploit_slots;
      if (step.learning <= 1e-12) ++result.exploit_match_slots;
    } else if (!any_exploit) {
      ++result.exploration_slots;
    } else {
      ++result.mixed_slots;
    }

    while (next_probe < probes.size() && probes[next_probe] == t) {
      result.learning_cum_probes[t] = ledger.learning_cum();
      ++next_probe;
    }
  }

  result.summary = ledger.finalize();
  result.series = ledger.series();
  result.exploit_match_rate =
      result.exploit_slots > 0
          ? static_cast<double>(result.exploit_match_slots) / result.exploit_slots
          : 0.0;
  result.budget_capped = policy->budget_capped();
  result.grid_exempt = env.payoff.grid_exempt;
  return result;
}

struct SweepConfig {
  RunConfig base;
  std::vector<int> tau_values;
  std::vector<std::uint64_t> seeds;
};

struct SweepCell {
  int tau = 0;
  std::uint64_t seed = 0;
  double learning_regret = 0.0;
  double exploitation_regret = 0.0;
  double total_regret = 0.0;
  bool budget_capped = false;
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline Aggregate aggregate(const std::vector<double>& xs) {
  Aggregate a;
  if (xs.empty()) return a;
  double sum = 0.0;
  a.min = xs.front();
  a.max = xs.front();
  for (double x : xs) {
    sum += x;
    a.min = std::min(a.min, x);
    a.max = std::max(a.max, x);
  }
  a.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return a;
}

struct SweepRow {
  int tau = 0;
  Aggregate learning;
  Aggregate exploitation;
  Aggregate total;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<SweepRow> rows;
};

// Independent runs per (tau, seed) cell; per-tau aggregation over seeds.
inline SweepResult sweep(const SweepConfig& cfg) {
  if (cfg.tau_values.empty()) throw std::invalid_argument("tau_values: must be nonempty");
  if (cfg.seeds.empty()) throw std::invalid_argument("seeds: must be nonempty");
  SweepResult out;
  for (int tau : cfg.tau_values) {
    std::vector<double> r, b, l;
    for (std::uint64_t seed : cfg.seeds) {
      RunConfig c = cfg.base;
      c.tau = tau;
      c.seed = seed;
      const RunResult res = run(c);
      out.cells.push_back({tau, seed, res.summary.learning_regret,
                           res.summary.exploitation_regret,
                           res.summary.total_regret, res.budget_capped});
      r.push_back(res.summary.learning_regret);
      b.push_back(res.summary.exploitation_regret);
      l.push_back(res.summary.total_regret);
    }
    out.rows.push_back({tau, aggregate(r), aggregate(b), aggregate(l)});
  }
  return out;
}

}  // namespace bandsim
