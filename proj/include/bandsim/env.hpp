#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandsim/rng.hpp"

namespace bandsim {

enum class NoiseKind { kBernoulli, kTruncatedAdditive };

// Expected payoffs mu(k, m) for K contexts and M messages, all lying on the
// grid {grid_step, 2*grid_step, ...} <= 1 unless grid_exempt is set (spike
// environments intentionally place epsilon off-grid).
struct PayoffModel {
  int num_contexts = 0;  // K
  int num_messages = 0;  // M
  double grid_step = 1.0;
  std::vector<double> mu;  // K x M, row-major
  NoiseKind noise = NoiseKind::kBernoulli;
  double noise_sigma = 0.0;
  bool grid_exempt = false;

  double value(int k, int m) const { return mu[static_cast<std::size_t>(k) * num_messages + m]; }
  double& value(int k, int m) { return mu[static_cast<std::size_t>(k) * num_messages + m]; }
};

inline void validate_payoff(const PayoffModel& p) {
  if (p.num_contexts < 1) throw std::invalid_argument("K: must be >= 1");
  if (p.num_messages < 1) throw std::invalid_argument("M: must be >= 1");
  if (!(p.grid_step > 0.0 && p.grid_step <= 1.0))
    throw std::invalid_argument("delta: must lie in (0, 1]");
  if (p.mu.size() != static_cast<std::size_t>(p.num_contexts) * p.num_messages)
    throw std::invalid_argument("mu: must have K*M entries");
  for (double v : p.mu) {
    if (!(v > 0.0 && v <= 1.0))
      throw std::invalid_argument("mu: entries must lie in (0, 1]");
    if (!p.grid_exempt) {
      const double ratio = v / p.grid_step;
      if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
        throw std::invalid_argument("mu: entries must be positive multiples of delta");
    }
  }
  if (p.noise == NoiseKind::kTruncatedAdditive && p.noise_sigma < 0.0)
    throw std::invalid_argument("sigma: must be >= 0");
}

// Hidden clustering of the M messages into L content types; messages of one
// type share an identical payoff column.
struct LatentStructure {
  int num_types = 0;                 // L
  std::vector<int> type_of;          // size M, values in [0, L)
  std::vector<double> type_payoff;   // K x L, row-major

  double value(int k, int l, int num_types_row) const {
    return type_payoff[static_cast<std::size_t>(k) * num_types_row + l];
  }
};

enum class ArrivalKind {
  kIidCategorical,
  kUniform,
  kDeterministicCycle,
  kSingleUserIid,
};

struct ArrivalProcess {
  ArrivalKind kind = ArrivalKind::kUniform;
  int group_size = 1;          // N
  std::vector<double> rates;   // nu_k, sum == N; used by kIidCategorical
};

struct Arrivals {
  std::vector<int> contexts;  // x_t, one context id per user
  std::vector<int> counts;    // y_t, histogram over the K contexts
};

struct EnvironmentInstance {
  PayoffModel payoff;
  std::optional<LatentStructure> latent;
  ArrivalProcess arrivals;
  std::uint64_t rng_seed = 0;

  Rng reward_rng{0};

  int num_contexts() const { return payoff.num_contexts; }
  int num_messages() const { return payoff.num_messages; }
  int group_size() const { return arrivals.group_size; }
};

inline std::vector<double> uniform_rates(int num_contexts, int group_size) {
  return std::vector<double>(num_contexts,
                             static_cast<double>(group_size) / num_contexts);
}

inline void validate_arrivals(const ArrivalProcess& a, int num_contexts) {
  if (a.group_size < 1) throw std::invalid_argument("N: must be >= 1");
  if (a.kind == ArrivalKind::kSingleUserIid && a.group_size != 1)
    throw std::invalid_argument("N: single-user-iid requires N == 1");
  if (a.kind == ArrivalKind::kIidCategorical) {
    if (static_cast<int>(a.rates.size()) != num_contexts)
      throw std::invalid_argument("rates: must have K entries");
    double total = 0.0;
    for (double r : a.rates) {
      if (r < 0.0) throw std::invalid_argument("rates: must be nonnegative");
      total += r;
    }
    if (std::abs(total - a.group_size) > 1e-9)
      throw std::invalid_argument("rates: must sum to N");
  }
}

inline EnvironmentInstance make_environment(PayoffModel payoff,
                                            std::optional<LatentStructure> latent,
                                            ArrivalProcess arrivals,
                                            std::uint64_t seed) {
  validate_payoff(payoff);
  validate_arrivals(arrivals, payoff.num_contexts);
  EnvironmentInstance env{std::move(payoff), std::move(latent),
                          std::move(arrivals), seed,
                          Rng(mix_seed(seed, rng_tag::kRewards))};
  if (env.latent) {
    const LatentStructure& ls = *env.latent;
    if (static_cast<int>(ls.type_of.size()) != env.payoff.num_messages)
      throw std::invalid_argument("latent: type_of must map every message");
    for (int k = 0; k < env.payoff.num_contexts; ++k)
      for (int m = 0; m < env.payoff.num_messages; ++m)
        if (env.payoff.value(k, m) !=
            ls.type_payoff[static_cast<std::size_t>(k) * ls.num_types + ls.type_of[m]])
          throw std::invalid_argument("mu: must equal the matrix induced by the latent structure");
  }
  return env;
}

// Rebinds the arrival and reward streams to a new seed without touching the
// generated structure; lets one latent environment back many independent runs.
inline void reseed_streams(EnvironmentInstance& env, std::uint64_t stream_seed) {
  env.rng_seed = stream_seed;
  env.reward_rng = Rng(mix_seed(stream_seed, rng_tag::kRewards));
}

// Arrival sample for timeslot t; a pure function of (seed, t).
inline void sample_arrivals_into(const EnvironmentInstance& env, std::int64_t t,
                                 Arrivals& out) {
  if (t < 1) throw std::invalid_argument("t: must be >= 1");
  const int k_count = env.num_contexts();
  const int n = env.group_size();
  out.contexts.resize(n);
  out.counts.assign(k_count, 0);

  const ArrivalProcess& a = env.arrivals;
  switch (a.kind) {
    case ArrivalKind::kDeterministicCycle: {
      for (int u = 0; u < n; ++u)
        out.contexts[u] =
            static_cast<int>(((t - 1) * n + u) % k_count);
      break;
    }
    case ArrivalKind::kUniform:
    case ArrivalKind::kSingleUserIid: {
      Rng r(mix_seed(mix_seed(env.rng_seed, rng_tag::kArrivals),
                     static_cast<std::uint64_t>(t)));
      for (int u = 0; u < n; ++u)
        out.contexts[u] = static_cast<int>(r.next_below(k_count));
      break;
    }
    case ArrivalKind::kIidCategorical: {
      Rng r(mix_seed(mix_seed(env.rng_seed, rng_tag::kArrivals),
                     static_cast<std::uint64_t>(t)));
      for (int u = 0; u < n; ++u)
        out.contexts[u] = r.categorical(a.rates, static_cast<double>(n));
      break;
    }
  }
  for (int u = 0; u < n; ++u) ++out.counts[out.contexts[u]];
}

inline Arrivals sample_arrivals(const EnvironmentInstance& env, std::int64_t t) {
  Arrivals out;
  sample_arrivals_into(env, t, out);
  return out;
}

// One reward draw from P_{k,m} using the supplied stream.
inline double sample_reward_with(const PayoffModel& payoff, int k, int m, Rng& rng) {
  if (k < 0 || k >= payoff.num_contexts)
    throw std::invalid_argument("k: context id out of range");
  if (m < 0 || m >= payoff.num_messages)
    throw std::invalid_argument("m: message id out of range");
  const double mean = payoff.value(k, m);
  switch (payoff.noise) {
    case NoiseKind::kBernoulli:
      return rng.bernoulli(mean) ? 1.0 : 0.0;
    case NoiseKind::kTruncatedAdditive: {
      if (payoff.noise_sigma == 0.0) return mean;
      const double v = mean + payoff.noise_sigma * rng.normal();
      return std::clamp(v, 0.0, 1.0);
    }
  }
  return mean;
}

inline double sample_reward(EnvironmentInstance& env, int k, int m) {
  return sample_reward_with(env.payoff, k, m, env.reward_rng);
}

// mu[k][k] = 1, mu[k][k'] = epsilon: the worst case for a single broadcast.
// Off-grid by construction, so the model is flagged grid_exempt.
inline EnvironmentInstance make_spike_env(int k_count, int group_size,
                                          double epsilon,
                                          std::uint64_t seed = 0) {
  if (k_count < 1) throw std::invalid_argument("K: must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon: must lie in (0, 1)");
  PayoffModel p;
  p.num_contexts = k_count;
  p.num_messages = k_count;
  p.grid_step = 1.0 - epsilon;  // smallest payoff difference in this model
  p.grid_exempt = true;
  p.mu.assign(static_cast<std::size_t>(k_count) * k_count, epsilon);
  for (int k = 0; k < k_count; ++k) p.value(k, k) = 1.0;
  ArrivalProcess a;
  a.kind = ArrivalKind::kUniform;
  a.group_size = group_size;
  return make_environment(std::move(p), std::nullopt, std::move(a), seed);
}

// Latin square of scaled Borda scores: mu[k][m] = ((k + m mod M) + 1) / M
// with 1-based k, m. Requires M = K = N; every row and column is a
// permutation of {1/M, ..., 1}. Arrivals cycle so each timeslot serves one
// user per context.
inline EnvironmentInstance make_borda_env(int k_count, int group_size,
                                          std::uint64_t seed = 0) {
  if (k_count != group_size)
    throw std::invalid_argument("N: borda requires M == K == N");
  if (k_count < 1) throw std::invalid_argument("K: must be >= 1");
  const int m_count = k_count;
  PayoffModel p;
  p.num_contexts = k_count;
  p.num_messages = m_count;
  p.grid_step = 1.0 / m_count;
  p.mu.resize(static_cast<std::size_t>(k_count) * m_count);
  for (int k = 0; k < k_count; ++k)
    for (int m = 0; m < m_count; ++m)
      p.value(k, m) =
          static_cast<double>(((k + 1) + (m + 1)) % m_count + 1) / m_count;
  ArrivalProcess a;
  a.kind = ArrivalKind::kDeterministicCycle;
  a.group_size = group_size;
  return make_environment(std::move(p), std::nullopt, std::move(a), seed);
}

// Random latent environment: balanced types, and per context L distinct grid
// levels drawn without replacement, so different types differ by >= delta in
// every context.
inline EnvironmentInstance make_latent_env(int k_count, int m_count,
                                           int num_types, double delta,
                                           std::uint64_t seed,
                                           int group_size = 1,
                                           ArrivalKind arrival_kind = ArrivalKind::kUniform) {
  if (k_count < 1) throw std::invalid_argument("K: must be >= 1");
  if (m_count < 1) throw std::invalid_argument("M: must be >= 1");
  if (num_types < 1 || num_types > m_count)
    throw std::invalid_argument("L: must lie in [1, M]");
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("delta: must lie in (0, 1]");
  const int levels = static_cast<int>(std::floor(1.0 / delta + 1e-9));
  if (num_types > levels)
    throw std::invalid_argument(
        "L: infeasible grid, requires L <= floor(1/delta) distinct payoff levels");

  Rng rng(mix_seed(seed, rng_tag::kLatent));

  LatentStructure ls;
  ls.num_types = num_types;
  ls.type_of.resize(m_count);
  // Balanced type sizes (differ by at most 1), then shuffled over messages.
  {
    int next = 0;
    const int base = m_count / num_types;
    const int extra = m_count % num_types;
    for (int l = 0; l < num_types; ++l) {
      const int size = base + (l < extra ? 1 : 0);
      for (int i = 0; i < size; ++i) ls.type_of[next++] = l;
    }
    rng.shuffle(std::span<int>(ls.type_of));
  }

  ls.type_payoff.resize(static_cast<std::size_t>(k_count) * num_types);
  std::vector<int> level_ids(levels);
  for (int k = 0; k < k_count; ++k) {
    std::iota(level_ids.begin(), level_ids.end(), 1);
    // Partial Fisher-Yates: first L entries are a uniform draw w/o replacement.
    for (int l = 0; l < num_types; ++l) {
      const int j = l + static_cast<int>(rng.next_below(levels - l));
      std::swap(level_ids[l], level_ids[j]);
      ls.type_payoff[static_cast<std::size_t>(k) * num_types + l] =
          level_ids[l] * delta;
    }
  }

  PayoffModel p;
  p.num_contexts = k_count;
  p.num_messages = m_count;
  p.grid_step = delta;
  p.mu.resize(static_cast<std::size_t>(k_count) * m_count);
  for (int k = 0; k < k_count; ++k)
    for (int m = 0; m < m_count; ++m)
      p.value(k, m) =
          ls.type_payoff[static_cast<std::size_t>(k) * num_types + ls.type_of[m]];

  ArrivalProcess a;
  a.kind = arrival_kind;
  a.group_size = group_size;
  return make_environment(std::move(p), std::move(ls), std::move(a), seed);
}

}  // namespace bandsim
