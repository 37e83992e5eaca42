#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bandsim/cluster.hpp"
#include "bandsim/cover.hpp"
#include "bandsim/policy.hpp"

namespace bandsim {

namespace detail {

// argmax over candidates of the summed estimated payoff across the group's
// contexts. Messages with an undefined mean for any needed context count as
// -infinity; if nothing is defined the lowest-id candidate wins. Candidates
// must be in ascending order so ties resolve to the lowest id.
inline int argmax_sum_mean(const EstimatorTable& table,
                           std::span<const int> contexts,
                           std::span<const int> candidates) {
  int best = candidates.front();
  double best_value = 0.0;
  bool any_defined = false;
  for (int m : candidates) {
    double v = 0.0;
    bool defined = true;
    for (int k : contexts) {
      const auto mu = table.mean(k, m);
      if (!mu) {
        defined = false;
        break;
      }
      v += *mu;
    }
    if (defined && (!any_defined || v > best_value)) {
      any_defined = true;
      best_value = v;
      best = m;
    }
  }
  return best;
}

struct ExplorationBudget {
  std::int64_t length = 0;
  bool capped = false;
};

inline ExplorationBudget clip_budget(double formula_value,
                                     std::int64_t cap_length) {
  ExplorationBudget b;
  const double wanted = std::floor(formula_value);
  if (wanted > static_cast<double>(cap_length)) {
    b.length = cap_length;
    b.capped = true;
  } else {
    b.length = std::max<std::int64_t>(0, static_cast<std::int64_t>(wanted));
  }
  return b;
}

}  // namespace detail

// Round-robin epoch policy: explore every message in a fixed rotation for
// T1 = (16 / (nu * delta^2)) * N^2 * M * log(MNKT) decisions, then greedily
// recommend the message with the highest estimated payoff sum for the group.
// With pool_contexts the K contexts collapse into one, which turns the same
// schedule into the context-free baseline.
class EpochBroadcastPolicy : public Policy {
 public:
  EpochBroadcastPolicy(const PolicyConfig& cfg, int num_contexts,
                       int num_messages, bool pool_contexts = false)
      : cfg_(cfg),
        pooled_(pool_contexts),
        num_messages_(num_messages),
        table_(pool_contexts ? 1 : num_contexts, num_messages) {
    validate_policy_config(cfg);
    const int k_eff = pooled_ ? 1 : num_contexts;
    // Every arrival lands in the pooled context, so its rate is exactly N.
    const double nu = pooled_ ? static_cast<double>(cfg.group_size) : cfg.nu_lower;
    const double g = static_cast<double>(cfg.group_size);
    const double t1 = (16.0 / (nu * cfg.delta_lower * cfg.delta_lower)) * g * g *
                      num_messages *
                      std::log(static_cast<double>(num_messages) * g * k_eff *
                               static_cast<double>(cfg.horizon));
    const auto cap = static_cast<std::int64_t>(
        cfg.exploration_cap * static_cast<double>(cfg.horizon));
    const auto budget = detail::clip_budget(t1, cap);
    exploration_length_ = budget.length;
    capped_ = budget.capped;
  }

  int decide(std::span<const int> contexts, std::int64_t step) override {
    if (step <= exploration_length_) {
      phase_ = DecisionPhase::kExplore1;
      return static_cast<int>((step - 1) % num_messages_);
    }
    phase_ = DecisionPhase::kExploit;
    if (pooled_) {
      scratch_.assign(contexts.size(), 0);
      return detail::argmax_sum_mean(table_, scratch_, all_messages());
    }
    return detail::argmax_sum_mean(table_, contexts, all_messages());
  }

  void observe(int context, int message, double reward) override {
    table_.record(pooled_ ? 0 : context, message, reward);
  }

  DecisionPhase last_phase() const override { return phase_; }
  bool budget_capped() const override { return capped_; }
  const EstimatorTable* table() const override { return &table_; }
  std::uint64_t state_hash() const override { return table_.state_hash(); }

  std::int64_t exploration_length() const { return exploration_length_; }

 private:
  std::span<const int> all_messages() {
    if (static_cast<int>(message_ids_.size()) != num_messages_) {
      message_ids_.resize(static_cast<std::size_t>(num_messages_));
      std::iota(message_ids_.begin(), message_ids_.end(), 0);
    }
    return message_ids_;
  }

  PolicyConfig cfg_;
  bool pooled_;
  int num_messages_;
  EstimatorTable table_;
  std::int64_t exploration_length_ = 0;
  bool capped_ = false;
  DecisionPhase phase_ = DecisionPhase::kExplore1;
  std::vector<int> message_ids_;
  std::vector<int> scratch_;
};

// Latent-structure policy for single-user timeslots. Routine 1 assigns every
// message pair to a context; whenever context k arrives the policy first
// tops up samples of its assigned subset S_k (exploration 1), then samples
// under-explored representatives of the current clustering (exploration 2),
// and otherwise exploits over the representatives. The clustering of the
// pairwise distance estimates is recomputed lazily: a cached partition is
// provably identical to a fresh Routine-2 run while every within-type
// distance stays below the threshold and every cross-type distance at or
// above it, so the cache is only rebuilt when an update breaks that
// separation.
class LatentCoverPolicy : public Policy {
 public:
  LatentCoverPolicy(const PolicyConfig& cfg, int num_contexts, int num_messages,
                    int cover_budget = 200)
      : cfg_(cfg),
        num_contexts_(num_contexts),
        num_messages_(num_messages),
        threshold_(cfg.delta_lower / 2.0),
        d_coef_(32.0 / (cfg.delta_lower * cfg.delta_lower)),
        table_(num_contexts, num_messages),
        cover_(num_messages >= 2
                   ? find_cover(num_messages, num_contexts, cover_budget,
                                cfg.structure_seed)
                   : CoverSolution{1, num_contexts, 1,
                                   std::vector<std::vector<int>>(
                                       static_cast<std::size_t>(num_contexts),
                                       std::vector<int>{0}),
                                   {}}),
        distance_(pair_count(num_messages),
                  std::numeric_limits<double>::infinity()),
        explore1_count_(static_cast<std::size_t>(num_contexts), 0) {
    validate_policy_config(cfg);
    if (cfg.group_size != 1)
      throw std::invalid_argument("policy: alg2 requires N == 1 (single user per timeslot)");
    neighbors_.resize(static_cast<std::size_t>(num_contexts) * num_messages);
    for (int m1 = 0; m1 < num_messages; ++m1)
      for (int m2 = m1 + 1; m2 < num_messages; ++m2) {
        const std::size_t pi = pair_index(m1, m2, num_messages);
        const int ctx = cover_.pair_context[pi];
        neighbors_[static_cast<std::size_t>(ctx) * num_messages + m1]
            .push_back({m2, pi});
        neighbors_[static_cast<std::size_t>(ctx) * num_messages + m2]
            .push_back({m1, pi});
      }
  }

  int decide(std::span<const int> contexts, std::int64_t step) override {
    if (contexts.size() != 1)
      throw std::invalid_argument("contexts: alg2 decides for one user at a time");
    const int k = contexts[0];
    const double need = sample_threshold(step);

    for (int m : cover_.subsets[static_cast<std::size_t>(k)]) {
      if (static_cast<double>(table_.count(k, m)) < need) {
        phase_ = DecisionPhase::kExplore1;
        ++explore1_count_[static_cast<std::size_t>(k)];
        return m;
      }
    }

    const ContentTypePartition& part = partition();
    for (int rep : part.representatives) {
      if (static_cast<double>(table_.count(k, rep)) < need) {
        phase_ = DecisionPhase::kExplore2;
        return rep;
      }
    }

    phase_ = DecisionPhase::kExploit;
    return detail::argmax_sum_mean(table_, contexts, part.representatives);
  }

  void observe(int context, int message, double reward) override {
    table_.record(context, message, reward);
    const auto& touched =
        neighbors_[static_cast<std::size_t>(context) * num_messages_ + message];
    for (const auto& [other, pi] : touched) {
      const double d =
          table_.count(context, other) > 0
              ? table_.pair_distance(context, message, other)
              : std::numeric_limits<double>::infinity();
      update_distance(pi, d);
    }
  }

  // D(t) = (32 / delta_lower^2) * log(t).
  double sample_threshold(std::int64_t t) const {
    return d_coef_ * std::log(static_cast<double>(t));
  }

  const ContentTypePartition& partition() {
    if (!cache_valid_ || !cache_clean_ || violations_ > 0) recluster();
    return partition_;
  }

  DecisionPhase last_phase() const override { return phase_; }
  const EstimatorTable* table() const override { return &table_; }
  std::uint64_t state_hash() const override { return table_.state_hash(); }

  const CoverSolution& cover() const { return cover_; }
  std::int64_t explore1_total(int k) const {
    return explore1_count_[static_cast<std::size_t>(k)];
  }

 private:
  void update_distance(std::size_t pi, double d) {
    if (cache_valid_) {
      const bool within = pair_within_[pi] != 0;
      const bool ok_old = side_ok(distance_[pi], within);
      const bool ok_new = side_ok(d, within);
      violations_ += static_cast<int>(!ok_new) - static_cast<int>(!ok_old);
    }
    distance_[pi] = d;
  }

  bool side_ok(double d, bool within) const {
    return within ? d < threshold_ : d >= threshold_;
  }

  void recluster() {
    partition_ = detail::cluster_total(num_messages_, distance_, threshold_);
    pair_within_.assign(pair_count(num_messages_), 0);
    std::vector<int> type_of(static_cast<std::size_t>(num_messages_));
    for (std::size_t ty = 0; ty < partition_.types.size(); ++ty)
      for (int m : partition_.types[ty])
        type_of[static_cast<std::size_t>(m)] = static_cast<int>(ty);
    violations_ = 0;
    for (int m1 = 0; m1 < num_messages_; ++m1)
      for (int m2 = m1 + 1; m2 < num_messages_; ++m2) {
        const std::size_t pi = pair_index(m1, m2, num_messages_);
        const bool within = type_of[static_cast<std::size_t>(m1)] ==
                            type_of[static_cast<std::size_t>(m2)];
        pair_within_[pi] = within ? 1 : 0;
        if (!side_ok(distance_[pi], within)) ++violations_;
      }
    cache_clean_ = violations_ == 0;
    cache_valid_ = true;
  }

  PolicyConfig cfg_;
  int num_contexts_;
  int num_messages_;
  double threshold_;
  double d_coef_;
  EstimatorTable table_;
  CoverSolution cover_;
  std::vector<double> distance_;
  std::vector<std::int64_t> explore1_count_;
  std::vector<std::vector<std::pair<int, std::size_t>>> neighbors_;

  ContentTypePartition partition_;
  std::vector<char> pair_within_;
  bool cache_valid_ = false;
  bool cache_clean_ = false;
  int violations_ = 0;
  DecisionPhase phase_ = DecisionPhase::kExplore1;
};

// Broadcast policy that learns the latent structure the blunt way: a long
// round-robin phase over all messages, one clustering pass, a short
// round-robin phase over the representatives, then greedy exploitation over
// representatives only.
class LatentBroadcastPolicy : public Policy {
 public:
  LatentBroadcastPolicy(const PolicyConfig& cfg, int num_contexts,
                        int num_messages)
      : cfg_(cfg),
        num_contexts_(num_contexts),
        num_messages_(num_messages),
        table_(num_contexts, num_messages) {
    validate_policy_config(cfg);
    const double d2 = cfg.delta_lower * cfg.delta_lower;
    const double g = static_cast<double>(cfg.group_size);
    const double horizon = static_cast<double>(cfg.horizon);
    phase1_formula_ = (32.0 * num_contexts * num_messages / d2) *
                      std::log(g * horizon * num_messages);
    cap_total_ = static_cast<std::int64_t>(cfg.exploration_cap * horizon);
    const auto b1 = detail::clip_budget(phase1_formula_, cap_total_ / 2);
    phase1_length_ = b1.length;
    capped1_ = b1.capped;
  }

  int decide(std::span<const int> contexts, std::int64_t step) override {
    if (step <= phase1_length_) {
      phase_ = DecisionPhase::kExplore1;
      return static_cast<int>((step - 1) % num_messages_);
    }
    if (!clustered_) run_clustering();
    if (step <= phase1_length_ + phase2_length_) {
      phase_ = DecisionPhase::kExplore2;
      const auto idx = (step - phase1_length_ - 1) %
                       static_cast<std::int64_t>(partition_.representatives.size());
      return partition_.representatives[static_cast<std::size_t>(idx)];
    }
    phase_ = DecisionPhase::kExploit;
    return detail::argmax_sum_mean(table_, contexts, partition_.representatives);
  }

  void observe(int context, int message, double reward) override {
    table_.record(context, message, reward);
  }

  DecisionPhase last_phase() const override { return phase_; }
  bool budget_capped() const override { return capped1_ || capped2_; }
  const EstimatorTable* table() const override { return &table_; }
  std::uint64_t state_hash() const override {
    std::uint64_t h = table_.state_hash();
    h = splitmix64(h ^ (clustered_ ? 1 : 0));
    if (clustered_)
      for (int r : partition_.representatives)
        h = splitmix64(h ^ static_cast<std::uint64_t>(r));
    return h;
  }

  std::int64_t phase1_length() const { return phase1_length_; }
  // Defined once the clustering has run (first decision past phase 1).
  std::int64_t phase2_length() const { return phase2_length_; }
  bool has_clustered() const { return clustered_; }
  const ContentTypePartition& discovered_partition() const { return partition_; }

 private:
  void run_clustering() {
    std::vector<double> dist(pair_count(num_messages_),
                             std::numeric_limits<double>::infinity());
    for (int m1 = 0; m1 < num_messages_; ++m1)
      for (int m2 = m1 + 1; m2 < num_messages_; ++m2) {
        double best = -1.0;
        for (int k = 0; k < num_contexts_; ++k) {
          if (table_.count(k, m1) == 0 || table_.count(k, m2) == 0) continue;
          best = std::max(best, table_.pair_distance(k, m1, m2));
        }
        if (best >= 0.0) dist[pair_index(m1, m2, num_messages_)] = best;
      }
    partition_ =
        detail::cluster_total(num_messages_, dist, cfg_.delta_lower / 2.0);
    clustered_ = true;

    const double d2 = cfg_.delta_lower * cfg_.delta_lower;
    const double g = static_cast<double>(cfg_.group_size);
    const double l_hat = static_cast<double>(partition_.num_types());
    const double p2 = (16.0 * g * g * l_hat / (cfg_.nu_lower * d2)) *
                      std::log(l_hat * g * num_contexts_ *
                               static_cast<double>(cfg_.horizon));
    const auto b2 = detail::clip_budget(p2, cap_total_ - phase1_length_);
    phase2_length_ = b2.length;
    capped2_ = b2.capped;
  }

  PolicyConfig cfg_;
  int num_contexts_;
  int num_messages_;
  EstimatorTable table_;
  double phase1_formula_ = 0.0;
  std::int64_t cap_total_ = 0;
  std::int64_t phase1_length_ = 0;
  std::int64_t phase2_length_ = 0;
  bool capped1_ = false;
  bool capped2_ = false;
  bool clustered_ = false;
  ContentTypePartition partition_;
  DecisionPhase phase_ = DecisionPhase::kExplore1;
};

// K independent explore-then-exploit bandits over all M messages, sharing
// the D(t) sample threshold with the latent policy but learning no structure.
class PerContextPolicy : public Policy {
 public:
  PerContextPolicy(const PolicyConfig& cfg, int num_contexts, int num_messages)
      : cfg_(cfg),
        num_messages_(num_messages),
        d_coef_(32.0 / (cfg.delta_lower * cfg.delta_lower)),
        table_(num_contexts, num_messages) {
    validate_policy_config(cfg);
  }

  int decide(std::span<const int> contexts, std::int64_t step) override {
    if (contexts.size() != 1)
      throw std::invalid_argument("contexts: per-context decides for one user at a time");
    const int k = contexts[0];
    const double need = d_coef_ * std::log(static_cast<double>(step));
    for (int m = 0; m < num_messages_; ++m) {
      if (static_cast<double>(table_.count(k, m)) < need) {
        phase_ = DecisionPhase::kExplore1;
        return m;
      }
    }
    phase_ = DecisionPhase::kExploit;
    return detail::argmax_sum_mean(table_, contexts, all_messages());
  }

  void observe(int context, int message, double reward) override {
    table_.record(context, message, reward);
  }

  DecisionPhase last_phase() const override { return phase_; }
  const EstimatorTable* table() const override { return &table_; }
  std::uint64_t state_hash() const override { return table_.state_hash(); }

 private:
  std::span<const int> all_messages() {
    if (static_cast<int>(message_ids_.size()) != num_messages_) {
      message_ids_.resize(static_cast<std::size_t>(num_messages_));
      std::iota(message_ids_.begin(), message_ids_.end(), 0);
    }
    return message_ids_;
  }

  PolicyConfig cfg_;
  int num_messages_;
  double d_coef_;
  EstimatorTable table_;
  DecisionPhase phase_ = DecisionPhase::kExplore1;
  std::vector<int> message_ids_;
};

// Knows the true payoffs; always plays the per-group optimum.
class OraclePolicy : public Policy {
 public:
  explicit OraclePolicy(const PayoffModel* payoff) : payoff_(payoff) {
    if (payoff == nullptr) throw std::invalid_argument("oracle: payoff required");
  }

  int decide(std::span<const int> contexts, std::int64_t) override {
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < payoff_->num_messages; ++m) {
      double v = 0.0;
      for (int k : contexts) v += payoff_->value(k, m);
      if (v > best_value) {
        best_value = v;
        best = m;
      }
    }
    return best;
  }

  void observe(int, int, double) override {}
  DecisionPhase last_phase() const override { return DecisionPhase::kExploit; }
  std::uint64_t state_hash() const override { return 0x07AC1E; }

 private:
  const PayoffModel* payoff_;
};

// Picks uniformly at random. Counter-based so that a decision depends only on
// (seed, step), which keeps rejected replay rounds from consuming randomness.
class UniformRandomPolicy : public Policy {
 public:
  UniformRandomPolicy(int num_messages, std::uint64_t seed)
      : num_messages_(num_messages), seed_(mix_seed(seed, rng_tag::kPolicy)) {}

  int decide(std::span<const int>, std::int64_t step) override {
    Rng rng(mix_seed(seed_, static_cast<std::uint64_t>(step)));
    return static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_messages_)));
  }

  void observe(int, int, double) override {}
  DecisionPhase last_phase() const override { return DecisionPhase::kExploit; }
  std::uint64_t state_hash() const override { return 0; }

 private:
  int num_messages_;
  std::uint64_t seed_;
};

class FixedMessagePolicy : public Policy {
 public:
  explicit FixedMessagePolicy(int message) : message_(message) {}
  int decide(std::span<const int>, std::int64_t) override { return message_; }
  void observe(int, int, double) override {}
  DecisionPhase last_phase() const override { return DecisionPhase::kExploit; }
  std::uint64_t state_hash() const override { return 0; }

 private:
  int message_;
};

struct PolicySpec {
  std::string name = "alg1";
  int fixed_message = 0;       // for "fixed"
  std::uint64_t random_seed = 0;  // for "random"
};

inline std::unique_ptr<Policy> make_policy(const PolicySpec& spec,
                                           const PolicyConfig& cfg,
                                           int num_contexts, int num_messages,
                                           const PayoffModel* payoff_for_oracle) {
  if (spec.name == "alg1")
    return std::make_unique<EpochBroadcastPolicy>(cfg, num_contexts, num_messages);
  if (spec.name == "context-free")
    return std::make_unique<EpochBroadcastPolicy>(cfg, num_contexts, num_messages,
                                                  /*pool_contexts=*/true);
  if (spec.name == "alg2")
    return std::make_unique<LatentCoverPolicy>(cfg, num_contexts, num_messages);
  if (spec.name == "alg3")
    return std::make_unique<LatentBroadcastPolicy>(cfg, num_contexts, num_messages);
  if (spec.name == "per-context")
    return std::make_unique<PerContextPolicy>(cfg, num_contexts, num_messages);
  if (spec.name == "oracle") return std::make_unique<OraclePolicy>(payoff_for_oracle);
  if (spec.name == "random")
    return std::make_unique<UniformRandomPolicy>(num_messages, spec.random_seed);
  if (spec.name == "fixed") {
    if (spec.fixed_message < 0 || spec.fixed_message >= num_messages)
      throw std::invalid_argument("fixed_message: message id out of range");
    return std::make_unique<FixedMessagePolicy>(spec.fixed_message);
  }
  throw std::invalid_argument(
      "policy: unknown name '" + spec.name +
      "' (expected alg1|alg2|alg3|oracle|context-free|per-context|random|fixed)");
}

}  // namespace bandsim
