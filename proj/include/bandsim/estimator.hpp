#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "bandsim/rng.hpp"

namespace bandsim {

// Sufficient statistics for every policy: per-(context, message) sample
// counts Z(k,m), reward sums, and per-context arrival counts Z(k).
// Sums use Kahan compensation so means are permutation-invariant to ~1e-15
// even at 1e7 samples.
class EstimatorTable {
 public:
  EstimatorTable(int num_contexts, int num_messages)
      : num_contexts_(num_contexts),
        num_messages_(num_messages),
        counts_(cells(), 0),
        sums_(cells(), 0.0),
        comp_(cells(), 0.0),
        context_counts_(static_cast<std::size_t>(num_contexts), 0) {
    if (num_contexts < 1) throw std::invalid_argument("K: must be >= 1");
    if (num_messages < 1) throw std::invalid_argument("M: must be >= 1");
  }

  int num_contexts() const { return num_contexts_; }
  int num_messages() const { return num_messages_; }

  void record(int k, int m, double reward) {
    check_ids(k, m);
    if (!(reward >= 0.0 && reward <= 1.0))
      throw std::invalid_argument("reward: must lie in [0, 1]");
    const std::size_t i = index(k, m);
    ++counts_[i];
    ++context_counts_[static_cast<std::size_t>(k)];
    kahan_add(i, reward);
  }

  // Direct load of a cell, e.g. when restoring a serialized table.
  void load(int k, int m, std::int64_t count, double sum) {
    check_ids(k, m);
    if (count < 0) throw std::invalid_argument("count: must be >= 0");
    if (sum < -1e-12 || sum > static_cast<double>(count) + 1e-12)
      throw std::invalid_argument("sum: must lie in [0, count]");
    const std::size_t i = index(k, m);
    context_counts_[static_cast<std::size_t>(k)] += count - counts_[i];
    counts_[i] = count;
    sums_[i] = sum;
    comp_[i] = 0.0;
  }

  std::int64_t count(int k, int m) const {
    check_ids(k, m);
    return counts_[index(k, m)];
  }

  std::int64_t context_count(int k) const {
    check_ids(k, 0);
    return context_counts_[static_cast<std::size_t>(k)];
  }

  // Empty cells have no defined mean; the 0.0 convention is reachable via
  // mean_or below.
  std::optional<double> mean(int k, int m) const {
    check_ids(k, m);
    const std::size_t i = index(k, m);
    if (counts_[i] == 0) return std::nullopt;
    return sums_[i] / static_cast<double>(counts_[i]);
  }

  double mean_or(int k, int m, double fallback) const {
    return mean(k, m).value_or(fallback);
  }

  // Hoeffding confidence radius sqrt(log(t) / Z(k,m)).
  double radius(int k, int m, std::int64_t t) const {
    check_ids(k, m);
    if (t < 2) throw std::invalid_argument("t: must be >= 2");
    const std::int64_t z = counts_[index(k, m)];
    if (z == 0)
      throw std::invalid_argument("radius: undefined, no samples for (k, m)");
    return std::sqrt(std::log(static_cast<double>(t)) / static_cast<double>(z));
  }

  // |mean(k, m1) - mean(k, m2)| measured in the pair's assigned context.
  double pair_distance(int k, int m1, int m2) const {
    const auto a = mean(k, m1);
    const auto b = mean(k, m2);
    if (!a || !b)
      throw std::invalid_argument(
          "pair_distance: undefined, no samples for one of the messages");
    return std::abs(*a - *b);
  }

  std::uint64_t state_hash() const {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      h = splitmix64(h ^ static_cast<std::uint64_t>(counts_[i]));
      std::uint64_t bits;
      const double v = sums_[i];
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(bits));
      h = splitmix64(h ^ bits);
    }
    return h;
  }

  // Rows: context, message, count, sum (ids are 1-based in serialized form).
  void to_csv(std::ostream& os) const {
    os << "context,message,count,sum\n";
    char buf[64];
    for (int k = 0; k < num_contexts_; ++k)
      for (int m = 0; m < num_messages_; ++m) {
        const std::size_t i = index(k, m);
        std::snprintf(buf, sizeof(buf), "%.17g", sums_[i]);
        os << (k + 1) << ',' << (m + 1) << ',' << counts_[i] << ',' << buf
           << '\n';
      }
  }

 private:
  std::size_t cells() const {
    return static_cast<std::size_t>(num_contexts_) * num_messages_;
  }
  std::size_t index(int k, int m) const {
    return static_cast<std::size_t>(k) * num_messages_ + m;
  }
  void check_ids(int k, int m) const {
    if (k < 0 || k >= num_contexts_)
      throw std::invalid_argument("k: context id out of range");
    if (m < 0 || m >= num_messages_)
      throw std::invalid_argument("m: message id out of range");
  }
  void kahan_add(std::size_t i, double value) {
    const double y = value - comp_[i];
    const double t = sums_[i] + y;
    comp_[i] = (t - sums_[i]) - y;
    sums_[i] = t;
  }

  int num_contexts_;
  int num_messages_;
  std::vector<std::int64_t> counts_;
  std::vector<double> sums_;
  std::vector<double> comp_;
  std::vector<std::int64_t> context_counts_;
};

}  // namespace bandsim
