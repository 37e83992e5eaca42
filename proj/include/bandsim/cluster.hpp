#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bandsim/cover.hpp"
#include "bandsim/env.hpp"

namespace bandsim {

// A partition of [0, M) into content types. Types are ordered by their
// minimum member and the representative of a type is its minimum member, so
// equal partitions always carry equal representative sets.
struct ContentTypePartition {
  std::vector<std::vector<int>> types;
  std::vector<int> representatives;

  int num_types() const { return static_cast<int>(types.size()); }

  bool operator==(const ContentTypePartition& other) const {
    return types == other.types;
  }
};

// Estimated payoff differences for all C(M,2) unordered message pairs.
// Entries start out missing (NaN); +infinity is a valid value meaning
// "no evidence these could be the same type".
struct PairDistanceInput {
  int num_messages = 0;
  std::vector<double> distance;

  explicit PairDistanceInput(int m_count)
      : num_messages(m_count),
        distance(pair_count(m_count), std::numeric_limits<double>::quiet_NaN()) {
    if (m_count < 1) throw std::invalid_argument("M: must be >= 1");
  }

  void set(int m1, int m2, double d) {
    check(m1, m2);
    if (std::isnan(d) || d < 0.0)
      throw std::invalid_argument("distance: must be >= 0");
    distance[pair_index(m1, m2, num_messages)] = d;
  }

  double get(int m1, int m2) const {
    check(m1, m2);
    return distance[pair_index(m1, m2, num_messages)];
  }

 private:
  void check(int m1, int m2) const {
    if (m1 < 0 || m1 >= num_messages || m2 < 0 || m2 >= num_messages || m1 == m2)
      throw std::invalid_argument("pair: message ids out of range or equal");
  }
};

namespace detail {

// Complete-linkage agglomeration over a total distance vector (pair-indexed,
// +inf allowed). Merges the closest pair of clusters while that distance is
// strictly below the threshold; ties break toward the lexicographically
// smallest (min-member, min-member) pair.
inline ContentTypePartition cluster_total(int m_count,
                                          const std::vector<double>& pair_dist,
                                          double threshold) {
  // Cluster slots are indexed by their minimum member, which is stable under
  // the merge rule below.
  std::vector<std::vector<int>> members(static_cast<std::size_t>(m_count));
  std::vector<char> alive(static_cast<std::size_t>(m_count), 1);
  for (int m = 0; m < m_count; ++m) members[static_cast<std::size_t>(m)] = {m};

  // dist[i][j], i < j, both alive: complete-linkage distance.
  std::vector<double> dist(static_cast<std::size_t>(m_count) * m_count, 0.0);
  auto dref = [&](int i, int j) -> double& {
    if (i > j) std::swap(i, j);
    return dist[static_cast<std::size_t>(i) * m_count + j];
  };
  for (int i = 0; i < m_count; ++i)
    for (int j = i + 1; j < m_count; ++j)
      dref(i, j) = pair_dist[pair_index(i, j, m_count)];

  int alive_count = m_count;
  while (alive_count > 1) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m_count; ++i) {
      if (!alive[static_cast<std::size_t>(i)]) continue;
      for (int j = i + 1; j < m_count; ++j) {
        if (!alive[static_cast<std::size_t>(j)]) continue;
        const double d = dref(i, j);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (!(best < threshold)) break;
    // Merge bj into bi (bi < bj, so the slot keeps its min member).
    for (int k = 0; k < m_count; ++k) {
      if (k == bi || k == bj || !alive[static_cast<std::size_t>(k)]) continue;
      dref(bi, k) = std::max(dref(bi, k), dref(bj, k));
    }
    auto& dst = members[static_cast<std::size_t>(bi)];
    auto& src = members[static_cast<std::size_t>(bj)];
    dst.insert(dst.end(), src.begin(), src.end());
    src.clear();
    alive[static_cast<std::size_t>(bj)] = 0;
    --alive_count;
  }

  ContentTypePartition out;
  for (int i = 0; i < m_count; ++i) {
    if (!alive[static_cast<std::size_t>(i)]) continue;
    auto& t = members[static_cast<std::size_t>(i)];
    std::sort(t.begin(), t.end());
    out.representatives.push_back(t.front());
    out.types.push_back(std::move(t));
  }
  return out;
}

}  // namespace detail

// Routine 2: agglomerative clustering with the delta_lower/2 stopping rule.
inline ContentTypePartition cluster(const PairDistanceInput& input,
                                    double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold: must be > 0");
  for (double d : input.distance)
    if (std::isnan(d))
      throw std::invalid_argument("distance: missing pair distance");
  return detail::cluster_total(input.num_messages, input.distance, threshold);
}

// Ground-truth oracle: partition messages by exact equality of their payoff
// columns.
inline ContentTypePartition recover_types_exact(const PayoffModel& payoff) {
  const int m_count = payoff.num_messages;
  const int k_count = payoff.num_contexts;
  ContentTypePartition out;
  std::vector<int> type_of(static_cast<std::size_t>(m_count), -1);
  for (int m = 0; m < m_count; ++m) {
    if (type_of[static_cast<std::size_t>(m)] >= 0) continue;
    const int id = out.num_types();
    type_of[static_cast<std::size_t>(m)] = id;
    out.types.push_back({m});
    out.representatives.push_back(m);
    for (int m2 = m + 1; m2 < m_count; ++m2) {
      if (type_of[static_cast<std::size_t>(m2)] >= 0) continue;
      bool equal = true;
      for (int k = 0; k < k_count && equal; ++k)
        equal = payoff.value(k, m) == payoff.value(k, m2);
      if (equal) {
        type_of[static_cast<std::size_t>(m2)] = id;
        out.types[static_cast<std::size_t>(id)].push_back(m2);
      }
    }
  }
  return out;
}

// Partition of a generated latent environment as declared by its generator.
inline ContentTypePartition partition_from_latent(const LatentStructure& latent) {
  std::vector<std::vector<int>> raw(static_cast<std::size_t>(latent.num_types));
  for (int m = 0; m < static_cast<int>(latent.type_of.size()); ++m)
    raw[static_cast<std::size_t>(latent.type_of[static_cast<std::size_t>(m)])]
        .push_back(m);
  std::sort(raw.begin(), raw.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  ContentTypePartition out;
  for (auto& t : raw) {
    out.representatives.push_back(t.front());
    out.types.push_back(std::move(t));
  }
  return out;
}

}  // namespace bandsim
