#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bandsim/rng.hpp"

namespace bandsim {

// K subsets of [0, M) of equal size s such that every unordered message pair
// appears in at least one subset; each pair is assigned to the lowest-index
// subset (= context) containing it.
struct CoverSolution {
  int num_messages = 0;
  int num_contexts = 0;
  int subset_size = 0;
  std::vector<std::vector<int>> subsets;  // K subsets, each sorted
  std::vector<int> pair_context;          // pair index -> context id
};

inline std::size_t pair_count(int m_count) {
  return static_cast<std::size_t>(m_count) * (m_count - 1) / 2;
}

// Index of the unordered pair {a, b}, a < b, in lexicographic order.
inline std::size_t pair_index(int a, int b, int m_count) {
  if (a > b) std::swap(a, b);
  return static_cast<std::size_t>(a) * m_count -
         static_cast<std::size_t>(a) * (a + 1) / 2 + (b - a - 1);
}

// s = min(M, ceil(M * sqrt(2 log(MK) / K)) + 1): the subset size for which a
// random selection of K subsets covers all pairs with positive probability.
inline int appendix_s_bound(int m_count, int k_count) {
  if (m_count < 2) throw std::invalid_argument("M: must be >= 2");
  if (k_count < 1) throw std::invalid_argument("K: must be >= 1");
  const double s = std::ceil(m_count *
                             std::sqrt(2.0 * std::log(static_cast<double>(m_count) * k_count) /
                                       k_count)) +
                   1.0;
  return static_cast<int>(std::min(static_cast<double>(m_count), s));
}

inline bool verify_cover(const CoverSolution& sol, int m_count, int k_count) {
  if (static_cast<int>(sol.subsets.size()) != k_count) return false;
  std::vector<char> covered(pair_count(m_count), 0);
  std::vector<char> seen(static_cast<std::size_t>(m_count), 0);
  for (const auto& subset : sol.subsets) {
    if (static_cast<int>(subset.size()) != sol.subset_size) return false;
    std::fill(seen.begin(), seen.end(), 0);
    for (int e : subset) {
      if (e < 0 || e >= m_count) return false;
      if (seen[static_cast<std::size_t>(e)]) return false;  // duplicates
      seen[static_cast<std::size_t>(e)] = 1;
    }
    for (std::size_t i = 0; i < subset.size(); ++i)
      for (std::size_t j = i + 1; j < subset.size(); ++j)
        covered[pair_index(subset[i], subset[j], m_count)] = 1;
  }
  for (char c : covered)
    if (!c) return false;
  return true;
}

namespace detail {

// Grow K subsets one element at a time, always adding the element that covers
// the most still-uncovered pairs with the current subset. The deterministic
// variant breaks ties toward low ids; the randomized variant picks uniformly
// among the tied argmax set.
inline bool greedy_cover(int m_count, int k_count, int s,
                         std::vector<std::vector<int>>& out, Rng* tie_rng) {
  std::vector<char> covered(pair_count(m_count), 0);
  std::size_t uncovered = covered.size();
  std::vector<std::int64_t> incident(static_cast<std::size_t>(m_count));
  std::vector<int> ties;
  out.assign(static_cast<std::size_t>(k_count), {});

  for (int c = 0; c < k_count; ++c) {
    auto& subset = out[static_cast<std::size_t>(c)];
    subset.reserve(static_cast<std::size_t>(s));
    std::vector<char> in_subset(static_cast<std::size_t>(m_count), 0);

    while (static_cast<int>(subset.size()) < s) {
      std::int64_t best_gain = -1;
      ties.clear();
      for (int e = 0; e < m_count; ++e) {
        if (in_subset[static_cast<std::size_t>(e)]) continue;
        std::int64_t gain = 0;
        if (subset.empty()) {
          // Seed with the element incident to the most uncovered pairs.
          for (int f = 0; f < m_count; ++f)
            if (f != e && !covered[pair_index(e, f, m_count)]) ++gain;
        } else {
          for (int f : subset)
            if (!covered[pair_index(e, f, m_count)]) ++gain;
        }
        if (gain > best_gain) {
          best_gain = gain;
          ties.clear();
          ties.push_back(e);
        } else if (gain == best_gain) {
          ties.push_back(e);
        }
      }
      const int pick =
          (tie_rng != nullptr && ties.size() > 1)
              ? ties[static_cast<std::size_t>(tie_rng->next_below(ties.size()))]
              : ties.front();
      for (int f : subset) {
        const std::size_t pi = pair_index(pick, f, m_count);
        if (!covered[pi]) {
          covered[pi] = 1;
          --uncovered;
        }
      }
      in_subset[static_cast<std::size_t>(pick)] = 1;
      subset.push_back(pick);
    }
    std::sort(subset.begin(), subset.end());
    if (uncovered == 0 && c + 1 < k_count) {
      // Remaining subsets are free; fill them with the lowest ids.
      for (int c2 = c + 1; c2 < k_count; ++c2) {
        auto& rest = out[static_cast<std::size_t>(c2)];
        rest.resize(static_cast<std::size_t>(s));
        for (int i = 0; i < s; ++i) rest[static_cast<std::size_t>(i)] = i;
      }
      return true;
    }
  }
  return uncovered == 0;
}

inline bool random_cover(int m_count, int k_count, int s,
                         std::vector<std::vector<int>>& out, Rng& rng) {
  std::vector<char> covered(pair_count(m_count), 0);
  std::size_t uncovered = covered.size();
  std::vector<int> ids(static_cast<std::size_t>(m_count));
  out.assign(static_cast<std::size_t>(k_count), {});
  for (int c = 0; c < k_count; ++c) {
    for (int i = 0; i < m_count; ++i) ids[static_cast<std::size_t>(i)] = i;
    // Partial Fisher-Yates: first s entries are a uniform s-subset.
    for (int i = 0; i < s; ++i) {
      const int j = i + static_cast<int>(rng.next_below(
                            static_cast<std::uint64_t>(m_count - i)));
      std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
    auto& subset = out[static_cast<std::size_t>(c)];
    subset.assign(ids.begin(), ids.begin() + s);
    std::sort(subset.begin(), subset.end());
    for (std::size_t i = 0; i < subset.size(); ++i)
      for (std::size_t j = i + 1; j < subset.size(); ++j) {
        const std::size_t pi = pair_index(subset[i], subset[j], m_count);
        if (!covered[pi]) {
          covered[pi] = 1;
          --uncovered;
        }
      }
  }
  return uncovered == 0;
}

// Necessary conditions on s: K*C(s,2) >= C(M,2), and the least-used element
// (multiplicity <= floor(Ks/M)) must still reach all M-1 partners.
inline int cover_lower_bound(int m_count, int k_count) {
  int s = 2;
  const std::int64_t need =
      static_cast<std::int64_t>(m_count) * (m_count - 1);
  while (s < m_count) {
    const std::int64_t pairs =
        static_cast<std::int64_t>(k_count) * s * (s - 1);
    const std::int64_t mult =
        static_cast<std::int64_t>(k_count) * s / m_count;
    if (pairs >= need && mult * (s - 1) >= m_count - 1) break;
    ++s;
  }
  return s;
}

}  // namespace detail

// Smallest subset size the heuristic certifies: deterministic greedy first,
// then `budget` randomized restarts per candidate size. The s = M whole-set
// solution always succeeds, so the search terminates.
inline CoverSolution find_cover(int m_count, int k_count, int budget = 200,
                                std::uint64_t seed = 0) {
  if (m_count < 2) throw std::invalid_argument("M: must be >= 2");
  if (k_count < 1) throw std::invalid_argument("K: must be >= 1");
  if (budget < 0) throw std::invalid_argument("budget: must be >= 0");

  std::vector<std::vector<int>> subsets;
  int found_s = -1;
  for (int s = detail::cover_lower_bound(m_count, k_count); s <= m_count; ++s) {
    if (detail::greedy_cover(m_count, k_count, s, subsets, nullptr)) {
      found_s = s;
      break;
    }
    bool done = false;
    for (int attempt = 0; attempt < budget && !done; ++attempt) {
      Rng rng(mix_seed(mix_seed(seed, rng_tag::kCover),
                       (static_cast<std::uint64_t>(s) << 32) |
                           static_cast<std::uint64_t>(attempt)));
      done = (attempt % 2 == 0)
                 ? detail::random_cover(m_count, k_count, s, subsets, rng)
                 : detail::greedy_cover(m_count, k_count, s, subsets, &rng);
    }
    if (done) {
      found_s = s;
      break;
    }
  }

  CoverSolution sol;
  sol.num_messages = m_count;
  sol.num_contexts = k_count;
  sol.subset_size = found_s;
  sol.subsets = std::move(subsets);
  sol.pair_context.assign(pair_count(m_count), -1);
  for (int c = 0; c < k_count; ++c) {
    const auto& subset = sol.subsets[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < subset.size(); ++i)
      for (std::size_t j = i + 1; j < subset.size(); ++j) {
        auto& slot = sol.pair_context[pair_index(subset[i], subset[j], m_count)];
        if (slot < 0) slot = c;  // lowest-index context keeps the pair
      }
  }
  return sol;
}

// Exact minimum subset size by enumeration; the test oracle for find_cover.
inline int exhaustive_min_s(int m_count, int k_count) {
  if (m_count < 2) throw std::invalid_argument("M: must be >= 2");
  if (k_count < 1) throw std::invalid_argument("K: must be >= 1");
  // A 2-subset covers exactly one pair, so s = 2 works iff K >= C(M,2).
  if (static_cast<std::size_t>(k_count) >= pair_count(m_count)) return 2;
  if (m_count > 8 || k_count > 4)
    throw std::invalid_argument("exhaustive_min_s: instance too large (M <= 8, K <= 4)");

  const std::size_t num_pairs = pair_count(m_count);  // <= 28 under the guard
  const std::uint32_t full = (1u << num_pairs) - 1u;
  for (int s = 2; s <= m_count; ++s) {
    // Pair-coverage mask of every s-subset of [0, M).
    std::vector<std::uint32_t> masks;
    std::vector<int> members(static_cast<std::size_t>(s));
    auto emit = [&]() {
      std::uint32_t mask = 0;
      for (int i = 0; i < s; ++i)
        for (int j = i + 1; j < s; ++j)
          mask |= 1u << pair_index(members[static_cast<std::size_t>(i)],
                                   members[static_cast<std::size_t>(j)], m_count);
      masks.push_back(mask);
    };
    auto gen = [&](auto&& self, int pos, int next) -> void {
      if (pos == s) {
        emit();
        return;
      }
      for (int e = next; e <= m_count - (s - pos); ++e) {
        members[static_cast<std::size_t>(pos)] = e;
        self(self, pos + 1, e + 1);
      }
    };
    gen(gen, 0, 0);

    const int picks = std::min<int>(k_count, static_cast<int>(masks.size()));
    bool ok = false;
    auto search = [&](auto&& self, std::size_t start, int left,
                      std::uint32_t acc) -> void {
      if (ok) return;
      if (acc == full) {
        ok = true;
        return;
      }
      if (left == 0) return;
      for (std::size_t i = start; i + static_cast<std::size_t>(left) <= masks.size(); ++i) {
        if ((acc | masks[i]) == acc) continue;  // adds nothing
        self(self, i + 1, left - 1, acc | masks[i]);
        if (ok) return;
      }
    };
    search(search, 0, picks, 0);
    if (ok) return s;
  }
  return m_count;
}

}  // namespace bandsim
