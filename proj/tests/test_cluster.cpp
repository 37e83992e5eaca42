#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "bandsim/cluster.hpp"
#include "bandsim/cover.hpp"
#include "bandsim/env.hpp"
#include "bandsim/rng.hpp"

using namespace bandsim;

TEST_CASE("single message clusters trivially") {
  PairDistanceInput in(1);
  const auto part = cluster(in, 0.5);
  CHECK(part.types == std::vector<std::vector<int>>{{0}});
  CHECK(part.representatives == std::vector<int>{0});
}

TEST_CASE("all distances above threshold keep singletons") {
  PairDistanceInput in(4);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) in.set(a, b, 0.9);
  const auto part = cluster(in, 0.2);
  CHECK(part.num_types() == 4);
  for (int m = 0; m < 4; ++m) CHECK(part.types[m] == std::vector<int>{m});
}

TEST_CASE("hand-run complete linkage example") {
  // delta_lower = 0.4 so the threshold is 0.2: {1,2} merge at 0.05, then the
  // complete-linkage distance to {3} is max(0.50, 0.45) = 0.50 and we stop.
  PairDistanceInput in(3);
  in.set(0, 1, 0.05);
  in.set(0, 2, 0.50);
  in.set(1, 2, 0.45);
  const auto part = cluster(in, 0.2);
  CHECK(part.types == std::vector<std::vector<int>>{{0, 1}, {2}});
  CHECK(part.representatives == std::vector<int>{0, 2});
}

TEST_CASE("threshold extremes") {
  PairDistanceInput in(5);
  Rng rng(3);
  for (int a = 0; a < 5; ++a)
    for (int b = a + 1; b < 5; ++b) in.set(a, b, 0.1 + 0.8 * rng.next_double());
  const auto tiny = cluster(in, 1e-12);
  CHECK(tiny.num_types() == 5);
  const auto huge = cluster(in, 10.0);
  CHECK(huge.num_types() == 1);
  CHECK(huge.types[0] == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("missing distances are rejected") {
  PairDistanceInput in(3);
  in.set(0, 1, 0.1);
  CHECK_THROWS_AS(cluster(in, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(in.set(0, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(in.set(0, 1, -0.5), std::invalid_argument);
  CHECK_THROWS_AS(cluster(in, 0.0), std::invalid_argument);
}

TEST_CASE("infinite distances mean never merge") {
  PairDistanceInput in(3);
  const double inf = std::numeric_limits<double>::infinity();
  in.set(0, 1, 0.01);
  in.set(0, 2, inf);
  in.set(1, 2, inf);
  const auto part = cluster(in, 0.2);
  CHECK(part.types == std::vector<std::vector<int>>{{0, 1}, {2}});
}

TEST_CASE("output does not depend on input insertion order") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int m_count = 2 + static_cast<int>(rng.next_below(8));
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < m_count; ++a)
      for (int b = a + 1; b < m_count; ++b) pairs.push_back({a, b});
    PairDistanceInput fwd(m_count), rev(m_count);
    std::vector<double> d(pairs.size());
    for (auto& v : d) v = rng.next_double();
    for (std::size_t i = 0; i < pairs.size(); ++i)
      fwd.set(pairs[i].first, pairs[i].second, d[i]);
    for (std::size_t i = pairs.size(); i-- > 0;)
      rev.set(pairs[i].second, pairs[i].first, d[i]);
    CHECK(cluster(fwd, 0.3) == cluster(rev, 0.3));
  }
}

TEST_CASE("recover_types_exact degenerate cases") {
  auto one_type = make_latent_env(2, 5, 1, 0.2, 3);
  CHECK(recover_types_exact(one_type.payoff).num_types() == 1);
  auto all_types = make_latent_env(2, 4, 4, 0.25, 3);
  CHECK(recover_types_exact(all_types.payoff).num_types() == 4);
  auto env = make_latent_env(2, 6, 3, 0.2, 7);
  CHECK(recover_types_exact(env.payoff) == partition_from_latent(*env.latent));
}

// For latent environments with gap >= delta_lower, clustering distance
// estimates that are each within delta_lower/4 of an exact per-pair
// measurement must recover the truth exactly. Perturbations sit a hair under
// the boundary and push adversarially: same-type estimates apart, cross-type
// estimates together.
TEST_CASE("exact recovery under adversarial estimate error") {
  Rng rng(2025);
  int instances = 0;
  while (instances < 120) {
    const int k_count = 2 + static_cast<int>(rng.next_below(5));
    const int m_count = 4 + static_cast<int>(rng.next_below(27));
    const double delta = rng.next_below(2) == 0 ? 0.1 : 0.2;
    const int max_l = std::min<int>({m_count, static_cast<int>(1.0 / delta + 0.5), 6});
    const int l_count = 1 + static_cast<int>(rng.next_below(max_l));
    auto env = make_latent_env(k_count, m_count, l_count, delta, rng.next_u64());
    const auto truth = partition_from_latent(*env.latent);

    const double eps = delta / 4.0 - 1e-9;
    PairDistanceInput in(m_count);
    for (int a = 0; a < m_count; ++a)
      for (int b = a + 1; b < m_count; ++b) {
        const int ctx = static_cast<int>(rng.next_below(k_count));
        const bool same = env.latent->type_of[a] == env.latent->type_of[b];
        // r_a, r_b within eps of mu in the worst direction for the clusterer.
        const double mu_a = env.payoff.value(ctx, a);
        const double mu_b = env.payoff.value(ctx, b);
        double est;
        if (same)
          est = std::abs((mu_a + eps) - (mu_b - eps));
        else
          est = std::max(0.0, std::abs(mu_a - mu_b) - 2.0 * eps);
        in.set(a, b, est);
      }
    CHECK(cluster(in, delta / 2.0) == truth);
    ++instances;
  }
}
