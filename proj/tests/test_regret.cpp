#include <doctest.h>

#include <cmath>
#include <vector>

#include "bandsim/regret.hpp"
#include "test_util.hpp"

using namespace bandsim;

namespace {

EnvironmentInstance two_by_two() {
  PayoffModel p;
  p.num_contexts = 2;
  p.num_messages = 2;
  p.grid_step = 0.1;
  p.mu = {0.9, 0.3, 0.2, 0.8};
  ArrivalProcess a;
  a.group_size = 3;
  return make_environment(p, std::nullopt, a, 0);
}

}  // namespace

TEST_CASE("learning regret of the oracle plan is zero") {
  auto env = two_by_two();
  const std::vector<int> ctx{0, 0, 1};
  const std::vector<std::vector<int>> grouping{{0, 1, 2}};
  const auto plan = oracle_plan(env, ctx, grouping);
  CHECK(learning_regret_step(env, ctx, plan, grouping) == 0.0);
}

TEST_CASE("learning regret of a suboptimal broadcast") {
  auto env = two_by_two();
  const std::vector<int> ctx{0, 0, 1};
  const std::vector<std::vector<int>> grouping{{0, 1, 2}};
  TransmissionPlan plan;
  plan.groups = grouping;
  plan.message_for_group = {1};  // sums: message 0 -> 2.0, message 1 -> 1.4
  CHECK(learning_regret_step(env, ctx, plan, grouping) == doctest::Approx(0.6));
}

TEST_CASE("single user reduces to the scalar regret") {
  auto env = two_by_two();
  env.arrivals.group_size = 1;
  const std::vector<int> ctx{1};
  const std::vector<std::vector<int>> grouping{{0}};
  TransmissionPlan plan;
  plan.groups = grouping;
  plan.message_for_group = {0};
  CHECK(learning_regret_step(env, ctx, plan, grouping) ==
        doctest::Approx(0.8 - 0.2));
}

TEST_CASE("grouping mismatch is rejected") {
  auto env = two_by_two();
  const std::vector<int> ctx{0, 0, 1};
  TransmissionPlan plan;
  plan.groups = {{0, 1, 2}};
  plan.message_for_group = {0};
  const std::vector<std::vector<int>> other{{0, 1}, {2}};
  CHECK_THROWS_AS(learning_regret_step(env, ctx, plan, other),
                  std::invalid_argument);
  const std::vector<std::vector<int>> broken{{0, 0, 1}};
  TransmissionPlan bad;
  bad.groups = broken;
  bad.message_for_group = {0};
  CHECK_THROWS_AS(learning_regret_step(env, ctx, bad, broken),
                  std::invalid_argument);
}

TEST_CASE("exploitation regret closed forms") {
  SUBCASE("tau = N vanishes") {
    auto env = two_by_two();
    const std::vector<int> ctx{0, 1, 1};
    const std::vector<std::vector<int>> singles{{0}, {1}, {2}};
    CHECK(exploitation_regret_step(env, ctx, 3, singles) == 0.0);
  }
  SUBCASE("spike with distinct contexts") {
    auto env = make_spike_env(4, 4, 0.01);
    const std::vector<int> ctx{0, 1, 2, 3};
    const std::vector<std::vector<int>> one{{0, 1, 2, 3}};
    CHECK(exploitation_regret_step(env, ctx, 1, one) ==
          doctest::Approx(4.0 - 1.03).epsilon(1e-12));
  }
  SUBCASE("borda with one user per context") {
    auto env = make_borda_env(4, 4);
    const std::vector<int> ctx{0, 1, 2, 3};
    const std::vector<std::vector<int>> one{{0, 1, 2, 3}};
    CHECK(exploitation_regret_step(env, ctx, 1, one) == doctest::Approx(1.5));
  }
  SUBCASE("tau mismatch is rejected") {
    auto env = two_by_two();
    const std::vector<int> ctx{0, 1, 1};
    const std::vector<std::vector<int>> one{{0, 1, 2}};
    CHECK_THROWS_AS(exploitation_regret_step(env, ctx, 2, one),
                    std::invalid_argument);
  }
}

TEST_CASE("pseudo regret steps are nonnegative for random plans") {
  Rng rng(64);
  auto env = two_by_two();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> ctx(3);
    for (int& c : ctx) c = static_cast<int>(rng.next_below(2));
    Rng grouping_rng(rng.next_u64());
    const auto grouping = split_into_subgroups(3, 1 + static_cast<int>(rng.next_below(3)),
                                               grouping_rng);
    TransmissionPlan plan;
    plan.groups = grouping;
    for (std::size_t g = 0; g < grouping.size(); ++g)
      plan.message_for_group.push_back(static_cast<int>(rng.next_below(2)));
    const double r = learning_regret_step(env, ctx, plan, grouping);
    const double b =
        exploitation_regret_step(env, ctx, static_cast<int>(grouping.size()), grouping);
    CHECK(r >= 0.0);
    CHECK(b >= 0.0);
  }
}

TEST_CASE("exploitation regret does not depend on the plan") {
  auto env = two_by_two();
  const std::vector<int> ctx{0, 1, 0};
  const std::vector<std::vector<int>> grouping{{0, 2}, {1}};
  // Any policy choice yields the same B step: it is a pure function of
  // (env, x_t, tau, grouping).
  const double b = exploitation_regret_step(env, ctx, 2, grouping);
  for (int m0 = 0; m0 < 2; ++m0)
    for (int m1 = 0; m1 < 2; ++m1) {
      TransmissionPlan plan;
      plan.groups = grouping;
      plan.message_for_group = {m0, m1};
      const RegretStep step = regret_step(env.payoff, ctx, plan);
      CHECK(step.exploitation == doctest::Approx(b));
    }
}

TEST_CASE("ledger accumulates and thins") {
  RegretLedger ledger(2);
  RegretStep s;
  s.learning = 0.5;
  s.exploitation = 0.25;
  s.oracle_value = 1.0;
  for (std::int64_t t = 1; t <= 5; ++t) ledger.add(t, s, 0.75);
  const auto summary = ledger.finalize();
  CHECK(summary.learning_regret == doctest::Approx(2.5));
  CHECK(summary.exploitation_regret == doctest::Approx(1.25));
  CHECK(summary.total_regret == doctest::Approx(3.75));
  CHECK(summary.realized_learning_regret == doctest::Approx(5 * 0.25));
  CHECK(summary.timeslots == 5);

  // Thinned to t = 2, 4 plus the final slot 5.
  REQUIRE(ledger.series().size() == 3);
  CHECK(ledger.series()[0].t == 2);
  CHECK(ledger.series()[1].t == 4);
  CHECK(ledger.series()[2].t == 5);
  // L = R + B along the series.
  for (const auto& row : ledger.series())
    CHECK(row.l_cum == doctest::Approx(row.r_cum + row.b_cum).epsilon(1e-9));
}

TEST_CASE("ledger cumulative columns are nondecreasing") {
  Rng rng(12);
  RegretLedger ledger(1);
  double last_r = 0.0, last_b = 0.0;
  for (std::int64_t t = 1; t <= 500; ++t) {
    RegretStep s;
    s.learning = rng.next_double();
    s.exploitation = rng.next_double();
    s.oracle_value = s.learning + 0.1;
    ledger.add(t, s, 0.05);
    CHECK(ledger.learning_cum() >= last_r);
    CHECK(ledger.exploitation_cum() >= last_b);
    last_r = ledger.learning_cum();
    last_b = ledger.exploitation_cum();
  }
}

TEST_CASE("constant regret accumulates linearly") {
  RegretLedger ledger(1);
  RegretStep s;
  s.learning = 0.125;
  for (std::int64_t t = 1; t <= 1000; ++t) ledger.add(t, s, 0.0);
  CHECK(ledger.finalize().learning_regret == doctest::Approx(125.0));
}
