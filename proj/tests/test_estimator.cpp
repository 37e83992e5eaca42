#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "bandsim/estimator.hpp"
#include "bandsim/rng.hpp"

using namespace bandsim;

TEST_CASE("record and mean basics") {
  EstimatorTable t(2, 2);
  t.record(0, 0, 0.5);
  CHECK(t.mean(0, 0) == 0.5);
  CHECK(t.count(0, 0) == 1);

  t.record(0, 0, 0.0);
  t.record(0, 0, 1.0);
  CHECK(*t.mean(0, 0) == doctest::Approx(0.5));
  CHECK(t.count(0, 0) == 3);

  EstimatorTable t2(1, 1);
  t2.record(0, 0, 0.2);
  t2.record(0, 0, 0.4);
  t2.record(0, 0, 0.6);
  CHECK(*t2.mean(0, 0) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("unseen pairs are undefined") {
  EstimatorTable t(2, 3);
  CHECK_FALSE(t.mean(1, 2).has_value());
  CHECK(t.count(1, 2) == 0);
  CHECK(t.mean_or(1, 2, 0.0) == 0.0);
}

TEST_CASE("record validates inputs") {
  EstimatorTable t(1, 1);
  CHECK_THROWS_AS(t.record(0, 0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(t.record(0, 0, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(t.record(1, 0, 0.5), std::invalid_argument);
}

TEST_CASE("confidence radius formula") {
  // Z = 4 at t = 55 (the nearest integer timeslot to e^4): radius is one up
  // to the rounding of t.
  EstimatorTable t(1, 1);
  for (int i = 0; i < 4; ++i) t.record(0, 0, 1.0);
  CHECK(t.radius(0, 0, 55) == doctest::Approx(std::sqrt(std::log(55.0) / 4.0)));
  CHECK(t.radius(0, 0, 55) == doctest::Approx(1.0).epsilon(2e-3));

  // Z = 1: radius is sqrt(log t) exactly.
  EstimatorTable t1(1, 1);
  t1.record(0, 0, 0.0);
  CHECK(t1.radius(0, 0, 3) == doctest::Approx(std::sqrt(std::log(3.0))));

  // Doubling Z shrinks the radius by exactly 1/sqrt(2) at fixed t.
  EstimatorTable a(1, 1), b(1, 1);
  for (int i = 0; i < 10; ++i) a.record(0, 0, 0.5);
  for (int i = 0; i < 20; ++i) b.record(0, 0, 0.5);
  CHECK(b.radius(0, 0, 1000) ==
        doctest::Approx(a.radius(0, 0, 1000) / std::sqrt(2.0)).epsilon(1e-12));

  // Strictly decreasing in Z at fixed t.
  EstimatorTable c(1, 1);
  c.record(0, 0, 0.5);
  double prev = c.radius(0, 0, 100);
  for (int i = 0; i < 20; ++i) {
    c.record(0, 0, 0.5);
    const double cur = c.radius(0, 0, 100);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("radius preconditions") {
  EstimatorTable t(1, 1);
  CHECK_THROWS_AS(t.radius(0, 0, 100), std::invalid_argument);  // no samples
  t.record(0, 0, 0.5);
  CHECK_THROWS_AS(t.radius(0, 0, 1), std::invalid_argument);  // t < 2
}

TEST_CASE("pair distance") {
  EstimatorTable t(1, 3);
  t.record(0, 0, 0.9);
  t.record(0, 1, 0.3);
  CHECK(t.pair_distance(0, 0, 1) == doctest::Approx(0.6));
  CHECK(t.pair_distance(0, 1, 0) == t.pair_distance(0, 0, 1));
  t.record(0, 2, 0.3);
  CHECK(t.pair_distance(0, 1, 2) == doctest::Approx(0.0));
  EstimatorTable fresh(1, 2);
  fresh.record(0, 0, 0.5);
  CHECK_THROWS_AS(fresh.pair_distance(0, 0, 1), std::invalid_argument);
}

TEST_CASE("mean is permutation invariant") {
  std::vector<double> rewards;
  Rng rng(99);
  for (int i = 0; i < 5000; ++i) rewards.push_back(rng.next_double());

  EstimatorTable fwd(1, 1), rev(1, 1), shuf(1, 1);
  for (double r : rewards) fwd.record(0, 0, r);
  for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) rev.record(0, 0, *it);
  rng.shuffle(std::span<double>(rewards));
  for (double r : rewards) shuf.record(0, 0, r);

  CHECK(std::abs(*fwd.mean(0, 0) - *rev.mean(0, 0)) < 1e-12);
  CHECK(std::abs(*fwd.mean(0, 0) - *shuf.mean(0, 0)) < 1e-12);
}

TEST_CASE("counts conservation") {
  EstimatorTable t(3, 4);
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const int k = static_cast<int>(rng.next_below(3));
    const int m = static_cast<int>(rng.next_below(4));
    t.record(k, m, rng.next_double());
  }
  for (int k = 0; k < 3; ++k) {
    std::int64_t sum = 0;
    for (int m = 0; m < 4; ++m) sum += t.count(k, m);
    CHECK(sum == t.context_count(k));
  }
}

TEST_CASE("bernoulli sample mean concentrates") {
  EstimatorTable t(1, 1);
  Rng rng(1234);
  for (int i = 0; i < 1000; ++i) t.record(0, 0, rng.bernoulli(0.3) ? 1.0 : 0.0);
  CHECK(std::abs(*t.mean(0, 0) - 0.3) < 0.05);
}

// Empirical abnormality frequency of |mean - mu| >= sqrt(log t / n) stays
// below 2/t^2 plus three standard errors of the estimate.
TEST_CASE("hoeffding coverage of the radius") {
  struct Case {
    int n;
    std::int64_t t;
    double mu;
  };
  const Case cases[] = {{20, 10, 0.5}, {50, 25, 0.3}, {10, 50, 0.7}};
  const int trials = 10000;
  Rng rng(2024);
  for (const Case& c : cases) {
    const double radius = std::sqrt(std::log(static_cast<double>(c.t)) / c.n);
    int abnormal = 0;
    for (int rep = 0; rep < trials; ++rep) {
      double sum = 0.0;
      for (int i = 0; i < c.n; ++i) sum += rng.bernoulli(c.mu) ? 1.0 : 0.0;
      if (std::abs(sum / c.n - c.mu) >= radius) ++abnormal;
    }
    const double bound = 2.0 / (static_cast<double>(c.t) * c.t);
    const double se = std::sqrt(std::max(bound * (1.0 - bound), 1e-12) / trials);
    CHECK(static_cast<double>(abnormal) / trials <= bound + 3.0 * se);
  }
}

TEST_CASE("csv serialization round trip") {
  EstimatorTable t(2, 2);
  t.record(0, 1, 0.25);
  t.record(1, 0, 0.75);
  t.record(1, 0, 0.5);
  std::ostringstream os;
  t.to_csv(os);
  CHECK(os.str() ==
        "context,message,count,sum\n"
        "1,1,0,0\n"
        "1,2,1,0.25\n"
        "2,1,2,1.25\n"
        "2,2,0,0\n");

  EstimatorTable loaded(2, 2);
  loaded.load(0, 1, 1, 0.25);
  loaded.load(1, 0, 2, 1.25);
  CHECK(*loaded.mean(1, 0) == doctest::Approx(0.625));
  CHECK(loaded.state_hash() == t.state_hash());
}
