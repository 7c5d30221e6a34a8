#include <doctest.h>

#include <stdexcept>
#include <cmath>

#include "bcmac/rng.hpp"
#include "bcmac/whittle.hpp"

using namespace bcmac;

TEST_CASE("index of a time-independent arm is the belief itself") {
  for (double p : {0.15, 0.5, 0.85}) {
    ArmModel arm{p, p, 1.0, 0.9999};
    for (int k = 0; k <= 100; ++k) {
      const double w = k / 100.0;
      CHECK(std::fabs(whittle_index(w, arm) - w) < 1e-6);
    }
  }
}

TEST_CASE("index corner cases") {
  // permanently busy arm is never worth activating
  CHECK(whittle_index(0.0, {0.7, 0.0, 1.0, 0.9999}) == 0.0);
  // absorbing free state at full belief earns the whole bandwidth forever
  CHECK(whittle_index(1.0, {1.0, 0.4, 1.0, 0.9999}) == 1.0);
  CHECK(whittle_index(1.0, {0.6, 0.3, 1.0, 0.9}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("index scales linearly with bandwidth") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    ArmModel arm{rng.uniform(0, 1), rng.uniform(0, 1), 1.0, 0.999};
    ArmModel doubled = arm;
    doubled.bandwidth = 2.0;
    const double w = rng.uniform(0, 1);
    CHECK(std::fabs(2.0 * whittle_index(w, arm) - whittle_index(w, doubled)) < 1e-12);
  }
}

TEST_CASE("index stays within [0, bandwidth] and is nondecreasing") {
  Rng rng(8);
  for (int a = 0; a < 25; ++a) {
    ArmModel arm{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0.1, 3.0), 0.9999};
    if (arm.p11 == 1.0 && arm.p01 == 0.0) continue;
    double prev = -1.0;
    for (int k = 0; k <= 200; ++k) {
      const double v = whittle_index(k / 200.0, arm);
      CHECK(v >= 0.0);
      CHECK(v <= arm.bandwidth);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("validate_arm") {
  CHECK_THROWS(whittle_index(0.5, {0.5, 0.5, 1.0, 1.0}));   // discount must be < 1
  CHECK_THROWS(whittle_index(0.5, {1.3, 0.5, 1.0, 0.9}));   // probability range
  CHECK_THROWS(whittle_index(1.5, {0.5, 0.5, 1.0, 0.9}));   // belief range
}

TEST_CASE("value iteration oracle action structure") {
  ArmModel arm{0.8, 0.3, 1.0, 0.95};

  SUBCASE("huge subsidy makes idling optimal everywhere") {
    const auto vi = value_iteration(arm, arm.bandwidth / (1 - arm.discount) + 1.0, 201);
    REQUIRE(vi.converged);
    for (auto a : vi.active) CHECK(a == 0);
  }

  SUBCASE("zero subsidy makes activation optimal everywhere") {
    const auto vi = value_iteration(arm, 0.0, 201);
    REQUIRE(vi.converged);
    for (auto a : vi.active) CHECK(a == 1);
  }

  CHECK_THROWS_AS(value_iteration(arm, 0.0, 51), std::invalid_argument);
}

TEST_CASE("closed-path index agrees with the discretized bisection oracle") {
  // includes the positively and negatively correlated regimes
  const ArmModel arms[] = {
      {0.8, 0.3, 1.0, 0.95}, {0.3, 0.8, 1.0, 0.95}, {0.55, 0.45, 1.0, 0.95}};
  const double beliefs[] = {0.15, 0.55, 0.9};
  for (const ArmModel& arm : arms) {
    for (double w : beliefs) {
      const double exact = whittle_index(w, arm);
      const double oracle = whittle_index_by_bisection(arm, w, 2001, 1e-9, 1e-5);
      CHECK(std::fabs(exact - oracle) < 1e-3);
    }
  }
}

TEST_CASE("index table interpolation matches direct evaluation") {
  ArmModel arm{0.75, 0.2, 1.0, 0.9999};
  const IndexTable table = build_index_table(arm, 2001);
  REQUIRE(table.grid.size() == 2001);
  CHECK(table.grid.front() == 0.0);
  CHECK(table.grid.back() == 1.0);
  for (std::size_t k = 1; k < table.grid.size(); ++k) CHECK(table.grid[k] > table.grid[k - 1]);

  // exact at the nodes
  CHECK(table.lookup(0.5) == doctest::Approx(whittle_index(0.5, arm)).epsilon(1e-12));
  // close in between
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const double w = rng.uniform(0, 1);
    CHECK(std::fabs(table.lookup(w) - whittle_index(w, arm)) < 1e-5);
  }
}
