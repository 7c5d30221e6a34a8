#include <doctest.h>

#include <stdexcept>
#include <cmath>

#include "bcmac/belief.hpp"
#include "bcmac/channel.hpp"
#include "bcmac/rng.hpp"

using namespace bcmac;

namespace {

std::vector<ChannelSpec> specs_with_errors(int n, double p_fa, double p_md) {
  std::vector<ChannelSpec> specs(n);
  for (auto& s : specs) {
    s.p_fa = p_fa;
    s.p_md = p_md;
  }
  return specs;
}

}  // namespace

TEST_CASE("posterior_factors perfect sensing") {
  const PosteriorFactors f = posterior_factors(0.5, 0.0, 0.0);
  CHECK(f.given_sensed_free == 1.0);
  CHECK(f.given_sensed_busy == 0.0);
  CHECK(f.given_no_ack == 0.0);
}

TEST_CASE("posterior_factors noisy sensing") {
  // independent evaluation of the three Bayes ratios at w=0.5, pfa=0.1, pmd=0.2
  const double a = (0.9 * 0.5) / (0.9 * 0.5 + 0.2 * 0.5);
  const double c = (0.1 * 0.5) / (0.1 * 0.5 + 0.8 * 0.5);
  const double d = (0.1 * 0.5) / (0.1 * 0.5 + 0.5);
  const PosteriorFactors f = posterior_factors(0.5, 0.1, 0.2);
  CHECK(std::fabs(f.given_sensed_free - a) < 1e-15);
  CHECK(std::fabs(f.given_sensed_busy - c) < 1e-15);
  CHECK(std::fabs(f.given_no_ack - d) < 1e-15);
  CHECK(f.given_sensed_free == doctest::Approx(0.8182).epsilon(1e-4));
  CHECK(f.given_sensed_busy == doctest::Approx(0.1111).epsilon(1e-3));
  CHECK(f.given_no_ack == doctest::Approx(0.0909).epsilon(1e-3));
}

TEST_CASE("posterior_factors degenerate corners") {
  const PosteriorFactors zero = posterior_factors(0.0, 0.3, 0.2);
  CHECK(zero.given_sensed_free == 0.0);
  CHECK(zero.given_sensed_busy == 0.0);
  CHECK(zero.given_no_ack == 0.0);

  // 0/0 in the sensed-free ratio resolves to the prior
  const PosteriorFactors sure_busy = posterior_factors(0.0, 0.0, 0.0);
  CHECK(sure_busy.given_sensed_free == 0.0);
  const PosteriorFactors sure_free = posterior_factors(1.0, 1.0, 0.0);
  CHECK(sure_free.given_sensed_free == 1.0);
}

TEST_CASE("propagate_unobserved") {
  CHECK(propagate_unobserved(0.5, 0.8, 0.3) == doctest::Approx(0.55).epsilon(1e-12));
  for (double p : {0.2, 0.5, 0.8}) {
    CHECK(propagate_unobserved(0.37, p, p) == doctest::Approx(p).epsilon(1e-12));
  }
  // stationary belief is the fixed point
  const double pi = 0.3 / (1 - 0.8 + 0.3);
  CHECK(std::fabs(propagate_unobserved(pi, 0.8, 0.3) - pi) < 1e-15);
}

TEST_CASE("propagate_unobserved geometric convergence") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const double p11 = rng.uniform(0.05, 0.95);
    const double p01 = rng.uniform(0.05, 0.95);
    const double pi = p01 / (1 - p11 + p01);
    double w = rng.uniform(0.0, 1.0);
    for (int k = 0; k < 50; ++k) w = propagate_unobserved(w, p11, p01);
    CHECK(std::fabs(w - pi) <= std::pow(std::fabs(p11 - p01), 50) + 1e-15);
  }
}

TEST_CASE("update_shared_full: the five observation cases") {
  const std::vector<TransitionEstimate> est(2, {0.3, 0.8});  // p01=0.3, p11=0.8

  SUBCASE("perfect sensing, ack, other channel sensed free collapses to p11") {
    auto specs = specs_with_errors(2, 0.0, 0.0);
    SlotObservation obs{0, true, std::vector<std::uint8_t>{1, 1}};
    auto next = update_shared_full({0.5, 0.4}, obs, est, specs);
    CHECK(next[0] == 0.8);  // accessed and acked
    CHECK(next[1] == 0.8);  // sensed free with perfect sensing
  }

  SUBCASE("perfect sensing, ack, other channel sensed busy collapses to p01") {
    auto specs = specs_with_errors(2, 0.0, 0.0);
    SlotObservation obs{0, true, std::vector<std::uint8_t>{1, 0}};
    auto next = update_shared_full({0.5, 0.4}, obs, est, specs);
    CHECK(next[1] == 0.3);
  }

  SUBCASE("perfect sensing, no ack on accessed channel yields p01") {
    auto specs = specs_with_errors(2, 0.0, 0.0);
    SlotObservation obs{0, false, std::nullopt};
    auto next = update_shared_full({0.5, 0.4}, obs, est, specs);
    CHECK(next[0] == 0.3);
    // unobserved companion propagates
    CHECK(next[1] == doctest::Approx(0.4 * 0.8 + 0.6 * 0.3).epsilon(1e-12));
  }

  SUBCASE("noisy sensing, ack, other channel sensed busy") {
    auto specs = specs_with_errors(2, 0.1, 0.2);
    SlotObservation obs{0, true, std::vector<std::uint8_t>{1, 0}};
    auto next = update_shared_full({0.5, 0.5}, obs, est, specs);
    const double c = (0.1 * 0.5) / (0.1 * 0.5 + 0.8 * 0.5);  // 1/9
    const double expected = c * 0.8 + (1 - c) * 0.3;
    CHECK(std::fabs(next[1] - expected) < 1e-15);
    CHECK(next[1] == doctest::Approx(0.3556).epsilon(1e-3));
  }

  SUBCASE("ack requires the sensed vector") {
    auto specs = specs_with_errors(2, 0.0, 0.0);
    SlotObservation obs{0, true, std::nullopt};
    CHECK_THROWS_AS(update_shared_full({0.5, 0.4}, obs, est, specs), std::invalid_argument);
  }

  SUBCASE("dimension mismatch") {
    auto specs = specs_with_errors(3, 0.0, 0.0);
    SlotObservation obs{0, false, std::nullopt};
    CHECK_THROWS_AS(update_shared_full({0.5, 0.4}, obs, est, specs), std::invalid_argument);
  }
}

TEST_CASE("update_private_full") {
  const std::vector<TransitionEstimate> est(2, {0.2, 0.7});
  auto specs = specs_with_errors(2, 0.0, 0.0);

  SUBCASE("ack adopts the common belief verbatim") {
    SlotObservation obs{0, true, std::vector<std::uint8_t>{1, 1}};
    const BeliefVector shared_next{0.123456, 0.654321};
    auto next = update_private_full({0.5, 0.5}, obs, est, specs, shared_next);
    CHECK(next == shared_next);
  }

  SUBCASE("no ack, other channel sensed free") {
    SlotObservation obs{0, false, std::vector<std::uint8_t>{0, 1}};
    auto next = update_private_full({0.5, 0.5}, obs, est, specs, {});
    CHECK(next[1] == 0.7);
    CHECK(next[0] == 0.2);  // accessed, no ack, perfect sensing
  }

  SUBCASE("transmitter sensed vector is mandatory without ack") {
    SlotObservation obs{0, false, std::nullopt};
    CHECK_THROWS_AS(update_private_full({0.5, 0.5}, obs, est, specs, {}), std::invalid_argument);
  }
}

TEST_CASE("update_shared_single") {
  const std::vector<TransitionEstimate> est(2, {0.3, 0.8});
  auto specs = specs_with_errors(2, 0.0, 0.0);

  SUBCASE("accessed with ack") {
    SlotObservation obs{0, true, std::nullopt};
    auto next = update_shared_single({0.5, 0.5}, obs, est, specs);
    CHECK(next[0] == 0.8);
    CHECK(next[1] == doctest::Approx(0.55).epsilon(1e-12));  // unobserved propagation
  }

  SUBCASE("accessed without ack, perfect sensing") {
    SlotObservation obs{0, false, std::nullopt};
    auto next = update_shared_single({0.5, 0.5}, obs, est, specs);
    CHECK(next[0] == 0.3);
  }
}

TEST_CASE("closure: updates map beliefs into [0,1]") {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 6);
    BeliefVector w(n);
    std::vector<TransitionEstimate> est(n);
    std::vector<ChannelSpec> specs(n);
    for (int i = 0; i < n; ++i) {
      w[i] = rng.uniform(0, 1);
      est[i] = {rng.uniform(0, 1), rng.uniform(0, 1)};
      specs[i].p_fa = rng.uniform(0, 1);
      specs[i].p_md = rng.uniform(0, 1);
    }
    SlotObservation obs;
    obs.accessed = static_cast<int>(rng.next_u64() % n);
    obs.ack = rng.bernoulli(0.5);
    std::vector<std::uint8_t> sensed(n);
    for (auto& s : sensed) s = rng.bernoulli(0.5) ? 1 : 0;
    obs.sensed = sensed;

    for (const auto& next : {update_shared_full(w, obs, est, specs),
                             update_private_full(w, obs, est, specs, w),
                             update_shared_single(w, obs, est, specs)}) {
      for (double v : next) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
}

TEST_CASE("agreement: on ack the private update equals the shared one bit for bit") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 4);
    BeliefVector shared(n), priv(n);
    std::vector<TransitionEstimate> shared_est(n), local_est(n);
    std::vector<ChannelSpec> specs(n);
    for (int i = 0; i < n; ++i) {
      shared[i] = rng.uniform(0, 1);
      priv[i] = rng.uniform(0, 1);
      shared_est[i] = {rng.uniform(0, 1), rng.uniform(0, 1)};
      local_est[i] = {rng.uniform(0, 1), rng.uniform(0, 1)};
      specs[i].p_fa = rng.uniform(0, 0.5);
      specs[i].p_md = rng.uniform(0, 0.5);
    }
    SlotObservation obs;
    obs.accessed = static_cast<int>(rng.next_u64() % n);
    obs.ack = true;
    std::vector<std::uint8_t> sensed(n);
    for (auto& s : sensed) s = rng.bernoulli(0.5) ? 1 : 0;
    obs.sensed = sensed;

    const BeliefVector shared_next = update_shared_full(shared, obs, shared_est, specs);
    const BeliefVector priv_next = update_private_full(priv, obs, local_est, specs, shared_next);
    CHECK(priv_next == shared_next);
  }
}
