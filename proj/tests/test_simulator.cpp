#include <doctest.h>

#include <stdexcept>
#include <cmath>

#include "bcmac/policies.hpp"
#include "bcmac/rng.hpp"
#include "bcmac/simulator.hpp"

using namespace bcmac;

namespace {

bool same_outcome(const SlotOutcome& a, const SlotOutcome& b) {
  return a.slot == b.slot && a.tx_channel == b.tx_channel && a.rx_channel == b.rx_channel &&
         a.sensed_free == b.sensed_free && a.transmitted == b.transmitted &&
         a.true_free == b.true_free && a.ack == b.ack && a.reward == b.reward &&
         a.interference == b.interference;
}

std::vector<ChannelSpec> five_channels(std::uint64_t seed, double p_fa = 0.0, double p_md = 0.0) {
  ScenarioSource src;
  src.n = 5;
  src.p_fa = p_fa;
  src.p_md = p_md;
  return src.realize(seed, 0);
}

const ProtocolKind kAllProtocols[] = {
    {ProtocolVariant::FullSensingBlind, 0}, {ProtocolVariant::FullSensingKnown, 0},
    {ProtocolVariant::WhittleBlindLP, 20},  {ProtocolVariant::WhittleKnown, 0},
    {ProtocolVariant::UcbIid, 0},           {ProtocolVariant::IidCountingBlind, 0},
    {ProtocolVariant::GreedyKnownL1, 0},    {ProtocolVariant::OfflineBest, 0}};

}  // namespace

TEST_CASE("protocol names round-trip") {
  for (const ProtocolKind& kind : kAllProtocols) {
    CHECK(ProtocolKind::parse(kind.name()) == kind);
  }
  CHECK(ProtocolKind{ProtocolVariant::WhittleBlindLP, 200}.name() == "whittle_blind_lp200");
  CHECK_THROWS_AS(ProtocolKind::parse("whittle_blind_lp0"), std::invalid_argument);
  CHECK_THROWS_AS(ProtocolKind::parse("nonsense"), std::invalid_argument);
}

TEST_CASE("make_tx_state and initialize_sync") {
  const auto specs = five_channels(3);

  SUBCASE("blind state starts uninformative") {
    const TxState tx = make_tx_state({ProtocolVariant::FullSensingBlind, 0}, specs);
    for (double w : tx.private_belief) CHECK(w == 0.5);
    for (const auto& est : tx.local_estimates) {
      CHECK(est.p01 == 0.5);
      CHECK(est.p11 == 0.5);
    }
    const SyncState sync = initialize_sync({ProtocolVariant::FullSensingBlind, 0}, specs, tx);
    CHECK(sync.shared_belief == tx.private_belief);
    CHECK(sync.shared_estimates == tx.local_estimates);
    CHECK_FALSE(sync.pending_resync);
  }

  SUBCASE("genie state starts from the truth") {
    const TxState tx = make_tx_state({ProtocolVariant::WhittleKnown, 0}, specs);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      CHECK(tx.local_estimates[i].p11 == specs[i].p11);
      CHECK(tx.local_estimates[i].p01 == specs[i].p01);
      CHECK(tx.private_belief[i] == stationary_free_prob(specs[i]));
    }
  }
}

TEST_CASE("lp_initial_beliefs propagates the last observation of each channel") {
  const std::vector<TransitionEstimate> est{{0.3, 0.8}, {0.4, 0.6}, {0.1, 0.9}};
  const std::vector<std::uint8_t> last{1, 0, 1};
  const int lp = 7;
  const BeliefVector beliefs = lp_initial_beliefs(last, est, lp);

  for (int i = 0; i < 3; ++i) {
    double w = last[i] ? est[i].p11 : est[i].p01;
    for (int s = 0; s < (3 - 1 - i) * lp; ++s) w = w * est[i].p11 + (1 - w) * est[i].p01;
    CHECK(std::fabs(beliefs[i] - w) < 1e-15);
  }
  // the channel sensed last needs no extra propagation
  CHECK(beliefs[2] == est[2].p11);
}

TEST_CASE("run_block horizon guards") {
  const auto specs = five_channels(1);
  CHECK_THROWS_AS(run_block({ProtocolVariant::OfflineBest, 0}, specs, 0, 1), std::invalid_argument);
  CHECK(run_block({ProtocolVariant::OfflineBest, 0}, specs, 1, 1).size() == 1);
}

TEST_CASE("identical seeds give byte-identical traces") {
  const auto specs = five_channels(9, 0.1, 0.2);
  for (const ProtocolKind& kind : kAllProtocols) {
    const auto a = run_block(kind, specs, 400, 77);
    const auto b = run_block(kind, specs, 400, 77);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_outcome(a[i], b[i]));
  }
}

TEST_CASE("single channel greedy reaches the stationary rate") {
  const std::vector<ChannelSpec> specs{{1.0, 0.8, 0.3, 0.0, 0.0}};
  const std::int64_t t = 100000;
  const auto outs = run_block({ProtocolVariant::GreedyKnownL1, 0}, specs, t, 5);
  double cum = 0.0;
  for (const auto& o : outs) {
    CHECK(o.tx_channel == 0);
    cum += o.reward;
  }
  const double pi = stationary_free_prob(specs[0]);
  const double d = specs[0].p11 - specs[0].p01;
  const double sigma = std::sqrt(pi * (1 - pi) * (1 + d) / (1 - d) / static_cast<double>(t));
  CHECK(std::fabs(cum / static_cast<double>(t) - pi) < 3 * sigma);
}

TEST_CASE("outcome invariants hold under sensing errors") {
  const auto specs = five_channels(21, 0.2, 0.3);
  for (const ProtocolKind& kind : kAllProtocols) {
    const auto outs = run_block(kind, specs, 1500, 13);
    double cum = 0.0, acked_bandwidth = 0.0;
    for (const auto& o : outs) {
      CHECK(o.tx_channel == o.rx_channel);
      if (o.ack) {
        CHECK(o.transmitted);
        CHECK(o.true_free);
        acked_bandwidth += specs[o.tx_channel].bandwidth;
      }
      CHECK(o.interference == (o.transmitted && !o.true_free));
      CHECK(o.reward == (o.ack ? specs[o.tx_channel].bandwidth : 0.0));
      cum += o.reward;
    }
    CHECK(cum == acked_bandwidth);  // conservation, exact
  }
}

TEST_CASE("perfect sensing never interferes") {
  const auto specs = five_channels(30);
  for (const ProtocolKind& kind : kAllProtocols) {
    for (const auto& o : run_block(kind, specs, 800, 2)) CHECK_FALSE(o.interference);
  }
}

TEST_CASE("learning period transmits nothing and visits each channel in order") {
  const auto specs = five_channels(14);
  const int lp = 10;
  const auto outs = run_block({ProtocolVariant::WhittleBlindLP, lp}, specs, 200, 4);
  for (int j = 0; j < 5 * lp; ++j) {
    CHECK(outs[j].tx_channel == j / lp);
    CHECK_FALSE(outs[j].transmitted);
    CHECK(outs[j].reward == 0.0);
  }
  bool transmitted_later = false;
  for (std::size_t j = 5 * lp; j < outs.size(); ++j) transmitted_later |= outs[j].transmitted;
  CHECK(transmitted_later);
}

TEST_CASE("curve sampling grid") {
  const auto s10 = default_sample_slots(10);
  CHECK(s10.size() == 10);
  CHECK(s10.front() == 1);
  CHECK(s10.back() == 10);

  const auto s250 = default_sample_slots(250);
  CHECK(s250.size() == 115);  // 1..100 plus 110,120,...,250
  CHECK(s250.back() == 250);

  const auto odd = default_sample_slots(105);
  CHECK(odd.back() == 105);  // final slot always present

  const auto big = default_sample_slots(20000);
  for (std::size_t i = 1; i < big.size(); ++i) CHECK(big[i] > big[i - 1]);
  CHECK(big.back() == 20000);
}

TEST_CASE("paired runs: identical protocol entries give identical curves") {
  ScenarioSource src;
  src.n = 4;
  const ProtocolKind twice[] = {{ProtocolVariant::FullSensingKnown, 0},
                                {ProtocolVariant::FullSensingKnown, 0}};
  const auto result = monte_carlo(twice, src, 3, 500, 11);
  REQUIRE(result.curves.size() == 2);
  CHECK(result.curves[0].avg_throughput == result.curves[1].avg_throughput);
  CHECK(result.curves[0].per_run_final == result.curves[1].per_run_final);
}

TEST_CASE("serial and parallel execution produce identical results") {
  ScenarioSource src;
  src.n = 5;
  const ProtocolKind protocols[] = {{ProtocolVariant::FullSensingBlind, 0},
                                    {ProtocolVariant::WhittleKnown, 0},
                                    {ProtocolVariant::UcbIid, 0}};
  const auto serial = monte_carlo(protocols, src, 8, 300, 123, {}, {}, 1);
  const auto parallel = monte_carlo(protocols, src, 8, 300, 123, {}, {}, 4);
  REQUIRE(serial.curves.size() == parallel.curves.size());
  for (std::size_t p = 0; p < serial.curves.size(); ++p) {
    CHECK(serial.curves[p].avg_throughput == parallel.curves[p].avg_throughput);
    CHECK(serial.curves[p].per_run_final == parallel.curves[p].per_run_final);
  }
  CHECK(serial.per_run_upper_bound == parallel.per_run_upper_bound);
}

TEST_CASE("known full sensing stays below the delayed-state genie bound") {
  ScenarioSource src;
  src.n = 5;
  const ProtocolKind protocols[] = {{ProtocolVariant::FullSensingKnown, 0}};
  const auto result = monte_carlo(protocols, src, 30, 3000, 321, {}, {}, 0);
  const auto& curve = result.curves[0];
  CHECK(curve.final_mean <= result.upper_bound_mean + 3 * curve.final_stderr);
}

TEST_CASE("index table resolution does not move simulated throughput") {
  // doubling the grid must change the whittle_known result by < 0.1%
  ScenarioSource src;
  src.n = 5;
  const ProtocolKind protocols[] = {{ProtocolVariant::WhittleKnown, 0}};
  SimOptions coarse;
  coarse.index_grid_size = 2001;
  SimOptions fine;
  fine.index_grid_size = 4001;
  const auto a = monte_carlo(protocols, src, 20, 2000, 42, coarse, {}, 0);
  const auto b = monte_carlo(protocols, src, 20, 2000, 42, fine, {}, 0);
  const double rel = std::fabs(a.curves[0].final_mean - b.curves[0].final_mean) /
                     a.curves[0].final_mean;
  CHECK(rel < 1e-3);

  SimOptions exact;
  exact.index_use_table = false;
  const auto c = monte_carlo(protocols, src, 20, 2000, 42, exact, {}, 0);
  const double rel_exact = std::fabs(a.curves[0].final_mean - c.curves[0].final_mean) /
                           c.curves[0].final_mean;
  CHECK(rel_exact < 1e-3);
}

TEST_CASE("monte_carlo input guards") {
  ScenarioSource src;
  src.n = 2;
  const ProtocolKind protocols[] = {{ProtocolVariant::OfflineBest, 0}};
  CHECK_THROWS_AS(monte_carlo(protocols, src, 0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(monte_carlo({}, src, 1, 10, 1), std::invalid_argument);
}

TEST_CASE("BlockSimulator steps match run_block") {
  const auto specs = five_channels(44, 0.1, 0.1);
  const ProtocolKind kind{ProtocolVariant::FullSensingBlind, 0};
  const auto outs = run_block(kind, specs, 200, 8);
  BlockSimulator sim(kind, specs, 200, 8);
  CHECK(sim.horizon() == 200);
  for (const auto& expected : outs) {
    REQUIRE_FALSE(sim.done());
    CHECK(same_outcome(sim.step(), expected));
  }
  CHECK(sim.done());
  CHECK_THROWS_AS(sim.step(), std::logic_error);
}

TEST_CASE("a single-run curve is that run's running average") {
  ScenarioSource src;
  src.n = 3;
  const ProtocolKind kind{ProtocolVariant::GreedyKnownL1, 0};
  const ProtocolKind protocols[] = {kind};
  const auto mc = monte_carlo(protocols, src, 1, 120, 66);

  const auto specs = src.realize(66, 0);
  const auto outs = run_block(kind, specs, 120, 66);
  double cum = 0.0;
  std::size_t s = 0;
  for (const auto& o : outs) {
    cum += o.reward;
    if (s < mc.slots.size() && mc.slots[s] == o.slot) {
      CHECK(mc.curves[0].avg_throughput[s] == cum / static_cast<double>(o.slot));
      ++s;
    }
  }
  CHECK(s == mc.slots.size());
}
