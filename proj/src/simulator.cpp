#include "bcmac/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "bcmac/policies.hpp"
#include "bcmac/rng.hpp"
#include "bcmac/whittle.hpp"

namespace bcmac {

std::string ProtocolKind::name() const {
  switch (variant) {
    case ProtocolVariant::FullSensingBlind:
      return "full_sensing_blind";
    case ProtocolVariant::FullSensingKnown:
      return "full_sensing_known";
    case ProtocolVariant::WhittleBlindLP:
      return "whittle_blind_lp" + std::to_string(lp);
    case ProtocolVariant::WhittleKnown:
      return "whittle_known";
    case ProtocolVariant::UcbIid:
      return "ucb_iid";
    case ProtocolVariant::IidCountingBlind:
      return "iid_counting_blind";
    case ProtocolVariant::GreedyKnownL1:
      return "greedy_known_l1";
    case ProtocolVariant::OfflineBest:
      return "offline_best";
  }
  throw std::logic_error("ProtocolKind::name: unknown variant");
}

ProtocolKind ProtocolKind::parse(const std::string& token) {
  if (token == "full_sensing_blind") return {ProtocolVariant::FullSensingBlind, 0};
  if (token == "full_sensing_known") return {ProtocolVariant::FullSensingKnown, 0};
  if (token == "whittle_known") return {ProtocolVariant::WhittleKnown, 0};
  if (token == "ucb_iid") return {ProtocolVariant::UcbIid, 0};
  if (token == "iid_counting_blind") return {ProtocolVariant::IidCountingBlind, 0};
  if (token == "greedy_known_l1") return {ProtocolVariant::GreedyKnownL1, 0};
  if (token == "offline_best") return {ProtocolVariant::OfflineBest, 0};
  const std::string prefix = "whittle_blind_lp";
  if (token.rfind(prefix, 0) == 0 && token.size() > prefix.size()) {
    const std::string digits = token.substr(prefix.size());
    if (digits.find_first_not_of("0123456789") == std::string::npos) {
      const int lp = std::stoi(digits);
      if (lp >= 1) return {ProtocolVariant::WhittleBlindLP, lp};
    }
  }
  throw std::invalid_argument("unknown protocol: " + token);
}

namespace {

bool is_known_stats(ProtocolVariant v) {
  switch (v) {
    case ProtocolVariant::FullSensingKnown:
    case ProtocolVariant::WhittleKnown:
    case ProtocolVariant::GreedyKnownL1:
    case ProtocolVariant::OfflineBest:
      return true;
    default:
      return false;
  }
}

std::vector<TransitionEstimate> true_estimates(std::span<const ChannelSpec> specs) {
  std::vector<TransitionEstimate> est(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    est[i] = {specs[i].p01, specs[i].p11};
  }
  return est;
}

}  // namespace

TxState make_tx_state(const ProtocolKind& kind, std::span<const ChannelSpec> specs) {
  const std::size_t n = specs.size();
  TxState tx;
  tx.local_counts.assign(n, TransitionCounts{});
  tx.ucb.assign(n, UcbStats{});
  if (is_known_stats(kind.variant)) {
    tx.local_estimates = true_estimates(specs);
    tx.private_belief.resize(n);
    for (std::size_t i = 0; i < n; ++i) tx.private_belief[i] = stationary_free_prob(specs[i]);
  } else {
    tx.local_estimates.assign(n, TransitionEstimate{});  // uninformative 0.5 / 0.5
    tx.private_belief.assign(n, 0.5);
  }
  return tx;
}

SyncState initialize_sync(const ProtocolKind&, std::span<const ChannelSpec>, const TxState& tx) {
  SyncState sync;
  sync.shared_belief = tx.private_belief;
  sync.shared_estimates = tx.local_estimates;
  sync.pending_resync = false;
  return sync;
}

BeliefVector lp_initial_beliefs(std::span<const std::uint8_t> last_sensed,
                                std::span<const TransitionEstimate> estimates, int lp) {
  if (last_sensed.size() != estimates.size()) {
    throw std::invalid_argument("lp_initial_beliefs: dimension mismatch");
  }
  if (lp < 1) throw std::invalid_argument("lp_initial_beliefs: lp must be >= 1");
  const int n = static_cast<int>(last_sensed.size());
  BeliefVector beliefs(n);
  for (int i = 0; i < n; ++i) {
    // one prediction step from the last observation, then idle propagation
    // for the slots spent sensing the remaining channels
    double w = last_sensed[i] ? estimates[i].p11 : estimates[i].p01;
    const std::int64_t gap = static_cast<std::int64_t>(n - 1 - i) * lp;
    for (std::int64_t s = 0; s < gap; ++s) {
      w = propagate_unobserved(w, estimates[i].p11, estimates[i].p01);
    }
    beliefs[i] = w;
  }
  return beliefs;
}

namespace {

// --- per-run channel realization ------------------------------------------

// True and sensed states for every (slot, channel), generated up front from
// named substreams so that every protocol in a paired comparison faces the
// identical realization no matter how much sensing it performs.
struct RunTrace {
  int n = 0;
  std::int64_t t = 0;
  std::vector<std::uint8_t> true_free;
  std::vector<std::uint8_t> sensed_free;

  bool truth(std::int64_t j, int i) const { return true_free[(j - 1) * n + i] != 0; }
  bool sensed(std::int64_t j, int i) const { return sensed_free[(j - 1) * n + i] != 0; }
  std::span<const std::uint8_t> sensed_row(std::int64_t j) const {
    return {sensed_free.data() + (j - 1) * n, static_cast<std::size_t>(n)};
  }
};

RunTrace make_trace(std::span<const ChannelSpec> specs, std::int64_t t, std::uint64_t base_seed,
                    std::uint64_t run, const SimOptions& opts) {
  RunTrace trace;
  trace.n = static_cast<int>(specs.size());
  trace.t = t;
  trace.true_free.resize(static_cast<std::size_t>(t) * trace.n);
  trace.sensed_free.resize(static_cast<std::size_t>(t) * trace.n);

  for (int i = 0; i < trace.n; ++i) {
    Rng evolution = derive_stream(base_seed, run, StreamPurpose::Evolution, i);
    bool state = false;
    switch (opts.initial_mode) {
      case InitialStateMode::Stationary:
        state = evolution.bernoulli(stationary_free_prob(specs[i]));
        break;
      case InitialStateMode::AllFree:
        state = true;
        break;
      case InitialStateMode::AllBusy:
        state = false;
        break;
      case InitialStateMode::Explicit:
        if (static_cast<int>(opts.initial_states.size()) != trace.n) {
          throw std::invalid_argument("initial_states length must equal channel count");
        }
        state = opts.initial_states[i] != 0;
        break;
    }
    for (std::int64_t j = 1; j <= t; ++j) {
      if (j > 1) state = step_channel(state, specs[i], evolution);
      trace.true_free[(j - 1) * trace.n + i] = state ? 1 : 0;
    }
    Rng sensing = derive_stream(base_seed, run, StreamPurpose::Sensing, i);
    for (std::int64_t j = 1; j <= t; ++j) {
      const bool truly_free = trace.true_free[(j - 1) * trace.n + i] != 0;
      trace.sensed_free[(j - 1) * trace.n + i] = sense(truly_free, specs[i], sensing) ? 1 : 0;
    }
  }
  return trace;
}

// --- protocol engines -------------------------------------------------------

struct SenseRequest {
  bool all = false;
  int channel = -1;      // when !all
  bool data_phase = true;  // false during a dedicated learning period
};

struct SenseResult {
  bool all = false;
  std::span<const std::uint8_t> row;  // when all
  int channel = -1;
  bool value = false;
};

// One protocol instance for one run. The engine owns both endpoint states but
// keeps them strictly apart: rx_* members are updated only from the decision
// history, the ACK flag, and delivered packets, never from transmitter or
// network internals.
class ProtocolEngine {
 public:
  virtual ~ProtocolEngine() = default;
  virtual int tx_decide(std::int64_t j) const = 0;
  virtual int rx_decide(std::int64_t j) const = 0;
  virtual SenseRequest sense_request(std::int64_t j, int tx_channel) const = 0;
  virtual void tx_learn(std::int64_t j, const SenseResult& sensed) = 0;
  virtual PacketPayload tx_packet(std::int64_t j) const = 0;
  virtual void tx_finish(std::int64_t j, int tx_channel, const SenseResult& sensed,
                         bool transmitted, bool ack) = 0;
  virtual void rx_finish(std::int64_t j, int rx_channel, bool ack,
                         const PacketPayload* packet) = 0;
};

class FullSensingEngine final : public ProtocolEngine {
 public:
  FullSensingEngine(const ProtocolKind& kind, std::span<const ChannelSpec> specs)
      : specs_(specs.begin(), specs.end()),
        known_(kind.variant == ProtocolVariant::FullSensingKnown),
        tx_(make_tx_state(kind, specs)),
        tx_sync_(initialize_sync(kind, specs, tx_)),
        rx_sync_(tx_sync_) {
    bandwidths_.reserve(specs.size());
    for (const auto& s : specs_) bandwidths_.push_back(s.bandwidth);
  }

  int tx_decide(std::int64_t) const override {
    return decide_weighted_argmax(tx_sync_.shared_belief, bandwidths_).channel;
  }
  int rx_decide(std::int64_t) const override {
    return decide_weighted_argmax(rx_sync_.shared_belief, bandwidths_).channel;
  }
  SenseRequest sense_request(std::int64_t, int) const override { return {true, -1, true}; }

  void tx_learn(std::int64_t, const SenseResult& sensed) override {
    last_row_.assign(sensed.row.begin(), sensed.row.end());
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      tx_.local_counts[i] = record_sensing(tx_.local_counts[i], last_row_[i] != 0);
      if (!known_) tx_.local_estimates[i] = estimate(tx_.local_counts[i]);
    }
  }

  PacketPayload tx_packet(std::int64_t) const override {
    PacketPayload pkt;
    pkt.sensed_vector = last_row_;
    pkt.counts = tx_.local_counts;
    if (tx_sync_.pending_resync) pkt.resync_belief = tx_.private_belief;
    return pkt;
  }

  void tx_finish(std::int64_t, int tx_channel, const SenseResult&, bool, bool ack) override {
    SlotObservation obs;
    obs.accessed = tx_channel;
    obs.ack = ack;
    if (ack) {
      // recover common state first: belief resync, then the estimates that
      // just travelled inside the packet
      if (tx_sync_.pending_resync) tx_sync_.shared_belief = tx_.private_belief;
      if (!known_) tx_sync_.shared_estimates = tx_.local_estimates;
      obs.sensed = last_row_;
      tx_sync_.shared_belief =
          update_shared_full(tx_sync_.shared_belief, obs, tx_sync_.shared_estimates, specs_);
      tx_.private_belief = update_private_full(tx_.private_belief, obs, tx_.local_estimates,
                                               specs_, tx_sync_.shared_belief);
      tx_sync_.pending_resync = false;
    } else {
      BeliefVector shared_next =
          update_shared_full(tx_sync_.shared_belief, obs, tx_sync_.shared_estimates, specs_);
      obs.sensed = last_row_;
      tx_.private_belief = update_private_full(tx_.private_belief, obs, tx_.local_estimates,
                                               specs_, shared_next);
      tx_sync_.shared_belief = std::move(shared_next);
      tx_sync_.pending_resync = true;
    }
    if (!tx_sync_.pending_resync && tx_.private_belief != tx_sync_.shared_belief) {
      throw std::logic_error("full sensing: private belief diverged while marked in sync");
    }
  }

  void rx_finish(std::int64_t, int rx_channel, bool ack, const PacketPayload* packet) override {
    SlotObservation obs;
    obs.accessed = rx_channel;
    obs.ack = ack;
    if (ack) {
      if (packet == nullptr) throw std::logic_error("full sensing: ack without packet");
      if (rx_sync_.pending_resync) {
        if (!packet->resync_belief) {
          throw std::logic_error("full sensing: resync expected but packet carried no belief");
        }
        rx_sync_.shared_belief = *packet->resync_belief;
      }
      if (!known_) {
        for (std::size_t i = 0; i < specs_.size(); ++i) {
          rx_sync_.shared_estimates[i] = estimate(packet->counts[i]);
        }
      }
      obs.sensed = packet->sensed_vector;
      rx_sync_.pending_resync = false;
    } else {
      rx_sync_.pending_resync = true;
    }
    rx_sync_.shared_belief =
        update_shared_full(rx_sync_.shared_belief, obs, rx_sync_.shared_estimates, specs_);
  }

 private:
  std::vector<ChannelSpec> specs_;
  std::vector<double> bandwidths_;
  bool known_;
  TxState tx_;
  SyncState tx_sync_;
  SyncState rx_sync_;
  std::vector<std::uint8_t> last_row_;
};

class IidCountingEngine final : public ProtocolEngine {
 public:
  explicit IidCountingEngine(const ProtocolKind& kind, std::span<const ChannelSpec> specs)
      : specs_(specs.begin(), specs.end()), tx_(make_tx_state(kind, specs)) {
    bandwidths_.reserve(specs.size());
    for (const auto& s : specs_) bandwidths_.push_back(s.bandwidth);
    tx_shared_counts_ = tx_.local_counts;
    rx_shared_counts_ = tx_.local_counts;
    weights_.resize(specs.size());
  }

  int tx_decide(std::int64_t j) const override { return decide(tx_shared_counts_, j); }
  int rx_decide(std::int64_t j) const override { return decide(rx_shared_counts_, j); }
  SenseRequest sense_request(std::int64_t, int) const override { return {true, -1, true}; }

  void tx_learn(std::int64_t, const SenseResult& sensed) override {
    last_row_.assign(sensed.row.begin(), sensed.row.end());
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      tx_.local_counts[i] = record_sensing(tx_.local_counts[i], last_row_[i] != 0);
    }
  }

  PacketPayload tx_packet(std::int64_t) const override {
    return {last_row_, tx_.local_counts, std::nullopt};
  }

  void tx_finish(std::int64_t, int, const SenseResult&, bool, bool ack) override {
    if (ack) tx_shared_counts_ = tx_.local_counts;
  }

  void rx_finish(std::int64_t, int, bool ack, const PacketPayload* packet) override {
    if (ack) {
      if (packet == nullptr) throw std::logic_error("iid counting: ack without packet");
      rx_shared_counts_ = packet->counts;
    }
  }

 private:
  int decide(const std::vector<TransitionCounts>& shared, std::int64_t j) const {
    for (std::size_t i = 0; i < shared.size(); ++i) {
      weights_[i] = estimate_iid_free_prob(shared[i].sensed_free, j);
    }
    return decide_weighted_argmax(weights_, bandwidths_).channel;
  }

  std::vector<ChannelSpec> specs_;
  std::vector<double> bandwidths_;
  TxState tx_;
  std::vector<TransitionCounts> tx_shared_counts_;
  std::vector<TransitionCounts> rx_shared_counts_;
  std::vector<std::uint8_t> last_row_;
  mutable std::vector<double> weights_;
};

// Greedy and index policies with single-channel sensing, with or without an
// initial dedicated learning period.
class SingleSensingEngine final : public ProtocolEngine {
 public:
  SingleSensingEngine(const ProtocolKind& kind, std::span<const ChannelSpec> specs,
                      const SimOptions& opts)
      : specs_(specs.begin(), specs.end()),
        kind_(kind),
        opts_(opts),
        tx_(make_tx_state(kind, specs)),
        tx_sync_(initialize_sync(kind, specs, tx_)),
        rx_sync_(tx_sync_) {
    bandwidths_.reserve(specs.size());
    for (const auto& s : specs_) bandwidths_.push_back(s.bandwidth);
    weights_.resize(specs.size());
    const bool blind = kind.variant == ProtocolVariant::WhittleBlindLP;
    lp_total_ = blind ? static_cast<std::int64_t>(kind.lp) * static_cast<std::int64_t>(specs.size())
                      : 0;
    lp_last_sensed_.assign(specs.size(), 0);
    if (!blind && kind.variant != ProtocolVariant::GreedyKnownL1 && opts_.index_use_table) {
      tables_.reserve(specs.size());
      for (std::size_t i = 0; i < specs.size(); ++i) {
        tables_.push_back(build_index_table(unit_arm(tx_sync_.shared_estimates[i]),
                                            opts_.index_grid_size));
      }
    }
  }

  int tx_decide(std::int64_t j) const override { return decide(tx_sync_, j); }
  int rx_decide(std::int64_t j) const override { return decide(rx_sync_, j); }

  SenseRequest sense_request(std::int64_t j, int tx_channel) const override {
    if (in_learning(j)) return {false, scheduled_channel(j), false};
    return {false, tx_channel, true};
  }

  void tx_learn(std::int64_t, const SenseResult& sensed) override {
    if (kind_.variant != ProtocolVariant::WhittleBlindLP) return;
    const int c = sensed.channel;
    tx_.local_counts[c] = record_sensing(tx_.local_counts[c], sensed.value);
    tx_.local_estimates[c] = estimate(tx_.local_counts[c]);
    lp_last_sensed_[c] = sensed.value ? 1 : 0;
    // transitions only count across consecutively sensed slots
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      if (static_cast<int>(i) != c) tx_.local_counts[i].last_sensed.reset();
    }
  }

  PacketPayload tx_packet(std::int64_t) const override {
    return {{}, tx_.local_counts, std::nullopt};
  }

  void tx_finish(std::int64_t j, int tx_channel, const SenseResult&, bool, bool ack) override {
    if (in_learning(j)) {
      if (j == lp_total_) finish_learning();
      return;
    }
    if (ack && kind_.variant == ProtocolVariant::WhittleBlindLP) {
      tx_sync_.shared_estimates = tx_.local_estimates;
    }
    SlotObservation obs{tx_channel, ack, std::nullopt};
    tx_sync_.shared_belief =
        update_shared_single(tx_sync_.shared_belief, obs, tx_sync_.shared_estimates, specs_);
    tx_sync_.pending_resync = !ack;
  }

  void rx_finish(std::int64_t j, int rx_channel, bool ack, const PacketPayload* packet) override {
    if (in_learning(j)) return;  // receiver idles; the handoff happens out of band
    if (ack && kind_.variant == ProtocolVariant::WhittleBlindLP) {
      if (packet == nullptr) throw std::logic_error("single sensing: ack without packet");
      for (std::size_t i = 0; i < specs_.size(); ++i) {
        rx_sync_.shared_estimates[i] = estimate(packet->counts[i]);
      }
    }
    SlotObservation obs{rx_channel, ack, std::nullopt};
    rx_sync_.shared_belief =
        update_shared_single(rx_sync_.shared_belief, obs, rx_sync_.shared_estimates, specs_);
    rx_sync_.pending_resync = !ack;
  }

 private:
  bool in_learning(std::int64_t j) const { return j <= lp_total_; }
  int scheduled_channel(std::int64_t j) const { return static_cast<int>((j - 1) / kind_.lp); }

  ArmModel unit_arm(const TransitionEstimate& est) const {
    return {est.p11, est.p01, 1.0, opts_.discount};
  }

  int decide(const SyncState& sync, std::int64_t j) const {
    if (in_learning(j)) return scheduled_channel(j);
    if (kind_.variant == ProtocolVariant::GreedyKnownL1) {
      return decide_weighted_argmax(sync.shared_belief, bandwidths_).channel;
    }
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      weights_[i] = tables_.empty()
                        ? whittle_index(sync.shared_belief[i], unit_arm(sync.shared_estimates[i]))
                        : tables_[i].lookup(sync.shared_belief[i]);
    }
    return decide_weighted_argmax(weights_, bandwidths_).channel;
  }

  // End of the dedicated learning phase: the transmitter finalizes its
  // estimates and propagated beliefs, and the pair exchanges them the same
  // way the initial handshake did.
  void finish_learning() {
    tx_sync_.shared_estimates = tx_.local_estimates;
    tx_sync_.shared_belief = lp_initial_beliefs(lp_last_sensed_, tx_.local_estimates, kind_.lp);
    tx_sync_.pending_resync = false;
    tx_.private_belief = tx_sync_.shared_belief;
    rx_sync_ = tx_sync_;
  }

  std::vector<ChannelSpec> specs_;
  ProtocolKind kind_;
  SimOptions opts_;
  std::vector<double> bandwidths_;
  TxState tx_;
  SyncState tx_sync_;
  SyncState rx_sync_;
  std::vector<IndexTable> tables_;  // fixed-parameter arms only
  std::int64_t lp_total_ = 0;
  std::vector<std::uint8_t> lp_last_sensed_;
  mutable std::vector<double> weights_;
};

class UcbEngine final : public ProtocolEngine {
 public:
  UcbEngine(const ProtocolKind& kind, std::span<const ChannelSpec> specs)
      : tx_(make_tx_state(kind, specs)), rx_stats_(tx_.ucb) {
    bandwidths_.reserve(specs.size());
    for (const auto& s : specs) bandwidths_.push_back(s.bandwidth);
    weights_.resize(specs.size());
  }

  int tx_decide(std::int64_t j) const override { return decide(tx_.ucb, j); }
  int rx_decide(std::int64_t j) const override { return decide(rx_stats_, j); }
  SenseRequest sense_request(std::int64_t, int tx_channel) const override {
    return {false, tx_channel, true};
  }
  void tx_learn(std::int64_t, const SenseResult&) override {}
  PacketPayload tx_packet(std::int64_t) const override { return {}; }

  void tx_finish(std::int64_t, int tx_channel, const SenseResult&, bool, bool ack) override {
    ++tx_.ucb[tx_channel].plays;
    if (ack) ++tx_.ucb[tx_channel].successes;
  }
  void rx_finish(std::int64_t, int rx_channel, bool ack, const PacketPayload*) override {
    ++rx_stats_[rx_channel].plays;
    if (ack) ++rx_stats_[rx_channel].successes;
  }

 private:
  int decide(const std::vector<UcbStats>& stats, std::int64_t j) const {
    for (std::size_t i = 0; i < stats.size(); ++i) weights_[i] = ucb_index(stats[i], j);
    return decide_weighted_argmax(weights_, bandwidths_).channel;
  }

  std::vector<double> bandwidths_;
  TxState tx_;
  std::vector<UcbStats> rx_stats_;
  mutable std::vector<double> weights_;
};

class OfflineBestEngine final : public ProtocolEngine {
 public:
  explicit OfflineBestEngine(std::span<const ChannelSpec> specs)
      : best_(offline_best_throughput(specs).first.channel) {}

  int tx_decide(std::int64_t) const override { return best_; }
  int rx_decide(std::int64_t) const override { return best_; }
  SenseRequest sense_request(std::int64_t, int tx_channel) const override {
    return {false, tx_channel, true};
  }
  void tx_learn(std::int64_t, const SenseResult&) override {}
  PacketPayload tx_packet(std::int64_t) const override { return {}; }
  void tx_finish(std::int64_t, int, const SenseResult&, bool, bool) override {}
  void rx_finish(std::int64_t, int, bool, const PacketPayload*) override {}

 private:
  int best_;
};

std::unique_ptr<ProtocolEngine> make_engine(const ProtocolKind& kind,
                                            std::span<const ChannelSpec> specs,
                                            const SimOptions& opts) {
  switch (kind.variant) {
    case ProtocolVariant::FullSensingBlind:
    case ProtocolVariant::FullSensingKnown:
      return std::make_unique<FullSensingEngine>(kind, specs);
    case ProtocolVariant::IidCountingBlind:
      return std::make_unique<IidCountingEngine>(kind, specs);
    case ProtocolVariant::WhittleBlindLP:
    case ProtocolVariant::WhittleKnown:
    case ProtocolVariant::GreedyKnownL1:
      return std::make_unique<SingleSensingEngine>(kind, specs, opts);
    case ProtocolVariant::UcbIid:
      return std::make_unique<UcbEngine>(kind, specs);
    case ProtocolVariant::OfflineBest:
      return std::make_unique<OfflineBestEngine>(specs);
  }
  throw std::logic_error("make_engine: unknown variant");
}

SlotOutcome run_one_slot(ProtocolEngine& engine, std::span<const ChannelSpec> specs,
                         const RunTrace& trace, std::int64_t j) {
  const int n = trace.n;
  SlotOutcome out;
  out.slot = j;
  out.tx_channel = engine.tx_decide(j);
  out.rx_channel = engine.rx_decide(j);
  if (out.tx_channel < 0 || out.tx_channel >= n || out.rx_channel < 0 || out.rx_channel >= n) {
    throw std::logic_error("simulate: decision out of range");
  }

  const SenseRequest req = engine.sense_request(j, out.tx_channel);
  SenseResult res;
  if (req.all) {
    res.all = true;
    res.row = trace.sensed_row(j);
  } else {
    res.channel = req.channel;
    res.value = trace.sensed(j, req.channel);
  }
  engine.tx_learn(j, res);

  const int access = req.all ? out.tx_channel : req.channel;
  out.sensed_free = req.all ? res.row[out.tx_channel] != 0 : res.value;
  out.transmitted = req.data_phase && out.sensed_free && access == out.tx_channel;
  out.true_free = trace.truth(j, out.tx_channel);

  PacketPayload packet;
  if (out.transmitted) packet = engine.tx_packet(j);

  out.ack = out.transmitted && out.true_free && out.tx_channel == out.rx_channel;
  out.interference = out.transmitted && !out.true_free;
  out.reward = out.ack ? specs[out.tx_channel].bandwidth : 0.0;

  engine.tx_finish(j, out.tx_channel, res, out.transmitted, out.ack);
  engine.rx_finish(j, out.rx_channel, out.ack, out.ack ? &packet : nullptr);

  if (out.ack && !(out.transmitted && out.true_free && out.tx_channel == out.rx_channel)) {
    throw std::logic_error("simulate: ack without the success condition");
  }
  if (out.interference != (out.transmitted && !out.true_free)) {
    throw std::logic_error("simulate: interference flag inconsistent");
  }
  return out;
}

void simulate(const ProtocolKind& kind, std::span<const ChannelSpec> specs, const RunTrace& trace,
              const SimOptions& opts, const std::function<void(const SlotOutcome&)>& sink) {
  auto engine = make_engine(kind, specs, opts);
  for (std::int64_t j = 1; j <= trace.t; ++j) {
    sink(run_one_slot(*engine, specs, trace, j));
  }
}

void validate_run_inputs(std::span<const ChannelSpec> specs, std::int64_t t) {
  if (specs.empty()) throw std::invalid_argument("run: empty channel list");
  if (t < 1) throw std::invalid_argument("run: horizon t must be >= 1");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    validate_channel_spec(specs[i], ("channel " + std::to_string(i) + ": ").c_str());
  }
}

}  // namespace

struct BlockSimulator::Impl {
  std::vector<ChannelSpec> specs;
  RunTrace trace;
  std::unique_ptr<ProtocolEngine> engine;
  std::int64_t next = 1;
};

BlockSimulator::BlockSimulator(const ProtocolKind& kind, std::span<const ChannelSpec> specs,
                               std::int64_t t, std::uint64_t seed, const SimOptions& opts)
    : impl_(std::make_unique<Impl>()) {
  validate_run_inputs(specs, t);
  impl_->specs.assign(specs.begin(), specs.end());
  impl_->trace = make_trace(impl_->specs, t, seed, 0, opts);
  impl_->engine = make_engine(kind, impl_->specs, opts);
}

BlockSimulator::~BlockSimulator() = default;
BlockSimulator::BlockSimulator(BlockSimulator&&) noexcept = default;
BlockSimulator& BlockSimulator::operator=(BlockSimulator&&) noexcept = default;

std::int64_t BlockSimulator::horizon() const { return impl_->trace.t; }
std::int64_t BlockSimulator::next_slot() const { return impl_->next; }
bool BlockSimulator::done() const { return impl_->next > impl_->trace.t; }

SlotOutcome BlockSimulator::step() {
  if (done()) throw std::logic_error("BlockSimulator::step: past the horizon");
  return run_one_slot(*impl_->engine, impl_->specs, impl_->trace, impl_->next++);
}

std::vector<SlotOutcome> run_block(const ProtocolKind& kind, std::span<const ChannelSpec> specs,
                                   std::int64_t t, std::uint64_t seed, const SimOptions& opts) {
  BlockSimulator sim(kind, specs, t, seed, opts);
  std::vector<SlotOutcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(t));
  while (!sim.done()) outcomes.push_back(sim.step());
  return outcomes;
}

std::vector<ChannelSpec> ScenarioSource::realize(std::uint64_t base_seed,
                                                 std::uint64_t run) const {
  if (!fixed.empty()) return fixed;
  std::vector<double> bw = bandwidths;
  if (bw.empty()) bw.assign(n, 1.0);
  Rng rng = derive_stream(base_seed, run, StreamPurpose::Scenario);
  std::vector<ChannelSpec> specs = iid ? sample_scenario_iid(n, low, high, bw, rng)
                                       : sample_scenario(n, low, high, bw, rng);
  for (auto& s : specs) {
    s.p_fa = p_fa;
    s.p_md = p_md;
  }
  return specs;
}

std::vector<std::int64_t> default_sample_slots(std::int64_t t) {
  std::vector<std::int64_t> slots;
  for (std::int64_t j = 1; j <= t; ++j) {
    if (j <= 100 || (j <= 10000 && j % 10 == 0) || j % 100 == 0) slots.push_back(j);
  }
  if (slots.empty() || slots.back() != t) slots.push_back(t);
  return slots;
}

std::vector<std::int64_t> all_sample_slots(std::int64_t t) {
  std::vector<std::int64_t> slots(static_cast<std::size_t>(t));
  for (std::int64_t j = 1; j <= t; ++j) slots[j - 1] = j;
  return slots;
}

namespace {

struct RunOutput {
  std::vector<std::vector<double>> cumulative;  // [protocol][sample]
  double upper = 0.0;
  double offline = 0.0;
  double iid_genie = 0.0;
};

}  // namespace

MonteCarloResult monte_carlo(std::span<const ProtocolKind> protocols, const ScenarioSource& source,
                             int runs, std::int64_t t, std::uint64_t base_seed,
                             const SimOptions& opts, std::vector<std::int64_t> sample_slots,
                             int threads) {
  if (runs < 1) throw std::invalid_argument("monte_carlo: runs must be >= 1");
  if (protocols.empty()) throw std::invalid_argument("monte_carlo: no protocols");
  if (sample_slots.empty()) sample_slots = default_sample_slots(t);

  const std::size_t n_samples = sample_slots.size();
  const std::size_t n_protocols = protocols.size();
  std::vector<RunOutput> outputs(runs);

  const bool want_upper = source.fixed.empty() ? source.n <= 20 : source.fixed.size() <= 20;

  auto work = [&](int r) {
    const std::vector<ChannelSpec> specs = source.realize(base_seed, r);
    validate_run_inputs(specs, t);
    const RunTrace trace = make_trace(specs, t, base_seed, r, opts);

    RunOutput& out = outputs[r];
    out.cumulative.assign(n_protocols, std::vector<double>(n_samples, 0.0));
    for (std::size_t p = 0; p < n_protocols; ++p) {
      double cumulative = 0.0;
      std::size_t next_sample = 0;
      simulate(protocols[p], specs, trace, opts, [&](const SlotOutcome& o) {
        cumulative += o.reward;
        while (next_sample < n_samples && sample_slots[next_sample] == o.slot) {
          out.cumulative[p][next_sample] = cumulative;
          ++next_sample;
        }
      });
    }
    out.upper = want_upper ? upper_bound_throughput(specs) : 0.0;
    out.offline = offline_best_throughput(specs).second;
    out.iid_genie = iid_genie_throughput(specs);
  };

  int workers = threads;
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, runs);
  if (workers == 1) {
    for (int r = 0; r < runs; ++r) work(r);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < runs; r = next.fetch_add(1)) {
          try {
            work(r);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  // fixed-order reduction: identical output for any worker count
  MonteCarloResult result;
  result.slots = sample_slots;
  result.curves.resize(n_protocols);
  for (std::size_t p = 0; p < n_protocols; ++p) {
    ProtocolCurve& curve = result.curves[p];
    curve.kind = protocols[p];
    curve.name = protocols[p].name();
    curve.avg_throughput.assign(n_samples, 0.0);
    curve.per_run_final.resize(runs);
    for (std::size_t s = 0; s < n_samples; ++s) {
      double total = 0.0;
      for (int r = 0; r < runs; ++r) total += outputs[r].cumulative[p][s];
      curve.avg_throughput[s] =
          total / static_cast<double>(runs) / static_cast<double>(sample_slots[s]);
    }
    for (int r = 0; r < runs; ++r) {
      curve.per_run_final[r] =
          outputs[r].cumulative[p][n_samples - 1] / static_cast<double>(sample_slots.back());
    }
    curve.final_mean = curve.avg_throughput[n_samples - 1];
    if (runs > 1) {
      double ss = 0.0;
      for (double v : curve.per_run_final) {
        const double d = v - curve.final_mean;
        ss += d * d;
      }
      curve.final_stderr = std::sqrt(ss / (runs - 1)) / std::sqrt(static_cast<double>(runs));
    }
  }

  result.per_run_offline_best.resize(runs);
  result.per_run_iid_genie.resize(runs);
  if (want_upper) result.per_run_upper_bound.resize(runs);
  double su = 0.0, so = 0.0, sg = 0.0;
  for (int r = 0; r < runs; ++r) {
    if (want_upper) {
      result.per_run_upper_bound[r] = outputs[r].upper;
      su += outputs[r].upper;
    }
    result.per_run_offline_best[r] = outputs[r].offline;
    so += outputs[r].offline;
    result.per_run_iid_genie[r] = outputs[r].iid_genie;
    sg += outputs[r].iid_genie;
  }
  result.upper_bound_mean = want_upper ? su / runs : 0.0;
  result.offline_best_mean = so / runs;
  result.iid_genie_mean = sg / runs;
  return result;
}

}  // namespace bcmac
