#ifndef BCMAC_SIMULATOR_HPP
#define BCMAC_SIMULATOR_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bcmac/belief.hpp"
#include "bcmac/channel.hpp"
#include "bcmac/estimation.hpp"

namespace bcmac {

// The MAC strategies under comparison. "Known" variants are genie-aided
// (true transition probabilities available a priori); "Blind" variants learn
// them online.
enum class ProtocolVariant {
  FullSensingBlind,   // senses every channel, counting estimator, count sharing
  FullSensingKnown,   // same machinery with true statistics
  WhittleBlindLP,     // single-channel sensing, dedicated learning period, index policy
  WhittleKnown,       // index policy with true statistics
  UcbIid,             // confidence-bound policy for time-independent channels
  IidCountingBlind,   // full sensing, ranks channels by sensed-free frequency
  GreedyKnownL1,      // single-channel sensing, myopic belief policy, true statistics
  OfflineBest,        // always the channel with the best stationary free probability
};

struct ProtocolKind {
  ProtocolVariant variant = ProtocolVariant::FullSensingBlind;
  int lp = 20;  // per-channel learning slots (WhittleBlindLP only)

  std::string name() const;
  static ProtocolKind parse(const std::string& token);  // throws std::invalid_argument

  bool operator==(const ProtocolKind&) const = default;
};

// Everything the transmitter knows that the receiver may not.
struct TxState {
  BeliefVector private_belief;
  std::vector<TransitionCounts> local_counts;
  std::vector<TransitionEstimate> local_estimates;
  std::vector<UcbStats> ucb;
};

// The knowledge transmitter and receiver must keep identical; decisions are a
// pure function of this state, which is what keeps the pair synchronized.
struct SyncState {
  BeliefVector shared_belief;
  std::vector<TransitionEstimate> shared_estimates;
  bool pending_resync = false;  // at least one failure since the last success
};

// Payload piggybacked on every data packet: enough for the receiver to
// reconstruct the transmitter's shared view without a control channel.
struct PacketPayload {
  std::vector<std::uint8_t> sensed_vector;
  std::vector<TransitionCounts> counts;
  std::optional<BeliefVector> resync_belief;  // present iff the previous slot failed
};

struct SlotOutcome {
  std::int64_t slot = 0;
  int tx_channel = 0;
  int rx_channel = 0;
  bool sensed_free = false;  // access channel as sensed by the transmitter
  bool transmitted = false;
  bool true_free = false;  // access channel's actual state
  bool ack = false;
  double reward = 0.0;
  bool interference = false;
};

enum class InitialStateMode { Stationary, AllFree, AllBusy, Explicit };

struct SimOptions {
  double discount = 0.9999;     // for the index policies
  int index_grid_size = 2001;   // index table resolution for fixed-parameter arms
  bool index_use_table = true;  // false: evaluate the index exactly per query
  InitialStateMode initial_mode = InitialStateMode::Stationary;
  std::vector<std::uint8_t> initial_states;  // used by Explicit
};

// Fresh transmitter state for a protocol: blind variants start from empty
// counters (estimates 0.5, beliefs 0.5); genie-aided variants start from the
// true statistics and stationary beliefs.
TxState make_tx_state(const ProtocolKind& kind, std::span<const ChannelSpec> specs);

// State established by the initial handshake: the first packet carries the
// transmitter's estimates and belief vector, so shared state starts equal to
// the private one.
SyncState initialize_sync(const ProtocolKind& kind, std::span<const ChannelSpec> specs,
                          const TxState& tx);

// Beliefs at the end of a dedicated learning period: channel i was last
// sensed (n-1-i)*lp slots ago with outcome last_sensed[i]; that observation
// is propagated forward under the freshly estimated transition probabilities.
BeliefVector lp_initial_beliefs(std::span<const std::uint8_t> last_sensed,
                                std::span<const TransitionEstimate> estimates, int lp);

// One protocol on one pre-drawn channel realization, advanced slot by slot.
// Each step runs the full stage sequence: both endpoints decide, the
// transmitter senses and learns, a packet goes out if the access channel was
// sensed free, the ACK resolves, and both shared views update.
class BlockSimulator {
 public:
  BlockSimulator(const ProtocolKind& kind, std::span<const ChannelSpec> specs, std::int64_t t,
                 std::uint64_t seed, const SimOptions& opts = {});
  ~BlockSimulator();
  BlockSimulator(BlockSimulator&&) noexcept;
  BlockSimulator& operator=(BlockSimulator&&) noexcept;

  std::int64_t horizon() const;
  std::int64_t next_slot() const;  // 1-based; horizon()+1 when finished
  bool done() const;
  SlotOutcome step();  // throws std::logic_error past the horizon

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Simulates `t` slots of one protocol on one realization. Deterministic in
// (specs, t, seed, options); identical seeds give byte-identical traces.
std::vector<SlotOutcome> run_block(const ProtocolKind& kind, std::span<const ChannelSpec> specs,
                                   std::int64_t t, std::uint64_t seed,
                                   const SimOptions& opts = {});

// Scenario supplier for Monte Carlo: fixed channel list, or per-run sampling
// of transition probabilities.
struct ScenarioSource {
  std::vector<ChannelSpec> fixed;  // non-empty: used for every run

  // sampler parameters (used when `fixed` is empty)
  int n = 5;
  double low = 0.1;
  double high = 0.9;
  bool iid = false;  // p11 = p01
  std::vector<double> bandwidths;
  double p_fa = 0.0;
  double p_md = 0.0;

  std::vector<ChannelSpec> realize(std::uint64_t base_seed, std::uint64_t run) const;
};

// Slots at which curves are recorded: every slot to 100, every 10th to 10^4,
// every 100th beyond, final slot always included.
std::vector<std::int64_t> default_sample_slots(std::int64_t t);
std::vector<std::int64_t> all_sample_slots(std::int64_t t);

struct ProtocolCurve {
  ProtocolKind kind;
  std::string name;
  std::vector<double> avg_throughput;  // cross-run mean cumulative reward / slot
  double final_mean = 0.0;
  double final_stderr = 0.0;           // cross-run standard error of the final value
  std::vector<double> per_run_final;
};

struct MonteCarloResult {
  std::vector<std::int64_t> slots;
  std::vector<ProtocolCurve> curves;
  // per-run analytic benchmarks for the sampled scenarios
  std::vector<double> per_run_upper_bound;   // empty when n > 20
  std::vector<double> per_run_offline_best;
  std::vector<double> per_run_iid_genie;
  double upper_bound_mean = 0.0;
  double offline_best_mean = 0.0;
  double iid_genie_mean = 0.0;
};

// Runs every protocol against the same `runs` realizations (same scenarios,
// same channel evolution, same sensing noise) and averages the cumulative
// reward curves. Runs may execute on `threads` workers; aggregation is a
// fixed-order reduction, so serial and parallel execution produce identical
// results bit for bit.
MonteCarloResult monte_carlo(std::span<const ProtocolKind> protocols, const ScenarioSource& source,
                             int runs, std::int64_t t, std::uint64_t base_seed,
                             const SimOptions& opts = {},
                             std::vector<std::int64_t> sample_slots = {}, int threads = 1);

}  // namespace bcmac

#endif  // BCMAC_SIMULATOR_HPP
