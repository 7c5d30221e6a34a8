#ifndef BCMAC_CHANNEL_HPP
#define BCMAC_CHANNEL_HPP

#include <cstdint>
#include <vector>

#include "bcmac/rng.hpp"

namespace bcmac {

// One licensed channel: two-state (free/busy) slotted Markov occupancy with an
// imperfect binary sensing front end.
//
//   p11 = Pr(free at j+1 | free at j)       p01 = Pr(free at j+1 | busy at j)
//   p_fa = Pr(sensed busy | truly free)     p_md = Pr(sensed free | truly busy)
struct ChannelSpec {
  double bandwidth = 1.0;  // throughput units per successful slot
  double p11 = 0.5;
  double p01 = 0.5;
  double p_fa = 0.0;
  double p_md = 0.0;
};

// True occupancy of all channels at one slot. states[i] != 0 means free.
struct NetworkState {
  std::vector<std::uint8_t> states;
  std::int64_t slot = 0;
};

// Throws std::invalid_argument naming the offending field. `label` is
// prepended to messages so config validation can report e.g. "channel 3: p11".
void validate_channel_spec(const ChannelSpec& spec, const char* label = "");

// Next true state of a single channel.
bool step_channel(bool free_now, const ChannelSpec& spec, Rng& rng);

// Sensed state: a free channel is missed with probability p_fa, a busy one is
// mistaken for free with probability p_md.
bool sense(bool truly_free, const ChannelSpec& spec, Rng& rng);

// Stationary probability of the free state, p01 / (1 - p11 + p01).
// Throws std::domain_error for the degenerate chain p11 = 1, p01 = 0 (both
// states absorbing; no unique stationary distribution).
double stationary_free_prob(const ChannelSpec& spec);

// Draws p11 and p01 independently and uniformly in [low, high] per channel.
// bandwidths.size() must equal n.
std::vector<ChannelSpec> sample_scenario(int n, double low, double high,
                                         const std::vector<double>& bandwidths,
                                         Rng& rng);

// Same, but with p11 = p01 per channel (time-independent occupancy).
std::vector<ChannelSpec> sample_scenario_iid(int n, double low, double high,
                                             const std::vector<double>& bandwidths,
                                             Rng& rng);

}  // namespace bcmac

#endif  // BCMAC_CHANNEL_HPP
