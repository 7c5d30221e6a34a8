#ifndef BCMAC_POLICIES_HPP
#define BCMAC_POLICIES_HPP

#include <span>
#include <utility>

#include "bcmac/channel.hpp"

namespace bcmac {

struct Decision {
  int channel = 0;  // 0-based index
};

// argmax_i weights[i]*bandwidths[i]; ties break to the lowest index so that
// transmitter and receiver always resolve them identically.
Decision decide_weighted_argmax(std::span<const double> weights,
                                std::span<const double> bandwidths);

// Expected per-slot throughput of a genie that sees the full previous-slot
// state of every channel and always picks the best one: sum over all 2^N
// joint states of Pr(state) * max_i Pr(channel i turns free)*B_i, with the
// joint state drawn from the stationary distribution. Exact enumeration;
// rejects n > 20.
double upper_bound_throughput(std::span<const ChannelSpec> specs);

// Best single channel by stationary free probability, and its throughput.
std::pair<Decision, double> offline_best_throughput(std::span<const ChannelSpec> specs);

// max_i Pr(free)*B_i for time-independent channels; equals offline_best for
// p11 = p01 and serves as the genie benchmark in that regime.
double iid_genie_throughput(std::span<const ChannelSpec> specs);

}  // namespace bcmac

#endif  // BCMAC_POLICIES_HPP
