#ifndef BCMAC_BELIEF_HPP
#define BCMAC_BELIEF_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bcmac/channel.hpp"
#include "bcmac/estimation.hpp"

namespace bcmac {

// omegas[i] = prior probability that channel i is free at the start of the
// current slot, given the observation history available to the holder.
using BeliefVector = std::vector<double>;

// Posterior probability that a channel is free, conditioned on each of the
// three observations a slot can produce. With perfect sensing these collapse
// to (1, 0, 0).
struct PosteriorFactors {
  double given_sensed_free;  // Pr(free | sensed free)
  double given_sensed_busy;  // Pr(free | sensed busy)
  double given_no_ack;       // Pr(free | access produced no ACK)
};

// What one slot revealed to a belief holder.
struct SlotObservation {
  int accessed = 0;  // channel both sides tried to use
  bool ack = false;
  // Sensed states (1 = free). Present when the holder has them: the full
  // vector for a full-sensing transmitter, or piggybacked inside a delivered
  // packet. Required whenever ack is true for the full-sensing update.
  std::optional<std::vector<std::uint8_t>> sensed;
};

// Bayes posteriors for one channel at prior `prob_free` under sensing error
// rates (p_fa, p_md). 0/0 corners are resolved to documented limits:
// sensed-free with an impossible observation keeps the prior, the other two
// factors go to 0 (the observation, when possible at all, indicates busy).
PosteriorFactors posterior_factors(double prob_free, double p_fa, double p_md);

// One-step prediction for a channel that produced no observation this slot.
double propagate_unobserved(double prob_free, double p11, double p01);

// Common (transmitter = receiver) belief update for the full-sensing
// protocol. Five cases per channel:
//   ack, accessed channel          -> p11   (success proves it was free)
//   ack, other channel sensed free -> posteriorered through given_sensed_free
//   ack, other channel sensed busy -> posterior through given_sensed_busy
//   no ack, accessed channel       -> posterior through given_no_ack
//   no ack, other channel          -> propagate_unobserved
// Posterior factors are evaluated at the pre-update beliefs. On ack the
// sensed vector must be present (it travelled inside the packet).
BeliefVector update_shared_full(const BeliefVector& shared, const SlotObservation& obs,
                                std::span<const TransitionEstimate> shared_estimates,
                                std::span<const ChannelSpec> specs);

// Transmitter-private update for the full-sensing protocol. On ack the
// private belief collapses to the common one; otherwise the transmitter uses
// its own sensed vector and local estimates:
//   other channel sensed free -> given_sensed_free posterior
//   other channel sensed busy -> given_sensed_busy posterior
//   accessed channel          -> given_no_ack posterior
// obs.sensed must always be present (the transmitter senses every channel).
BeliefVector update_private_full(const BeliefVector& priv, const SlotObservation& obs,
                                 std::span<const TransitionEstimate> local_estimates,
                                 std::span<const ChannelSpec> specs,
                                 const BeliefVector& shared_next);

// Common belief update when only the accessed channel is sensed:
//   accessed, ack    -> p11
//   accessed, no ack -> given_no_ack posterior
//   not accessed     -> propagate_unobserved
BeliefVector update_shared_single(const BeliefVector& shared, const SlotObservation& obs,
                                  std::span<const TransitionEstimate> shared_estimates,
                                  std::span<const ChannelSpec> specs);

}  // namespace bcmac

#endif  // BCMAC_BELIEF_HPP
