#ifndef BCMAC_ESTIMATION_HPP
#define BCMAC_ESTIMATION_HPP

#include <cstdint>
#include <optional>

namespace bcmac {

// Per-channel counters over the *sensed* state sequence. Transitions are only
// counted between consecutive sensed slots; `last_sensed` holds the previous
// slot's sensed state and must be cleared by the caller whenever the channel
// was not sensed in the immediately preceding slot (single-channel sensing
// leaves gaps).
struct TransitionCounts {
  std::int64_t sensed_busy = 0;    // slots sensed busy
  std::int64_t sensed_free = 0;    // slots sensed free
  std::int64_t busy_to_free = 0;   // consecutive pairs busy -> free
  std::int64_t free_to_free = 0;   // consecutive pairs free -> free
  std::optional<bool> last_sensed;

  bool operator==(const TransitionCounts&) const = default;
};

struct TransitionEstimate {
  double p01 = 0.5;  // estimated Pr(free | was busy)
  double p11 = 0.5;  // estimated Pr(free | was free)

  bool operator==(const TransitionEstimate&) const = default;
};

// Folds one sensed observation into the counters.
TransitionCounts record_sensing(TransitionCounts counts, bool sensed_free_now);

// Ratio estimates p01 = busy_to_free/sensed_busy, p11 = free_to_free/sensed_free.
// A zero denominator yields `fallback` (uninformative prior) so that no NaN can
// reach the belief arithmetic.
TransitionEstimate estimate(const TransitionCounts& counts, double fallback = 0.5);

// Success/selection counters for the confidence-bound strategy.
struct UcbStats {
  std::int64_t successes = 0;  // slots with successful communication on this channel
  std::int64_t plays = 0;      // slots this channel was chosen to sense and access
};

// successes/plays + sqrt(2 ln j / plays); +infinity while the channel is
// unplayed so every channel gets tried before the bound kicks in.
double ucb_index(const UcbStats& stats, std::int64_t j);

// Free-probability estimate for time-independent channels: n1 / j, clamped.
double estimate_iid_free_prob(std::int64_t sensed_free, std::int64_t j);

}  // namespace bcmac

#endif  // BCMAC_ESTIMATION_HPP
