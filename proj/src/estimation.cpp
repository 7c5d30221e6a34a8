#include "bcmac/estimation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bcmac {

TransitionCounts record_sensing(TransitionCounts counts, bool sensed_free_now) {
  if (sensed_free_now) {
    ++counts.sensed_free;
    if (counts.last_sensed.has_value()) {
      if (*counts.last_sensed) {
        ++counts.free_to_free;
      } else {
        ++counts.busy_to_free;
      }
    }
  } else {
    ++counts.sensed_busy;
  }
  counts.last_sensed = sensed_free_now;
  return counts;
}

TransitionEstimate estimate(const TransitionCounts& counts, double fallback) {
  TransitionEstimate est;
  est.p01 = counts.sensed_busy > 0
                ? static_cast<double>(counts.busy_to_free) / static_cast<double>(counts.sensed_busy)
                : fallback;
  est.p11 = counts.sensed_free > 0
                ? static_cast<double>(counts.free_to_free) / static_cast<double>(counts.sensed_free)
                : fallback;
  return est;
}

double ucb_index(const UcbStats& stats, std::int64_t j) {
  if (j < 1) throw std::invalid_argument("ucb_index: slot index must be >= 1");
  if (stats.plays == 0) return std::numeric_limits<double>::infinity();
  const double y = static_cast<double>(stats.plays);
  return static_cast<double>(stats.successes) / y +
         std::sqrt(2.0 * std::log(static_cast<double>(j)) / y);
}

double estimate_iid_free_prob(std::int64_t sensed_free, std::int64_t j) {
  if (j < 1) throw std::invalid_argument("estimate_iid_free_prob: slot index must be >= 1");
  const double p = static_cast<double>(sensed_free) / static_cast<double>(j);
  if (p < 0.0) return 0.0;
  if (p > 1.0) return 1.0;
  return p;
}

}  // namespace bcmac
