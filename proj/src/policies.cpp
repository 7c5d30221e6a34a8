#include "bcmac/policies.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bcmac {

Decision decide_weighted_argmax(std::span<const double> weights,
                                std::span<const double> bandwidths) {
  if (weights.empty() || weights.size() != bandwidths.size()) {
    throw std::invalid_argument("decide_weighted_argmax: need equal non-empty inputs");
  }
  int best = 0;
  double best_value = weights[0] * bandwidths[0];
  for (std::size_t i = 1; i < weights.size(); ++i) {
    const double v = weights[i] * bandwidths[i];
    if (v > best_value) {  // strict: earlier index wins ties
      best_value = v;
      best = static_cast<int>(i);
    }
  }
  return Decision{best};
}

double upper_bound_throughput(std::span<const ChannelSpec> specs) {
  const int n = static_cast<int>(specs.size());
  if (n < 1) throw std::invalid_argument("upper_bound_throughput: empty scenario");
  if (n > 20) throw std::invalid_argument("upper_bound_throughput: n > 20 (2^n enumeration)");

  std::vector<double> pi(n);
  for (int i = 0; i < n; ++i) pi[i] = stationary_free_prob(specs[i]);

  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double prob = 1.0;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      const bool free_now = (mask >> i) & 1u;
      prob *= free_now ? pi[i] : 1.0 - pi[i];
      const double to_free = free_now ? specs[i].p11 : specs[i].p01;
      best = std::max(best, to_free * specs[i].bandwidth);
    }
    total += prob * best;
  }
  return total;
}

std::pair<Decision, double> offline_best_throughput(std::span<const ChannelSpec> specs) {
  if (specs.empty()) throw std::invalid_argument("offline_best_throughput: empty scenario");
  std::vector<double> pi(specs.size());
  std::vector<double> bw(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    pi[i] = stationary_free_prob(specs[i]);
    bw[i] = specs[i].bandwidth;
  }
  const Decision d = decide_weighted_argmax(pi, bw);
  return {d, pi[d.channel] * bw[d.channel]};
}

double iid_genie_throughput(std::span<const ChannelSpec> specs) {
  return offline_best_throughput(specs).second;
}

}  // namespace bcmac
