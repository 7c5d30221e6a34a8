#include "bcmac/channel.hpp"

#include <stdexcept>
#include <string>

namespace bcmac {

namespace {

void check_prob(double v, const char* label, const char* field) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(label) + field + " must be in [0,1], got " +
                                std::to_string(v));
  }
}

}  // namespace

void validate_channel_spec(const ChannelSpec& spec, const char* label) {
  if (!(spec.bandwidth >= 0.0)) {
    throw std::invalid_argument(std::string(label) + "bandwidth must be >= 0, got " +
                                std::to_string(spec.bandwidth));
  }
  check_prob(spec.p11, label, "p11");
  check_prob(spec.p01, label, "p01");
  check_prob(spec.p_fa, label, "p_fa");
  check_prob(spec.p_md, label, "p_md");
  if (spec.p11 == 1.0 && spec.p01 == 0.0) {
    throw std::invalid_argument(std::string(label) +
                                "degenerate chain (p11=1, p01=0): both states absorbing");
  }
}

bool step_channel(bool free_now, const ChannelSpec& spec, Rng& rng) {
  return rng.bernoulli(free_now ? spec.p11 : spec.p01);
}

bool sense(bool truly_free, const ChannelSpec& spec, Rng& rng) {
  if (truly_free) return !rng.bernoulli(spec.p_fa);  // false alarm -> sensed busy
  return rng.bernoulli(spec.p_md);                   // miss detection -> sensed free
}

double stationary_free_prob(const ChannelSpec& spec) {
  const double denom = 1.0 - spec.p11 + spec.p01;
  if (denom == 0.0) {
    throw std::domain_error("degenerate chain (p11=1, p01=0): stationary distribution undefined");
  }
  return spec.p01 / denom;
}

std::vector<ChannelSpec> sample_scenario(int n, double low, double high,
                                         const std::vector<double>& bandwidths, Rng& rng) {
  if (!(0.0 <= low && low <= high && high <= 1.0)) {
    throw std::invalid_argument("sample_scenario: need 0 <= low <= high <= 1");
  }
  if (static_cast<int>(bandwidths.size()) != n) {
    throw std::invalid_argument("sample_scenario: bandwidths length must equal n");
  }
  std::vector<ChannelSpec> specs(n);
  for (int i = 0; i < n; ++i) {
    specs[i].bandwidth = bandwidths[i];
    specs[i].p11 = rng.uniform(low, high);
    specs[i].p01 = rng.uniform(low, high);
  }
  return specs;
}

std::vector<ChannelSpec> sample_scenario_iid(int n, double low, double high,
                                             const std::vector<double>& bandwidths, Rng& rng) {
  if (!(0.0 <= low && low <= high && high <= 1.0)) {
    throw std::invalid_argument("sample_scenario_iid: need 0 <= low <= high <= 1");
  }
  if (static_cast<int>(bandwidths.size()) != n) {
    throw std::invalid_argument("sample_scenario_iid: bandwidths length must equal n");
  }
  std::vector<ChannelSpec> specs(n);
  for (int i = 0; i < n; ++i) {
    specs[i].bandwidth = bandwidths[i];
    const double p = rng.uniform(low, high);
    specs[i].p11 = p;
    specs[i].p01 = p;
  }
  return specs;
}

}  // namespace bcmac
