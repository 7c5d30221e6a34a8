#include "bcmac/belief.hpp"

#include <stdexcept>

namespace bcmac {

namespace {

double clamp01(double x) {
  if (x < 0.0) return 0.0;
  if (x > 1.0) return 1.0;
  return x;
}

// posterior * p11 + (1 - posterior) * p01
double predict(double posterior_free, const TransitionEstimate& est) {
  return clamp01(posterior_free * est.p11 + (1.0 - posterior_free) * est.p01);
}

void check_dims(std::size_t n, const SlotObservation& obs,
                std::span<const TransitionEstimate> estimates,
                std::span<const ChannelSpec> specs, const char* where) {
  if (estimates.size() != n || specs.size() != n) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch");
  }
  if (obs.accessed < 0 || static_cast<std::size_t>(obs.accessed) >= n) {
    throw std::invalid_argument(std::string(where) + ": accessed channel out of range");
  }
  if (obs.sensed && obs.sensed->size() != n) {
    throw std::invalid_argument(std::string(where) + ": sensed vector length mismatch");
  }
}

}  // namespace

PosteriorFactors posterior_factors(double prob_free, double p_fa, double p_md) {
  const double w = clamp01(prob_free);
  PosteriorFactors f{};

  const double num_a = (1.0 - p_fa) * w;
  const double den_a = num_a + p_md * (1.0 - w);
  f.given_sensed_free = den_a > 0.0 ? num_a / den_a : w;

  const double num_c = p_fa * w;
  const double den_c = num_c + (1.0 - p_md) * (1.0 - w);
  f.given_sensed_busy = den_c > 0.0 ? num_c / den_c : 0.0;

  const double num_d = p_fa * w;
  const double den_d = num_d + (1.0 - w);
  f.given_no_ack = den_d > 0.0 ? num_d / den_d : 0.0;

  return f;
}

double propagate_unobserved(double prob_free, double p11, double p01) {
  return clamp01(prob_free * p11 + (1.0 - prob_free) * p01);
}

BeliefVector update_shared_full(const BeliefVector& shared, const SlotObservation& obs,
                                std::span<const TransitionEstimate> shared_estimates,
                                std::span<const ChannelSpec> specs) {
  const std::size_t n = shared.size();
  check_dims(n, obs, shared_estimates, specs, "update_shared_full");
  if (obs.ack && !obs.sensed) {
    throw std::invalid_argument(
        "update_shared_full: ack without sensed vector (it travels inside the packet)");
  }

  BeliefVector next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TransitionEstimate& est = shared_estimates[i];
    if (obs.ack) {
      if (static_cast<int>(i) == obs.accessed) {
        next[i] = clamp01(est.p11);
      } else {
        const PosteriorFactors f = posterior_factors(shared[i], specs[i].p_fa, specs[i].p_md);
        const double post = (*obs.sensed)[i] ? f.given_sensed_free : f.given_sensed_busy;
        next[i] = predict(post, est);
      }
    } else {
      if (static_cast<int>(i) == obs.accessed) {
        const PosteriorFactors f = posterior_factors(shared[i], specs[i].p_fa, specs[i].p_md);
        next[i] = predict(f.given_no_ack, est);
      } else {
        next[i] = propagate_unobserved(shared[i], est.p11, est.p01);
      }
    }
  }
  return next;
}

BeliefVector update_private_full(const BeliefVector& priv, const SlotObservation& obs,
                                 std::span<const TransitionEstimate> local_estimates,
                                 std::span<const ChannelSpec> specs,
                                 const BeliefVector& shared_next) {
  const std::size_t n = priv.size();
  check_dims(n, obs, local_estimates, specs, "update_private_full");
  if (obs.ack) {
    if (shared_next.size() != n) {
      throw std::invalid_argument("update_private_full: shared_next dimension mismatch");
    }
    return shared_next;  // common knowledge caught up; adopt it verbatim
  }
  if (!obs.sensed) {
    throw std::invalid_argument("update_private_full: transmitter sensed vector required");
  }

  BeliefVector next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TransitionEstimate& est = local_estimates[i];
    const PosteriorFactors f = posterior_factors(priv[i], specs[i].p_fa, specs[i].p_md);
    double post;
    if (static_cast<int>(i) == obs.accessed) {
      post = f.given_no_ack;
    } else {
      post = (*obs.sensed)[i] ? f.given_sensed_free : f.given_sensed_busy;
    }
    next[i] = predict(post, est);
  }
  return next;
}

BeliefVector update_shared_single(const BeliefVector& shared, const SlotObservation& obs,
                                  std::span<const TransitionEstimate> shared_estimates,
                                  std::span<const ChannelSpec> specs) {
  const std::size_t n = shared.size();
  check_dims(n, obs, shared_estimates, specs, "update_shared_single");

  BeliefVector next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TransitionEstimate& est = shared_estimates[i];
    if (static_cast<int>(i) == obs.accessed) {
      if (obs.ack) {
        next[i] = clamp01(est.p11);
      } else {
        const PosteriorFactors f = posterior_factors(shared[i], specs[i].p_fa, specs[i].p_md);
        next[i] = predict(f.given_no_ack, est);
      }
    } else {
      next[i] = propagate_unobserved(shared[i], est.p11, est.p01);
    }
  }
  return next;
}

}  // namespace bcmac
