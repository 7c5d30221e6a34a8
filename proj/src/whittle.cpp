#include "bcmac/whittle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bcmac {

void validate_arm(const ArmModel& arm) {
  if (!(arm.p11 >= 0.0 && arm.p11 <= 1.0 && arm.p01 >= 0.0 && arm.p01 <= 1.0)) {
    throw std::invalid_argument("ArmModel: transition probabilities must be in [0,1]");
  }
  if (!(arm.bandwidth >= 0.0)) {
    throw std::invalid_argument("ArmModel: bandwidth must be >= 0");
  }
  if (!(arm.discount > 0.0 && arm.discount < 1.0)) {
    throw std::invalid_argument("ArmModel: discount must be in (0,1)");
  }
}

namespace {

using real = long double;  // extra headroom keeps the index numerically monotone

struct Passage {
  bool never = false;
  std::int64_t steps = 0;
  real arrival = 0.0;  // belief at which the policy turns active
};

// Idle-belief orbit b, tau(b), tau^2(b), ... with tau(b) = p01 + b*(p11-p01).
// Returns the first step strictly above the threshold. The orbit contracts
// towards its fixed point (|p11-p01| < 1) or cycles with period 2
// (p11-p01 = -1); either way a numerically stationary orbit below the
// threshold never crosses it.
Passage first_passage(real b, real threshold, real p11, real p01) {
  constexpr std::int64_t kMaxSteps = 200000;
  real before_prev = -2.0;  // belief two steps back, for 2-cycle detection
  for (std::int64_t k = 0; k <= kMaxSteps; ++k) {
    if (b > threshold) return {false, k, b};
    const real bn = p01 + b * (p11 - p01);
    if (bn == b || bn == before_prev) return {true, 0, 0.0};  // fixed point or 2-cycle
    before_prev = b;
    b = bn;
  }
  // Orbit still moving after the cap: the discounted tail is negligible for
  // any discount strictly below 1 at this depth.
  return {true, 0, 0.0};
}

// Discounted-value building blocks, all affine in (subsidy, bandwidth).
struct Affine {
  real subsidy = 0.0;
  real bandwidth = 0.0;
};

struct ThresholdSolver {
  real beta, log_beta, p11, p01;
  Affine v11, v01;  // values at beliefs p11 and p01 under the threshold policy

  real pow_beta(std::int64_t k) const {
    return k == 0 ? real(1) : std::exp(static_cast<real>(k) * log_beta);
  }
  // (1 - beta^k) / (1 - beta), accurate for beta near 1
  real idle_weight(std::int64_t k) const {
    return -std::expm1(static_cast<real>(k) * log_beta) / (real(1) - beta);
  }
};

// Value of starting the slot at belief b under the threshold policy, as an
// affine form lambda*coef.subsidy + B*coef.bandwidth, given the affine forms
// for V(p11) and V(p01).
Affine start_value(const ThresholdSolver& s, const Passage& p) {
  if (p.never) return {real(1) / (real(1) - s.beta), real(0)};
  const real bk = s.pow_beta(p.steps);
  const real x = p.arrival;
  Affine a;
  a.subsidy = s.idle_weight(p.steps) +
              bk * s.beta * (x * s.v11.subsidy + (real(1) - x) * s.v01.subsidy);
  a.bandwidth = bk * x + bk * s.beta * (x * s.v11.bandwidth + (real(1) - x) * s.v01.bandwidth);
  return a;
}

}  // namespace

double whittle_index(double prob_free, const ArmModel& arm) {
  validate_arm(arm);
  if (!(prob_free >= 0.0 && prob_free <= 1.0)) {
    throw std::invalid_argument("whittle_index: belief must be in [0,1]");
  }

  ThresholdSolver s;
  s.beta = static_cast<real>(arm.discount);
  s.log_beta = std::log(s.beta);
  s.p11 = static_cast<real>(arm.p11);
  s.p01 = static_cast<real>(arm.p01);
  const real w = static_cast<real>(prob_free);

  // Under the candidate policy "activate iff belief > w", the value function
  // is pinned down by V(p11) and V(p01): every activation lands the belief on
  // one of them, and idle stretches in between are deterministic.
  const Passage from_p11 = first_passage(s.p11, w, s.p11, s.p01);
  const Passage from_p01 = first_passage(s.p01, w, s.p11, s.p01);

  // V11 = c.subsidy*lambda + c.bandwidth*B + m11*V11 + m10*V01 (and same for
  // V01); solve the 2x2 system for the subsidy and bandwidth parts separately.
  real c[2][2];   // rows: v11, v01; cols: subsidy, bandwidth
  real m[2][2];   // coupling back onto (V11, V01)
  const Passage* starts[2] = {&from_p11, &from_p01};
  for (int r = 0; r < 2; ++r) {
    const Passage& p = *starts[r];
    if (p.never) {
      c[r][0] = real(1) / (real(1) - s.beta);
      c[r][1] = 0.0;
      m[r][0] = m[r][1] = 0.0;
    } else {
      const real bk = s.pow_beta(p.steps);
      c[r][0] = s.idle_weight(p.steps);
      c[r][1] = bk * p.arrival;
      m[r][0] = bk * s.beta * p.arrival;
      m[r][1] = bk * s.beta * (real(1) - p.arrival);
    }
  }
  const real a11 = real(1) - m[0][0], a12 = -m[0][1];
  const real a21 = -m[1][0], a22 = real(1) - m[1][1];
  const real det = a11 * a22 - a12 * a21;  // > 0: coupling has spectral radius <= beta < 1
  s.v11.subsidy = (c[0][0] * a22 - c[1][0] * a12) / det;
  s.v01.subsidy = (c[1][0] * a11 - c[0][0] * a21) / det;
  s.v11.bandwidth = (c[0][1] * a22 - c[1][1] * a12) / det;
  s.v01.bandwidth = (c[1][1] * a11 - c[0][1] * a21) / det;

  // Indifference at w: subsidy-now + discounted idle continuation equals the
  // activation value. Both sides are affine in (lambda, B); solve for lambda.
  const real tau_w = s.p01 + w * (s.p11 - s.p01);
  const Affine cont = start_value(s, first_passage(tau_w, w, s.p11, s.p01));
  const real passive_l = real(1) + s.beta * cont.subsidy;
  const real passive_b = s.beta * cont.bandwidth;
  const real active_l = s.beta * (w * s.v11.subsidy + (real(1) - w) * s.v01.subsidy);
  const real active_b = w + s.beta * (w * s.v11.bandwidth + (real(1) - w) * s.v01.bandwidth);

  const real denom = passive_l - active_l;
  if (!(denom > 0.0)) {
    throw std::logic_error("whittle_index: ill-posed indifference equation");
  }
  const real B = static_cast<real>(arm.bandwidth);
  real lambda = B * (active_b - passive_b) / denom;

  // Scrub floating-point dust off the analytic range [0, B].
  const real slack = real(1e-9) * std::max(real(1), B);
  if (lambda < -slack || lambda > B + slack) {
    throw std::logic_error("whittle_index: result escaped [0, bandwidth]");
  }
  lambda = std::clamp(lambda, real(0), B);
  return static_cast<double>(lambda);
}

double IndexTable::lookup(double prob_free) const {
  const std::size_t n = grid.size();
  if (n < 2 || values.size() != n) {
    throw std::logic_error("IndexTable: not built");
  }
  const double w = std::clamp(prob_free, 0.0, 1.0);
  const double pos = w * static_cast<double>(n - 1);
  const std::size_t lo = std::min(static_cast<std::size_t>(pos), n - 2);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

IndexTable build_index_table(const ArmModel& arm, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("build_index_table: grid_size must be >= 2");
  IndexTable table;
  table.grid.resize(grid_size);
  table.values.resize(grid_size);
  for (int k = 0; k < grid_size; ++k) {
    const double w = static_cast<double>(k) / static_cast<double>(grid_size - 1);
    table.grid[k] = w;
    table.values[k] = whittle_index(w, arm);
  }
  return table;
}

namespace {

double interp(const std::vector<double>& values, double w) {
  const std::size_t n = values.size();
  const double pos = std::clamp(w, 0.0, 1.0) * static_cast<double>(n - 1);
  const std::size_t lo = std::min(static_cast<std::size_t>(pos), n - 2);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace

ValueIterationResult value_iteration(const ArmModel& arm, double subsidy, int grid_size,
                                     double tol, int max_iter) {
  validate_arm(arm);
  if (grid_size < 101) throw std::invalid_argument("value_iteration: grid_size must be >= 101");

  ValueIterationResult res;
  res.grid.resize(grid_size);
  for (int k = 0; k < grid_size; ++k) {
    res.grid[k] = static_cast<double>(k) / static_cast<double>(grid_size - 1);
  }
  res.values.assign(grid_size, 0.0);
  res.active.assign(grid_size, 0);

  const double beta = arm.discount;
  const double B = arm.bandwidth;
  std::vector<double> next(grid_size);
  for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
    const double v_p11 = interp(res.values, arm.p11);
    const double v_p01 = interp(res.values, arm.p01);
    double sup = 0.0;
    for (int k = 0; k < grid_size; ++k) {
      const double w = res.grid[k];
      const double tau = arm.p01 + w * (arm.p11 - arm.p01);
      const double passive = subsidy + beta * interp(res.values, tau);
      const double active = w * B + beta * (w * v_p11 + (1.0 - w) * v_p01);
      next[k] = std::max(passive, active);
      res.active[k] = active >= passive ? 1 : 0;  // ties go active
      sup = std::max(sup, std::abs(next[k] - res.values[k]));
    }
    res.values.swap(next);
    res.residual = sup;
    if (sup <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

double whittle_index_by_bisection(const ArmModel& arm, double prob_free, int grid_size,
                                  double vi_tol, double subsidy_tol) {
  validate_arm(arm);
  const double w = std::clamp(prob_free, 0.0, 1.0);
  const double beta = arm.discount;
  const double B = arm.bandwidth;

  // active-minus-passive preference at w for a given subsidy, from a fully
  // solved value function. The previous solution seeds the next solve, which
  // cuts iteration counts drastically across bisection steps.
  ValueIterationResult vi;
  bool have_vi = false;
  auto preference = [&](double subsidy) {
    if (!have_vi) {
      vi = value_iteration(arm, subsidy, grid_size, vi_tol);
      have_vi = true;
    } else {
      const int n = static_cast<int>(vi.grid.size());
      std::vector<double> next(n);
      double sup;
      int iters = 0;
      do {
        const double v_p11 = interp(vi.values, arm.p11);
        const double v_p01 = interp(vi.values, arm.p01);
        sup = 0.0;
        for (int k = 0; k < n; ++k) {
          const double g = vi.grid[k];
          const double tau = arm.p01 + g * (arm.p11 - arm.p01);
          const double passive = subsidy + beta * interp(vi.values, tau);
          const double active = g * B + beta * (g * v_p11 + (1.0 - g) * v_p01);
          next[k] = std::max(passive, active);
          sup = std::max(sup, std::abs(next[k] - vi.values[k]));
        }
        vi.values.swap(next);
      } while (sup > vi_tol && ++iters < 200000);
    }
    const double v_p11 = interp(vi.values, arm.p11);
    const double v_p01 = interp(vi.values, arm.p01);
    const double tau = arm.p01 + w * (arm.p11 - arm.p01);
    const double passive = subsidy + beta * interp(vi.values, tau);
    const double active = w * B + beta * (w * v_p11 + (1.0 - w) * v_p01);
    return active - passive;
  };

  double lo = 0.0, hi = B;
  if (preference(lo) <= 0.0) return 0.0;
  if (preference(hi) >= 0.0) return B;
  while (hi - lo > subsidy_tol) {
    const double mid = 0.5 * (lo + hi);
    if (preference(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace bcmac
