#ifndef BCMAC_WHITTLE_HPP
#define BCMAC_WHITTLE_HPP

#include <cstdint>
#include <vector>

namespace bcmac {

// One restless arm: a two-state Markov channel viewed through its belief
// (probability of being free at the slot start). Activating the arm senses
// and, if free, earns `bandwidth`; idling earns the subsidy under test.
struct ArmModel {
  double p11 = 0.5;
  double p01 = 0.5;
  double bandwidth = 1.0;
  double discount = 0.9999;  // strictly < 1
};

void validate_arm(const ArmModel& arm);

// Subsidy at which activating and idling are equally attractive at belief
// `prob_free`, computed exactly from the threshold structure of the
// subsidized single-arm problem: under a threshold policy the idle belief
// trajectory is a deterministic affine orbit, so the value function is fixed
// by the first passage of that orbit above the threshold plus a 2x2 linear
// solve. No discretization is involved; cost is the orbit length (typically
// tens of steps). Nondecreasing in prob_free, scales linearly with bandwidth,
// and lies in [0, bandwidth].
double whittle_index(double prob_free, const ArmModel& arm);

// Precomputed index values on a uniform belief grid with linear
// interpolation, for fixed-parameter arms where per-slot O(1) lookup matters.
struct IndexTable {
  std::vector<double> grid;    // strictly increasing, uniform over [0, 1]
  std::vector<double> values;  // same length

  double lookup(double prob_free) const;
};

IndexTable build_index_table(const ArmModel& arm, int grid_size);

// Discretized solution of the subsidized single-arm problem, used as an
// independent oracle for whittle_index. Solves
//   V(w) = max{ subsidy + beta*V(tau(w)),
//               w*B + beta*[w*V(p11) + (1-w)*V(p01)] }
// by value iteration on a uniform grid with linear interpolation for
// off-grid evaluations. Ties resolve to active.
struct ValueIterationResult {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<std::uint8_t> active;  // 1 where the active action attains the max
  double residual = 0.0;             // final sup-norm change
  int iterations = 0;
  bool converged = false;
};

ValueIterationResult value_iteration(const ArmModel& arm, double subsidy, int grid_size,
                                     double tol = 1e-9, int max_iter = 200000);

// Bisection on the subsidy, re-solving the discretized problem each step,
// until active and passive values at `prob_free` cross. Slow; intended for
// validating whittle_index at moderate discounts.
double whittle_index_by_bisection(const ArmModel& arm, double prob_free, int grid_size,
                                  double vi_tol = 1e-9, double subsidy_tol = 1e-5);

}  // namespace bcmac

#endif  // BCMAC_WHITTLE_HPP
