#ifndef BCMAC_EXPERIMENT_HPP
#define BCMAC_EXPERIMENT_HPP

#include <string>

#include "bcmac/config.hpp"
#include "bcmac/simulator.hpp"

namespace bcmac {

// One parsed curve-file record.
struct CurveRecord {
  std::string protocol;
  std::int64_t slot = 0;
  double avg_throughput = 0.0;

  bool operator==(const CurveRecord&) const = default;
};

struct ExperimentResult {
  MonteCarloResult mc;
  std::string csv_path;
  std::string summary;  // final value per row plus the analytic benchmarks
};

// Runs the configured Monte Carlo comparison and writes the curve file:
// header `protocol,slot,avg_throughput`, one row per (output row, sampled
// slot), LF line endings. Analytic rows repeat their constant at every
// sampled slot. The file appears atomically; nothing is left behind on
// failure. Identical configs produce byte-identical files regardless of the
// thread count.
ExperimentResult run_experiment(const ScenarioConfig& config);

// Curve-file serialization, exposed for round-trip checks.
std::string format_csv_value(double v);
std::vector<CurveRecord> parse_csv(const std::string& text);

// Text block with the analytic benchmarks only (no simulation): the
// full-state genie bound and the best static channel, averaged over the
// configured scenario draws when sampling is in effect.
std::string bounds_report(const ScenarioConfig& config);

}  // namespace bcmac

#endif  // BCMAC_EXPERIMENT_HPP
