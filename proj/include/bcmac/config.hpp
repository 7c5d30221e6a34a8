#ifndef BCMAC_CONFIG_HPP
#define BCMAC_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bcmac/simulator.hpp"

namespace bcmac {

// Configuration / validation failure. Messages carry the offending line or
// field name; the CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One output row of an experiment: a simulated protocol curve or an analytic
// benchmark repeated as a constant.
struct RowSpec {
  enum class Kind { Protocol, UpperBound, IidGenieBound };
  Kind kind = Kind::Protocol;
  ProtocolKind protocol;

  std::string name() const;
  static RowSpec parse(const std::string& token);  // throws ConfigError

  bool operator==(const RowSpec&) const = default;
};

struct ScenarioConfig {
  int n = 5;
  std::int64_t t = 10000;
  int runs = 100;
  std::uint64_t seed = 1;
  int threads = 1;  // 0 = hardware concurrency; result is identical either way
  std::vector<double> bandwidths;                       // empty = all ones
  std::vector<std::pair<double, double>> transitions;   // (p11, p01); empty = sampler
  double sampler_low = 0.1;
  double sampler_high = 0.9;
  bool sampler_iid = false;
  double p_fa = 0.0;
  double p_md = 0.0;
  std::vector<RowSpec> rows;
  double discount = 0.9999;
  int grid_size = 2001;
  std::string initial_states = "stationary";  // stationary | all_free | all_busy | bit list
  bool full_curves = false;                   // record every slot instead of subsampling
  std::string output_path = "curves.csv";

  bool operator==(const ScenarioConfig&) const = default;
};

// Parses a key = value scenario file ('#' comments). Unknown keys, malformed
// values, and out-of-range fields raise ConfigError with the line number or
// field name. Missing optional keys take the defaults above.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text);  // same, from memory

// Canonical serialization; load_config(save_config(c)) == c.
std::string config_to_string(const ScenarioConfig& config);
void save_config(const ScenarioConfig& config, const std::string& path);

void validate_config(const ScenarioConfig& config);  // throws ConfigError

// Derived pieces consumed by the simulator.
ScenarioSource scenario_source(const ScenarioConfig& config);
SimOptions sim_options(const ScenarioConfig& config);

// Ready-made experiment configurations.
//   fig2: genie-aided comparison (bound, full sensing, index, greedy, offline)
//   fig3: blind vs known full sensing
//   fig4: time-independent channels, counting strategies vs genie
//   fig5: learning-period tradeoff for the single-sensing blind protocol
// `scale` in (0,1] multiplies the 1000-run baseline (rounded up).
ScenarioConfig preset(const std::string& figure, double scale);

}  // namespace bcmac

#endif  // BCMAC_CONFIG_HPP
