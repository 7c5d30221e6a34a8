#include "bcmac/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bcmac/policies.hpp"

namespace bcmac {

std::string format_csv_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::vector<ProtocolKind> simulated_protocols(const ScenarioConfig& cfg) {
  std::vector<ProtocolKind> protocols;
  for (const RowSpec& row : cfg.rows) {
    if (row.kind == RowSpec::Kind::Protocol) protocols.push_back(row.protocol);
  }
  return protocols;
}

void append_constant_rows(std::string& csv, const std::string& name, double value,
                          const std::vector<std::int64_t>& slots) {
  const std::string formatted = format_csv_value(value);
  for (std::int64_t slot : slots) {
    csv += name;
    csv += ',';
    csv += std::to_string(slot);
    csv += ',';
    csv += formatted;
    csv += '\n';
  }
}

}  // namespace

ExperimentResult run_experiment(const ScenarioConfig& cfg) {
  validate_config(cfg);

  const std::vector<ProtocolKind> protocols = simulated_protocols(cfg);
  const ScenarioSource source = scenario_source(cfg);
  const SimOptions opts = sim_options(cfg);
  const std::vector<std::int64_t> slots =
      cfg.full_curves ? all_sample_slots(cfg.t) : default_sample_slots(cfg.t);

  MonteCarloResult mc;
  if (!protocols.empty()) {
    mc = monte_carlo(protocols, source, cfg.runs, cfg.t, cfg.seed, opts, slots, cfg.threads);
  } else {
    // bound-only configuration: no simulation, just the per-run benchmarks
    mc.slots = slots;
    const bool want_upper = cfg.n <= 20;
    double su = 0.0, so = 0.0, sg = 0.0;
    for (int r = 0; r < cfg.runs; ++r) {
      const std::vector<ChannelSpec> specs = source.realize(cfg.seed, r);
      if (want_upper) {
        mc.per_run_upper_bound.push_back(upper_bound_throughput(specs));
        su += mc.per_run_upper_bound.back();
      }
      mc.per_run_offline_best.push_back(offline_best_throughput(specs).second);
      so += mc.per_run_offline_best.back();
      mc.per_run_iid_genie.push_back(iid_genie_throughput(specs));
      sg += mc.per_run_iid_genie.back();
    }
    mc.upper_bound_mean = want_upper ? su / cfg.runs : 0.0;
    mc.offline_best_mean = so / cfg.runs;
    mc.iid_genie_mean = sg / cfg.runs;
  }

  std::string csv = "protocol,slot,avg_throughput\n";
  std::size_t next_curve = 0;
  for (const RowSpec& row : cfg.rows) {
    switch (row.kind) {
      case RowSpec::Kind::Protocol: {
        const ProtocolCurve& curve = mc.curves[next_curve++];
        for (std::size_t s = 0; s < mc.slots.size(); ++s) {
          csv += curve.name;
          csv += ',';
          csv += std::to_string(mc.slots[s]);
          csv += ',';
          csv += format_csv_value(curve.avg_throughput[s]);
          csv += '\n';
        }
        break;
      }
      case RowSpec::Kind::UpperBound:
        append_constant_rows(csv, row.name(), mc.upper_bound_mean, mc.slots);
        break;
      case RowSpec::Kind::IidGenieBound:
        append_constant_rows(csv, row.name(), mc.iid_genie_mean, mc.slots);
        break;
    }
  }

  // atomic publish: write a sibling temp file, rename into place
  const std::string tmp_path = cfg.output_path + ".tmp";
  try {
    {
      std::ofstream out(tmp_path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write output file: " + tmp_path);
      out << csv;
      if (!out) throw std::runtime_error("write failed: " + tmp_path);
    }
    std::filesystem::rename(tmp_path, cfg.output_path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp_path, ec);
    throw;
  }

  std::ostringstream summary;
  summary << "rows: " << cfg.runs << " runs, t = " << cfg.t << "\n";
  next_curve = 0;
  for (const RowSpec& row : cfg.rows) {
    if (row.kind == RowSpec::Kind::Protocol) {
      const ProtocolCurve& curve = mc.curves[next_curve++];
      summary << "  " << curve.name << " final avg throughput = "
              << format_csv_value(curve.final_mean) << " (stderr "
              << format_csv_value(curve.final_stderr) << ")\n";
    } else {
      const double v =
          row.kind == RowSpec::Kind::UpperBound ? mc.upper_bound_mean : mc.iid_genie_mean;
      summary << "  " << row.name() << " = " << format_csv_value(v) << " (constant)\n";
    }
  }
  if (!mc.per_run_upper_bound.empty()) {
    summary << "  benchmark upper_bound = " << format_csv_value(mc.upper_bound_mean) << "\n";
  }
  summary << "  benchmark offline_best = " << format_csv_value(mc.offline_best_mean) << "\n";

  ExperimentResult result;
  result.mc = std::move(mc);
  result.csv_path = cfg.output_path;
  result.summary = summary.str();
  return result;
}

std::vector<CurveRecord> parse_csv(const std::string& text) {
  std::vector<CurveRecord> records;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "protocol,slot,avg_throughput") {
    throw std::runtime_error("curve file: bad header");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::runtime_error("curve file line " + std::to_string(line_no) + ": bad record");
    }
    CurveRecord rec;
    rec.protocol = line.substr(0, c1);
    rec.slot = std::stoll(line.substr(c1 + 1, c2 - c1 - 1));
    rec.avg_throughput = std::stod(line.substr(c2 + 1));
    records.push_back(std::move(rec));
  }
  return records;
}

std::string bounds_report(const ScenarioConfig& cfg) {
  validate_config(cfg);
  const ScenarioSource source = scenario_source(cfg);

  double upper_sum = 0.0, offline_sum = 0.0;
  bool want_upper = cfg.n <= 20;
  const int draws = source.fixed.empty() ? cfg.runs : 1;
  for (int r = 0; r < draws; ++r) {
    const std::vector<ChannelSpec> specs = source.realize(cfg.seed, r);
    if (want_upper) upper_sum += upper_bound_throughput(specs);
    offline_sum += offline_best_throughput(specs).second;
  }

  std::ostringstream out;
  if (want_upper) {
    out << "upper_bound = " << format_csv_value(upper_sum / draws) << "\n";
  } else {
    out << "upper_bound = unavailable (n > 20)\n";
  }
  out << "offline_best = " << format_csv_value(offline_sum / draws) << "\n";
  if (source.fixed.empty()) {
    out << "(mean over " << draws << " scenario draws)\n";
  }
  return out.str();
}

}  // namespace bcmac
