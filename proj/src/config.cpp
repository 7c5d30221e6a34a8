#include "bcmac/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bcmac {

std::string RowSpec::name() const {
  switch (kind) {
    case Kind::Protocol:
      return protocol.name();
    case Kind::UpperBound:
      return "upper_bound";
    case Kind::IidGenieBound:
      return "iid_genie_bound";
  }
  throw std::logic_error("RowSpec::name: unknown kind");
}

RowSpec RowSpec::parse(const std::string& token) {
  if (token == "upper_bound") return {Kind::UpperBound, {}};
  if (token == "iid_genie_bound") return {Kind::IidGenieBound, {}};
  try {
    return {Kind::Protocol, ProtocolKind::parse(token)};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(trim(current));
  return parts;
}

double parse_double(const std::string& value, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("line " + std::to_string(line) + ": " + key + ": not a number: " + value);
  }
}

std::int64_t parse_int(const std::string& value, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("line " + std::to_string(line) + ": " + key + ": not an integer: " + value);
  }
}

bool parse_bool(const std::string& value, int line, const std::string& key) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("line " + std::to_string(line) + ": " + key + ": expected true/false: " + value);
}

// "(a, b), (c, d), ..." -> pairs
std::vector<std::pair<double, double>> parse_pairs(const std::string& value, int line,
                                                   const std::string& key) {
  std::vector<std::pair<double, double>> pairs;
  std::size_t i = 0;
  const auto fail = [&](const std::string& why) -> void {
    throw ConfigError("line " + std::to_string(line) + ": " + key + ": " + why);
  };
  while (i < value.size()) {
    while (i < value.size() &&
           (std::isspace(static_cast<unsigned char>(value[i])) || value[i] == ',')) {
      ++i;
    }
    if (i >= value.size()) break;
    if (value[i] != '(') fail("expected '(' in pair list");
    const std::size_t close = value.find(')', i);
    if (close == std::string::npos) fail("unbalanced '(' in pair list");
    const std::vector<std::string> nums = split(value.substr(i + 1, close - i - 1), ',');
    if (nums.size() != 2) fail("each pair needs exactly two numbers");
    pairs.emplace_back(parse_double(nums[0], line, key), parse_double(nums[1], line, key));
    i = close + 1;
  }
  if (pairs.empty()) fail("empty pair list");
  return pairs;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  cfg.rows.clear();
  bool saw_sampler = false;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (value.empty()) {
      throw ConfigError("line " + std::to_string(line) + ": " + key + ": empty value");
    }

    if (key == "n") {
      cfg.n = static_cast<int>(parse_int(value, line, key));
    } else if (key == "t") {
      cfg.t = parse_int(value, line, key);
    } else if (key == "runs") {
      cfg.runs = static_cast<int>(parse_int(value, line, key));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(value, line, key));
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_int(value, line, key));
    } else if (key == "bandwidths") {
      cfg.bandwidths.clear();
      for (const std::string& tok : split(value, ',')) {
        cfg.bandwidths.push_back(parse_double(tok, line, key));
      }
    } else if (key == "transitions") {
      cfg.transitions = parse_pairs(value, line, key);
    } else if (key == "sampler") {
      const std::vector<std::string> range = split(value, ',');
      if (range.size() != 2) {
        throw ConfigError("line " + std::to_string(line) + ": sampler: expected low, high");
      }
      cfg.sampler_low = parse_double(range[0], line, key);
      cfg.sampler_high = parse_double(range[1], line, key);
      saw_sampler = true;
    } else if (key == "sampler_iid") {
      cfg.sampler_iid = parse_bool(value, line, key);
    } else if (key == "p_fa") {
      cfg.p_fa = parse_double(value, line, key);
    } else if (key == "p_md") {
      cfg.p_md = parse_double(value, line, key);
    } else if (key == "protocols") {
      for (const std::string& tok : split(value, ',')) {
        try {
          cfg.rows.push_back(RowSpec::parse(tok));
        } catch (const ConfigError& e) {
          throw ConfigError("line " + std::to_string(line) + ": protocols: " +
                            std::string(e.what()));
        }
      }
    } else if (key == "discount") {
      cfg.discount = parse_double(value, line, key);
    } else if (key == "grid_size") {
      cfg.grid_size = static_cast<int>(parse_int(value, line, key));
    } else if (key == "initial_states") {
      cfg.initial_states = value;
    } else if (key == "full_curves") {
      cfg.full_curves = parse_bool(value, line, key);
    } else if (key == "output") {
      cfg.output_path = value;
    } else {
      throw ConfigError("line " + std::to_string(line) + ": unknown key: " + key);
    }
  }

  if (!cfg.transitions.empty() && saw_sampler) {
    throw ConfigError("transitions and sampler are mutually exclusive");
  }
  validate_config(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_string(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << "n = " << cfg.n << "\n";
  out << "t = " << cfg.t << "\n";
  out << "runs = " << cfg.runs << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "threads = " << cfg.threads << "\n";
  if (!cfg.bandwidths.empty()) {
    out << "bandwidths = ";
    for (std::size_t i = 0; i < cfg.bandwidths.size(); ++i) {
      out << (i ? ", " : "") << format_double(cfg.bandwidths[i]);
    }
    out << "\n";
  }
  if (!cfg.transitions.empty()) {
    out << "transitions = ";
    for (std::size_t i = 0; i < cfg.transitions.size(); ++i) {
      out << (i ? ", " : "") << "(" << format_double(cfg.transitions[i].first) << ", "
          << format_double(cfg.transitions[i].second) << ")";
    }
    out << "\n";
  } else {
    out << "sampler = " << format_double(cfg.sampler_low) << ", "
        << format_double(cfg.sampler_high) << "\n";
    out << "sampler_iid = " << (cfg.sampler_iid ? "true" : "false") << "\n";
  }
  out << "p_fa = " << format_double(cfg.p_fa) << "\n";
  out << "p_md = " << format_double(cfg.p_md) << "\n";
  out << "protocols = ";
  for (std::size_t i = 0; i < cfg.rows.size(); ++i) {
    out << (i ? ", " : "") << cfg.rows[i].name();
  }
  out << "\n";
  out << "discount = " << format_double(cfg.discount) << "\n";
  out << "grid_size = " << cfg.grid_size << "\n";
  out << "initial_states = " << cfg.initial_states << "\n";
  out << "full_curves = " << (cfg.full_curves ? "true" : "false") << "\n";
  out << "output = " << cfg.output_path << "\n";
  return out.str();
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << config_to_string(cfg);
}

namespace {

void check_probability_field(double v, const std::string& field) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ConfigError(field + " must be in [0,1], got " + format_double(v));
  }
}

}  // namespace

void validate_config(const ScenarioConfig& cfg) {
  if (cfg.n < 1) throw ConfigError("n must be >= 1");
  if (cfg.t < 1) throw ConfigError("t must be >= 1");
  if (cfg.runs < 1) throw ConfigError("runs must be >= 1");
  if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
  if (!cfg.bandwidths.empty() && static_cast<int>(cfg.bandwidths.size()) != cfg.n) {
    throw ConfigError("bandwidths: expected " + std::to_string(cfg.n) + " entries, got " +
                      std::to_string(cfg.bandwidths.size()));
  }
  for (std::size_t i = 0; i < cfg.bandwidths.size(); ++i) {
    if (!(cfg.bandwidths[i] >= 0.0)) {
      throw ConfigError("bandwidths[" + std::to_string(i) + "] must be >= 0");
    }
  }
  if (!cfg.transitions.empty()) {
    if (static_cast<int>(cfg.transitions.size()) != cfg.n) {
      throw ConfigError("transitions: expected " + std::to_string(cfg.n) + " pairs, got " +
                        std::to_string(cfg.transitions.size()));
    }
    for (std::size_t i = 0; i < cfg.transitions.size(); ++i) {
      const auto& [p11, p01] = cfg.transitions[i];
      check_probability_field(p11, "transitions[" + std::to_string(i) + "].p11");
      check_probability_field(p01, "transitions[" + std::to_string(i) + "].p01");
      if (p11 == 1.0 && p01 == 0.0) {
        throw ConfigError("transitions[" + std::to_string(i) +
                          "]: degenerate chain (p11=1, p01=0)");
      }
    }
  } else {
    if (!(0.0 <= cfg.sampler_low && cfg.sampler_low <= cfg.sampler_high &&
          cfg.sampler_high <= 1.0)) {
      throw ConfigError("sampler: need 0 <= low <= high <= 1");
    }
  }
  check_probability_field(cfg.p_fa, "p_fa");
  check_probability_field(cfg.p_md, "p_md");
  if (cfg.rows.empty()) throw ConfigError("protocols: at least one entry required");
  for (const RowSpec& row : cfg.rows) {
    if (row.kind == RowSpec::Kind::UpperBound && cfg.n > 20) {
      throw ConfigError("upper_bound row requires n <= 20");
    }
    if (row.kind == RowSpec::Kind::Protocol &&
        row.protocol.variant == ProtocolVariant::WhittleBlindLP) {
      if (row.protocol.lp < 1) throw ConfigError("whittle_blind_lp: lp must be >= 1");
      if (static_cast<std::int64_t>(row.protocol.lp) * cfg.n >= cfg.t) {
        throw ConfigError("whittle_blind_lp" + std::to_string(row.protocol.lp) +
                          ": learning period covers the whole horizon (n*lp >= t)");
      }
    }
  }
  if (!(cfg.discount > 0.0 && cfg.discount < 1.0)) {
    throw ConfigError("discount must be in (0,1)");
  }
  if (cfg.grid_size < 101) throw ConfigError("grid_size must be >= 101");
  if (cfg.initial_states != "stationary" && cfg.initial_states != "all_free" &&
      cfg.initial_states != "all_busy") {
    const std::vector<std::string> bits = split(cfg.initial_states, ',');
    if (static_cast<int>(bits.size()) != cfg.n) {
      throw ConfigError("initial_states: expected stationary/all_free/all_busy or " +
                        std::to_string(cfg.n) + " bits");
    }
    for (const std::string& b : bits) {
      if (b != "0" && b != "1") {
        throw ConfigError("initial_states: bits must be 0 or 1, got " + b);
      }
    }
  }
  if (cfg.output_path.empty()) throw ConfigError("output path must not be empty");
}

ScenarioSource scenario_source(const ScenarioConfig& cfg) {
  ScenarioSource source;
  source.n = cfg.n;
  source.bandwidths = cfg.bandwidths.empty() ? std::vector<double>(cfg.n, 1.0) : cfg.bandwidths;
  if (!cfg.transitions.empty()) {
    source.fixed.resize(cfg.n);
    for (int i = 0; i < cfg.n; ++i) {
      source.fixed[i].bandwidth = source.bandwidths[i];
      source.fixed[i].p11 = cfg.transitions[i].first;
      source.fixed[i].p01 = cfg.transitions[i].second;
      source.fixed[i].p_fa = cfg.p_fa;
      source.fixed[i].p_md = cfg.p_md;
    }
  } else {
    source.low = cfg.sampler_low;
    source.high = cfg.sampler_high;
    source.iid = cfg.sampler_iid;
    source.p_fa = cfg.p_fa;
    source.p_md = cfg.p_md;
  }
  return source;
}

SimOptions sim_options(const ScenarioConfig& cfg) {
  SimOptions opts;
  opts.discount = cfg.discount;
  opts.index_grid_size = cfg.grid_size;
  if (cfg.initial_states == "stationary") {
    opts.initial_mode = InitialStateMode::Stationary;
  } else if (cfg.initial_states == "all_free") {
    opts.initial_mode = InitialStateMode::AllFree;
  } else if (cfg.initial_states == "all_busy") {
    opts.initial_mode = InitialStateMode::AllBusy;
  } else {
    opts.initial_mode = InitialStateMode::Explicit;
    for (const std::string& b : split(cfg.initial_states, ',')) {
      opts.initial_states.push_back(b == "1" ? 1 : 0);
    }
  }
  return opts;
}

ScenarioConfig preset(const std::string& figure, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw ConfigError("preset scale must be in (0,1]");
  ScenarioConfig cfg;
  cfg.n = 5;
  cfg.runs = static_cast<int>(std::ceil(1000.0 * scale));
  cfg.seed = 1;
  cfg.threads = 0;
  cfg.sampler_low = 0.1;
  cfg.sampler_high = 0.9;
  cfg.p_fa = 0.0;
  cfg.p_md = 0.0;
  cfg.discount = 0.9999;
  cfg.grid_size = 2001;
  cfg.rows.clear();

  const auto proto = [](const std::string& token) { return RowSpec::parse(token); };
  if (figure == "fig2") {
    cfg.t = 10000;
    cfg.rows = {proto("upper_bound"), proto("full_sensing_known"), proto("whittle_known"),
                proto("greedy_known_l1"), proto("offline_best")};
  } else if (figure == "fig3") {
    cfg.t = 10000;
    cfg.rows = {proto("full_sensing_blind"), proto("full_sensing_known")};
  } else if (figure == "fig4") {
    cfg.t = 10000;
    cfg.sampler_iid = true;
    cfg.rows = {proto("iid_counting_blind"), proto("full_sensing_blind"),
                proto("iid_genie_bound")};
  } else if (figure == "fig5") {
    cfg.t = 100000;
    cfg.rows = {proto("whittle_blind_lp20"), proto("whittle_blind_lp200"),
                proto("whittle_known")};
  } else {
    throw ConfigError("unknown preset figure: " + figure + " (expected fig2..fig5)");
  }
  cfg.output_path = figure + ".csv";
  validate_config(cfg);
  return cfg;
}

}  // namespace bcmac
