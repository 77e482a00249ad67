#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sfroute/analysis.hpp"
#include "sfroute/dynamics.hpp"
#include "sfroute/table.hpp"

namespace sfroute {

inline constexpr std::string_view kVersion = "0.1.0";

// Bad user input: unknown keys, malformed or out-of-range values, missing grids.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { Run, Sweep, BetaC, Profile, Mft, GenGraph };

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::Run: return "run";
    case Command::Sweep: return "sweep";
    case Command::BetaC: return "betac";
    case Command::Profile: return "profile";
    case Command::Mft: return "mft";
    case Command::GenGraph: return "gengraph";
  }
  return "?";
}

inline Command parse_command(std::string_view s) {
  for (Command c : {Command::Run, Command::Sweep, Command::BetaC, Command::Profile, Command::Mft, Command::GenGraph})
    if (s == to_string(c)) return c;
  throw ConfigError("unknown command: " + std::string(s));
}

struct ExperimentSpec {
  Command command = Command::Run;
  SimConfig cfg;
  std::vector<StrategyKind> strategies{StrategyKind::AdaptiveProjected};
  std::vector<double> lambda_grid;
  std::vector<double> beta_grid;
  std::vector<Step> snapshot_steps{100, 200, 300};
  std::size_t replicas = 3;
  std::size_t bisect = 0;
  double eps_jam = kDefaultJamThreshold;
  std::filesystem::path output_dir = ".";
  OutputFormat format = OutputFormat::Csv;
  std::size_t workers = 1;

  SweepOptions sweep_options() const { return {replicas, eps_jam, workers, bisect}; }
  Strategy strategy(StrategyKind k) const { return {k, cfg.strategy.h}; }
};

// Keys are case-insensitive and treat '-' and '_' alike.
using KeyValues = std::map<std::string, std::string>;

inline std::string normalize_key(std::string_view key) {
  std::string out(key);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == '-') c = '_';
  }
  return out;
}

// Whitespace-separated key=value tokens; '#' starts a comment.
inline KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + tok + "'");
      kv[normalize_key(tok.substr(0, eq))] = tok.substr(eq + 1);
    }
  }
  return kv;
}

inline KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

namespace detail {

inline double to_real(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError(key + ": not a finite number: '" + v + "'");
  return x;
}

inline std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t x = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return x;
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(key + ": not a non-negative integer: '" + v + "'");
  return x;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(item);
  return out;
}

}  // namespace detail

// "a:b:step" (inclusive of b up to rounding), "x1,x2,...", or a single value.
inline std::vector<double> parse_grid(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = detail::split(text, ':');
    if (parts.size() != 3) throw ConfigError(key + ": grid must be a:b:step");
    const double a = detail::to_real(key, parts[0]);
    const double b = detail::to_real(key, parts[1]);
    const double step = detail::to_real(key, parts[2]);
    if (!(step > 0.0) || b < a) throw ConfigError(key + ": grid needs step > 0 and b >= a");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    if (count > 100000) throw ConfigError(key + ": grid too large");
    for (std::size_t i = 0; i < count; ++i) {
      // Round away accumulated binary noise so 0.1*3 prints as 0.3.
      const double v = a + static_cast<double>(i) * step;
      out.push_back(std::round(v * 1e12) / 1e12);
    }
  } else {
    for (const auto& p : detail::split(text, ','))
      if (!p.empty()) out.push_back(detail::to_real(key, p));
  }
  if (out.empty()) throw ConfigError(key + ": empty grid");
  if (!std::is_sorted(out.begin(), out.end())) throw ConfigError(key + ": grid must be ascending");
  return out;
}

// Merges file values with overrides (overrides win) and validates the result.
inline ExperimentSpec parse_config(Command command, const KeyValues& file, const KeyValues& overrides = {}) {
  KeyValues kv;
  for (const auto& [k, v] : file) kv[normalize_key(k)] = v;
  for (const auto& [k, v] : overrides) kv[normalize_key(k)] = v;

  ExperimentSpec spec;
  spec.command = command;
  if (auto it = kv.find("command"); it != kv.end()) {
    if (parse_command(it->second) != command)
      throw ConfigError("config is for command '" + it->second + "', not '" + std::string(to_string(command)) + "'");
    kv.erase(it);
  }

  auto& cfg = spec.cfg;
  bool transient_set = false;
  for (const auto& [key, value] : kv) {
    using namespace detail;
    if (key == "n") {
      cfg.graph.n = to_uint(key, value);
    } else if (key == "m") {
      cfg.graph.m = to_uint(key, value);
    } else if (key == "m0") {
      cfg.graph.m0 = to_uint(key, value);
    } else if (key == "lambda") {
      cfg.lambda = to_real(key, value);
    } else if (key == "beta") {
      cfg.beta = to_real(key, value);
    } else if (key == "h") {
      cfg.strategy.h = to_real(key, value);
    } else if (key == "strategy") {
      spec.strategies.clear();
      const std::vector<std::string> names =
          value == "all" ? std::vector<std::string>{"adaptive", "echenique", "sp"} : split(value, ',');
      try {
        for (const auto& name : names) spec.strategies.push_back(parse_strategy_kind(name));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      if (spec.strategies.empty()) throw ConfigError("strategy: empty");
    } else if (key == "horizon") {
      cfg.horizon = to_int(key, value);
    } else if (key == "transient") {
      cfg.transient = to_int(key, value);
      transient_set = true;
    } else if (key == "seed") {
      cfg.seed = to_uint(key, value);
    } else if (key == "t_window") {
      cfg.t_window = to_int(key, value);
    } else if (key == "workers") {
      spec.workers = to_uint(key, value);
    } else if (key == "replicas") {
      spec.replicas = to_uint(key, value);
    } else if (key == "bisect") {
      spec.bisect = to_uint(key, value);
    } else if (key == "eps_jam") {
      spec.eps_jam = to_real(key, value);
    } else if (key == "out") {
      spec.output_dir = value;
    } else if (key == "format") {
      if (value == "csv") spec.format = OutputFormat::Csv;
      else if (value == "json") spec.format = OutputFormat::Json;
      else throw ConfigError("format: expected csv or json, got '" + value + "'");
    } else if (key == "lambda_grid") {
      spec.lambda_grid = parse_grid(key, value);
    } else if (key == "beta_grid") {
      spec.beta_grid = parse_grid(key, value);
    } else if (key == "snapshot_steps") {
      spec.snapshot_steps.clear();
      for (const auto& s : split(value, ','))
        if (!s.empty()) spec.snapshot_steps.push_back(to_int(key, s));
      std::sort(spec.snapshot_steps.begin(), spec.snapshot_steps.end());
      spec.snapshot_steps.erase(std::unique(spec.snapshot_steps.begin(), spec.snapshot_steps.end()),
                                spec.snapshot_steps.end());
    } else {
      throw ConfigError("unknown key: " + key);
    }
  }
  if (!transient_set) cfg.transient = cfg.horizon / 5;
  cfg.strategy.kind = spec.strategies.front();

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (spec.workers < 1) throw ConfigError("workers must be >= 1");
  if (spec.replicas < 1) throw ConfigError("replicas must be >= 1");
  if (!(spec.eps_jam >= 0.0)) throw ConfigError("eps_jam must be >= 0");
  for (double l : spec.lambda_grid)
    if (l < 0.0) throw ConfigError("lambda_grid: values must be >= 0");
  for (double b : spec.beta_grid)
    if (b < 0.0) throw ConfigError("beta_grid: values must be >= 0");
  for (Step s : spec.snapshot_steps)
    if (s < 1) throw ConfigError("snapshot_steps: steps must be >= 1");

  const bool analysis = command == Command::Sweep || command == Command::BetaC;
  if (analysis) {
    if (spec.lambda_grid.empty()) throw ConfigError(std::string(to_string(command)) + " needs lambda_grid");
    if (spec.beta_grid.empty()) throw ConfigError(std::string(to_string(command)) + " needs beta_grid");
    for (double l : spec.lambda_grid)
      if (!(l > 0.0)) throw ConfigError("lambda_grid: eta is undefined at lambda = 0");
    if (cfg.horizon <= 2 * cfg.transient || cfg.horizon - cfg.transient < 4)
      throw ConfigError("horizon must exceed 2*transient for eta estimation");
  }
  if (command == Command::Mft && spec.lambda_grid.empty()) throw ConfigError("mft needs lambda_grid");
  if (command == Command::Profile && spec.snapshot_steps.empty()) throw ConfigError("profile needs snapshot_steps");
  return spec;
}

inline std::string join_reals(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_real(v[i]);
  return out;
}

// Every setting that shapes the output, in a form parse_config reads back.
inline KeyValues to_key_values(const ExperimentSpec& spec) {
  KeyValues kv;
  const auto& cfg = spec.cfg;
  kv["command"] = std::string(to_string(spec.command));
  kv["n"] = std::to_string(cfg.graph.n);
  kv["m"] = std::to_string(cfg.graph.m);
  kv["m0"] = std::to_string(cfg.graph.m0);
  kv["lambda"] = format_real(cfg.lambda);
  kv["beta"] = format_real(cfg.beta);
  std::string strategies;
  for (std::size_t i = 0; i < spec.strategies.size(); ++i)
    strategies += (i ? "," : "") + std::string(to_string(spec.strategies[i]));
  kv["strategy"] = strategies;
  kv["h"] = format_real(cfg.strategy.h);
  kv["horizon"] = std::to_string(cfg.horizon);
  kv["transient"] = std::to_string(cfg.transient);
  kv["seed"] = std::to_string(cfg.seed);
  kv["t_window"] = std::to_string(cfg.t_window);
  kv["replicas"] = std::to_string(spec.replicas);
  kv["bisect"] = std::to_string(spec.bisect);
  kv["eps_jam"] = format_real(spec.eps_jam);
  if (!spec.lambda_grid.empty()) kv["lambda_grid"] = join_reals(spec.lambda_grid);
  if (!spec.beta_grid.empty()) kv["beta_grid"] = join_reals(spec.beta_grid);
  std::string snaps;
  for (std::size_t i = 0; i < spec.snapshot_steps.size(); ++i)
    snaps += (i ? "," : "") + std::to_string(spec.snapshot_steps[i]);
  if (!snaps.empty()) kv["snapshot_steps"] = snaps;
  kv["format"] = spec.format == OutputFormat::Json ? "json" : "csv";
  return kv;
}

// command first, remaining keys in lexicographic order.
inline std::string to_config_line(const ExperimentSpec& spec) {
  std::string line = "command=" + std::string(to_string(spec.command));
  for (const auto& [k, v] : to_key_values(spec))
    if (k != "command") line += " " + k + "=" + v;
  return line;
}

}  // namespace sfroute
