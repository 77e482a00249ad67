#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfroute/analysis.hpp"
#include "sfroute/config.hpp"
#include "sfroute/dynamics.hpp"
#include "sfroute/graph.hpp"
#include "sfroute/table.hpp"

namespace sfroute {

// Result of one command: a table plus extra descriptive comment lines.
struct CommandOutput {
  std::string basename;
  Table table;
  std::vector<std::string> notes;
};

inline Table metric_series_table(const MetricSeries& series) {
  Table t;
  t.columns = {"step", "mean_packets", "mean_delivery_time", "created", "delivered"};
  for (const auto& r : series.records)
    t.add({r.step, r.mean_packets, r.mean_delivery_time, static_cast<std::int64_t>(r.created),
           static_cast<std::int64_t>(r.delivered)});
  return t;
}

inline CommandOutput cmd_run(const ExperimentSpec& spec) {
  return {"run", metric_series_table(run(spec.cfg)), {}};
}

// eta(lambda, beta) for every requested strategy, rows sorted by (strategy, lambda, beta).
inline CommandOutput cmd_sweep(const ExperimentSpec& spec) {
  const NetworkCache nets(spec.cfg.graph, spec.cfg.seed, spec.replicas, spec.workers);
  CommandOutput out{"sweep", {}, {}};
  out.table.columns = {"lambda", "beta", "strategy", "eta", "eta_sd", "jammed", "mean_delivery_time", "replicas"};
  std::vector<StrategyKind> kinds = spec.strategies;
  std::sort(kinds.begin(), kinds.end(), [](auto a, auto b) { return to_string(a) < to_string(b); });
  for (StrategyKind kind : kinds) {
    SimConfig cfg = spec.cfg;
    cfg.strategy = spec.strategy(kind);
    for (const auto& p : sweep_grid(cfg, spec.lambda_grid, spec.beta_grid, nets, spec.sweep_options()))
      out.table.add({p.lambda, p.beta, std::string(to_string(kind)), p.eta.mean, p.eta.sd,
                     std::int64_t{p.jammed ? 1 : 0}, p.delivery_time, static_cast<std::int64_t>(p.replicas)});
  }
  return out;
}

// Phase boundary per (strategy, lambda). Unbracketed boundaries become NaN rows.
inline CommandOutput cmd_betac(const ExperimentSpec& spec, std::ostream& log = std::cerr) {
  const NetworkCache nets(spec.cfg.graph, spec.cfg.seed, spec.replicas, spec.workers);
  CommandOutput out{"betac", {}, {}};
  out.table.columns = {"lambda", "strategy", "beta_c", "beta_c_err", "eta_threshold", "replicas"};
  std::vector<StrategyKind> kinds = spec.strategies;
  std::sort(kinds.begin(), kinds.end(), [](auto a, auto b) { return to_string(a) < to_string(b); });
  for (StrategyKind kind : kinds)
    for (double lambda : spec.lambda_grid) {
      const CriticalBeta bc =
          find_beta_c(lambda, spec.strategy(kind), spec.cfg, spec.beta_grid, spec.sweep_options(), &nets);
      if (!bc.bracketed()) {
        log << "betac: lambda=" << format_real(lambda) << " strategy=" << to_string(kind)
            << ": boundary not bracketed (" << to_string(bc.status) << ")\n";
        out.notes.push_back("unbracketed lambda=" + format_real(lambda) + " strategy=" +
                            std::string(to_string(kind)) + " status=" + std::string(to_string(bc.status)));
      }
      out.table.add({lambda, std::string(to_string(kind)), bc.beta_c, bc.beta_c_err, spec.eps_jam,
                     static_cast<std::int64_t>(spec.replicas)});
    }
  return out;
}

// Mean queue per degree class at each snapshot step, pooled over replicas.
inline CommandOutput cmd_profile(const ExperimentSpec& spec) {
  if (spec.snapshot_steps.back() > spec.cfg.horizon) throw ConfigError("profile: snapshot step beyond horizon");
  struct Acc {
    double sum = 0.0;
    std::size_t nodes = 0;
  };
  using Key = std::pair<Step, std::size_t>;  // (step, degree)
  auto per_replica = parallel_map(spec.replicas, spec.workers, [&](std::size_t r) {
    SimConfig cfg = spec.cfg;
    cfg.seed = spec.cfg.seed + r;
    cfg.horizon = spec.snapshot_steps.back();
    cfg.transient = std::min(cfg.transient, cfg.horizon);
    std::map<Key, Acc> acc;
    const Network net = build_network(cfg);
    simulate(net, cfg, [&](const StepRecord& rec, const SimState& state, const Network& n) {
      if (!std::binary_search(spec.snapshot_steps.begin(), spec.snapshot_steps.end(), rec.step)) return;
      for (const auto& c : degree_profile(state, n)) {
        auto& a = acc[{rec.step, c.degree}];
        a.sum += c.mean_queue * static_cast<double>(c.count_nodes);
        a.nodes += c.count_nodes;
      }
    });
    return acc;
  });
  std::map<Key, Acc> total;
  for (const auto& acc : per_replica)
    for (const auto& [k, a] : acc) {
      total[k].sum += a.sum;
      total[k].nodes += a.nodes;
    }
  CommandOutput out{"profile", {}, {}};
  out.table.columns = {"degree", "mean_queue", "count_nodes", "step"};
  for (const auto& [k, a] : total)
    out.table.add({static_cast<std::int64_t>(k.second), a.sum / static_cast<double>(a.nodes),
                   static_cast<std::int64_t>(a.nodes), k.first});
  return out;
}

// Mean-field phase boundaries over the lambda grid, with simulated beta_c when
// a beta grid is supplied.
inline CommandOutput cmd_mft(const ExperimentSpec& spec) {
  const NetworkCache nets(spec.cfg.graph, spec.cfg.seed, spec.replicas, spec.workers);
  double diameter = 0.0, k_max = 0.0;
  for (std::size_t r = 0; r < nets.size(); ++r) {
    diameter += nets.replica(r).diameter_avg();
    k_max += static_cast<double>(nets.replica(r).k_max());
  }
  diameter /= static_cast<double>(nets.size());
  k_max /= static_cast<double>(nets.size());

  CommandOutput out{"mft", {}, {}};
  out.notes.push_back("network D=" + format_real(diameter) + " k_max=" + format_real(k_max) +
                      " lambda_min=" + format_real(mf_lambda_min(diameter, k_max)) +
                      " lambda_min_sp=" + format_real(mf_lambda_min_sp(diameter, k_max)));
  out.table.columns = {"lambda", "beta_c_sim", "beta_c_mf", "beta_c_mf_sp"};
  for (double lambda : spec.lambda_grid) {
    double sim = std::numeric_limits<double>::quiet_NaN();
    if (!spec.beta_grid.empty() && lambda > 0.0)
      sim = find_beta_c(lambda, spec.strategy(spec.strategies.front()), spec.cfg, spec.beta_grid,
                        spec.sweep_options(), &nets)
                .beta_c;
    out.table.add({lambda, sim, mf_beta_c(lambda, diameter, k_max), mf_beta_c_sp(lambda, diameter, k_max)});
  }
  return out;
}

inline CommandOutput compute(const ExperimentSpec& spec, std::ostream& log = std::cerr) {
  switch (spec.command) {
    case Command::Run: return cmd_run(spec);
    case Command::Sweep: return cmd_sweep(spec);
    case Command::BetaC: return cmd_betac(spec, log);
    case Command::Profile: return cmd_profile(spec);
    case Command::Mft: return cmd_mft(spec);
    case Command::GenGraph: break;
  }
  throw std::logic_error("compute: command has no tabular output");
}

inline std::vector<std::string> provenance_lines(const ExperimentSpec& spec) {
  return {"sfroute " + std::string(kVersion), to_config_line(spec)};
}

inline void write_output(std::ostream& os, const ExperimentSpec& spec, const CommandOutput& out) {
  if (spec.format == OutputFormat::Csv) {
    auto comments = provenance_lines(spec);
    comments.insert(comments.end(), out.notes.begin(), out.notes.end());
    write_csv(os, out.table, comments);
  } else {
    nlohmann::ordered_json meta;
    meta["generator"] = "sfroute " + std::string(kVersion);
    meta["config"] = to_key_values(spec);
    meta["notes"] = out.notes;
    write_json(os, out.table, std::move(meta));
  }
}

// Reads the configuration back out of a CSV file's provenance header.
inline ExperimentSpec spec_from_csv_header(std::istream& is) {
  std::string line;
  for (int i = 0; i < 2 && std::getline(is, line); ++i) {
    if (line.rfind("# ", 0) != 0) break;
    if (i == 1) {
      const KeyValues kv = parse_key_values(line.substr(2));
      const auto cmd = kv.find("command");
      if (cmd == kv.end()) throw ConfigError("header lacks command");
      return parse_config(parse_command(cmd->second), kv);
    }
  }
  throw ConfigError("no provenance header found");
}

inline void write_gengraph(std::ostream& os, const ExperimentSpec& spec) {
  RngStream rng = network_rng(spec.cfg.seed);
  const Topology g = build_ba_topology(spec.cfg.graph, rng);
  write_edge_list(os, g, {spec.cfg.graph, spec.cfg.seed});
}

// Runs the command and writes its file into spec.output_dir; returns the path.
inline std::filesystem::path execute(const ExperimentSpec& spec, std::ostream& log = std::cerr) {
  std::filesystem::create_directories(spec.output_dir);
  if (spec.command == Command::GenGraph) {
    const auto path = spec.output_dir / "graph.edges";
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    write_gengraph(os, spec);
    if (!os) throw std::runtime_error("write failed: " + path.string());
    return path;
  }
  const CommandOutput out = compute(spec, log);
  const auto path = spec.output_dir / (out.basename + (spec.format == OutputFormat::Csv ? ".csv" : ".json"));
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_output(os, spec, out);
  if (!os) throw std::runtime_error("write failed: " + path.string());
  return path;
}

}  // namespace sfroute
