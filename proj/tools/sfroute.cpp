// sfroute: packet-routing experiments on Barabasi-Albert networks.
//
//   sfroute <gengraph|run|sweep|betac|profile|mft> [--config file] [flags]
//
// Exit status: 0 success, 1 usage or configuration error, 2 runtime error.

#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "sfroute/commands.hpp"
#include "sfroute/config.hpp"

namespace {

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

constexpr Flag kFlags[] = {
    {"--lambda", "lambda", "packet creation rate per unit degree"},
    {"--beta", "beta", "delivery capacity per unit degree"},
    {"--strategy", "strategy", "sp | echenique | adaptive (comma list or 'all' for sweep/betac)"},
    {"--h", "h", "Echenique distance weight"},
    {"--n", "n", "number of nodes"},
    {"--m", "m", "links per new node"},
    {"--m0", "m0", "initial clique size"},
    {"--horizon", "horizon", "simulated steps"},
    {"--transient", "transient", "steps excluded from steady-state statistics"},
    {"--seed", "seed", "base random seed"},
    {"--workers", "workers", "worker threads"},
    {"--out", "out", "output directory"},
    {"--format", "format", "csv | json"},
    {"--lambda-grid", "lambda_grid", "a:b:step or comma list"},
    {"--beta-grid", "beta_grid", "a:b:step or comma list"},
    {"--replicas", "replicas", "replicas per grid point (seeds seed..seed+r-1)"},
    {"--snapshot-steps", "snapshot_steps", "profile steps, e.g. 100,200,300"},
    {"--eps-jam", "eps_jam", "jamming threshold on eta"},
    {"--t-window", "t_window", "window of the delivery-time average"},
    {"--bisect", "bisect", "bisection refinements of beta_c"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packet routing on scale-free networks"};
  app.set_help_flag("--help", "print this help and exit");  // -h would collide with --h
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "flat key=value config file (flags override)");
  std::map<std::string, std::string> values;
  std::vector<std::pair<const Flag*, CLI::Option*>> options;
  for (const Flag& f : kFlags) options.emplace_back(&f, app.add_option(f.name, values[f.key], f.help));

  for (const char* name : {"gengraph", "run", "sweep", "betac", "profile", "mft"}) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  sfroute::ExperimentSpec spec;
  try {
    const auto command = sfroute::parse_command(app.get_subcommands().front()->get_name());
    sfroute::KeyValues file;
    if (!config_path.empty()) file = sfroute::read_config_file(config_path);
    sfroute::KeyValues overrides;
    for (const auto& [flag, opt] : options)
      if (opt->count() > 0) overrides[flag->key] = values[flag->key];
    spec = sfroute::parse_config(command, file, overrides);
  } catch (const sfroute::ConfigError& e) {
    std::cerr << "sfroute: " << e.what() << '\n';
    return 1;
  }

  try {
    std::cout << sfroute::execute(spec).string() << '\n';
  } catch (const sfroute::ConfigError& e) {
    std::cerr << "sfroute: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "sfroute: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
