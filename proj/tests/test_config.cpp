#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sfroute/commands.hpp"
#include "sfroute/config.hpp"

using namespace sfroute;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("sfroute_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string to_csv(const ExperimentSpec& spec) {
  std::ostringstream os;
  std::ostringstream log;
  write_output(os, spec, compute(spec, log));
  return os.str();
}

}  // namespace

TEST(ParseConfig, EmptyGivesDefaults) {
  const auto spec = parse_config(Command::Run, {});
  EXPECT_EQ(spec.cfg.graph.n, 1000u);
  EXPECT_EQ(spec.cfg.graph.m, 3u);
  EXPECT_EQ(spec.cfg.graph.m0, 3u);
  EXPECT_EQ(spec.cfg.strategy.h, 0.8);
  EXPECT_EQ(spec.cfg.horizon, 3000);
  EXPECT_EQ(spec.cfg.transient, 600);
  EXPECT_EQ(spec.eps_jam, 0.01);
  EXPECT_EQ(spec.cfg.t_window, 10);
  EXPECT_EQ(spec.workers, 1u);
  EXPECT_EQ(spec.format, OutputFormat::Csv);
}

TEST(ParseConfig, RateCapacityStrategy) {
  const auto spec = parse_config(Command::Run, parse_key_values("lambda=0.02 beta=0.07 strategy=adaptive"));
  EXPECT_EQ(spec.cfg.lambda, 0.02);
  EXPECT_EQ(spec.cfg.beta, 0.07);
  EXPECT_EQ(spec.cfg.strategy.kind, StrategyKind::AdaptiveProjected);
}

TEST(ParseConfig, RejectsBadInput) {
  EXPECT_THROW(parse_config(Command::Run, parse_key_values("m=4 m0=3")), ConfigError);
  EXPECT_THROW(parse_config(Command::Run, parse_key_values("colour=blue")), ConfigError);
  EXPECT_THROW(parse_config(Command::Run, parse_key_values("lambda=abc")), ConfigError);
  EXPECT_THROW(parse_config(Command::Run, parse_key_values("h=1.2")), ConfigError);
  EXPECT_THROW(parse_config(Command::Run, parse_key_values("strategy=flood")), ConfigError);
  EXPECT_THROW(parse_config(Command::Run, parse_key_values("workers=0")), ConfigError);
  EXPECT_THROW(parse_config(Command::Run, parse_key_values("format=xml")), ConfigError);
  EXPECT_THROW(parse_key_values("lambda"), ConfigError);
  EXPECT_THROW(parse_config(Command::Sweep, parse_key_values("beta_grid=0:0.1:0.05")), ConfigError);
  EXPECT_THROW(parse_config(Command::BetaC, parse_key_values("lambda_grid=0.02")), ConfigError);
  EXPECT_THROW(parse_config(Command::Mft, {}), ConfigError);
  EXPECT_THROW(parse_config(Command::Run, parse_key_values("command=sweep")), ConfigError);
}

TEST(ParseConfig, OverridesWinAndKeysNormalise) {
  const auto file = parse_key_values("# preset\nlambda=0.01\nbeta=0.2 # trailing\nlambda-grid=0.01:0.03:0.01\n");
  const auto spec = parse_config(Command::Sweep, file, {{"lambda", "0.03"}, {"beta-grid", "0,0.1"}});
  EXPECT_EQ(spec.cfg.lambda, 0.03);
  EXPECT_EQ(spec.cfg.beta, 0.2);
  EXPECT_EQ(spec.lambda_grid, (std::vector<double>{0.01, 0.02, 0.03}));
  EXPECT_EQ(spec.beta_grid, (std::vector<double>{0.0, 0.1}));
}

TEST(ParseConfig, TransientDefaultsToFifthOfHorizon) {
  EXPECT_EQ(parse_config(Command::Run, parse_key_values("horizon=500")).cfg.transient, 100);
  EXPECT_EQ(parse_config(Command::Run, parse_key_values("horizon=500 transient=7")).cfg.transient, 7);
  EXPECT_THROW(parse_config(Command::Run, parse_key_values("horizon=500 transient=501")), ConfigError);
}

TEST(ParseConfig, StrategyLists) {
  const auto spec = parse_config(Command::Run, parse_key_values("strategy=all"));
  EXPECT_EQ(spec.strategies.size(), 3u);
  const auto two = parse_config(Command::Run, parse_key_values("strategy=sp,echenique h=0.85"));
  EXPECT_EQ(two.strategies, (std::vector<StrategyKind>{StrategyKind::ShortestPath, StrategyKind::Echenique}));
  EXPECT_EQ(two.strategy(StrategyKind::Echenique).h, 0.85);
}

TEST(ParseGrid, Forms) {
  EXPECT_EQ(parse_grid("g", "0:0.3:0.1"), (std::vector<double>{0.0, 0.1, 0.2, 0.3}));
  EXPECT_EQ(parse_grid("g", "0.04,0.048,0.07"), (std::vector<double>{0.04, 0.048, 0.07}));
  EXPECT_EQ(parse_grid("g", "0.5"), (std::vector<double>{0.5}));
  EXPECT_EQ(parse_grid("g", "0:0.1:0.03").size(), 4u);
  EXPECT_THROW(parse_grid("g", "0:1"), ConfigError);
  EXPECT_THROW(parse_grid("g", "1:0:0.1"), ConfigError);
  EXPECT_THROW(parse_grid("g", "0:1:0"), ConfigError);
  EXPECT_THROW(parse_grid("g", "0.2,0.1"), ConfigError);
}

TEST(SpecRoundTrip, KeyValuesParseBack) {
  const auto spec = parse_config(Command::BetaC,
                                 parse_key_values("lambda_grid=0.015,0.02 beta_grid=0:0.1:0.01 strategy=all "
                                                  "replicas=4 bisect=2 seed=9 h=0.85 eps_jam=0.02"));
  const auto back = parse_config(Command::BetaC, to_key_values(spec));
  EXPECT_EQ(to_config_line(back), to_config_line(spec));
  EXPECT_EQ(back.beta_grid, spec.beta_grid);
  EXPECT_EQ(back.cfg.strategy.h, 0.85);
}

TEST(Commands, RunWithZeroHorizonIsHeaderOnly) {
  const auto spec = parse_config(Command::Run, parse_key_values("horizon=0 n=50"));
  const std::string csv = to_csv(spec);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# sfroute " + std::string(kVersion));
  std::getline(is, line);
  EXPECT_EQ(line.rfind("# command=run", 0), 0u);
  std::getline(is, line);
  EXPECT_EQ(line, "step,mean_packets,mean_delivery_time,created,delivered");
  EXPECT_FALSE(std::getline(is, line));
}

TEST(Commands, RunCsvUsesNaNForEmptyWindows) {
  const auto spec = parse_config(Command::Run, parse_key_values("horizon=3 n=50 lambda=0"));
  const std::string csv = to_csv(spec);
  EXPECT_NE(csv.find("\n1,0,NaN,0,0\n"), std::string::npos) << csv;
}

TEST(Commands, OutputReproducesFromItsHeader) {
  for (const char* text : {"horizon=120 n=120 seed=5 lambda=0.03 beta=0.05",
                           "n=100 horizon=200 lambda_grid=0.01,0.03 beta_grid=0,0.2 replicas=2 strategy=sp,adaptive"}) {
    const auto kv = parse_key_values(text);
    const Command cmd = kv.count("lambda_grid") ? Command::Sweep : Command::Run;
    const auto spec = parse_config(cmd, kv);
    const std::string first = to_csv(spec);
    std::istringstream is(first);
    const auto replay = spec_from_csv_header(is);
    EXPECT_EQ(to_csv(replay), first);
  }
}

TEST(Commands, SweepIdenticalAcrossWorkerCounts) {
  auto spec = parse_config(Command::Sweep, parse_key_values("n=100 horizon=200 lambda_grid=0.01,0.03 "
                                                            "beta_grid=0,0.2 replicas=2 strategy=all"));
  const std::string serial = to_csv(spec);
  spec.workers = 4;
  EXPECT_EQ(to_csv(spec), serial);
}

TEST(Commands, BetaCFlagsUnbracketedRows) {
  const auto spec =
      parse_config(Command::BetaC, parse_key_values("n=100 horizon=200 lambda_grid=0.001 beta_grid=2,3 replicas=1"));
  std::ostringstream log;
  const auto out = cmd_betac(spec, log);
  ASSERT_EQ(out.table.rows.size(), 1u);
  EXPECT_EQ(format_cell(out.table.rows[0][2]), "NaN");
  EXPECT_NE(log.str().find("not bracketed"), std::string::npos);
  EXPECT_EQ(out.table.columns,
            (std::vector<std::string>{"lambda", "strategy", "beta_c", "beta_c_err", "eta_threshold", "replicas"}));
}

TEST(Commands, ProfileSnapshots) {
  const auto spec = parse_config(
      Command::Profile, parse_key_values("n=200 lambda=0.02 beta=0.04 snapshot_steps=100,200,300 replicas=2"));
  const auto out = cmd_profile(spec);
  EXPECT_EQ(out.table.columns, (std::vector<std::string>{"degree", "mean_queue", "count_nodes", "step"}));
  std::map<std::int64_t, std::int64_t> nodes_per_step;
  for (const auto& row : out.table.rows) nodes_per_step[std::get<std::int64_t>(row[3])] += std::get<std::int64_t>(row[2]);
  EXPECT_EQ(nodes_per_step, (std::map<std::int64_t, std::int64_t>{{100, 400}, {200, 400}, {300, 400}}));
  auto late = spec;
  late.snapshot_steps = {5000};
  EXPECT_THROW(cmd_profile(late), ConfigError);
}

TEST(Commands, MeanFieldCurves) {
  const auto spec = parse_config(Command::Mft, parse_key_values("n=300 lambda_grid=0:0.05:0.005"));
  const auto out = cmd_mft(spec);
  ASSERT_EQ(out.table.rows.size(), 11u);
  double prev_mf = -1, prev_sp = -1;
  for (const auto& row : out.table.rows) {
    EXPECT_EQ(format_cell(row[1]), "NaN");
    const double mf = std::get<double>(row[2]), sp = std::get<double>(row[3]);
    EXPECT_LE(mf, sp);
    EXPECT_GE(mf, prev_mf);
    EXPECT_GE(sp, prev_sp);
    prev_mf = mf;
    prev_sp = sp;
  }
}

TEST(Commands, JsonOutput) {
  auto spec = parse_config(Command::Run, parse_key_values("horizon=5 n=50 format=json"));
  std::ostringstream os;
  write_output(os, spec, compute(spec));
  const auto doc = nlohmann::json::parse(os.str());
  EXPECT_EQ(doc["rows"].size(), 5u);
  EXPECT_EQ(doc["config"]["horizon"], "5");
  EXPECT_EQ(doc["columns"][0], "step");
}

TEST(Commands, ExecuteWritesFiles) {
  const auto dir = scratch_dir("execute");
  auto spec = parse_config(Command::GenGraph, parse_key_values("n=40 m=2 m0=2 seed=3"));
  spec.output_dir = dir;
  const auto path = execute(spec);
  EXPECT_EQ(path.filename(), "graph.edges");
  std::ifstream in(path);
  const auto [g, header] = read_edge_list(in);
  EXPECT_EQ(g.node_count(), 40u);
  EXPECT_EQ(g.edge_count(), 1u + 2u * 38u);

  auto run_spec = parse_config(Command::Run, parse_key_values("n=40 m=2 m0=2 horizon=10"));
  run_spec.output_dir = dir / "nested";
  EXPECT_EQ(execute(run_spec).filename(), "run.csv");
}

#ifdef SFROUTE_CLI
TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("cli");
  const std::string cli = SFROUTE_CLI;
  const auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(run("run --n 60 --horizon 0 --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "run.csv"));
  EXPECT_EQ(run("run --m 4 --m0 3 --out " + dir.string()), 1);
  EXPECT_EQ(run("sweep --out " + dir.string()), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("run --lambda nope"), 1);

  std::ofstream(dir / "preset.conf") << "n=60\nhorizon=20\nlambda=0.05\n";
  EXPECT_EQ(run("run --config " + (dir / "preset.conf").string() + " --horizon 7 --out " + dir.string()), 0);
  const std::string csv = read_file(dir / "run.csv");
  EXPECT_NE(csv.find("horizon=7"), std::string::npos);
  EXPECT_NE(csv.find("lambda=0.05"), std::string::npos);

  // Output directory path occupied by a regular file: runtime failure.
  std::ofstream(dir / "blocker") << "x";
  EXPECT_EQ(run("run --n 60 --horizon 0 --out " + (dir / "blocker").string()), 2);
}
#endif

#ifdef SFROUTE_CONFIG_DIR
TEST(Presets, AllParse) {
  std::size_t seen = 0;
  for (const auto& entry : fs::directory_iterator(SFROUTE_CONFIG_DIR)) {
    if (entry.path().extension() != ".conf") continue;
    ++seen;
    const auto kv = read_config_file(entry.path());
    // The usage line names the command; try each until one accepts.
    bool accepted = false;
    for (const Command c : {Command::Run, Command::Sweep, Command::BetaC, Command::Profile, Command::Mft}) {
      try {
        parse_config(c, kv);
        accepted = true;
      } catch (const ConfigError&) {
      }
    }
    EXPECT_TRUE(accepted) << entry.path();
  }
  EXPECT_GE(seen, 6u);
}
#endif
