#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sfroute/analysis.hpp"

using namespace sfroute;

namespace {

MetricSeries synthetic(std::size_t steps, auto&& value) {
  MetricSeries s;
  s.node_count = 1000;
  for (std::size_t t = 1; t <= steps; ++t) {
    StepRecord r;
    r.step = static_cast<Step>(t);
    r.mean_packets = value(static_cast<double>(t));
    s.records.push_back(r);
  }
  return s;
}

PhasePoint point(double beta, bool jammed) {
  PhasePoint p;
  p.beta = beta;
  p.jammed = jammed;
  return p;
}

}  // namespace

TEST(FitLine, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = fit_line(x, y);
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 1.0);
  EXPECT_DOUBLE_EQ(f.r2, 1.0);
  const std::vector<double> one{1};
  EXPECT_THROW(fit_line(one, one), std::invalid_argument);
}

TEST(EstimateEta, FlatSeriesIsFree) {
  const auto s = synthetic(3000, [](double) { return 4.2; });
  const auto e = estimate_eta(s, 3, 0.02, 600);
  EXPECT_EQ(e.eta, 0.0);
  EXPECT_EQ(e.fit_begin, 1801);
  EXPECT_EQ(e.fit_end, 3000);
}

TEST(EstimateEta, EverythingStuckIsOne) {
  const double rate = 2 * 3 * 0.02;
  const auto s = synthetic(3000, [&](double t) { return rate * t; });
  EXPECT_NEAR(estimate_eta(s, 3, 0.02, 600).eta, 1.0, 1e-9);
}

TEST(EstimateEta, NoisyHalfSlope) {
  const double rate = 2 * 3 * 0.02;
  RngStream rng(3);
  std::normal_distribution<double> noise(0.0, 0.01);
  const auto s = synthetic(3000, [&](double t) { return 0.5 * rate * t + noise(rng.engine()); });
  EXPECT_NEAR(estimate_eta(s, 3, 0.02, 600).eta, 0.5, 0.05);
}

TEST(EstimateEta, ClampsAndRejects) {
  const auto falling = synthetic(100, [](double t) { return 100.0 - t; });
  EXPECT_EQ(estimate_eta(falling, 3, 0.02, 10).eta, 0.0);
  const auto exploding = synthetic(100, [](double t) { return 10.0 * t; });
  EXPECT_EQ(estimate_eta(exploding, 3, 0.02, 10).eta, 1.0);
  EXPECT_THROW(estimate_eta(falling, 3, 0.0, 10), std::domain_error);
  EXPECT_THROW(estimate_eta(falling, 3, 0.02, 50), std::invalid_argument);
}

TEST(BracketBetaC, Cases) {
  const std::vector<PhasePoint> crossing{point(0.0, true), point(0.02, true), point(0.04, false), point(0.06, false)};
  auto br = bracket_beta_c(crossing);
  EXPECT_EQ(br.status, BracketStatus::Bracketed);
  EXPECT_EQ(br.jammed_beta, 0.02);
  EXPECT_EQ(br.free_beta, 0.04);

  // A noisy jammed point above a free one moves the bracket up.
  const std::vector<PhasePoint> noisy{point(0.0, true), point(0.02, false), point(0.04, true), point(0.06, false)};
  EXPECT_EQ(bracket_beta_c(noisy).jammed_beta, 0.04);

  const std::vector<PhasePoint> free_from_zero{point(0.0, false), point(0.1, false)};
  EXPECT_EQ(bracket_beta_c(free_from_zero).status, BracketStatus::FreeAtZero);
  const std::vector<PhasePoint> free_above{point(0.05, false), point(0.1, false)};
  EXPECT_EQ(bracket_beta_c(free_above).status, BracketStatus::AllFree);
  const std::vector<PhasePoint> jammed{point(0.0, true), point(0.1, true)};
  EXPECT_EQ(bracket_beta_c(jammed).status, BracketStatus::AllJammed);
}

TEST(FindBetaC, SmallNetworkBracketsAndRefines) {
  SimConfig cfg;
  cfg.graph = {200, 3, 3};
  cfg.horizon = 800;
  cfg.transient = 160;
  SweepOptions opt;
  opt.replicas = 2;
  opt.bisect_steps = 1;
  const std::vector<double> grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.6};
  const auto bc = find_beta_c(0.03, Strategy::shortest_path(), cfg, grid, opt);
  ASSERT_EQ(bc.status, BracketStatus::Bracketed);
  EXPECT_EQ(bc.points.size(), grid.size() + 1);
  EXPECT_NEAR(bc.beta_c_err, 0.025, 1e-12);
  EXPECT_GT(bc.beta_c, 0.0);
  EXPECT_LT(bc.beta_c, 0.6);
  EXPECT_TRUE(bc.points.front().jammed);
  EXPECT_FALSE(bc.points[grid.size() - 1].jammed);
}

TEST(FindBetaC, ReportsUnbracketedGrids) {
  SimConfig cfg;
  cfg.graph = {100, 3, 3};
  cfg.horizon = 400;
  cfg.transient = 80;
  SweepOptions opt;
  opt.replicas = 1;
  const std::vector<double> high{5.0, 6.0};
  const auto free = find_beta_c(0.001, Strategy::adaptive(), cfg, high, opt);
  EXPECT_EQ(free.status, BracketStatus::AllFree);
  EXPECT_TRUE(std::isnan(free.beta_c));
  const std::vector<double> zero{0.0};
  const auto at_zero = find_beta_c(0.001, Strategy::adaptive(), cfg, zero, opt);
  EXPECT_EQ(at_zero.status, BracketStatus::FreeAtZero);
  EXPECT_EQ(at_zero.beta_c, 0.0);
  const std::vector<double> unsorted{0.2, 0.1};
  EXPECT_THROW(find_beta_c(0.01, Strategy::adaptive(), cfg, unsorted, opt), std::invalid_argument);
}

TEST(SweepGrid, ParallelMatchesSerial) {
  SimConfig cfg;
  cfg.graph = {150, 3, 3};
  cfg.horizon = 300;
  cfg.transient = 60;
  const NetworkCache nets(cfg.graph, cfg.seed, 2);
  const std::vector<double> lambdas{0.01, 0.03}, betas{0.0, 0.2};
  SweepOptions serial;
  serial.replicas = 2;
  SweepOptions par = serial;
  par.workers = 4;
  const auto a = sweep_grid(cfg, lambdas, betas, nets, serial);
  const auto b = sweep_grid(cfg, lambdas, betas, nets, par);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].eta.mean, b[i].eta.mean);
    EXPECT_EQ(a[i].lambda, b[i].lambda);
    EXPECT_EQ(a[i].beta, b[i].beta);
  }
}

TEST(ParallelMap, PropagatesExceptions) {
  EXPECT_THROW(parallel_map(10, 3,
                            [](std::size_t i) -> int {
                              if (i == 7) throw std::runtime_error("boom");
                              return 0;
                            }),
               std::runtime_error);
  const auto v = parallel_map(5, 8, [](std::size_t i) { return i * i; });
  EXPECT_EQ(v, (std::vector<std::size_t>{0, 1, 4, 9, 16}));
}

TEST(MeanField, StationaryProfile) {
  const auto p = MeanFieldParams::free_flow(0.02, 0.06, 6.0, 85, 3.332);
  EXPECT_NEAR(p.mean_packets, 0.27984, 1e-12);
  // k = <k> returns <n> exactly.
  EXPECT_NEAR(mf_stationary_nk(p, p.mean_degree), p.mean_packets, 1e-15);
  EXPECT_NEAR(mf_stationary_nk(p, 85), (0.02 + 0.27984 / 6.0) * 85 - 0.02 * 6.0, 1e-12);
  EXPECT_NEAR(mf_stationary_nk(p, 85), 5.5444, 1e-4);
  auto idle = p;
  idle.lambda = 0.0;
  EXPECT_NEAR(mf_stationary_nk(idle, 10), p.mean_packets / 6.0 * 10, 1e-12);
  // Linear in k.
  EXPECT_NEAR(mf_stationary_nk(p, 30) - mf_stationary_nk(p, 20), mf_stationary_nk(p, 20) - mf_stationary_nk(p, 10),
              1e-12);
}

TEST(MeanField, JammedSlope) {
  EXPECT_NEAR(mf_jammed_slope(0.02, 6.0, 6), 6 * (0.02 + 1.0 / 6.0) - 1, 1e-15);
  EXPECT_NEAR(mf_jammed_slope(0.02, 6.0, 6), 0.12, 1e-12);
  EXPECT_NEAR(mf_jammed_slope(0.0, 6.0, 6), 0.0, 1e-15);
  const double k_star = 6.0 / (1.0 + 0.02 * 6.0);
  EXPECT_LT(mf_jammed_slope(0.02, 6.0, std::floor(k_star)), 0.0);
  EXPECT_GT(mf_jammed_slope(0.02, 6.0, std::ceil(k_star)), 0.0);
}

TEST(MeanField, PhaseBoundaries) {
  EXPECT_NEAR(mf_beta_c(0.02, 3.332, 85), 3.332 * 0.02 - 1.0 / 85, 1e-15);
  EXPECT_NEAR(mf_beta_c(0.02, 3.332, 85), 0.0549, 1e-4);
  EXPECT_NEAR(mf_beta_c_sp(0.02, 3.332, 85, 2.0), 2 * 3.332 * 0.02 - 1.0 / 85, 1e-15);
  EXPECT_NEAR(mf_beta_c_sp(0.02, 3.332, 85, 2.0), 0.1215, 1e-4);
  EXPECT_EQ(mf_beta_c(mf_lambda_min(3.332, 85), 3.332, 85), 0.0);
  EXPECT_EQ(mf_beta_c_sp(mf_lambda_min_sp(3.332, 85), 3.332, 85), 0.0);
  EXPECT_EQ(mf_beta_c(0.001, 3.332, 85), 0.0);
  EXPECT_NEAR(mf_lambda_min(3.332, 85), 0.00353, 1e-5);
  for (double l = mf_lambda_min_sp(3.332, 85) + 1e-4; l < 0.05; l += 0.001)
    EXPECT_GT(mf_beta_c_sp(l, 3.332, 85), mf_beta_c(l, 3.332, 85));
  EXPECT_THROW(mf_beta_c_sp(0.02, 3.332, 85, 0.0), std::invalid_argument);
  EXPECT_THROW(mf_beta_c(0.02, 0.0, 85), std::invalid_argument);
}
