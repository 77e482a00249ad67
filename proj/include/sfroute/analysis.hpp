#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "sfroute/dynamics.hpp"
#include "sfroute/parallel.hpp"

namespace sfroute {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
inline LinearFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

struct MeanStd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single value
};

inline MeanStd mean_std(std::span<const double> v) {
  MeanStd out;
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Order parameter

struct EtaEstimate {
  double eta = 0.0;
  double slope = 0.0;  // packets per node per step
  Step fit_begin = 0;  // first step in the fit, inclusive
  Step fit_end = 0;    // last step in the fit, inclusive
};

// Least-squares slope of <n(t)> over the last half of the post-transient
// record, normalised by the per-node creation rate 2*m*lambda and clamped to [0,1].
inline EtaEstimate estimate_eta(const MetricSeries& series, std::size_t m, double lambda, Step transient) {
  if (!(lambda > 0.0)) throw std::domain_error("eta is undefined for lambda <= 0");
  const auto total = static_cast<Step>(series.records.size());
  if (transient < 0 || total <= 2 * transient) throw std::invalid_argument("estimate_eta: record shorter than 2*transient");
  const Step post = total - transient;
  const Step first = total - post / 2;
  if (total - first < 2) throw std::invalid_argument("estimate_eta: fit window too short");
  std::vector<double> xs, ys;
  xs.reserve(static_cast<std::size_t>(total - first));
  ys.reserve(xs.capacity());
  for (Step i = first; i < total; ++i) {
    const auto& r = series.records[static_cast<std::size_t>(i)];
    xs.push_back(static_cast<double>(r.step));
    ys.push_back(r.mean_packets);
  }
  EtaEstimate e;
  e.slope = fit_line(xs, ys).slope;
  e.eta = std::clamp(e.slope / (2.0 * static_cast<double>(m) * lambda), 0.0, 1.0);
  e.fit_begin = series.records[static_cast<std::size_t>(first)].step;
  e.fit_end = series.records.back().step;
  return e;
}

// Mean delivery time over the fit window, ignoring steps with no deliveries.
inline double plateau_delivery_time(const MetricSeries& series, const EtaEstimate& e) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : series.records)
    if (r.step >= e.fit_begin && r.step <= e.fit_end && !std::isnan(r.mean_delivery_time)) {
      sum += r.mean_delivery_time;
      ++n;
    }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Phase diagram

inline constexpr double kDefaultJamThreshold = 0.01;

struct PhasePoint {
  double lambda = 0.0;
  double beta = 0.0;
  MeanStd eta;            // over replicas
  double delivery_time = 0.0;  // replica mean of the plateau <T>
  std::size_t replicas = 0;
  bool jammed = false;
};

struct SweepOptions {
  std::size_t replicas = 3;
  double eps_jam = kDefaultJamThreshold;
  std::size_t workers = 1;
  std::size_t bisect_steps = 0;
};

// Networks for seeds seed, seed+1, ...; replica r always runs on network r.
class NetworkCache {
 public:
  NetworkCache(const BaParams& params, std::uint64_t base_seed, std::size_t replicas, std::size_t workers = 1)
      : base_seed_(base_seed) {
    nets_ = parallel_map(replicas, workers, [&](std::size_t r) {
      RngStream rng = network_rng(base_seed + r);
      return std::make_shared<const Network>(build_ba(params, rng));
    });
  }

  const Network& replica(std::size_t r) const { return *nets_.at(r); }
  std::uint64_t seed(std::size_t r) const { return base_seed_ + r; }
  std::size_t size() const { return nets_.size(); }

 private:
  std::uint64_t base_seed_;
  std::vector<std::shared_ptr<const Network>> nets_;
};

struct ReplicaResult {
  EtaEstimate eta;
  double delivery_time = 0.0;
};

inline ReplicaResult run_replica(const NetworkCache& nets, SimConfig cfg, std::size_t replica) {
  cfg.seed = nets.seed(replica);
  const MetricSeries s = simulate(nets.replica(replica), cfg);
  ReplicaResult r;
  r.eta = estimate_eta(s, cfg.graph.m, cfg.lambda, cfg.transient);
  r.delivery_time = plateau_delivery_time(s, r.eta);
  return r;
}

inline PhasePoint reduce_replicas(double lambda, double beta, std::span<const ReplicaResult> runs, double eps_jam) {
  std::vector<double> etas, times;
  for (const auto& r : runs) {
    etas.push_back(r.eta.eta);
    if (!std::isnan(r.delivery_time)) times.push_back(r.delivery_time);
  }
  PhasePoint p;
  p.lambda = lambda;
  p.beta = beta;
  p.eta = mean_std(etas);
  p.delivery_time = mean_std(times).mean;
  p.replicas = runs.size();
  p.jammed = p.eta.mean > eps_jam;
  return p;
}

// Every (lambda, beta) pair of the grids, replicas fanned out over the worker pool.
inline std::vector<PhasePoint> sweep_grid(const SimConfig& base, std::span<const double> lambdas,
                                          std::span<const double> betas, const NetworkCache& nets,
                                          const SweepOptions& opt) {
  const std::size_t reps = opt.replicas;
  const std::size_t cells = lambdas.size() * betas.size();
  auto runs = parallel_map(cells * reps, opt.workers, [&](std::size_t task) {
    const std::size_t cell = task / reps;
    SimConfig cfg = base;
    cfg.lambda = lambdas[cell / betas.size()];
    cfg.beta = betas[cell % betas.size()];
    return run_replica(nets, cfg, task % reps);
  });
  std::vector<PhasePoint> out;
  out.reserve(cells);
  for (std::size_t cell = 0; cell < cells; ++cell)
    out.push_back(reduce_replicas(lambdas[cell / betas.size()], betas[cell % betas.size()],
                                  std::span(runs).subspan(cell * reps, reps), opt.eps_jam));
  return out;
}

enum class BracketStatus { Bracketed, FreeAtZero, AllFree, AllJammed };

inline std::string_view to_string(BracketStatus s) {
  switch (s) {
    case BracketStatus::Bracketed: return "bracketed";
    case BracketStatus::FreeAtZero: return "free-at-zero";
    case BracketStatus::AllFree: return "all-free";
    case BracketStatus::AllJammed: return "all-jammed";
  }
  return "?";
}

struct CriticalBeta {
  double lambda = 0.0;
  Strategy strategy;
  double beta_c = std::numeric_limits<double>::quiet_NaN();
  double beta_c_err = std::numeric_limits<double>::quiet_NaN();
  BracketStatus status = BracketStatus::AllJammed;
  std::vector<PhasePoint> points;  // grid points, then bisection points

  bool bracketed() const { return status == BracketStatus::Bracketed || status == BracketStatus::FreeAtZero; }
};

struct BetaBracket {
  BracketStatus status = BracketStatus::AllJammed;
  double jammed_beta = 0.0;  // largest jammed beta
  double free_beta = 0.0;    // next grid beta above it
};

// Locates the jammed/free crossing on points ordered by ascending beta.
inline BetaBracket bracket_beta_c(std::span<const PhasePoint> points) {
  BetaBracket br;
  if (points.empty()) return br;
  std::ptrdiff_t last_jammed = -1;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].jammed) last_jammed = static_cast<std::ptrdiff_t>(i);
  if (last_jammed < 0) {
    br.status = points.front().beta == 0.0 ? BracketStatus::FreeAtZero : BracketStatus::AllFree;
    return br;
  }
  const auto j = static_cast<std::size_t>(last_jammed);
  if (j + 1 == points.size()) return br;
  br.status = BracketStatus::Bracketed;
  br.jammed_beta = points[j].beta;
  br.free_beta = points[j + 1].beta;
  return br;
}

// Scans ascending beta_grid at fixed lambda. beta_c is the midpoint between the
// largest jammed beta and the next free beta above it; the error is half that gap.
// A grid that starts at beta = 0 and never jams gives beta_c = 0.
inline CriticalBeta find_beta_c(double lambda, const Strategy& strategy, const SimConfig& base,
                                std::span<const double> beta_grid, const SweepOptions& opt,
                                const NetworkCache* shared_nets = nullptr) {
  if (beta_grid.empty()) throw std::invalid_argument("find_beta_c: empty beta grid");
  if (!std::is_sorted(beta_grid.begin(), beta_grid.end())) throw std::invalid_argument("find_beta_c: grid not ascending");
  if (opt.replicas < 1) throw std::invalid_argument("find_beta_c: replicas must be >= 1");

  std::unique_ptr<NetworkCache> own;
  if (!shared_nets) own = std::make_unique<NetworkCache>(base.graph, base.seed, opt.replicas, opt.workers);
  const NetworkCache& nets = shared_nets ? *shared_nets : *own;

  SimConfig cfg = base;
  cfg.strategy = strategy;
  const double lambdas[] = {lambda};
  CriticalBeta out;
  out.lambda = lambda;
  out.strategy = strategy;
  out.points = sweep_grid(cfg, lambdas, beta_grid, nets, opt);

  const BetaBracket br = bracket_beta_c(out.points);
  out.status = br.status;
  if (br.status == BracketStatus::FreeAtZero) {
    out.beta_c = 0.0;
    out.beta_c_err = 0.0;
  }
  if (br.status != BracketStatus::Bracketed) return out;

  double lo = br.jammed_beta;
  double hi = br.free_beta;
  for (std::size_t b = 0; b < opt.bisect_steps; ++b) {
    const double mid[] = {0.5 * (lo + hi)};
    const PhasePoint p = sweep_grid(cfg, lambdas, mid, nets, opt).front();
    out.points.push_back(p);
    (p.jammed ? lo : hi) = mid[0];
  }
  out.beta_c = 0.5 * (lo + hi);
  out.beta_c_err = 0.5 * (hi - lo);
  return out;
}

struct CriticalLambda {
  double lambda_min = std::numeric_limits<double>::quiet_NaN();
  double lambda_min_err = std::numeric_limits<double>::quiet_NaN();
  bool bracketed = false;
  std::vector<PhasePoint> points;
};

// Onset of jamming along ascending lambda_grid at fixed beta: midpoint between
// the largest free lambda below the first jammed one and that jammed lambda.
inline CriticalLambda find_lambda_min(double beta, const Strategy& strategy, const SimConfig& base,
                                      std::span<const double> lambda_grid, const SweepOptions& opt,
                                      const NetworkCache* shared_nets = nullptr) {
  if (lambda_grid.empty()) throw std::invalid_argument("find_lambda_min: empty lambda grid");
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
    throw std::invalid_argument("find_lambda_min: grid not ascending");
  std::unique_ptr<NetworkCache> own;
  if (!shared_nets) own = std::make_unique<NetworkCache>(base.graph, base.seed, opt.replicas, opt.workers);
  const NetworkCache& nets = shared_nets ? *shared_nets : *own;

  SimConfig cfg = base;
  cfg.strategy = strategy;
  const double betas[] = {beta};
  CriticalLambda out;
  out.points = sweep_grid(cfg, lambda_grid, betas, nets, opt);
  const auto first_jammed =
      std::find_if(out.points.begin(), out.points.end(), [](const PhasePoint& p) { return p.jammed; });
  if (first_jammed == out.points.begin() || first_jammed == out.points.end()) return out;
  const double hi = first_jammed->lambda;
  const double lo = std::prev(first_jammed)->lambda;
  out.lambda_min = 0.5 * (lo + hi);
  out.lambda_min_err = 0.5 * (hi - lo);
  out.bracketed = true;
  return out;
}

// ---------------------------------------------------------------------------
// Mean-field predictions

struct MeanFieldParams {
  double lambda = 0.0;
  double beta = 0.0;
  double mean_degree = 0.0;
  std::size_t k_max = 0;
  double diameter = 0.0;     // mean hop distance D
  double mean_packets = 0.0; // <n>
  double alpha = 2.0;        // shortest-path prefactor

  // Free-flow estimate <n> = (D - 1) * lambda * <k>.
  static MeanFieldParams free_flow(double lambda, double beta, double mean_degree, std::size_t k_max, double diameter) {
    return {lambda, beta, mean_degree, k_max, diameter, (diameter - 1.0) * lambda * mean_degree, 2.0};
  }

  static MeanFieldParams of(const Network& net, double lambda, double beta) {
    return free_flow(lambda, beta, net.mean_degree(), net.k_max(), net.diameter_avg());
  }
};

// Stationary free-flow queue at degree k: (lambda + <n>/<k>) k - lambda <k>.
inline double mf_stationary_nk(const MeanFieldParams& p, double k) {
  return (p.lambda + p.mean_packets / p.mean_degree) * k - p.lambda * p.mean_degree;
}

// Jammed growth per step at degree k: k (lambda + 1/<k>) - 1.
inline double mf_jammed_slope(double lambda, double mean_degree, double k) {
  return k * (lambda + 1.0 / mean_degree) - 1.0;
}

inline double mf_lambda_min(double diameter, double k_max) { return 1.0 / (diameter * k_max); }

inline double mf_lambda_min_sp(double diameter, double k_max, double alpha = 2.0) {
  return 1.0 / (alpha * diameter * k_max);
}

// Adaptive-routing phase boundary D (lambda - 1/(D k_max)), floored at zero.
inline double mf_beta_c(double lambda, double diameter, double k_max) {
  if (!(diameter > 0.0 && k_max > 0.0)) throw std::invalid_argument("mf_beta_c: D and k_max must be positive");
  return std::max(0.0, diameter * (lambda - mf_lambda_min(diameter, k_max)));
}

// Shortest-path phase boundary alpha D (lambda - 1/(alpha D k_max)), floored at zero.
inline double mf_beta_c_sp(double lambda, double diameter, double k_max, double alpha = 2.0) {
  if (!(alpha > 0.0)) throw std::invalid_argument("mf_beta_c_sp: alpha must be positive");
  if (!(diameter > 0.0 && k_max > 0.0)) throw std::invalid_argument("mf_beta_c_sp: D and k_max must be positive");
  return std::max(0.0, alpha * diameter * (lambda - mf_lambda_min_sp(diameter, k_max, alpha)));
}

}  // namespace sfroute
