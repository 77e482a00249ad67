#pragma once

#include <cassert>
#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sfroute/graph.hpp"
#include "sfroute/rng.hpp"

namespace sfroute {

enum class StrategyKind { ShortestPath, Echenique, AdaptiveProjected };

struct Strategy {
  StrategyKind kind = StrategyKind::AdaptiveProjected;
  double h = 0.8;  // Echenique distance weight

  static Strategy shortest_path() { return {StrategyKind::ShortestPath, 0.8}; }
  static Strategy echenique(double h = 0.8) {
    if (!(h >= 0.0 && h <= 1.0)) throw std::invalid_argument("echenique weight h must lie in [0,1]");
    return {StrategyKind::Echenique, h};
  }
  static Strategy adaptive() { return {StrategyKind::AdaptiveProjected, 0.8}; }

  friend bool operator==(const Strategy&, const Strategy&) = default;
};

inline std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::ShortestPath: return "sp";
    case StrategyKind::Echenique: return "echenique";
    case StrategyKind::AdaptiveProjected: return "adaptive";
  }
  return "?";
}

inline StrategyKind parse_strategy_kind(std::string_view s) {
  if (s == "sp" || s == "shortest-path" || s == "shortest_path") return StrategyKind::ShortestPath;
  if (s == "echenique") return StrategyKind::Echenique;
  if (s == "adaptive") return StrategyKind::AdaptiveProjected;
  throw std::invalid_argument("unknown strategy: " + std::string(s));
}

// Live read access to queue lengths.
template <class Q>
concept QueueView = requires(const Q& q, NodeId s) {
  { q.length(s) } -> std::convertible_to<std::size_t>;
};

// Queue lengths held in a plain array; used by tests and offline evaluation.
struct ArrayQueues {
  std::span<const std::size_t> n;
  std::size_t length(NodeId s) const { return n[s]; }
};

inline double waiting_time(std::size_t queue, std::size_t degree, double beta) {
  return static_cast<double>(queue) / (1.0 + beta * static_cast<double>(degree));
}

// Projected waiting time from `from` to `to` along the canonical shortest path,
// destination excluded.
template <QueueView Q>
double cost_adaptive(const Network& net, const Q& queues, NodeId from, NodeId to, double beta) {
  const auto next = net.routes().next_row(to);
  double total = 0.0;
  for (NodeId s = from; s != to; s = next[s]) total += waiting_time(queues.length(s), net.degree(s), beta);
  return total;
}

template <QueueView Q>
double cost_echenique(const Network& net, const Q& queues, NodeId from, NodeId to, double beta, double h) {
  return h * static_cast<double>(net.dist(from, to)) +
         (1.0 - h) * waiting_time(queues.length(from), net.degree(from), beta);
}

inline double cost_shortest_path(const Network& net, NodeId from, NodeId to) {
  return static_cast<double>(net.dist(from, to));
}

template <QueueView Q>
double strategy_cost(const Strategy& strategy, const Network& net, const Q& queues, NodeId from, NodeId to,
                     double beta) {
  switch (strategy.kind) {
    case StrategyKind::ShortestPath: return cost_shortest_path(net, from, to);
    case StrategyKind::Echenique: return cost_echenique(net, queues, from, to, beta, strategy.h);
    case StrategyKind::AdaptiveProjected: return cost_adaptive(net, queues, from, to, beta);
  }
  return 0.0;
}

// Next node for a packet at `at` headed to `to`. An adjacent destination is
// taken directly. Otherwise the neighbor with the lowest strategy cost wins;
// ties go to the neighbor nearer the destination, then uniformly at random.
template <QueueView Q>
NodeId select_neighbor(const Strategy& strategy, const Network& net, const Q& queues, NodeId at, NodeId to,
                       double beta, RngStream& rng) {
  assert(at != to);
  const auto dist_to = net.routes().dist_row(to);
  if (dist_to[at] == 1) return to;

  NodeId best = kNoNode;
  double best_cost = 0.0;
  unsigned best_dist = 0;
  std::uint64_t ties = 0;
  for (NodeId l : net.neighbors(at)) {
    const double c = strategy_cost(strategy, net, queues, l, to, beta);
    const unsigned d = dist_to[l];
    if (best == kNoNode || c < best_cost || (c == best_cost && d < best_dist)) {
      best = l;
      best_cost = c;
      best_dist = d;
      ties = 1;
    } else if (c == best_cost && d == best_dist) {
      // Reservoir sampling keeps each tied neighbor with equal probability.
      if (rng.below(++ties) == 0) best = l;
    }
  }
  return best;
}

}  // namespace sfroute
