#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sfroute/rng.hpp"

namespace sfroute {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

using Edge = std::pair<NodeId, NodeId>;

// Undirected simple graph in compressed adjacency form. Neighbor lists are sorted.
class Topology {
 public:
  Topology() = default;

  Topology(std::size_t node_count, std::span<const Edge> edges) : offsets_(node_count + 1, 0) {
    for (const auto& [u, v] : edges) {
      if (u >= node_count || v >= node_count) throw std::invalid_argument("edge endpoint out of range");
      if (u == v) throw std::invalid_argument("self-loop");
      ++offsets_[u + 1];
      ++offsets_[v + 1];
    }
    for (std::size_t i = 0; i < node_count; ++i) offsets_[i + 1] += offsets_[i];
    neighbors_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [u, v] : edges) {
      neighbors_[fill[u]++] = v;
      neighbors_[fill[v]++] = u;
    }
    for (std::size_t i = 0; i < node_count; ++i) {
      auto first = neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
      auto last = neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
      std::sort(first, last);
      if (std::adjacent_find(first, last) != last) throw std::invalid_argument("multi-edge");
    }
  }

  std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return neighbors_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }

  bool adjacent(NodeId a, NodeId b) const {
    auto nb = neighbors(a);
    return std::binary_search(nb.begin(), nb.end(), b);
  }

  // Each edge once, u < v, sorted.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < node_count(); ++u)
      for (NodeId v : neighbors(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  double mean_degree() const {
    return node_count() == 0 ? 0.0 : 2.0 * static_cast<double>(edge_count()) / static_cast<double>(node_count());
  }

  std::size_t max_degree() const {
    std::size_t k = 0;
    for (NodeId i = 0; i < node_count(); ++i) k = std::max(k, degree(i));
    return k;
  }

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
};

struct BaParams {
  std::size_t n = 1000;
  std::size_t m = 3;
  std::size_t m0 = 3;
};

inline void validate(const BaParams& p) {
  if (p.m == 0) throw std::invalid_argument("BA: m must be at least 1");
  if (p.m > p.m0) throw std::invalid_argument("BA: m must not exceed m0");
  if (p.n <= p.m0) throw std::invalid_argument("BA: n must exceed m0");
}

// Barabasi-Albert growth from an m0-clique. Each new node links to m distinct
// existing nodes, each draw proportional to degree among nodes not yet picked
// for this newcomer.
inline Topology build_ba_topology(const BaParams& p, RngStream& rng) {
  validate(p);
  std::vector<Edge> edges;
  edges.reserve(p.m0 * (p.m0 - 1) / 2 + p.m * (p.n - p.m0));
  // One entry per edge endpoint: uniform draws from it are degree-proportional.
  std::vector<NodeId> endpoints;
  endpoints.reserve(2 * edges.capacity());
  for (NodeId u = 0; u < p.m0; ++u)
    for (NodeId v = u + 1; v < p.m0; ++v) {
      edges.emplace_back(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }

  std::vector<NodeId> picked;
  picked.reserve(p.m);
  for (NodeId node = static_cast<NodeId>(p.m0); node < p.n; ++node) {
    picked.clear();
    while (picked.size() < p.m) {
      // Only a single isolated seed node (m0 == 1) has no endpoints yet.
      const NodeId target = endpoints.empty() ? static_cast<NodeId>(rng.below(node))
                                              : endpoints[rng.below(endpoints.size())];
      if (std::find(picked.begin(), picked.end(), target) == picked.end()) picked.push_back(target);
    }
    for (NodeId target : picked) {
      edges.emplace_back(std::min(node, target), std::max(node, target));
      endpoints.push_back(target);
      endpoints.push_back(node);
    }
  }
  return Topology(p.n, edges);
}

// Hop distances and canonical next hops for every ordered pair.
// Storage is destination-major so walks toward one destination stay in one row.
class RouteTable {
 public:
  using Dist = std::uint16_t;
  static constexpr Dist kUnreachable = std::numeric_limits<Dist>::max();

  RouteTable() = default;
  RouteTable(std::size_t n, std::vector<Dist> dist, std::vector<NodeId> next)
      : n_(n), dist_(std::move(dist)), next_(std::move(next)) {}

  std::size_t node_count() const { return n_; }
  Dist dist(NodeId from, NodeId to) const { return dist_[static_cast<std::size_t>(to) * n_ + from]; }
  // First node after `from` on the canonical shortest path to `to`; kNoNode when from == to.
  NodeId next_hop(NodeId from, NodeId to) const { return next_[static_cast<std::size_t>(to) * n_ + from]; }

  std::span<const Dist> dist_row(NodeId to) const { return {dist_.data() + static_cast<std::size_t>(to) * n_, n_}; }
  std::span<const NodeId> next_row(NodeId to) const { return {next_.data() + static_cast<std::size_t>(to) * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::vector<Dist> dist_;
  std::vector<NodeId> next_;
};

// BFS from every node. next_hop(l, j) is the lowest-index neighbor of l one hop
// closer to j. Throws if the graph is disconnected.
inline RouteTable all_pairs_bfs(const Topology& g) {
  const std::size_t n = g.node_count();
  if (n >= RouteTable::kUnreachable) throw std::invalid_argument("graph too large for route table");
  std::vector<RouteTable::Dist> dist(n * n, RouteTable::kUnreachable);
  std::vector<NodeId> next(n * n, kNoNode);
  std::vector<NodeId> frontier;
  frontier.reserve(n);
  for (NodeId target = 0; target < n; ++target) {
    auto* row = dist.data() + static_cast<std::size_t>(target) * n;
    frontier.clear();
    frontier.push_back(target);
    row[target] = 0;
    for (std::size_t head = 0; head < frontier.size(); ++head) {
      const NodeId u = frontier[head];
      for (NodeId v : g.neighbors(u))
        if (row[v] == RouteTable::kUnreachable) {
          row[v] = static_cast<RouteTable::Dist>(row[u] + 1);
          frontier.push_back(v);
        }
    }
    if (frontier.size() != n) throw std::runtime_error("graph is not connected");
    auto* hop = next.data() + static_cast<std::size_t>(target) * n;
    for (NodeId u = 0; u < n; ++u) {
      if (u == target) continue;
      for (NodeId v : g.neighbors(u))
        if (row[v] + 1 == row[u]) {
          hop[u] = v;
          break;
        }
    }
  }
  return RouteTable(n, std::move(dist), std::move(next));
}

// Immutable network: topology plus shortest-path infrastructure.
class Network {
 public:
  explicit Network(Topology topology) : topo_(std::move(topology)), routes_(all_pairs_bfs(topo_)) {
    const std::size_t n = topo_.node_count();
    if (n > 1) {
      double total = 0.0;
      for (NodeId j = 0; j < n; ++j)
        for (auto d : routes_.dist_row(j)) total += d;
      diameter_avg_ = total / (static_cast<double>(n) * static_cast<double>(n - 1));
    }
    k_max_ = topo_.max_degree();
  }

  const Topology& topology() const { return topo_; }
  const RouteTable& routes() const { return routes_; }

  std::size_t node_count() const { return topo_.node_count(); }
  std::size_t edge_count() const { return topo_.edge_count(); }
  std::size_t degree(NodeId i) const { return topo_.degree(i); }
  std::span<const NodeId> neighbors(NodeId i) const { return topo_.neighbors(i); }
  unsigned dist(NodeId from, NodeId to) const { return routes_.dist(from, to); }
  NodeId next_hop(NodeId from, NodeId to) const { return routes_.next_hop(from, to); }

  double mean_degree() const { return topo_.mean_degree(); }
  std::size_t k_max() const { return k_max_; }
  // Mean hop distance over ordered pairs i != j.
  double diameter_avg() const { return diameter_avg_; }

 private:
  Topology topo_;
  RouteTable routes_;
  double diameter_avg_ = 0.0;
  std::size_t k_max_ = 0;
};

inline Network build_ba(const BaParams& p, RngStream& rng) { return Network(build_ba_topology(p, rng)); }

inline Network build_ba(const BaParams& p, std::uint64_t seed) {
  RngStream rng(seed);
  return build_ba(p, rng);
}

// [l, next_hop(l, j), ..., j]
inline std::vector<NodeId> canonical_path(const Network& net, NodeId from, NodeId to) {
  if (from == to) throw std::invalid_argument("canonical_path: endpoints coincide");
  std::vector<NodeId> path;
  path.reserve(net.dist(from, to) + 1u);
  for (NodeId s = from; s != to; s = net.next_hop(s, to)) path.push_back(s);
  path.push_back(to);
  return path;
}

inline std::map<std::size_t, std::size_t> degree_histogram(const Topology& g) {
  std::map<std::size_t, std::size_t> hist;
  for (NodeId i = 0; i < g.node_count(); ++i) ++hist[g.degree(i)];
  return hist;
}

inline std::map<std::size_t, std::size_t> degree_histogram(const Network& net) {
  return degree_histogram(net.topology());
}

// Edge-list text format:
//   # ba n=<N> m=<m> m0=<m0> seed=<s>
//   u v            (0-indexed, u < v, one edge per line)
struct EdgeListHeader {
  BaParams params;
  std::uint64_t seed = 0;
};

inline void write_edge_list(std::ostream& os, const Topology& g, const EdgeListHeader& h) {
  os << "# ba n=" << h.params.n << " m=" << h.params.m << " m0=" << h.params.m0 << " seed=" << h.seed << '\n';
  for (const auto& [u, v] : g.edges()) os << u << ' ' << v << '\n';
}

inline std::pair<Topology, EdgeListHeader> read_edge_list(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("edge list: empty input");
  EdgeListHeader h;
  {
    std::istringstream hs(line);
    std::string hash, kind;
    hs >> hash >> kind;
    if (hash != "#" || kind != "ba") throw std::runtime_error("edge list: bad header: " + line);
    std::string field;
    bool got_n = false;
    while (hs >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw std::runtime_error("edge list: bad header field: " + field);
      const std::string key = field.substr(0, eq);
      const std::uint64_t value = std::stoull(field.substr(eq + 1));
      if (key == "n") {
        h.params.n = value;
        got_n = true;
      } else if (key == "m") {
        h.params.m = value;
      } else if (key == "m0") {
        h.params.m0 = value;
      } else if (key == "seed") {
        h.seed = value;
      } else {
        throw std::runtime_error("edge list: unknown header key: " + key);
      }
    }
    if (!got_n) throw std::runtime_error("edge list: header lacks n");
  }
  std::vector<Edge> edges;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    long long u = -1, v = -1;
    if (!(ls >> u >> v) || u < 0 || v <= u)
      throw std::runtime_error("edge list: bad edge at line " + std::to_string(lineno));
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return {Topology(h.params.n, edges), h};
}

}  // namespace sfroute
