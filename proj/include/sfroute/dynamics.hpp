#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "sfroute/graph.hpp"
#include "sfroute/rng.hpp"
#include "sfroute/routing.hpp"

namespace sfroute {

using Step = std::int64_t;

struct Packet {
  std::uint64_t id = 0;
  Step birth_step = 0;
  NodeId origin = 0;
  NodeId destination = 0;
  Step arrival_step = 0;  // step at which it joined its current queue
  std::uint32_t hops = 0;
};

struct SimConfig {
  BaParams graph;
  double lambda = 0.02;  // packets per unit degree per step
  double beta = 0.07;    // extra delivery capacity per unit degree per step
  Strategy strategy = Strategy::adaptive();
  Step horizon = 3000;
  Step transient = 600;
  std::uint64_t seed = 1;
  Step t_window = 10;

  void validate() const {
    sfroute::validate(graph);
    if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("lambda must be finite and >= 0");
    if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("beta must be finite and >= 0");
    if (!(strategy.h >= 0.0 && strategy.h <= 1.0)) throw std::invalid_argument("h must lie in [0,1]");
    if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
    if (transient < 0 || transient > horizon) throw std::invalid_argument("transient must lie in [0, horizon]");
    if (t_window < 1) throw std::invalid_argument("t_window must be >= 1");
  }
};

// Network and dynamics draw from separate streams so that a cached network
// yields the same trajectory as one rebuilt from the seed.
inline RngStream network_rng(std::uint64_t seed) { return RngStream(seed); }
inline RngStream dynamics_rng(std::uint64_t seed) { return RngStream(seed).derive(1); }

class SimState {
 public:
  SimState(std::size_t node_count, RngStream rng) : queues(node_count), rng(std::move(rng)) {
    order.resize(node_count);
  }

  std::vector<std::deque<Packet>> queues;
  Step step = 0;
  std::uint64_t total_created = 0;
  std::uint64_t total_delivered = 0;
  std::uint64_t next_id = 0;
  RngStream rng;
  std::vector<NodeId> order;  // per-step processing permutation

  std::size_t node_count() const { return queues.size(); }
  std::size_t length(NodeId s) const { return queues[s].size(); }
  std::uint64_t in_system() const { return total_created - total_delivered; }

  // Places a new packet at the back of `at`'s queue, stamped with the current step.
  Packet& inject(NodeId at, NodeId destination) {
    Packet p;
    p.id = next_id++;
    p.birth_step = step;
    p.origin = at;
    p.destination = destination;
    p.arrival_step = step;
    ++total_created;
    return queues[at].emplace_back(p);
  }
};

static_assert(QueueView<SimState>);

// Node i creates lambda*k_i packets (fractional part drawn as a Bernoulli),
// each with a uniform destination other than i.
inline std::uint64_t generate(SimState& state, const Network& net, double lambda) {
  if (lambda <= 0.0) return 0;
  const std::size_t n = net.node_count();
  std::uint64_t created = 0;
  for (NodeId i = 0; i < n; ++i) {
    const std::uint64_t count = state.rng.stochastic_round(lambda * static_cast<double>(net.degree(i)));
    for (std::uint64_t c = 0; c < count; ++c) {
      auto dest = static_cast<NodeId>(state.rng.below(n - 1));
      if (dest >= i) ++dest;
      state.inject(i, dest);
    }
    created += count;
  }
  return created;
}

struct DeliveryCounts {
  std::uint64_t delivered = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t delivery_time_sum = 0;
};

// Delivery time counts steps spent in the network: a packet injected at step t
// and handed to its destination at step t' has T = t' - t.
inline Step delivery_time(const Packet& p, Step now) { return now - p.birth_step; }

// One forwarding sweep. Nodes go in a fresh random order; node i moves at most
// 1 + beta*k_i packets (fraction drawn once per step) from the head of its
// queue. A head packet that arrived during this step ends that node's turn.
// Routing sees queue lengths as they stand at decision time.
inline DeliveryCounts deliver_step(SimState& state, const Network& net, const SimConfig& cfg) {
  DeliveryCounts counts;
  const Step now = state.step;
  std::iota(state.order.begin(), state.order.end(), NodeId{0});
  state.rng.shuffle(state.order.begin(), state.order.end());
  for (NodeId i : state.order) {
    auto& queue = state.queues[i];
    if (queue.empty() || queue.front().arrival_step >= now) continue;
    const std::uint64_t capacity = 1 + state.rng.stochastic_round(cfg.beta * static_cast<double>(net.degree(i)));
    for (std::uint64_t c = 0; c < capacity && !queue.empty() && queue.front().arrival_step < now; ++c) {
      Packet p = queue.front();
      queue.pop_front();
      ++p.hops;
      const NodeId dest = p.destination;
      if (dest == i || net.dist(i, dest) == 1) {
        ++counts.delivered;
        counts.delivery_time_sum += static_cast<std::uint64_t>(delivery_time(p, now));
        ++state.total_delivered;
        continue;
      }
      const NodeId target = select_neighbor(cfg.strategy, net, state, i, dest, cfg.beta, state.rng);
      p.arrival_step = now;
      state.queues[target].push_back(p);
      ++counts.forwarded;
    }
  }
  return counts;
}

struct StepRecord {
  Step step = 0;
  double mean_packets = 0.0;
  double mean_delivery_time = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t created = 0;
  std::uint64_t delivered = 0;
};

struct MetricSeries {
  std::size_t node_count = 0;
  std::vector<StepRecord> records;

  std::vector<double> mean_packets() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.mean_packets);
    return out;
  }
};

// Sliding-window mean delivery time over the last `window` steps.
class DeliveryWindow {
 public:
  explicit DeliveryWindow(Step window) : window_(static_cast<std::size_t>(window)) {}

  double push(std::uint64_t delivered, std::uint64_t time_sum) {
    slots_.emplace_back(delivered, time_sum);
    count_ += delivered;
    sum_ += time_sum;
    if (slots_.size() > window_) {
      count_ -= slots_.front().first;
      sum_ -= slots_.front().second;
      slots_.pop_front();
    }
    return count_ == 0 ? std::numeric_limits<double>::quiet_NaN()
                       : static_cast<double>(sum_) / static_cast<double>(count_);
  }

 private:
  std::size_t window_;
  std::deque<std::pair<std::uint64_t, std::uint64_t>> slots_;
  std::uint64_t count_ = 0;
  std::uint64_t sum_ = 0;
};

struct DegreeClassMean {
  std::size_t degree = 0;
  double mean_queue = 0.0;
  std::size_t count_nodes = 0;
};

// Mean queue length per degree class, ascending degree.
template <QueueView Q>
std::vector<DegreeClassMean> degree_profile(const Q& queues, const Network& net) {
  std::vector<double> sum(net.k_max() + 1, 0.0);
  std::vector<std::size_t> count(net.k_max() + 1, 0);
  for (NodeId i = 0; i < net.node_count(); ++i) {
    sum[net.degree(i)] += static_cast<double>(queues.length(i));
    ++count[net.degree(i)];
  }
  std::vector<DegreeClassMean> out;
  for (std::size_t k = 0; k < sum.size(); ++k)
    if (count[k] > 0) out.push_back({k, sum[k] / static_cast<double>(count[k]), count[k]});
  return out;
}

// Drives one run: generate, deliver, record, once per step.
class Simulation {
 public:
  Simulation(const Network& net, SimConfig cfg)
      : net_(net), cfg_(std::move(cfg)), state_(net.node_count(), dynamics_rng(cfg_.seed)), window_(cfg_.t_window) {
    cfg_.validate();
    if (net.node_count() != cfg_.graph.n) throw std::invalid_argument("network size does not match config");
  }

  StepRecord advance() {
    ++state_.step;
    const std::uint64_t created = generate(state_, net_, cfg_.lambda);
    const DeliveryCounts dc = deliver_step(state_, net_, cfg_);
    StepRecord rec;
    rec.step = state_.step;
    rec.mean_packets = static_cast<double>(state_.in_system()) / static_cast<double>(net_.node_count());
    rec.mean_delivery_time = window_.push(dc.delivered, dc.delivery_time_sum);
    rec.created = created;
    rec.delivered = dc.delivered;
    return rec;
  }

  const SimState& state() const { return state_; }
  SimState& state() { return state_; }
  const Network& network() const { return net_; }
  const SimConfig& config() const { return cfg_; }

 private:
  const Network& net_;
  SimConfig cfg_;
  SimState state_;
  DeliveryWindow window_;
};

using StepObserver = std::function<void(const StepRecord&, const SimState&, const Network&)>;

inline MetricSeries simulate(const Network& net, const SimConfig& cfg, const StepObserver& observer = {}) {
  Simulation sim(net, cfg);
  MetricSeries series;
  series.node_count = net.node_count();
  series.records.reserve(static_cast<std::size_t>(cfg.horizon));
  for (Step t = 0; t < cfg.horizon; ++t) {
    series.records.push_back(sim.advance());
    if (observer) observer(series.records.back(), sim.state(), net);
  }
  return series;
}

inline Network build_network(const SimConfig& cfg) {
  RngStream rng = network_rng(cfg.seed);
  return build_ba(cfg.graph, rng);
}

// Builds the network from the seed, then simulates `horizon` steps.
inline MetricSeries run(const SimConfig& cfg, const StepObserver& observer = {}) {
  cfg.validate();
  const Network net = build_network(cfg);
  return simulate(net, cfg, observer);
}

}  // namespace sfroute
