#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fair/errors.hpp"
#include "fair/random.hpp"

// Logical clustered aggregation hierarchy. Sensors are partitioned into
// clusters; each cluster is a level-0 aggregation point, and points are
// grouped fan_in at a time until a single top point remains. Every point
// elects an ordered witness sequence out of its descendant sensors.

namespace fair::topo {

using NodeId = std::uint32_t;

struct TopologyConfig {
  std::size_t n_sensors = 100;
  std::size_t cluster_size = 12;
  std::size_t fan_in = 3;
  std::size_t witnesses = 4;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_sensors < 1) throw ConfigError("topology: n_sensors >= 1 violated");
    if (cluster_size < 1) throw ConfigError("topology: cluster_size >= 1 violated");
    if (fan_in < 2) throw ConfigError("topology: fan_in >= 2 violated");
    if (witnesses < 1) throw ConfigError("topology: witnesses >= 1 violated");
    if (witnesses > cluster_size)
      throw ConfigError("topology: cluster_size >= witnesses violated (witnesses are drawn from cluster members)");
  }

  friend bool operator==(const TopologyConfig&, const TopologyConfig&) = default;
};

struct AggregationPoint {
  std::size_t id = 0;
  std::size_t level = 0;
  std::vector<NodeId> descendants;  // ascending
  std::vector<std::size_t> children;  // point ids one level down; empty for clusters
  std::vector<NodeId> witnesses;      // election order

  friend bool operator==(const AggregationPoint&, const AggregationPoint&) = default;
};

struct Network {
  TopologyConfig config;
  std::uint64_t epoch = 0;
  std::vector<NodeId> nodes;
  std::vector<std::vector<NodeId>> clusters;  // clusters[i] feeds point i
  std::vector<AggregationPoint> points;
  std::vector<std::vector<std::size_t>> levels;  // point ids per in-network level, bottom first

  /// The single top point; its witnesses report to the sink.
  const AggregationPoint& root() const { return points[levels.back().front()]; }
  std::size_t in_network_levels() const noexcept { return levels.size(); }

  friend bool operator==(const Network&, const Network&) = default;
};

/// Keyed pseudorandom permutation of the descendants, truncated to w. Any
/// party knowing (descendants, epoch, seed) computes the same sequence.
inline std::vector<NodeId> elect_aggregators(std::span<const NodeId> descendants, std::uint64_t epoch, std::size_t w,
                                             std::uint64_t seed) {
  if (descendants.empty()) throw PreconditionError("elect_aggregators: empty descendant set");
  std::vector<NodeId> sorted(descendants.begin(), descendants.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t set_key = sorted.size();
  for (NodeId id : sorted) set_key = rng::hash({set_key, id});

  std::vector<std::pair<std::uint64_t, NodeId>> keyed;
  keyed.reserve(sorted.size());
  for (NodeId id : sorted) keyed.emplace_back(rng::hash({seed, rng::tag(rng::Stream::kElection), epoch, set_key, id}), id);
  std::sort(keyed.begin(), keyed.end());
  keyed.erase(std::unique(keyed.begin(), keyed.end(),
                          [](const auto& a, const auto& b) { return a.second == b.second; }),
              keyed.end());

  std::vector<NodeId> out;
  const std::size_t take = std::min(w, keyed.size());
  for (std::size_t i = 0; i < take; ++i) out.push_back(keyed[i].second);
  return out;
}

/// Re-runs the election of every point for `epoch`.
inline Network reelect(Network net, std::uint64_t epoch) {
  net.epoch = epoch;
  for (AggregationPoint& p : net.points)
    p.witnesses = elect_aggregators(p.descendants, epoch, net.config.witnesses, net.config.seed);
  return net;
}

inline Network build_topology(const TopologyConfig& cfg, std::uint64_t epoch = 0) {
  cfg.validate();
  Network net;
  net.config = cfg;
  net.nodes.resize(cfg.n_sensors);
  std::iota(net.nodes.begin(), net.nodes.end(), NodeId{0});

  // Seeded shuffle, then consecutive chunks; the last chunk takes the remainder.
  std::vector<std::pair<std::uint64_t, NodeId>> keyed;
  for (NodeId id : net.nodes) keyed.emplace_back(rng::hash({cfg.seed, rng::tag(rng::Stream::kCluster), id}), id);
  std::sort(keyed.begin(), keyed.end());
  const std::size_t n_clusters = (cfg.n_sensors + cfg.cluster_size - 1) / cfg.cluster_size;
  net.clusters.resize(n_clusters);
  for (std::size_t i = 0; i < keyed.size(); ++i) net.clusters[i / cfg.cluster_size].push_back(keyed[i].second);

  std::vector<std::size_t> level;
  for (auto& cluster : net.clusters) {
    std::sort(cluster.begin(), cluster.end());
    AggregationPoint p;
    p.id = net.points.size();
    p.level = 0;
    p.descendants = cluster;
    level.push_back(p.id);
    net.points.push_back(std::move(p));
  }
  net.levels.push_back(level);

  while (level.size() > 1) {
    std::vector<std::size_t> upper;
    for (std::size_t start = 0; start < level.size(); start += cfg.fan_in) {
      AggregationPoint p;
      p.id = net.points.size();
      p.level = net.levels.size();
      for (std::size_t i = start; i < std::min(start + cfg.fan_in, level.size()); ++i) {
        p.children.push_back(level[i]);
        const auto& d = net.points[level[i]].descendants;
        p.descendants.insert(p.descendants.end(), d.begin(), d.end());
      }
      std::sort(p.descendants.begin(), p.descendants.end());
      upper.push_back(p.id);
      net.points.push_back(std::move(p));
    }
    net.levels.push_back(upper);
    level = std::move(upper);
  }
  return reelect(std::move(net), epoch);
}

namespace detail {
template <typename T>
void join(std::ostream& os, const std::vector<T>& xs) {
  if (xs.empty()) {
    os << '-';
    return;
  }
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
}
}  // namespace detail

/// Deterministic listing, one aggregation point per line.
inline std::string dump(const Network& net) {
  std::ostringstream os;
  os << "# sensors=" << net.config.n_sensors << " clusters=" << net.clusters.size()
     << " levels=" << net.levels.size() << " epoch=" << net.epoch << '\n';
  for (const AggregationPoint& p : net.points) {
    os << "level=" << p.level << " point=" << p.id << " children=";
    detail::join(os, p.children);
    os << " witnesses=";
    detail::join(os, p.witnesses);
    os << " descendants=";
    detail::join(os, p.descendants);
    os << '\n';
  }
  return os.str();
}

}  // namespace fair::topo
