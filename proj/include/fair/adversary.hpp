#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fair/errors.hpp"
#include "fair/qoi.hpp"
#include "fair/random.hpp"
#include "fair/topology.hpp"

// Attacker models and link-failure injection. All randomness is a function of
// (seed, epoch, node), so replays are bit-identical.

namespace fair::adv {

using NodeId = topo::NodeId;

enum class Model { kNone, kNaive, kSmart, kSmartTopology };

inline std::string_view to_string(Model m) noexcept {
  switch (m) {
    case Model::kNone: return "none";
    case Model::kNaive: return "naive";
    case Model::kSmart: return "smart";
    case Model::kSmartTopology: return "smart_topology";
  }
  return "?";
}

inline std::optional<Model> parse_model(std::string_view s) noexcept {
  for (Model m : {Model::kNone, Model::kNaive, Model::kSmart, Model::kSmartTopology})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

struct AdversaryConfig {
  Model model = Model::kNone;
  double compromise_fraction = 0.0;
  double link_failure_fraction = 0.0;
  double naive_factor_lo = 0.10;
  double naive_factor_hi = 0.90;
  double smart_factor = 0.50;
  std::optional<std::size_t> target_level;  // smart_topology; level 0 when unset
  std::uint64_t seed = 1;

  bool colluding() const noexcept { return model == Model::kSmart || model == Model::kSmartTopology; }

  void validate() const {
    auto fraction = [](double f) { return f >= 0.0 && f <= 1.0; };
    if (!fraction(compromise_fraction)) throw ConfigError("adversary: compromise_fraction in [0,1] violated");
    if (!fraction(link_failure_fraction)) throw ConfigError("adversary: link_failure_fraction in [0,1] violated");
    if (!(naive_factor_lo > 0.0 && naive_factor_lo <= naive_factor_hi && std::isfinite(naive_factor_hi)))
      throw ConfigError("adversary: naive factor range must satisfy 0 < lo <= hi");
    if (!(smart_factor > 0.0) || !std::isfinite(smart_factor))
      throw ConfigError("adversary: smart_factor > 0 violated");
  }

  friend bool operator==(const AdversaryConfig&, const AdversaryConfig&) = default;
};

struct CompromiseSet {
  std::vector<NodeId> compromised;                  // ascending
  std::map<std::size_t, double> collusion_factor;   // aggregation point -> agreed factor

  bool contains(NodeId id) const noexcept {
    return std::binary_search(compromised.begin(), compromised.end(), id);
  }
};

namespace detail {

inline std::vector<NodeId> keyed_shuffle(std::vector<NodeId> ids, std::uint64_t seed, std::uint64_t epoch,
                                         std::uint64_t salt) {
  std::vector<std::pair<std::uint64_t, NodeId>> keyed;
  keyed.reserve(ids.size());
  for (NodeId id : ids) keyed.emplace_back(rng::hash({seed, rng::tag(rng::Stream::kCompromise), epoch, salt, id}), id);
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = keyed[i].second;
  return ids;
}

}  // namespace detail

/// Naive and smart: a uniform subset of all nodes. smart_topology: the budget
/// first fills whole witness groups of the target level (points in keyed
/// order), and whatever cannot fill a whole group is spread at random.
inline CompromiseSet select_compromised(const topo::Network& net, const AdversaryConfig& cfg) {
  CompromiseSet cs;
  if (cfg.model == Model::kNone) return cs;
  const auto budget = static_cast<std::size_t>(std::llround(cfg.compromise_fraction * static_cast<double>(net.nodes.size())));
  std::vector<NodeId> chosen;

  if (cfg.model == Model::kSmartTopology) {
    const std::size_t level = cfg.target_level.value_or(0);
    if (level >= net.levels.size())
      throw ConfigError("adversary: target_level " + std::to_string(level) + " does not exist (network has " +
                        std::to_string(net.levels.size()) + " levels)");
    std::vector<NodeId> order;  // point ids at the target level, shuffled
    for (std::size_t p : net.levels[level]) order.push_back(static_cast<NodeId>(p));
    order = detail::keyed_shuffle(std::move(order), cfg.seed, net.epoch, 1);
    for (NodeId p : order) {
      std::vector<NodeId> fresh;
      for (NodeId w : net.points[p].witnesses)
        if (std::find(chosen.begin(), chosen.end(), w) == chosen.end()) fresh.push_back(w);
      if (fresh.size() <= budget - chosen.size()) chosen.insert(chosen.end(), fresh.begin(), fresh.end());
    }
  }

  std::vector<NodeId> rest;
  for (NodeId id : net.nodes)
    if (std::find(chosen.begin(), chosen.end(), id) == chosen.end()) rest.push_back(id);
  rest = detail::keyed_shuffle(std::move(rest), cfg.seed, net.epoch, 0);
  for (std::size_t i = 0; chosen.size() < budget && i < rest.size(); ++i) chosen.push_back(rest[i]);

  std::sort(chosen.begin(), chosen.end());
  cs.compromised = std::move(chosen);
  if (cfg.colluding())
    for (const topo::AggregationPoint& p : net.points) cs.collusion_factor[p.id] = cfg.smart_factor;
  return cs;
}

inline double naive_factor(const AdversaryConfig& cfg, std::uint64_t epoch, NodeId node) noexcept {
  const double u = rng::uniform({cfg.seed, rng::tag(rng::Stream::kNaiveFactor), epoch, node});
  return cfg.naive_factor_lo + (cfg.naive_factor_hi - cfg.naive_factor_lo) * u;
}

/// Multiplier a compromised sensor applies to its own reading; empty for
/// honest sensors.
inline std::optional<double> sensor_factor(NodeId node, const CompromiseSet& cs, const AdversaryConfig& cfg,
                                           std::uint64_t epoch) noexcept {
  if (cfg.model == Model::kNone || !cs.contains(node)) return std::nullopt;
  if (cfg.model == Model::kNaive) return naive_factor(cfg, epoch, node);
  return cfg.smart_factor;
}

/// How one member of a witness group rewrites its outgoing report: it reports
/// `factor` times the honest output of member `anchor`, optionally with a
/// forged QoI.
struct Corruption {
  std::size_t anchor = 0;
  double factor = 1.0;
  std::optional<double> forged_qoi;
};

/// Corruption plan for the witnesses of one aggregation point, in group order.
/// Naive members scale their own output independently. Colluders all scale the
/// output of the first colluder in the group by the point's agreed factor and
/// claim QoI 1, so their reports are pairwise identical.
inline std::vector<std::optional<Corruption>> plan_group(std::span<const NodeId> senders, std::size_t point,
                                                         const CompromiseSet& cs, const AdversaryConfig& cfg,
                                                         std::uint64_t epoch) {
  std::vector<std::optional<Corruption>> plan(senders.size());
  if (cfg.model == Model::kNone) return plan;
  std::optional<std::size_t> anchor;
  for (std::size_t i = 0; i < senders.size(); ++i) {
    if (!cs.contains(senders[i])) continue;
    if (cfg.model == Model::kNaive) {
      plan[i] = Corruption{i, naive_factor(cfg, epoch, senders[i]), std::nullopt};
      continue;
    }
    if (!anchor) anchor = i;
    auto it = cs.collusion_factor.find(point);
    const double factor = it == cs.collusion_factor.end() ? cfg.smart_factor : it->second;
    plan[i] = Corruption{*anchor, factor, 1.0};
  }
  return plan;
}

/// Applies plan_group to a group of reports from the witnesses of `point`.
inline void collude(std::span<qoi::WitnessReport> group, std::size_t point, const CompromiseSet& cs,
                    const AdversaryConfig& cfg, std::uint64_t epoch) {
  std::vector<NodeId> senders;
  for (const auto& r : group) senders.push_back(r.witness);
  const auto plan = plan_group(senders, point, cs, cfg, epoch);
  const std::vector<qoi::WitnessReport> honest(group.begin(), group.end());
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (!plan[i]) continue;
    group[i].value = honest[plan[i]->anchor].value * plan[i]->factor;
    if (plan[i]->forged_qoi) group[i].qoi = *plan[i]->forged_qoi;
  }
}

/// Single-report form. For colluders the caller passes the group's agreed
/// honest value in `honest`.
inline qoi::WitnessReport corrupt_report(const qoi::WitnessReport& honest, NodeId node, std::size_t point,
                                         const CompromiseSet& cs, const AdversaryConfig& cfg, std::uint64_t epoch) {
  if (cfg.model == Model::kNone) return honest;
  if (!cs.contains(node)) throw PreconditionError("corrupt_report: node " + std::to_string(node) + " is honest");
  qoi::WitnessReport out = honest;
  out.witness = node;
  const NodeId senders[] = {node};
  const auto plan = plan_group(senders, point, cs, cfg, epoch);
  out.value = honest.value * plan[0]->factor;
  if (plan[0]->forged_qoi) out.qoi = *plan[0]->forged_qoi;
  return out;
}

/// Bernoulli link loss, independent per (sender, receiver, channel).
inline bool link_delivers(double fraction, std::uint64_t seed, std::uint64_t epoch, std::uint64_t sender,
                          std::uint64_t receiver, std::uint64_t channel) noexcept {
  if (fraction <= 0.0) return true;
  return rng::uniform({seed, rng::tag(rng::Stream::kLink), epoch, sender, receiver, channel}) >= fraction;
}

/// Marks each message absent with probability `fraction`.
inline std::vector<qoi::WitnessReport> apply_link_failures(std::vector<qoi::WitnessReport> messages, double fraction,
                                                           std::uint64_t seed, std::uint64_t epoch,
                                                           std::uint64_t receiver = 0) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw PreconditionError("apply_link_failures: fraction outside [0,1]");
  for (std::size_t i = 0; i < messages.size(); ++i)
    if (!link_delivers(fraction, seed, epoch, messages[i].witness, receiver, i))
      messages[i] = qoi::WitnessReport::absent(messages[i].witness);
  return messages;
}

}  // namespace fair::adv
