#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fair/adversary.hpp"
#include "fair/aggregation.hpp"
#include "fair/errors.hpp"
#include "fair/fuzzy.hpp"
#include "fair/qoi.hpp"
#include "fair/random.hpp"
#include "fair/stats.hpp"
#include "fair/topology.hpp"

namespace fair::sim {

using NodeId = topo::NodeId;

struct SensingModel {
  double base_value = 100.0;
  double noise = 5.0;  // uniform half-width per sensor

  void validate() const {
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("sensing: noise >= 0 violated");
    if (!std::isfinite(base_value)) throw ConfigError("sensing: base_value must be finite");
  }

  friend bool operator==(const SensingModel&, const SensingModel&) = default;
};

enum class FilterMode { kOn, kOff };

inline std::string_view to_string(FilterMode m) noexcept { return m == FilterMode::kOn ? "on" : "off"; }

struct EpochResult {
  double true_value = 0.0;
  std::optional<double> reported_value;  // empty when nothing reached the sink
  double reported_qoi = 0.0;
  double relative_error = 0.0;
  double accuracy = 0.0;
  qoi::Band band = qoi::Band::kDoNotUse;

  friend bool operator==(const EpochResult&, const EpochResult&) = default;
};

/// One filter decision. `child` is the index of the reporting subtree among
/// the point's children; the sink uses level == levels.size().
struct TraceEvent {
  std::uint64_t epoch = 0;
  std::size_t level = 0;
  std::size_t point = 0;
  std::optional<NodeId> receiver;  // empty at the sink
  std::size_t child = 0;
  FilterMode mode = FilterMode::kOn;
  const qoi::SubtreeVerdict* verdict = nullptr;
};

using TraceSink = std::function<void(const TraceEvent&)>;

inline constexpr double kErrorGuard = 1e-12;

inline double relative_error(double reported, double truth) noexcept {
  return std::abs(reported - truth) / std::max(std::abs(truth), kErrorGuard);
}

inline double accuracy_from_error(double rel) noexcept { return 1.0 - std::min(1.0, rel); }

namespace detail {

// What one witness sends up: its partial aggregate and QoI.
struct Output {
  NodeId sender = 0;
  agg::Partial partial;
  double qoi = 0.0;
  bool present = false;
};

inline constexpr std::uint64_t kSinkId = 0xffffffffULL;

inline void apply_plan(std::vector<Output>& outs, std::span<const NodeId> senders, std::size_t point,
                       const adv::CompromiseSet& cs, const adv::AdversaryConfig& cfg, std::uint64_t epoch) {
  const auto plan = adv::plan_group(senders, point, cs, cfg, epoch);
  const std::vector<Output> honest = outs;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    if (!plan[i]) continue;
    const Output& src = honest[plan[i]->anchor];
    outs[i].present = src.present;
    outs[i].partial = agg::scaled(src.partial, plan[i]->factor);
    outs[i].qoi = plan[i]->forged_qoi.value_or(honest[i].qoi);
  }
}

// Harmonized partial for the selected witnesses: the verdict's mean crisp
// value over the mean reading count.
inline agg::Partial harmonize(const qoi::SubtreeVerdict& v, std::span<const Output> outs, agg::Kind kind) {
  std::vector<double> counts;
  for (NodeId id : v.selected)
    for (const Output& o : outs)
      if (o.sender == id) counts.push_back(static_cast<double>(o.partial.count));
  const auto count = static_cast<std::uint64_t>(std::llround(stats::mean(counts)));
  return agg::from_crisp(kind, *v.value, std::max<std::uint64_t>(count, 1));
}

struct Context {
  const topo::Network& net;
  const adv::AdversaryConfig& adv;
  const qoi::FilterConfig& filter;
  const fuzzy::RuleBase& rb;
  agg::Kind kind;
  FilterMode mode;
  std::uint64_t epoch;
  const adv::CompromiseSet& cs;
  const TraceSink* trace;

  bool delivered(std::uint64_t sender, std::uint64_t receiver, std::uint64_t channel) const noexcept {
    if (sender == receiver) return true;
    return adv::link_delivers(adv.link_failure_fraction, adv.seed, epoch, sender, receiver, channel);
  }

  // Receives the witness outputs of `child` at `receiver` and filters them.
  qoi::SubtreeVerdict receive(const std::vector<Output>& child_outs, std::size_t child_point, std::uint64_t receiver,
                              std::size_t level, std::size_t point, std::size_t child_index) const {
    std::vector<qoi::WitnessReport> reports;
    reports.reserve(child_outs.size());
    for (const Output& o : child_outs) {
      if (o.present && delivered(o.sender, receiver, child_point))
        reports.push_back({o.sender, agg::finalize(o.partial), o.qoi, true});
      else
        reports.push_back(qoi::WitnessReport::absent(o.sender));
    }
    qoi::SubtreeVerdict v = mode == FilterMode::kOn
                                ? qoi::select_witnesses(reports, child_outs.size(), filter, rb)
                                : qoi::first_k_passthrough(reports, filter);
    if (trace && *trace) {
      TraceEvent ev{epoch, level, point, std::nullopt, child_index, mode, &v};
      if (receiver != kSinkId) ev.receiver = static_cast<NodeId>(receiver);
      (*trace)(ev);
    }
    return v;
  }
};

}  // namespace detail

/// One query epoch, bottom-up through the hierarchy of `net` (whose witnesses
/// are taken as elected). Honest readings come from (seed, epoch, node).
inline EpochResult run_epoch(const topo::Network& net, const adv::AdversaryConfig& adv_cfg,
                             const qoi::FilterConfig& filter, const fuzzy::RuleBase& rb, agg::Kind kind,
                             const SensingModel& sensing, std::uint64_t epoch, std::uint64_t seed,
                             FilterMode mode = FilterMode::kOn, const TraceSink* trace = nullptr) {
  using detail::Output;
  const std::size_t n = net.nodes.size();

  std::vector<double> readings(n);
  for (NodeId id : net.nodes) {
    const double u = rng::uniform({seed, rng::tag(rng::Stream::kSensing), epoch, id});
    readings[id] = sensing.base_value + sensing.noise * (2.0 * u - 1.0);
  }
  EpochResult result;
  result.true_value = agg::finalize(agg::fold(kind, readings));

  const adv::CompromiseSet cs = adv::select_compromised(net, adv_cfg);
  std::vector<double> sensed = readings;
  for (NodeId id : net.nodes)
    if (auto f = adv::sensor_factor(id, cs, adv_cfg, epoch)) sensed[id] *= *f;

  const detail::Context ctx{net, adv_cfg, filter, rb, kind, mode, epoch, cs, trace};
  std::vector<std::vector<Output>> outputs(net.points.size());

  // Cluster level: witnesses aggregate the readings they hear; their QoI is
  // the fraction of the cluster heard.
  for (std::size_t pid : net.levels.front()) {
    const topo::AggregationPoint& p = net.points[pid];
    auto& outs = outputs[pid];
    for (NodeId w : p.witnesses) {
      Output o{w, agg::Partial::identity(kind), 0.0, true};
      for (NodeId m : p.descendants)
        if (ctx.delivered(m, w, pid)) o.partial = agg::merge(o.partial, agg::Partial::of(kind, sensed[m]));
      o.qoi = static_cast<double>(o.partial.count) / static_cast<double>(p.descendants.size());
      outs.push_back(o);
    }
    detail::apply_plan(outs, p.witnesses, pid, cs, adv_cfg, epoch);
  }

  // In-network levels: each witness filters every child subtree, aggregates
  // the harmonized results and forwards one (partial, QoI).
  for (std::size_t level = 1; level < net.levels.size(); ++level) {
    for (std::size_t pid : net.levels[level]) {
      const topo::AggregationPoint& p = net.points[pid];
      auto& outs = outputs[pid];
      for (NodeId w : p.witnesses) {
        std::vector<agg::SubtreeResult> subtrees;
        for (std::size_t c = 0; c < p.children.size(); ++c) {
          const std::size_t cid = p.children[c];
          const auto v = ctx.receive(outputs[cid], cid, w, level, pid, c);
          if (v.value) subtrees.push_back({detail::harmonize(v, outputs[cid], kind), v.qoi_out});
          else subtrees.push_back({agg::Partial::identity(kind), 0.0});
        }
        const auto merged = agg::aggregate_subtrees(subtrees, kind);
        outs.push_back({w, merged.partial, merged.qoi, !merged.partial.empty()});
      }
      detail::apply_plan(outs, p.witnesses, pid, cs, adv_cfg, epoch);
    }
  }

  // Sink: one subtree, the top point's witnesses.
  const topo::AggregationPoint& root = net.root();
  const auto v = ctx.receive(outputs[root.id], root.id, detail::kSinkId, net.levels.size(), root.id, 0);
  if (!v.value) {
    result.reported_value.reset();
    result.reported_qoi = 0.0;
    result.relative_error = 1.0;
    result.accuracy = 0.0;
    result.band = qoi::Band::kDoNotUse;
    return result;
  }
  const agg::SubtreeResult top[] = {{detail::harmonize(v, outputs[root.id], kind), v.qoi_out}};
  const auto final_result = agg::aggregate_subtrees(top, kind);
  result.reported_value = agg::finalize(final_result.partial);
  result.reported_qoi = final_result.qoi;
  result.relative_error = relative_error(*result.reported_value, result.true_value);
  result.accuracy = accuracy_from_error(result.relative_error);
  result.band = qoi::classify(result.reported_qoi);
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepParam { kNone, kCompromiseFraction, kLinkFailureFraction };

inline std::string_view to_string(SweepParam p) noexcept {
  switch (p) {
    case SweepParam::kNone: return "none";
    case SweepParam::kCompromiseFraction: return "compromise_fraction";
    case SweepParam::kLinkFailureFraction: return "link_failure_fraction";
  }
  return "?";
}

inline std::optional<SweepParam> parse_sweep_param(std::string_view s) noexcept {
  for (SweepParam p : {SweepParam::kNone, SweepParam::kCompromiseFraction, SweepParam::kLinkFailureFraction})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

struct SweepSpec {
  SweepParam param = SweepParam::kNone;
  std::vector<double> values;  // ignored for kNone
  std::size_t repetitions = 10;
  std::vector<FilterMode> modes{FilterMode::kOn};

  void validate() const {
    if (repetitions < 1) throw ConfigError("sweep: repetitions >= 1 violated");
    if (modes.empty()) throw ConfigError("sweep: at least one filter mode required");
    if (param != SweepParam::kNone) {
      if (values.empty()) throw ConfigError("sweep: swept parameter needs at least one value");
      for (double v : values)
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("sweep: swept fractions must lie in [0,1]");
    }
  }

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

/// Everything an epoch needs apart from the per-repetition seed.
struct Scenario {
  topo::TopologyConfig topology;
  adv::AdversaryConfig adversary;
  qoi::FilterConfig filter;
  fuzzy::RuleBase rules = fuzzy::fair_default_rulebase();
  agg::Kind kind = agg::Kind::kAverage;
  SensingModel sensing;
};

struct SweepRow {
  SweepParam param = SweepParam::kNone;
  double param_value = 0.0;
  std::size_t repetition = 0;
  FilterMode mode = FilterMode::kOn;
  std::uint64_t epoch = 0;
  std::uint64_t seed = 0;
  adv::AdversaryConfig adversary;  // effective, after applying the swept value
  EpochResult result;
};

inline std::vector<std::uint64_t> repetition_seeds(std::uint64_t master, std::size_t repetitions) {
  std::vector<std::uint64_t> seeds(repetitions);
  for (std::size_t r = 0; r < repetitions; ++r) seeds[r] = rng::hash({master, rng::tag(rng::Stream::kRepetition), r});
  return seeds;
}

/// Runs every (value, repetition, mode) cell. Repetition r uses seeds[r] for
/// the topology, sensing and adversary, and epoch r, so cells that differ only
/// in the swept value or the mode share honest readings. Rows come back in
/// (value, repetition, mode) order whatever `threads` is.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const Scenario& base,
                                       std::span<const std::uint64_t> seeds, unsigned threads = 1,
                                       const TraceSink* trace = nullptr) {
  spec.validate();
  if (seeds.size() != spec.repetitions) throw ConfigError("sweep: need one seed per repetition");
  const std::vector<double> values =
      spec.param == SweepParam::kNone ? std::vector<double>{0.0} : spec.values;

  std::vector<topo::Network> nets;
  nets.reserve(seeds.size());
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    topo::TopologyConfig tc = base.topology;
    tc.seed = seeds[r];
    nets.push_back(topo::build_topology(tc, r));
  }

  std::vector<SweepRow> rows(values.size() * spec.repetitions * spec.modes.size());
  for (std::size_t vi = 0; vi < values.size(); ++vi)
    for (std::size_t r = 0; r < spec.repetitions; ++r)
      for (std::size_t mi = 0; mi < spec.modes.size(); ++mi) {
        SweepRow& row = rows[(vi * spec.repetitions + r) * spec.modes.size() + mi];
        row.param = spec.param;
        row.param_value = spec.param == SweepParam::kNone ? 0.0 : values[vi];
        row.repetition = r;
        row.mode = spec.modes[mi];
        row.epoch = r;
        row.seed = seeds[r];
        row.adversary = base.adversary;
        row.adversary.seed = rng::hash({seeds[r], rng::tag(rng::Stream::kCompromise)});
        if (spec.param == SweepParam::kCompromiseFraction) row.adversary.compromise_fraction = values[vi];
        if (spec.param == SweepParam::kLinkFailureFraction) row.adversary.link_failure_fraction = values[vi];
        row.adversary.validate();
      }

  auto run_cell = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.result = run_epoch(nets[row.repetition], row.adversary, base.filter, base.rules, base.kind, base.sensing,
                           row.epoch, row.seed, row.mode, trace);
  };

  if (threads <= 1 || trace) {
    for (std::size_t i = 0; i < rows.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) run_cell(i);
      });
  }
  return rows;
}

struct GroupSummary {
  SweepParam param = SweepParam::kNone;
  double param_value = 0.0;
  FilterMode mode = FilterMode::kOn;
  std::size_t rows = 0;
  double mean_accuracy = 0.0;
  double sd_accuracy = 0.0;
  double mean_qoi = 0.0;
  double sd_qoi = 0.0;
};

struct Summary {
  std::vector<GroupSummary> groups;  // first-appearance order
  double spearman = 0.0;             // reported_qoi vs accuracy over all rows; NaN if undefined
};

/// Per (value, mode) means and sample standard deviations, plus the Spearman
/// correlation between reported QoI and accuracy.
inline Summary summarize(std::span<const SweepRow> table) {
  if (table.empty()) throw PreconditionError("summarize: empty table");
  Summary s;
  std::vector<std::vector<double>> acc, q;
  for (const SweepRow& row : table) {
    std::size_t g = 0;
    while (g < s.groups.size() && !(s.groups[g].param_value == row.param_value && s.groups[g].mode == row.mode)) ++g;
    if (g == s.groups.size()) {
      s.groups.push_back({row.param, row.param_value, row.mode});
      acc.emplace_back();
      q.emplace_back();
    }
    acc[g].push_back(row.result.accuracy);
    q[g].push_back(row.result.reported_qoi);
  }
  for (std::size_t g = 0; g < s.groups.size(); ++g) {
    s.groups[g].rows = acc[g].size();
    s.groups[g].mean_accuracy = stats::mean(acc[g]);
    s.groups[g].sd_accuracy = stats::sample_stddev(acc[g]);
    s.groups[g].mean_qoi = stats::mean(q[g]);
    s.groups[g].sd_qoi = stats::sample_stddev(q[g]);
  }
  std::vector<double> all_q, all_acc;
  for (const SweepRow& row : table) {
    all_q.push_back(row.result.reported_qoi);
    all_acc.push_back(row.result.accuracy);
  }
  s.spearman = stats::spearman(all_q, all_acc);
  return s;
}

}  // namespace fair::sim
