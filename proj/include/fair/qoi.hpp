#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fair/errors.hpp"
#include "fair/fuzzy.hpp"
#include "fair/stats.hpp"

// The per-aggregator inference module: derives Completeness, Consistency and
// child QoI from the witness reports of one subtree, infers QoI_out, and picks
// which witnesses feed the aggregation function.

namespace fair::qoi {

using NodeId = std::uint32_t;

struct WitnessReport {
  NodeId witness = 0;
  double value = 0.0;
  double qoi = 0.0;
  bool present = false;

  static WitnessReport absent(NodeId id) noexcept { return {id, 0.0, 0.0, false}; }

  friend bool operator==(const WitnessReport&, const WitnessReport&) = default;
};

struct QoIInputs {
  double completeness = 0.0;
  double consistency = 0.0;
  double child_qoi = 0.0;
};

struct FilterConfig {
  std::size_t k = 3;
  double threshold = 0.8;
  double consistency_scale = 0.5;
  // When the iterative path misses the threshold and at most this many reports
  // are present, every k-subset is evaluated before picking the best. 0 turns
  // the exhaustive pass off.
  std::size_t exhaustive_limit = 8;

  void validate() const {
    if (k < 1) throw ConfigError("filter: k >= 1 violated");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("filter: threshold in [0,1] violated");
    if (!(consistency_scale > 0.0) || !std::isfinite(consistency_scale))
      throw ConfigError("filter: consistency_scale > 0 violated");
  }

  friend bool operator==(const FilterConfig&, const FilterConfig&) = default;
};

struct Evaluation {
  std::vector<NodeId> selection;  // ascending ids
  QoIInputs inputs;
  double qoi = 0.0;
};

struct SubtreeVerdict {
  std::vector<NodeId> selected;  // ascending ids
  std::optional<double> value;   // mean of the selected values; empty when nothing was present
  double qoi_out = 0.0;
  bool threshold_met = false;
  std::vector<Evaluation> evaluations;  // in evaluation order
  std::size_t discards = 0;
};

inline double completeness(std::span<const WitnessReport> reports, std::size_t expected) {
  if (expected == 0) throw ConfigError("completeness: expected report count must be positive");
  const auto present = static_cast<std::size_t>(
      std::count_if(reports.begin(), reports.end(), [](const WitnessReport& r) { return r.present; }));
  if (present > expected) throw PreconditionError("completeness: more present reports than expected");
  return static_cast<double>(present) / static_cast<double>(expected);
}

/// 1 - min(1, CV / scale), with CV the population coefficient of variation.
/// Agreement maps to 1.
inline double consistency(std::span<const double> values, double scale = 1.0) {
  if (values.empty()) throw PreconditionError("consistency: needs at least one value");
  const double sigma = stats::population_stddev(values);
  const double m = stats::mean(values);
  if (sigma == 0.0) return 1.0;
  if (m == 0.0) return 0.0;
  return 1.0 - std::min(1.0, sigma / (std::abs(m) * scale));
}

inline double child_qoi(std::span<const WitnessReport> reports) {
  std::vector<double> qois;
  for (const WitnessReport& r : reports)
    if (r.present) qois.push_back(r.qoi);
  if (qois.empty()) throw PreconditionError("child_qoi: no present reports");
  return std::clamp(stats::mean(qois), 0.0, 1.0);
}

/// Weighted-average Mamdani inference over the three crisp inputs; 0 when no
/// rule fires.
inline double evaluate_qoi(const QoIInputs& in, const fuzzy::RuleBase& rb) {
  std::vector<double> crisp;
  crisp.reserve(rb.inputs().size());
  for (const fuzzy::LinguisticVariable& var : rb.inputs()) {
    const std::string& n = var.name();
    if (n == fuzzy::names::kQoI) crisp.push_back(in.child_qoi);
    else if (n == fuzzy::names::kConsistency) crisp.push_back(in.consistency);
    else if (n == fuzzy::names::kCompleteness) crisp.push_back(in.completeness);
    else throw ConfigError("rule base input '" + n + "' is not one of QoI, Consistency, Completeness");
  }
  const auto firings = rb.fire(crisp);
  if (firings.empty()) return 0.0;
  return std::clamp(fuzzy::defuzzify_weighted_average(rb, firings), 0.0, 1.0);
}

namespace detail {

inline std::vector<const WitnessReport*> ranked_present(std::span<const WitnessReport> reports) {
  std::vector<const WitnessReport*> out;
  for (const WitnessReport& r : reports)
    if (r.present) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(), [](const WitnessReport* a, const WitnessReport* b) {
    if (a->qoi != b->qoi) return a->qoi > b->qoi;
    return a->witness < b->witness;
  });
  return out;
}

inline double mean_value(std::span<const WitnessReport* const> sel) {
  std::vector<double> v;
  v.reserve(sel.size());
  for (const WitnessReport* r : sel) v.push_back(r->value);
  return stats::mean(v);
}

inline std::vector<NodeId> ids(std::span<const WitnessReport* const> sel) {
  std::vector<NodeId> out;
  out.reserve(sel.size());
  for (const WitnessReport* r : sel) out.push_back(r->witness);
  std::sort(out.begin(), out.end());
  return out;
}

// Reports sorted by id, so the harmonized value does not depend on rank order.
inline std::vector<const WitnessReport*> by_id(std::vector<const WitnessReport*> sel) {
  std::sort(sel.begin(), sel.end(),
            [](const WitnessReport* a, const WitnessReport* b) { return a->witness < b->witness; });
  return sel;
}

}  // namespace detail

/// Witness-selection filter. Starts from the k present reports with the
/// highest reported QoI (ties by id). While QoI_out stays below the threshold
/// and unconsidered reports remain, the selected report with the lowest QoI is
/// swapped for the next candidate. If the threshold is never met, the best
/// evaluated combination wins (first evaluated on ties), after an exhaustive
/// pass over all k-subsets when at most `exhaustive_limit` reports are present.
inline SubtreeVerdict select_witnesses(std::span<const WitnessReport> reports, std::size_t expected,
                                       const FilterConfig& cfg, const fuzzy::RuleBase& rb) {
  SubtreeVerdict verdict;
  const auto ranked = detail::ranked_present(reports);
  if (ranked.empty()) return verdict;
  const double compl_ratio = completeness(reports, expected);
  const std::size_t k = std::min(cfg.k, ranked.size());

  auto evaluate = [&](std::vector<const WitnessReport*> sel) {
    sel = detail::by_id(std::move(sel));
    std::vector<double> values, qois;
    for (const WitnessReport* r : sel) {
      values.push_back(r->value);
      qois.push_back(r->qoi);
    }
    Evaluation e;
    e.selection = detail::ids(sel);
    e.inputs = {compl_ratio, consistency(values, cfg.consistency_scale),
                std::clamp(stats::mean(qois), 0.0, 1.0)};
    e.qoi = evaluate_qoi(e.inputs, rb);
    verdict.evaluations.push_back(std::move(e));
    return verdict.evaluations.back().qoi;
  };

  std::vector<const WitnessReport*> current(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
  std::size_t next = k;
  double q = evaluate(current);
  while (q < cfg.threshold && next < ranked.size()) {
    // Lowest QoI; among ties, the one ranked last.
    std::size_t drop = 0;
    for (std::size_t i = 1; i < current.size(); ++i)
      if (current[i]->qoi <= current[drop]->qoi) drop = i;
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(drop));
    current.push_back(ranked[next++]);
    ++verdict.discards;
    q = evaluate(current);
  }

  if (q >= cfg.threshold) {
    const auto sel = detail::by_id(current);
    verdict.selected = detail::ids(sel);
    verdict.value = detail::mean_value(sel);
    verdict.qoi_out = q;
    verdict.threshold_met = true;
    return verdict;
  }

  if (ranked.size() > k && ranked.size() <= cfg.exhaustive_limit) {
    // Lexicographic k-subsets of the ranked list.
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      std::vector<const WitnessReport*> sel;
      for (std::size_t i : idx) sel.push_back(ranked[i]);
      const auto key = detail::ids(sel);
      const bool seen = std::any_of(verdict.evaluations.begin(), verdict.evaluations.end(),
                                    [&](const Evaluation& e) { return e.selection == key; });
      if (!seen) evaluate(std::move(sel));
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == ranked.size() - k + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }

  const auto best = std::max_element(verdict.evaluations.begin(), verdict.evaluations.end(),
                                     [](const Evaluation& a, const Evaluation& b) { return a.qoi < b.qoi; });
  std::vector<const WitnessReport*> sel;
  for (NodeId id : best->selection)
    for (const WitnessReport* r : ranked)
      if (r->witness == id) sel.push_back(r);
  verdict.selected = best->selection;
  verdict.value = detail::mean_value(sel);
  verdict.qoi_out = best->qoi;
  verdict.threshold_met = best->qoi >= cfg.threshold;
  return verdict;
}

/// Filter-off baseline: the first k present reports in arrival order, value
/// averaged, QoI passed through as the mean reported QoI. Nothing is evaluated
/// or discarded.
inline SubtreeVerdict first_k_passthrough(std::span<const WitnessReport> reports, const FilterConfig& cfg) {
  SubtreeVerdict verdict;
  std::vector<const WitnessReport*> sel;
  for (const WitnessReport& r : reports) {
    if (sel.size() == cfg.k) break;
    if (r.present) sel.push_back(&r);
  }
  if (sel.empty()) return verdict;
  sel = detail::by_id(std::move(sel));
  std::vector<double> qois;
  for (const WitnessReport* r : sel) qois.push_back(r->qoi);
  verdict.selected = detail::ids(sel);
  verdict.value = detail::mean_value(sel);
  verdict.qoi_out = std::clamp(stats::mean(qois), 0.0, 1.0);
  verdict.threshold_met = verdict.qoi_out >= cfg.threshold;
  return verdict;
}

enum class Band { kDoNotUse, kNonSensitiveOnly, kHighConfidence };

inline Band classify(double qoi) noexcept {
  if (qoi <= 0.5) return Band::kDoNotUse;
  if (qoi <= 0.8) return Band::kNonSensitiveOnly;
  return Band::kHighConfidence;
}

inline std::string_view to_string(Band b) noexcept {
  switch (b) {
    case Band::kDoNotUse: return "do-not-use";
    case Band::kNonSensitiveOnly: return "non-sensitive-only";
    case Band::kHighConfidence: return "high-confidence";
  }
  return "?";
}

}  // namespace fair::qoi
