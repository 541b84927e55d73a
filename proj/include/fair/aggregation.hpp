#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fair/errors.hpp"
#include "fair/stats.hpp"

// Decomposable aggregation functions. Each kind carries a mergeable partial
// state so a tree of merges over any grouping of readings finalizes to the
// same result as f over all readings.

namespace fair::agg {

enum class Kind { kAverage, kMax, kMin, kSum };

inline std::string_view to_string(Kind k) noexcept {
  switch (k) {
    case Kind::kAverage: return "average";
    case Kind::kMax: return "max";
    case Kind::kMin: return "min";
    case Kind::kSum: return "sum";
  }
  return "?";
}

inline std::optional<Kind> parse_kind(std::string_view s) noexcept {
  for (Kind k : {Kind::kAverage, Kind::kMax, Kind::kMin, Kind::kSum})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

/// Partial aggregate. `value` holds the running sum (average, sum) or the
/// extremum (max, min); `count` is the number of underlying readings.
struct Partial {
  Kind kind = Kind::kAverage;
  double value = 0.0;
  std::uint64_t count = 0;

  static Partial identity(Kind k) noexcept {
    switch (k) {
      case Kind::kMax: return {k, -std::numeric_limits<double>::infinity(), 0};
      case Kind::kMin: return {k, std::numeric_limits<double>::infinity(), 0};
      default: return {k, 0.0, 0};
    }
  }

  static Partial of(Kind k, double reading) noexcept { return {k, reading, 1}; }

  bool empty() const noexcept { return count == 0; }

  friend bool operator==(const Partial&, const Partial&) = default;
};

inline Partial merge(const Partial& a, const Partial& b) {
  if (a.kind != b.kind) throw ConfigError("cannot merge partials of different aggregation kinds");
  Partial out{a.kind, 0.0, a.count + b.count};
  switch (a.kind) {
    case Kind::kAverage:
    case Kind::kSum: out.value = a.value + b.value; break;
    case Kind::kMax: out.value = std::max(a.value, b.value); break;
    case Kind::kMin: out.value = std::min(a.value, b.value); break;
  }
  return out;
}

inline double finalize(const Partial& p) {
  if (p.empty()) throw NoData("cannot finalize an empty " + std::string(to_string(p.kind)) + " partial");
  if (p.kind == Kind::kAverage) return p.value / static_cast<double>(p.count);
  return p.value;
}

inline Partial fold(Kind k, std::span<const double> readings) noexcept {
  Partial acc = Partial::identity(k);
  for (double r : readings) acc = merge(acc, Partial::of(k, r));
  return acc;
}

/// Rebuilds a partial whose finalized value is `crisp` over `count` readings.
inline Partial from_crisp(Kind k, double crisp, std::uint64_t count) noexcept {
  if (count == 0) return Partial::identity(k);
  return {k, k == Kind::kAverage ? crisp * static_cast<double>(count) : crisp, count};
}

/// Multiplies the finalized value by `factor`, leaving the reading count alone.
inline Partial scaled(Partial p, double factor) noexcept {
  if (!p.empty()) p.value *= factor;
  return p;
}

struct SubtreeResult {
  Partial partial;
  double qoi = 0.0;
};

/// Merges subtree partials and averages their QoI (unweighted).
inline SubtreeResult aggregate_subtrees(std::span<const SubtreeResult> results, Kind kind) {
  if (results.empty()) throw NoData("no subtree results to aggregate");
  SubtreeResult out{Partial::identity(kind), 0.0};
  std::vector<double> qois;
  qois.reserve(results.size());
  for (const SubtreeResult& r : results) {
    out.partial = merge(out.partial, r.partial);
    qois.push_back(r.qoi);
  }
  const auto [lo, hi] = std::minmax_element(qois.begin(), qois.end());
  out.qoi = std::clamp(stats::mean(qois), *lo, *hi);
  return out;
}

}  // namespace fair::agg
