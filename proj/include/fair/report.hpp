#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>

#include "fair/config.hpp"
#include "fair/simulator.hpp"

// CSV result table and the human-readable sweep summary.

namespace fair::report {

inline constexpr const char* kCsvHeader =
    "parameter,value,repetition,filter,epoch,seed,aggregation,model,compromise_fraction,"
    "link_failure_fraction,n_sensors,cluster_size,fan_in,witnesses,k,threshold,consistency_scale,"
    "true_value,reported_value,reported_qoi,relative_error,accuracy,band";

/// First line is a '#' comment carrying the config hash, then the header row,
/// then one row per cell. Numbers use the shortest round-trip form.
inline void write_csv(std::ostream& os, const config::RunConfig& cfg, std::span<const sim::SweepRow> rows) {
  using config::format_number;
  os << "# config_hash=" << config::config_hash(cfg) << '\n' << kCsvHeader << '\n';
  for (const sim::SweepRow& r : rows) {
    const auto& a = r.adversary;
    os << sim::to_string(r.param) << ',' << format_number(r.param_value) << ',' << r.repetition << ','
       << sim::to_string(r.mode) << ',' << r.epoch << ',' << r.seed << ',' << agg::to_string(cfg.aggregation) << ','
       << adv::to_string(a.model) << ',' << format_number(a.compromise_fraction) << ','
       << format_number(a.link_failure_fraction) << ',' << cfg.topology.n_sensors << ','
       << cfg.topology.cluster_size << ',' << cfg.topology.fan_in << ',' << cfg.topology.witnesses << ','
       << cfg.filter.k << ',' << format_number(cfg.filter.threshold) << ','
       << format_number(cfg.filter.consistency_scale) << ',' << format_number(r.result.true_value) << ','
       << (r.result.reported_value ? format_number(*r.result.reported_value) : std::string()) << ','
       << format_number(r.result.reported_qoi) << ',' << format_number(r.result.relative_error) << ','
       << format_number(r.result.accuracy) << ',' << qoi::to_string(r.result.band) << '\n';
  }
}

inline std::string fixed(double v, int digits = 4) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline void write_summary(std::ostream& os, const sim::Summary& s) {
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %-8s %-6s %6s  %-20s %-20s\n", "parameter", "value", "filter", "rows",
                "accuracy mean+-sd", "qoi mean+-sd");
  os << line;
  for (const sim::GroupSummary& g : s.groups) {
    const std::string acc = fixed(g.mean_accuracy) + " +- " + fixed(g.sd_accuracy);
    const std::string q = fixed(g.mean_qoi) + " +- " + fixed(g.sd_qoi);
    std::snprintf(line, sizeof line, "%-22s %-8s %-6s %6zu  %-20s %-20s\n", std::string(sim::to_string(g.param)).c_str(),
                  config::format_number(g.param_value).c_str(), std::string(sim::to_string(g.mode)).c_str(), g.rows,
                  acc.c_str(), q.c_str());
    os << line;
  }
  os << "spearman(reported_qoi, accuracy) = " << fixed(s.spearman) << '\n';
}

}  // namespace fair::report
