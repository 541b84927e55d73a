#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fair/config.hpp"
#include "fair/report.hpp"
#include "fair/simulator.hpp"

namespace fair::cli {

inline std::string describe(const sim::TraceEvent& ev) {
  std::ostringstream os;
  const qoi::SubtreeVerdict& v = *ev.verdict;
  auto ids = [&](const std::vector<qoi::NodeId>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
    return s.empty() ? std::string("-") : s;
  };
  const std::string head = "trace epoch=" + std::to_string(ev.epoch) + " level=" + std::to_string(ev.level) +
                           " point=" + std::to_string(ev.point) + " receiver=" +
                           (ev.receiver ? std::to_string(*ev.receiver) : std::string("sink")) +
                           " child=" + std::to_string(ev.child) + " filter=" + std::string(sim::to_string(ev.mode));
  for (const qoi::Evaluation& e : v.evaluations)
    os << head << " event=evaluate combination=" << ids(e.selection) << " qoi=" << config::format_number(e.qoi)
       << '\n';
  os << head << " event=decision selected=" << ids(v.selected) << " qoi=" << config::format_number(v.qoi_out)
     << " threshold_met=" << (v.threshold_met ? 1 : 0) << " discards=" << v.discards << '\n';
  return os.str();
}

/// Applies `--sweep NAME=v1,v2,...`.
inline void apply_sweep_flag(config::RunConfig& cfg, const std::string& flag) {
  const auto eq = flag.find('=');
  if (eq == std::string::npos) throw ConfigError("--sweep expects NAME=v1,v2,...");
  auto p = sim::parse_sweep_param(flag.substr(0, eq));
  if (!p || *p == sim::SweepParam::kNone)
    throw ConfigError("--sweep: parameter must be compromise_fraction or link_failure_fraction");
  cfg.sweep.param = *p;
  cfg.sweep.values = config::parse_list(std::string_view(flag).substr(eq + 1), "--sweep");
}

/// Full batch run: parse flags and config, sweep, write CSV, print summary.
/// Returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"FAIR resilient-aggregation simulator"};
  std::string config_path, out_path, sweep, baseline;
  std::optional<std::uint64_t> seed;
  bool trace = false;
  unsigned threads = 1;
  app.add_option("--config", config_path, "Run configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "CSV output path (overrides the config)");
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--sweep", sweep, "Swept parameter and values, NAME=v1,v2,...");
  app.add_option("--baseline", baseline, "Filter toggle: on, off or both")->check(CLI::IsMember({"on", "off", "both"}));
  app.add_option("--threads", threads, "Worker threads for the sweep")->check(CLI::Range(1u, 256u));
  app.add_flag("--trace", trace, "Log every filter decision to stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config '" + config_path + "'");
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    config::RunConfig cfg = config::parse_config(text);
    if (seed) cfg.seed = *seed;
    if (!out_path.empty()) cfg.output = out_path;
    if (!sweep.empty()) apply_sweep_flag(cfg, sweep);
    if (!baseline.empty()) cfg.sweep.modes = config::parse_baseline(baseline);
    config::validate(cfg);

    const sim::Scenario sc = config::scenario(cfg);
    const auto seeds = sim::repetition_seeds(cfg.seed, cfg.sweep.repetitions);
    sim::TraceSink sink;
    if (trace) sink = [&err](const sim::TraceEvent& ev) { err << describe(ev); };
    const auto rows = sim::run_sweep(cfg.sweep, sc, seeds, threads, trace ? &sink : nullptr);

    std::ofstream csv(cfg.output, std::ios::binary);
    if (!csv) throw ConfigError("cannot write output '" + cfg.output + "'");
    report::write_csv(csv, cfg, rows);
    csv.close();
    if (!csv) throw ConfigError("failed writing output '" + cfg.output + "'");

    out << "fair_sim: " << rows.size() << " rows -> " << cfg.output << " (config_hash=" << config::config_hash(cfg)
        << ")\n";
    report::write_summary(out, sim::summarize(rows));
    return 0;
  } catch (const std::exception& e) {
    err << "fair_sim: error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace fair::cli
