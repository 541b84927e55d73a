// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances, seeds and sweep grids are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fair/fair.hpp"

namespace {

using namespace fair;

constexpr std::uint64_t kMasterSeed = 42;
constexpr std::size_t kSeeds = 50;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> check;
};

std::string fmt(double v, int digits = 4) { return report::fixed(v, digits); }

const fuzzy::RuleBase& rules() {
  static const fuzzy::RuleBase rb = fuzzy::fair_default_rulebase();
  return rb;
}

// ---------------------------------------------------------------------------
// Sweeps go through RunConfig so their CSV is exactly what the CLI writes.

struct SweepRun {
  std::vector<sim::SweepRow> rows;
  std::string csv;
};

config::RunConfig sweep_config(adv::Model model, sim::SweepParam param, std::vector<double> values, agg::Kind kind,
                               double fixed_compromise = 0.0, bool both = true) {
  config::RunConfig cfg;
  cfg.seed = kMasterSeed;
  cfg.aggregation = kind;
  cfg.adversary.model = model;
  cfg.adversary.compromise_fraction = fixed_compromise;
  cfg.sweep.param = param;
  cfg.sweep.values = std::move(values);
  cfg.sweep.repetitions = kSeeds;
  cfg.sweep.modes = both ? std::vector<sim::FilterMode>{sim::FilterMode::kOn, sim::FilterMode::kOff}
                         : std::vector<sim::FilterMode>{sim::FilterMode::kOn};
  config::validate(cfg);
  return cfg;
}

SweepRun execute(const config::RunConfig& cfg, unsigned threads = 1) {
  SweepRun run;
  run.rows = sim::run_sweep(cfg.sweep, config::scenario(cfg), sim::repetition_seeds(cfg.seed, cfg.sweep.repetitions),
                            threads);
  std::ostringstream os;
  report::write_csv(os, cfg, run.rows);
  run.csv = os.str();
  return run;
}

struct Cell {
  std::vector<double> accuracy, qoi;
  double mean_acc() const { return stats::mean(accuracy); }
  double mean_qoi() const { return stats::mean(qoi); }
  double sd_acc() const { return stats::sample_stddev(accuracy); }
};

std::map<std::pair<double, sim::FilterMode>, Cell> cells(const std::vector<sim::SweepRow>& rows) {
  std::map<std::pair<double, sim::FilterMode>, Cell> out;
  for (const auto& r : rows) {
    auto& c = out[{r.param_value, r.mode}];
    c.accuracy.push_back(r.result.accuracy);
    c.qoi.push_back(r.result.reported_qoi);
  }
  return out;
}

// The configs behind criteria 4-9, shared with the determinism check.
config::RunConfig conservation_config(agg::Kind kind) {
  return sweep_config(adv::Model::kNone, sim::SweepParam::kNone, {}, kind, 0.0, false);
}
config::RunConfig naive_dominance_config(agg::Kind kind) {
  return sweep_config(adv::Model::kNaive, sim::SweepParam::kCompromiseFraction, {0.1, 0.2, 0.3}, kind);
}
config::RunConfig failures_config() {
  return sweep_config(adv::Model::kNaive, sim::SweepParam::kLinkFailureFraction, {0.0, 0.1, 0.2, 0.3},
                      agg::Kind::kAverage, 0.1);
}
config::RunConfig honesty_config() {
  return sweep_config(adv::Model::kNaive, sim::SweepParam::kCompromiseFraction,
                      {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4}, agg::Kind::kAverage, 0.0, false);
}
config::RunConfig smart_config() {
  return sweep_config(adv::Model::kSmart, sim::SweepParam::kCompromiseFraction,
                      {0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5}, agg::Kind::kAverage, 0.0, false);
}
config::RunConfig topology_attack_config(adv::Model model) {
  return sweep_config(model, sim::SweepParam::kCompromiseFraction, {0.2}, agg::Kind::kAverage);
}

// ---------------------------------------------------------------------------
// Test-side oracles

double oracle_mu(std::span<const fuzzy::Vertex> v, double x) {
  if (x <= v.front().x) return v.front().mu;
  if (x >= v.back().x) return v.back().mu;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (x <= v[i].x) {
      if (v[i].x == v[i - 1].x) return v[i].mu;
      return v[i - 1].mu + (v[i].mu - v[i - 1].mu) * (x - v[i - 1].x) / (v[i].x - v[i - 1].x);
    }
  return v.back().mu;
}

// Trapezoid centre of gravity of the clipped union on `samples` points.
double oracle_cog(const fuzzy::RuleBase& rb, const std::vector<fuzzy::FiringRecord>& firings, std::size_t samples) {
  double moment = 0.0, area = 0.0, prev_x = 0.0, prev_mu = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(samples - 1);
    double mu = 0.0;
    for (const auto& f : firings) mu = std::max(mu, std::min(f.strength, oracle_mu(rb.conclusion_set(f.rule).vertices(), x)));
    if (i > 0) {
      const double h = x - prev_x;
      area += 0.5 * h * (mu + prev_mu);
      moment += h * (prev_x * (2 * prev_mu + mu) + x * (prev_mu + 2 * mu)) / 6.0;
    }
    prev_x = x;
    prev_mu = mu;
  }
  return moment / area;
}

double oracle_consistency(const std::vector<double>& v, double scale) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  if (sd < 1e-12) return 1.0;
  return 1.0 - std::min(1.0, sd / (std::abs(m) * scale));
}

// ---------------------------------------------------------------------------
// Criteria

Outcome fuzzy_oracles() {
  constexpr double tol = 1e-9;
  double worst = 0.0;
  auto check = [&](qoi::QoIInputs in, double expect) {
    worst = std::max(worst, std::abs(qoi::evaluate_qoi(in, rules()) - expect));
  };
  check({1, 1, 1}, 0.9);
  check({1, 0.65, 1}, 0.7);
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; b <= 10; ++b) check({a / 10.0, b / 10.0, 0.0}, 0.1);  // child QoI = 0
  return {worst <= tol, "max |error| = " + fmt(worst, 12) + " (tol 1e-9)"};
}

Outcome cog_cross_check() {
  constexpr double tol = 1e-3;
  std::mt19937_64 gen(kMasterSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& rb = rules();
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<fuzzy::FiringRecord> f;
    for (std::size_t r = 0; r < rb.rules().size(); ++r)
      if (u(gen) < 0.4) f.push_back({r, u(gen)});
    if (f.empty()) f.push_back({static_cast<std::size_t>(trial) % rb.rules().size(), 0.5 + 0.5 * u(gen)});
    const double fast = fuzzy::defuzzify_cog(fuzzy::infer_output_set(rb, f, 101));
    worst = std::max(worst, std::abs(fast - oracle_cog(rb, f, 1001)));
  }
  return {worst <= tol, "1000 firing vectors, max |cog - fine-grid| = " + fmt(worst, 6) + " (tol 1e-3)"};
}

Outcome filter_equivalence() {
  std::mt19937_64 gen(kMasterSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  qoi::FilterConfig cfg;  // k = 3
  int checked = 0, attempts = 0, mismatches = 0;
  double worst = 0.0;
  while (checked < 500 && attempts < 100000) {
    ++attempts;
    const std::size_t w = 3 + static_cast<std::size_t>(attempts % 4);  // 3..6
    std::vector<qoi::WitnessReport> reports;
    for (std::size_t i = 0; i < w; ++i) reports.push_back({static_cast<qoi::NodeId>(i), 1.0 + 99.0 * u(gen), u(gen), true});
    if (u(gen) < 0.3) reports[attempts % w] = qoi::WitnessReport::absent(static_cast<qoi::NodeId>(attempts % w));

    std::vector<qoi::WitnessReport> present;
    for (const auto& r : reports)
      if (r.present) present.push_back(r);
    const std::size_t k = std::min(cfg.k, present.size());
    const double compl_ratio = static_cast<double>(present.size()) / static_cast<double>(w);
    double best = 0.0;
    std::vector<bool> mask(present.size(), false);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), true);
    do {
      std::vector<double> values;
      double q = 0.0;
      for (std::size_t i = 0; i < present.size(); ++i)
        if (mask[i]) {
          values.push_back(present[i].value);
          q += present[i].qoi;
        }
      const qoi::QoIInputs in{compl_ratio, oracle_consistency(values, cfg.consistency_scale),
                              q / static_cast<double>(k)};
      best = std::max(best, qoi::evaluate_qoi(in, rules()));
    } while (std::prev_permutation(mask.begin(), mask.end()));
    if (best >= cfg.threshold) continue;  // threshold reachable: not in scope

    const auto v = qoi::select_witnesses(reports, w, cfg, rules());
    const double err = std::abs(v.qoi_out - best);
    worst = std::max(worst, err);
    mismatches += err > 1e-9;
    ++checked;
  }
  return {checked == 500 && mismatches == 0,
          std::to_string(checked) + " unreachable instances, mismatches = " + std::to_string(mismatches) +
              ", max |diff| = " + fmt(worst, 12)};
}

Outcome conservation() {
  bool ok = true;
  std::string detail;
  for (agg::Kind kind : {agg::Kind::kMax, agg::Kind::kAverage}) {
    const auto run = execute(conservation_config(kind));
    double worst_rel = 0.0;
    std::size_t bad_qoi = 0, bad_band = 0, bad_exact = 0;
    for (const auto& r : run.rows) {
      const auto& res = r.result;
      if (!res.reported_value) {
        ok = false;
        continue;
      }
      const double rel = std::abs(*res.reported_value - res.true_value) / std::abs(res.true_value);
      worst_rel = std::max(worst_rel, rel);
      if (kind == agg::Kind::kMax && *res.reported_value != res.true_value) ++bad_exact;
      if (res.reported_qoi != 0.9) ++bad_qoi;
      if (res.band != qoi::Band::kHighConfidence) ++bad_band;
    }
    ok = ok && run.rows.size() == kSeeds && bad_qoi == 0 && bad_band == 0 && bad_exact == 0 &&
         (kind == agg::Kind::kMax || worst_rel <= 1e-9);
    detail += std::string(agg::to_string(kind)) + ": max rel err " + fmt(worst_rel, 12) + ", qoi!=0.9 " +
              std::to_string(bad_qoi) + ", band!=high " + std::to_string(bad_band) + "; ";
  }
  return {ok, detail};
}

Outcome naive_dominance() {
  bool ok = true;
  std::string detail;
  for (agg::Kind kind : {agg::Kind::kAverage, agg::Kind::kMax}) {
    const auto c = cells(execute(naive_dominance_config(kind)).rows);
    detail += std::string(agg::to_string(kind)) + ":";
    for (double v : {0.1, 0.2, 0.3}) {
      const Cell& on = c.at({v, sim::FilterMode::kOn});
      const Cell& off = c.at({v, sim::FilterMode::kOff});
      ok = ok && on.mean_acc() >= off.mean_acc();
      detail += " " + report::fixed(v, 1) + " on/off " + fmt(on.mean_acc(), 3) + "/" + fmt(off.mean_acc(), 3);
      if (v == 0.2) {
        const double se = std::sqrt((on.sd_acc() * on.sd_acc() + off.sd_acc() * off.sd_acc()) / kSeeds);
        const double gap = on.mean_acc() - off.mean_acc();
        ok = ok && gap > se;
        detail += " (gap " + fmt(gap, 3) + " > se " + fmt(se, 3) + ")";
      }
    }
    detail += "; ";
  }
  return {ok, detail};
}

Outcome failures_dominance() {
  const auto c = cells(execute(failures_config()).rows);
  bool ok = true;
  std::string detail;
  for (double v : {0.0, 0.1, 0.2, 0.3}) {
    const Cell& on = c.at({v, sim::FilterMode::kOn});
    const Cell& off = c.at({v, sim::FilterMode::kOff});
    ok = ok && on.mean_acc() >= off.mean_acc();
    detail += "links " + report::fixed(v, 1) + " on/off " + fmt(on.mean_acc(), 3) + "/" + fmt(off.mean_acc(), 3) + "; ";
  }
  return {ok, detail};
}

Outcome qoi_honesty() {
  const auto run = execute(honesty_config());
  std::vector<double> q, a, high, dnu;
  for (const auto& r : run.rows) {
    q.push_back(r.result.reported_qoi);
    a.push_back(r.result.accuracy);
    if (r.result.band == qoi::Band::kHighConfidence) high.push_back(r.result.accuracy);
    if (r.result.band == qoi::Band::kDoNotUse) dnu.push_back(r.result.accuracy);
  }
  const double rho = stats::spearman(q, a);
  const bool bands = !high.empty() && !dnu.empty() && stats::mean(high) > stats::mean(dnu);
  return {rho > 0.5 && bands,
          "spearman " + fmt(rho, 3) + " (> 0.5); high-confidence rows " + std::to_string(high.size()) + " acc " +
              (high.empty() ? "n/a" : fmt(stats::mean(high), 3)) + " vs do-not-use rows " +
              std::to_string(dnu.size()) + " acc " + (dnu.empty() ? "n/a" : fmt(stats::mean(dnu), 3))};
}

Outcome smart_fooling() {
  const auto cfg = smart_config();
  const auto c = cells(execute(cfg).rows);
  const auto& xs = cfg.sweep.values;
  std::vector<double> mq, ma;
  for (double v : xs) {
    mq.push_back(c.at({v, sim::FilterMode::kOn}).mean_qoi());
    ma.push_back(c.at({v, sim::FilterMode::kOn}).mean_acc());
  }
  const std::size_t turn = static_cast<std::size_t>(std::min_element(mq.begin(), mq.end()) - mq.begin());
  bool ok = std::abs(xs[turn] - 0.30) <= 0.10 + 1e-12;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (i <= turn) ok = ok && mq[i] < mq[i - 1];
    else ok = ok && mq[i] > mq[i - 1];
    ok = ok && ma[i] < ma[i - 1];
  }
  std::string detail = "qoi minimum at " + report::fixed(xs[turn], 2) + "; qoi/acc:";
  for (std::size_t i = 0; i < xs.size(); ++i)
    detail += " " + report::fixed(xs[i], 2) + "=" + fmt(mq[i], 3) + "/" + fmt(ma[i], 3);
  return {ok, detail};
}

Outcome topology_attack() {
  auto gap = [](adv::Model m) {
    const auto c = cells(execute(topology_attack_config(m)).rows);
    return c.at({0.2, sim::FilterMode::kOn}).mean_acc() - c.at({0.2, sim::FilterMode::kOff}).mean_acc();
  };
  const double naive = gap(adv::Model::kNaive);
  const double targeted = gap(adv::Model::kSmartTopology);
  return {targeted < naive, "on-off gap at 0.2: smart_topology " + fmt(targeted) + " < naive " + fmt(naive)};
}

Outcome determinism() {
  std::vector<config::RunConfig> configs{conservation_config(agg::Kind::kMax),
                                         conservation_config(agg::Kind::kAverage),
                                         naive_dominance_config(agg::Kind::kAverage),
                                         naive_dominance_config(agg::Kind::kMax),
                                         failures_config(),
                                         honesty_config(),
                                         smart_config(),
                                         topology_attack_config(adv::Model::kNaive),
                                         topology_attack_config(adv::Model::kSmartTopology)};
  std::size_t identical = 0;
  for (const auto& cfg : configs) {
    const std::string a = execute(cfg).csv;
    const std::string b = execute(cfg).csv;
    const std::string c = execute(cfg, 4).csv;
    identical += a == b && a == c && !a.empty();
  }
  return {identical == configs.size(),
          std::to_string(identical) + "/" + std::to_string(configs.size()) +
              " sweeps byte-identical across reruns and thread counts"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "fuzzy engine oracles", 1.0, fuzzy_oracles},
      {2, "COG vs fine-grid quadrature", 10.0, cog_cross_check},
      {3, "filter matches exhaustive maximum", 30.0, filter_equivalence},
      {4, "conservation without adversary", 30.0, conservation},
      {5, "naive adversary: filter dominance", 300.0, naive_dominance},
      {6, "link failures + 10% naive: filter dominance", 300.0, failures_dominance},
      {7, "reported QoI tracks accuracy", 300.0, qoi_honesty},
      {8, "smart collusion fools the filter near 30%", 300.0, smart_fooling},
      {9, "smart_topology narrows the filter gain", 300.0, topology_attack},
      {10, "byte-identical CSV for a fixed seed", 300.0, determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s criterion %2d: %s [%.2fs / %.0fs] %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.budget_s,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
