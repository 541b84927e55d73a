#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fair/adversary.hpp"
#include "fair/aggregation.hpp"
#include "fair/errors.hpp"
#include "fair/fuzzy.hpp"
#include "fair/qoi.hpp"
#include "fair/random.hpp"
#include "fair/simulator.hpp"
#include "fair/topology.hpp"

// Run configuration: an INI-style file of flat sections.
//
//   seed = 1                      # top-level keys: seed, output, aggregation
//   [topology]   n_sensors cluster_size fan_in witnesses
//   [adversary]  model compromise_fraction link_failure_fraction
//                naive_factor_min naive_factor_max smart_factor target_level
//   [filter]     k threshold consistency_scale exhaustive_limit
//   [sensing]    base_value noise
//   [sweep]      parameter values repetitions baseline
//   [fuzzy]      set.<Variable>.<term> = x:mu x:mu ...
//                rule.<N> = QoI is high and Consistency is medium -> medium
//
// '#' and ';' start comments. Unknown keys are errors; missing keys keep
// their defaults.

namespace fair::config {

/// Overrides on top of the default FAIR fuzzy system. A non-empty rule list
/// replaces the eleven default rules.
struct FuzzySpec {
  std::map<std::string, std::map<std::string, std::vector<fuzzy::Vertex>>> sets;
  std::vector<fuzzy::Rule> rules;

  friend bool operator==(const FuzzySpec&, const FuzzySpec&) = default;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string output = "results.csv";
  agg::Kind aggregation = agg::Kind::kAverage;
  topo::TopologyConfig topology;
  adv::AdversaryConfig adversary;
  qoi::FilterConfig filter;
  sim::SensingModel sensing;
  sim::SweepSpec sweep;
  FuzzySpec fuzzy;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// ---------------------------------------------------------------------------
// Scalars

inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

inline std::string_view trim(std::string_view s) noexcept {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) noexcept {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s) noexcept {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<double> parse_list(std::string_view s, const std::string& what) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (std::string_view tok : split(s, ',')) {
    auto v = parse_double(tok);
    if (!v) throw ConfigError(what + ": '" + std::string(tok) + "' is not a number");
    out.push_back(*v);
  }
  return out;
}

inline std::vector<sim::FilterMode> parse_baseline(std::string_view s) {
  s = trim(s);
  if (s == "on") return {sim::FilterMode::kOn};
  if (s == "off") return {sim::FilterMode::kOff};
  if (s == "both") return {sim::FilterMode::kOn, sim::FilterMode::kOff};
  throw ConfigError("baseline must be on, off or both (got '" + std::string(s) + "')");
}

inline std::string format_baseline(const std::vector<sim::FilterMode>& modes) {
  if (modes.size() == 2) return "both";
  return std::string(sim::to_string(modes.front()));
}

// ---------------------------------------------------------------------------
// Fuzzy section

inline std::vector<fuzzy::Vertex> parse_vertices(std::string_view s, const std::string& where) {
  std::vector<fuzzy::Vertex> out;
  std::istringstream is{std::string(s)};
  std::string tok;
  while (is >> tok) {
    const auto colon = tok.find(':');
    auto x = colon == std::string::npos ? std::nullopt : parse_double(std::string_view(tok).substr(0, colon));
    auto mu = colon == std::string::npos ? std::nullopt : parse_double(std::string_view(tok).substr(colon + 1));
    if (!x || !mu) throw ConfigError(where + ": vertex '" + tok + "' is not x:mu");
    out.push_back({*x, *mu});
  }
  return out;
}

inline fuzzy::Rule parse_rule(std::string_view s, const std::string& where) {
  const auto arrow = s.find("->");
  if (arrow == std::string_view::npos) throw ConfigError(where + ": rule needs '->'");
  fuzzy::Rule rule;
  std::istringstream lhs{std::string(s.substr(0, arrow))};
  std::vector<std::string> words;
  for (std::string w; lhs >> w;) words.push_back(w);
  // <var> is <term> [and <var> is <term>]...
  for (std::size_t i = 0; i < words.size(); i += 4) {
    if (i + 2 >= words.size() || words[i + 1] != "is" || (i + 3 < words.size() && words[i + 3] != "and"))
      throw ConfigError(where + ": antecedent must read '<variable> is <term> [and ...]'");
    rule.antecedents.push_back({words[i], words[i + 2]});
  }
  if (rule.antecedents.empty()) throw ConfigError(where + ": rule has no antecedents");
  const auto rhs = trim(s.substr(arrow + 2));
  if (rhs.empty() || rhs.find_first_of(" \t") != std::string_view::npos)
    throw ConfigError(where + ": conclusion must be a single output term");
  rule.conclusion = {fuzzy::names::kQoIOut, std::string(rhs)};
  return rule;
}

inline std::string format_rule(const fuzzy::Rule& r) {
  std::string out;
  for (std::size_t i = 0; i < r.antecedents.size(); ++i) {
    if (i) out += " and ";
    out += r.antecedents[i].variable + " is " + r.antecedents[i].term;
  }
  return out + " -> " + r.conclusion.term;
}

inline fuzzy::RuleBase build_rulebase(const FuzzySpec& spec) {
  const char* known[] = {fuzzy::names::kQoI, fuzzy::names::kConsistency, fuzzy::names::kCompleteness,
                         fuzzy::names::kQoIOut};
  auto variable = [&](const char* name) {
    const auto def = fuzzy::default_variable(name);
    std::vector<fuzzy::Term> terms(def.terms().begin(), def.terms().end());
    if (auto it = spec.sets.find(name); it != spec.sets.end()) {
      for (const auto& [term, vertices] : it->second) {
        fuzzy::Term t{term, fuzzy::MembershipFunction(vertices)};
        auto pos = std::find_if(terms.begin(), terms.end(), [&](const fuzzy::Term& x) { return x.name == term; });
        if (pos == terms.end()) terms.push_back(std::move(t));
        else *pos = std::move(t);
      }
    }
    return fuzzy::LinguisticVariable(name, def.lo(), def.hi(), std::move(terms));
  };
  for (const auto& [name, _] : spec.sets)
    if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return name == k; }))
      throw ConfigError("fuzzy: unknown variable '" + name + "'");
  return fuzzy::RuleBase({variable(fuzzy::names::kQoI), variable(fuzzy::names::kConsistency),
                          variable(fuzzy::names::kCompleteness)},
                         variable(fuzzy::names::kQoIOut),
                         spec.rules.empty() ? fuzzy::fair_default_rules() : spec.rules);
}

// ---------------------------------------------------------------------------
// Validation and conversion

/// Throws ConfigError naming the first violated invariant.
inline void validate(const RunConfig& cfg) {
  cfg.topology.validate();
  cfg.adversary.validate();
  cfg.filter.validate();
  cfg.sensing.validate();
  cfg.sweep.validate();
  (void)build_rulebase(cfg.fuzzy);
  if (cfg.adversary.target_level) {
    const auto levels = topo::build_topology(cfg.topology).levels.size();
    if (*cfg.adversary.target_level >= levels)
      throw ConfigError("adversary: target_level < " + std::to_string(levels) + " violated");
  }
  if (cfg.output.empty()) throw ConfigError("output path must not be empty");
}

inline sim::Scenario scenario(const RunConfig& cfg) {
  return {cfg.topology, cfg.adversary, cfg.filter, build_rulebase(cfg.fuzzy), cfg.aggregation, cfg.sensing};
}

// ---------------------------------------------------------------------------
// Text form

inline RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::string section;
  std::map<std::uint64_t, fuzzy::Rule> rules;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string at = "line " + std::to_string(line_no);
    std::string_view line = raw;
    if (auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + ": syntax error: unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const char* sections[] = {"topology", "adversary", "filter", "sensing", "sweep", "fuzzy"};
      if (std::none_of(std::begin(sections), std::end(sections), [&](const char* s) { return section == s; }))
        throw ConfigError(at + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(at + ": syntax error: expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(at + ": syntax error: empty key");
    const std::string where = at + ": " + (section.empty() ? key : section + "." + key);

    auto num = [&]() {
      auto v = parse_double(value);
      if (!v) throw ConfigError(where + ": '" + std::string(value) + "' is not a number");
      return *v;
    };
    auto count = [&]() {
      auto v = parse_uint(value);
      if (!v) throw ConfigError(where + ": '" + std::string(value) + "' is not a non-negative integer");
      return static_cast<std::size_t>(*v);
    };
    auto unknown = [&]() { throw ConfigError(where + ": unknown key"); };

    if (section.empty()) {
      if (key == "seed") {
        auto v = parse_uint(value);
        if (!v) throw ConfigError(where + ": seed must be an unsigned 64-bit integer");
        cfg.seed = *v;
      } else if (key == "output") {
        cfg.output = std::string(value);
      } else if (key == "aggregation") {
        auto k = agg::parse_kind(value);
        if (!k) throw ConfigError(where + ": aggregation must be average, max, min or sum");
        cfg.aggregation = *k;
      } else {
        unknown();
      }
    } else if (section == "topology") {
      auto& t = cfg.topology;
      if (key == "n_sensors") t.n_sensors = count();
      else if (key == "cluster_size") t.cluster_size = count();
      else if (key == "fan_in") t.fan_in = count();
      else if (key == "witnesses") t.witnesses = count();
      else unknown();
    } else if (section == "adversary") {
      auto& a = cfg.adversary;
      if (key == "model") {
        auto m = adv::parse_model(value);
        if (!m) throw ConfigError(where + ": model must be none, naive, smart or smart_topology");
        a.model = *m;
      } else if (key == "compromise_fraction") a.compromise_fraction = num();
      else if (key == "link_failure_fraction") a.link_failure_fraction = num();
      else if (key == "naive_factor_min") a.naive_factor_lo = num();
      else if (key == "naive_factor_max") a.naive_factor_hi = num();
      else if (key == "smart_factor") a.smart_factor = num();
      else if (key == "target_level") a.target_level = count();
      else unknown();
    } else if (section == "filter") {
      auto& f = cfg.filter;
      if (key == "k") f.k = count();
      else if (key == "threshold") f.threshold = num();
      else if (key == "consistency_scale") f.consistency_scale = num();
      else if (key == "exhaustive_limit") f.exhaustive_limit = count();
      else unknown();
    } else if (section == "sensing") {
      if (key == "base_value") cfg.sensing.base_value = num();
      else if (key == "noise") cfg.sensing.noise = num();
      else unknown();
    } else if (section == "sweep") {
      auto& s = cfg.sweep;
      if (key == "parameter") {
        auto p = sim::parse_sweep_param(value);
        if (!p) throw ConfigError(where + ": parameter must be none, compromise_fraction or link_failure_fraction");
        s.param = *p;
      } else if (key == "values") s.values = parse_list(value, where);
      else if (key == "repetitions") s.repetitions = count();
      else if (key == "baseline") s.modes = parse_baseline(value);
      else unknown();
    } else if (section == "fuzzy") {
      const auto parts = split(key, '.');
      if (parts.size() == 3 && parts[0] == "set") {
        cfg.fuzzy.sets[std::string(parts[1])][std::string(parts[2])] = parse_vertices(value, where);
      } else if (parts.size() == 2 && parts[0] == "rule") {
        auto n = parse_uint(parts[1]);
        if (!n || *n == 0) throw ConfigError(where + ": rule index must be a positive integer");
        if (rules.count(*n)) throw ConfigError(where + ": duplicate rule index");
        rules[*n] = parse_rule(value, where);
      } else {
        unknown();
      }
    }
  }
  for (auto& [_, r] : rules) cfg.fuzzy.rules.push_back(std::move(r));
  validate(cfg);
  return cfg;
}

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  auto num = [](double v) { return format_number(v); };
  os << "seed = " << cfg.seed << '\n'
     << "output = " << cfg.output << '\n'
     << "aggregation = " << agg::to_string(cfg.aggregation) << '\n';
  os << "\n[topology]\n"
     << "n_sensors = " << cfg.topology.n_sensors << '\n'
     << "cluster_size = " << cfg.topology.cluster_size << '\n'
     << "fan_in = " << cfg.topology.fan_in << '\n'
     << "witnesses = " << cfg.topology.witnesses << '\n';
  const auto& a = cfg.adversary;
  os << "\n[adversary]\n"
     << "model = " << adv::to_string(a.model) << '\n'
     << "compromise_fraction = " << num(a.compromise_fraction) << '\n'
     << "link_failure_fraction = " << num(a.link_failure_fraction) << '\n'
     << "naive_factor_min = " << num(a.naive_factor_lo) << '\n'
     << "naive_factor_max = " << num(a.naive_factor_hi) << '\n'
     << "smart_factor = " << num(a.smart_factor) << '\n';
  if (a.target_level) os << "target_level = " << *a.target_level << '\n';
  os << "\n[filter]\n"
     << "k = " << cfg.filter.k << '\n'
     << "threshold = " << num(cfg.filter.threshold) << '\n'
     << "consistency_scale = " << num(cfg.filter.consistency_scale) << '\n'
     << "exhaustive_limit = " << cfg.filter.exhaustive_limit << '\n';
  os << "\n[sensing]\n"
     << "base_value = " << num(cfg.sensing.base_value) << '\n'
     << "noise = " << num(cfg.sensing.noise) << '\n';
  os << "\n[sweep]\n"
     << "parameter = " << sim::to_string(cfg.sweep.param) << '\n'
     << "values = ";
  for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) os << (i ? ", " : "") << num(cfg.sweep.values[i]);
  os << '\n'
     << "repetitions = " << cfg.sweep.repetitions << '\n'
     << "baseline = " << format_baseline(cfg.sweep.modes) << '\n';
  if (!cfg.fuzzy.sets.empty() || !cfg.fuzzy.rules.empty()) {
    os << "\n[fuzzy]\n";
    for (const auto& [var, terms] : cfg.fuzzy.sets)
      for (const auto& [term, vertices] : terms) {
        os << "set." << var << '.' << term << " =";
        for (const auto& v : vertices) os << ' ' << num(v.x) << ':' << num(v.mu);
        os << '\n';
      }
    for (std::size_t i = 0; i < cfg.fuzzy.rules.size(); ++i)
      os << "rule." << i + 1 << " = " << format_rule(cfg.fuzzy.rules[i]) << '\n';
  }
  return os.str();
}

/// FNV-1a over the canonical text, as 16 hex digits. The output path is not
/// part of the run, so it is left out.
inline std::string config_hash(const RunConfig& cfg) {
  RunConfig run = cfg;
  run.output.clear();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_config(run)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fair::config
