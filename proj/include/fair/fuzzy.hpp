#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fair/errors.hpp"

// Mamdani-style fuzzy inference over piecewise-linear fuzzy sets: fuzzification,
// max-min rule firing, clipped-union output sets, and two defuzzifiers
// (per-rule weighted average and sampled centre of gravity).

namespace fair::fuzzy {

struct Vertex {
  double x;
  double mu;

  friend bool operator==(const Vertex&, const Vertex&) = default;
};

/// Piecewise-linear membership curve. Outside the vertex span the curve keeps
/// the membership of the nearest endpoint.
class MembershipFunction {
 public:
  explicit MembershipFunction(std::vector<Vertex> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 2) throw ConfigError("membership function needs at least 2 vertices");
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      const Vertex& v = vertices_[i];
      if (!(v.mu >= 0.0 && v.mu <= 1.0))
        throw ConfigError("membership degree outside [0,1] at vertex " + std::to_string(i));
      if (i > 0 && v.x < vertices_[i - 1].x)
        throw ConfigError("membership vertices must have non-decreasing x");
    }
  }

  static MembershipFunction triangle(double left, double peak, double right) {
    return MembershipFunction({{left, 0.0}, {peak, 1.0}, {right, 0.0}});
  }

  static MembershipFunction trapezoid(double a, double b, double c, double d) {
    return MembershipFunction({{a, 0.0}, {b, 1.0}, {c, 1.0}, {d, 0.0}});
  }

  double operator()(double x) const noexcept {
    if (x <= vertices_.front().x) return vertices_.front().mu;
    if (x >= vertices_.back().x) return vertices_.back().mu;
    // First vertex strictly right of x; its predecessor is at or left of x.
    auto hi = std::upper_bound(vertices_.begin(), vertices_.end(), x,
                               [](double value, const Vertex& v) { return value < v.x; });
    auto lo = std::prev(hi);
    const double span = hi->x - lo->x;
    if (span <= 0.0) return hi->mu;
    const double t = (x - lo->x) / span;
    return lo->mu + t * (hi->mu - lo->mu);
  }

  /// Midpoint of the first maximal-membership plateau; used as the crisp
  /// stand-in for the set by the weighted-average defuzzifier.
  double representative() const noexcept {
    double peak = 0.0;
    for (const Vertex& v : vertices_) peak = std::max(peak, v.mu);
    std::size_t first = 0;
    while (vertices_[first].mu != peak) ++first;
    std::size_t last = first;
    while (last + 1 < vertices_.size() && vertices_[last + 1].mu == peak) ++last;
    return 0.5 * (vertices_[first].x + vertices_[last].x);
  }

  std::span<const Vertex> vertices() const noexcept { return vertices_; }
  double front_x() const noexcept { return vertices_.front().x; }
  double back_x() const noexcept { return vertices_.back().x; }

  friend bool operator==(const MembershipFunction&, const MembershipFunction&) = default;

 private:
  std::vector<Vertex> vertices_;
};

inline double membership(const MembershipFunction& mf, double x) noexcept { return mf(x); }

struct Term {
  std::string name;
  MembershipFunction set;

  friend bool operator==(const Term&, const Term&) = default;
};

class LinguisticVariable {
 public:
  LinguisticVariable(std::string name, double lo, double hi, std::vector<Term> terms)
      : name_(std::move(name)), lo_(lo), hi_(hi), terms_(std::move(terms)) {
    if (!(lo_ < hi_)) throw ConfigError("variable '" + name_ + "': universe must satisfy lo < hi");
    if (terms_.empty()) throw ConfigError("variable '" + name_ + "' has no terms");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const Term& t = terms_[i];
      if (t.set.front_x() < lo_ || t.set.back_x() > hi_)
        throw ConfigError("variable '" + name_ + "': term '" + t.name + "' leaves the universe");
      for (std::size_t j = 0; j < i; ++j)
        if (terms_[j].name == t.name)
          throw ConfigError("variable '" + name_ + "': duplicate term '" + t.name + "'");
    }
  }

  const std::string& name() const noexcept { return name_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::span<const Term> terms() const noexcept { return terms_; }

  double clamp(double x) const noexcept { return std::clamp(x, lo_, hi_); }

  /// Index of `term`, or terms().size() when absent.
  std::size_t find(const std::string& term) const noexcept {
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (terms_[i].name == term) return i;
    return terms_.size();
  }

  const Term& term(const std::string& name) const {
    const std::size_t i = find(name);
    if (i == terms_.size()) throw ConfigError("variable '" + name_ + "' has no term '" + name + "'");
    return terms_[i];
  }

  double degree(std::size_t term_index, double x) const noexcept {
    return terms_[term_index].set(clamp(x));
  }

  friend bool operator==(const LinguisticVariable&, const LinguisticVariable&) = default;

 private:
  std::string name_;
  double lo_;
  double hi_;
  std::vector<Term> terms_;
};

inline std::map<std::string, double> fuzzify(const LinguisticVariable& var, double x) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < var.terms().size(); ++i) out[var.terms()[i].name] = var.degree(i, x);
  return out;
}

struct Clause {
  std::string variable;
  std::string term;

  friend bool operator==(const Clause&, const Clause&) = default;
};

struct Rule {
  std::vector<Clause> antecedents;  // conjunction
  Clause conclusion;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct FiringRecord {
  std::size_t rule;
  double strength;

  friend bool operator==(const FiringRecord&, const FiringRecord&) = default;
};

// Curve sampled at `mu.size()` evenly spaced points over [lo, hi].
struct SampledCurve {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> mu;

  double x(std::size_t i) const noexcept {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(mu.size() - 1);
  }
};

/// Validated rule base. Rule clauses are resolved to variable/term indices at
/// construction so evaluation does no name lookups.
class RuleBase {
 public:
  RuleBase(std::vector<LinguisticVariable> inputs, LinguisticVariable output, std::vector<Rule> rules)
      : inputs_(std::move(inputs)), output_(std::move(output)), rules_(std::move(rules)) {
    if (rules_.empty()) throw ConfigError("rule base needs at least one rule");
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j)
        if (inputs_[j].name() == inputs_[i].name())
          throw ConfigError("duplicate input variable '" + inputs_[i].name() + "'");
      if (inputs_[i].name() == output_.name())
        throw ConfigError("variable '" + output_.name() + "' is both input and output");
    }
    compiled_.reserve(rules_.size());
    for (std::size_t r = 0; r < rules_.size(); ++r) {
      const Rule& rule = rules_[r];
      const std::string where = "rule " + std::to_string(r + 1) + ": ";
      if (rule.antecedents.empty()) throw ConfigError(where + "no antecedents");
      Compiled c;
      for (const Clause& clause : rule.antecedents) {
        const std::size_t v = input_index(clause.variable);
        if (v == inputs_.size()) throw ConfigError(where + "unknown input variable '" + clause.variable + "'");
        const std::size_t t = inputs_[v].find(clause.term);
        if (t == inputs_[v].terms().size())
          throw ConfigError(where + "variable '" + clause.variable + "' has no term '" + clause.term + "'");
        c.antecedents.emplace_back(v, t);
      }
      if (rule.conclusion.variable != output_.name())
        throw ConfigError(where + "conclusion must target output variable '" + output_.name() + "'");
      c.conclusion = output_.find(rule.conclusion.term);
      if (c.conclusion == output_.terms().size())
        throw ConfigError(where + "output has no term '" + rule.conclusion.term + "'");
      compiled_.push_back(std::move(c));
    }
  }

  std::span<const LinguisticVariable> inputs() const noexcept { return inputs_; }
  const LinguisticVariable& output() const noexcept { return output_; }
  std::span<const Rule> rules() const noexcept { return rules_; }

  std::size_t input_index(const std::string& name) const noexcept {
    for (std::size_t i = 0; i < inputs_.size(); ++i)
      if (inputs_[i].name() == name) return i;
    return inputs_.size();
  }

  /// Max-min firing from crisp inputs ordered like inputs(). Zero-strength
  /// rules are omitted.
  std::vector<FiringRecord> fire(std::span<const double> crisp) const {
    if (crisp.size() != inputs_.size()) throw PreconditionError("crisp input count does not match rule base");
    std::vector<FiringRecord> out;
    for (std::size_t r = 0; r < compiled_.size(); ++r) {
      double strength = 1.0;
      for (auto [v, t] : compiled_[r].antecedents) strength = std::min(strength, inputs_[v].degree(t, crisp[v]));
      if (strength > 0.0) out.push_back({r, strength});
    }
    return out;
  }

  const MembershipFunction& conclusion_set(std::size_t rule) const noexcept {
    return output_.terms()[compiled_[rule].conclusion].set;
  }

  friend bool operator==(const RuleBase& a, const RuleBase& b) {
    return a.inputs_ == b.inputs_ && a.output_ == b.output_ && a.rules_ == b.rules_;
  }

 private:
  struct Compiled {
    std::vector<std::pair<std::size_t, std::size_t>> antecedents;
    std::size_t conclusion = 0;
  };

  std::vector<LinguisticVariable> inputs_;
  LinguisticVariable output_;
  std::vector<Rule> rules_;
  std::vector<Compiled> compiled_;
};

inline std::vector<FiringRecord> fire_rules(const RuleBase& rb, const std::map<std::string, double>& inputs) {
  std::vector<double> crisp;
  crisp.reserve(rb.inputs().size());
  for (const LinguisticVariable& var : rb.inputs()) {
    auto it = inputs.find(var.name());
    if (it == inputs.end()) throw ConfigError("missing crisp input for variable '" + var.name() + "'");
    crisp.push_back(it->second);
  }
  return rb.fire(crisp);
}

/// Clip each fired conclusion at its strength, then take the pointwise max.
inline SampledCurve infer_output_set(const RuleBase& rb, std::span<const FiringRecord> firings,
                                     std::size_t resolution = 101) {
  if (resolution < 2) throw PreconditionError("output curve needs at least 2 samples");
  SampledCurve curve{rb.output().lo(), rb.output().hi(), std::vector<double>(resolution, 0.0)};
  for (const FiringRecord& f : firings) {
    const MembershipFunction& set = rb.conclusion_set(f.rule);
    for (std::size_t i = 0; i < resolution; ++i)
      curve.mu[i] = std::max(curve.mu[i], std::min(f.strength, set(curve.x(i))));
  }
  return curve;
}

inline double defuzzify_weighted_average(const RuleBase& rb, std::span<const FiringRecord> firings) {
  double num = 0.0;
  double den = 0.0;
  for (const FiringRecord& f : firings) {
    num += f.strength * rb.conclusion_set(f.rule).representative();
    den += f.strength;
  }
  if (!(den > 0.0)) throw NoRuleFired();
  return num / den;
}

/// Centre of gravity by trapezoidal quadrature over the samples.
inline double defuzzify_cog(const SampledCurve& curve) {
  if (curve.mu.size() < 2) throw PreconditionError("curve needs at least 2 samples");
  double moment = 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < curve.mu.size(); ++i) {
    const double x0 = curve.x(i), x1 = curve.x(i + 1);
    const double m0 = curve.mu[i], m1 = curve.mu[i + 1];
    const double h = x1 - x0;
    area += 0.5 * h * (m0 + m1);
    moment += 0.5 * h * (m0 * x0 + m1 * x1);
  }
  if (!(area > 0.0)) throw NoRuleFired();
  return moment / area;
}

namespace names {
inline constexpr const char* kQoI = "QoI";
inline constexpr const char* kConsistency = "Consistency";
inline constexpr const char* kCompleteness = "Completeness";
inline constexpr const char* kQoIOut = "QoI_out";
inline constexpr const char* kSmall = "small";
inline constexpr const char* kMedium = "medium";
inline constexpr const char* kHigh = "high";
}  // namespace names

/// small/medium/high on [0,1]; crossovers sit at 0.5 and 0.8 (the QoI band
/// boundaries).
inline LinguisticVariable default_variable(std::string name) {
  return LinguisticVariable(std::move(name), 0.0, 1.0,
                            {{names::kSmall, MembershipFunction({{0.0, 1.0}, {0.2, 1.0}, {0.5, 0.0}})},
                             {names::kMedium, MembershipFunction::triangle(0.2, 0.5, 0.8)},
                             {names::kHigh, MembershipFunction({{0.5, 0.0}, {0.8, 1.0}, {1.0, 1.0}})}});
}

/// The eleven FAIR rules, in order.
inline std::vector<Rule> fair_default_rules() {
  using namespace names;
  auto all = [](const char* q, const char* cons, const char* comp, const char* out) {
    return Rule{{{kQoI, q}, {kConsistency, cons}, {kCompleteness, comp}}, {kQoIOut, out}};
  };
  return {
      Rule{{{kQoI, kSmall}}, {kQoIOut, kSmall}},           // (1)
      Rule{{{kCompleteness, kSmall}}, {kQoIOut, kSmall}},  // (2)
      Rule{{{kConsistency, kSmall}}, {kQoIOut, kSmall}},   // (3)
      all(kMedium, kMedium, kHigh, kMedium),               // (4)
      all(kMedium, kHigh, kMedium, kMedium),               // (5)
      all(kMedium, kHigh, kHigh, kMedium),                 // (6)
      all(kHigh, kMedium, kMedium, kMedium),               // (7)
      all(kHigh, kMedium, kHigh, kMedium),                 // (8)
      all(kHigh, kHigh, kMedium, kMedium),                 // (9)
      all(kMedium, kMedium, kMedium, kSmall),              // (10)
      all(kHigh, kHigh, kHigh, kHigh),                     // (11)
  };
}

inline RuleBase fair_default_rulebase() {
  return RuleBase({default_variable(names::kQoI), default_variable(names::kConsistency),
                   default_variable(names::kCompleteness)},
                  default_variable(names::kQoIOut), fair_default_rules());
}

}  // namespace fair::fuzzy
