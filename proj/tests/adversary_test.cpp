#include "fair/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gtest/gtest.h"

namespace fair::adv {
namespace {

const topo::Network& reference() {
  static const topo::Network net = topo::build_topology(topo::TopologyConfig{100, 12, 3, 4, 1});
  return net;
}

AdversaryConfig with(Model m, double fraction, std::uint64_t seed = 1) {
  AdversaryConfig c;
  c.model = m;
  c.compromise_fraction = fraction;
  c.seed = seed;
  return c;
}

TEST(SelectCompromisedTest, BudgetBounds) {
  for (Model m : {Model::kNaive, Model::kSmart, Model::kSmartTopology}) {
    EXPECT_TRUE(select_compromised(reference(), with(m, 0.0)).compromised.empty());
    EXPECT_EQ(select_compromised(reference(), with(m, 1.0)).compromised, reference().nodes);
    EXPECT_EQ(select_compromised(reference(), with(m, 0.23)).compromised.size(), 23u);
  }
  EXPECT_TRUE(select_compromised(reference(), with(Model::kNone, 0.5)).compromised.empty());
}

TEST(SelectCompromisedTest, DeterministicAndSeedDependent) {
  const auto a = select_compromised(reference(), with(Model::kNaive, 0.2, 4));
  EXPECT_EQ(a.compromised, select_compromised(reference(), with(Model::kNaive, 0.2, 4)).compromised);
  EXPECT_NE(a.compromised, select_compromised(reference(), with(Model::kNaive, 0.2, 5)).compromised);
}

TEST(SelectCompromisedTest, NaiveIsRoughlyUniform) {
  std::vector<int> hits(100, 0);
  for (std::uint64_t seed = 0; seed < 2000; ++seed)
    for (NodeId id : select_compromised(reference(), with(Model::kNaive, 0.1, seed)).compromised) ++hits[id];
  // Each node: Binomial(2000, 0.1), mean 200, sd ~13.4.
  for (int h : hits) {
    EXPECT_GT(h, 200 - 6 * 14);
    EXPECT_LT(h, 200 + 6 * 14);
  }
}

TEST(SelectCompromisedTest, SmartTopologyFillsOneWitnessGroup) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto cfg = with(Model::kSmartTopology, 0.04, seed);  // budget 4 = one group
    const auto cs = select_compromised(reference(), cfg);
    ASSERT_EQ(cs.compromised.size(), 4u);
    std::size_t full_groups = 0;
    for (std::size_t p : reference().levels[0]) {
      const auto& w = reference().points[p].witnesses;
      full_groups += std::all_of(w.begin(), w.end(), [&](NodeId id) { return cs.contains(id); });
    }
    EXPECT_EQ(full_groups, 1u) << "seed " << seed;
  }
}

TEST(SelectCompromisedTest, SmartTopologyTargetsRequestedLevel) {
  auto cfg = with(Model::kSmartTopology, 0.04);
  cfg.target_level = 2;
  const auto cs = select_compromised(reference(), cfg);
  for (NodeId w : reference().root().witnesses) EXPECT_TRUE(cs.contains(w));
  cfg.target_level = 3;
  EXPECT_THROW(select_compromised(reference(), cfg), ConfigError);
}

TEST(CorruptReportTest, NaiveFactorRange) {
  const auto cfg = with(Model::kNaive, 1.0);
  const auto cs = select_compromised(reference(), cfg);
  double lo = 1e9, hi = -1e9;
  for (std::uint64_t epoch = 0; epoch < 50; ++epoch)
    for (NodeId id : reference().nodes) {
      const auto out = corrupt_report({id, 100.0, 0.7, true}, id, 0, cs, cfg, epoch);
      EXPECT_GE(out.value, 10.0);
      EXPECT_LE(out.value, 90.0);
      EXPECT_EQ(out.qoi, 0.7);
      lo = std::min(lo, out.value);
      hi = std::max(hi, out.value);
    }
  EXPECT_LT(lo, 12.0);
  EXPECT_GT(hi, 88.0);
}

TEST(CorruptReportTest, SmartColludersAgree) {
  const auto cfg = with(Model::kSmart, 1.0);
  const auto cs = select_compromised(reference(), cfg);
  std::vector<qoi::WitnessReport> group{{3, 100.0, 0.9, true}, {7, 100.0, 0.4, true}, {11, 100.0, 0.6, true}};
  collude(group, 0, cs, cfg, 0);
  for (const auto& r : group) {
    EXPECT_DOUBLE_EQ(r.value, 50.0);
    EXPECT_EQ(r.qoi, 1.0);
  }
  EXPECT_DOUBLE_EQ(corrupt_report({5, 100.0, 0.2, true}, 5, 0, cs, cfg, 0).value, 50.0);
}

TEST(CorruptReportTest, CollusionFollowsFirstColluderAndSparesHonest) {
  auto cfg = with(Model::kSmart, 0.3, 8);
  const auto cs = select_compromised(reference(), cfg);
  std::vector<qoi::WitnessReport> group;
  for (NodeId id = 0; id < 100; ++id) group.push_back({id, 100.0 + id, 0.8, true});
  const auto honest = group;
  collude(group, 4, cs, cfg, 0);
  const auto first = std::find_if(honest.begin(), honest.end(), [&](auto& r) { return cs.contains(r.witness); });
  ASSERT_NE(first, honest.end());
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (cs.contains(group[i].witness)) {
      EXPECT_DOUBLE_EQ(group[i].value, first->value * 0.5);
    } else {
      EXPECT_EQ(group[i], honest[i]);
    }
  }
}

TEST(CorruptReportTest, NoneIsIdentityAndHonestNodeRejected) {
  const qoi::WitnessReport r{2, 42.0, 0.5, true};
  EXPECT_EQ(corrupt_report(r, 2, 0, CompromiseSet{}, with(Model::kNone, 0.0), 0), r);
  EXPECT_THROW(corrupt_report(r, 2, 0, CompromiseSet{}, with(Model::kNaive, 0.1), 0), PreconditionError);
}

TEST(LinkFailureTest, ExtremesAndBinomialConcentration) {
  std::vector<qoi::WitnessReport> msgs;
  for (NodeId id = 0; id < 10000; ++id) msgs.push_back({id, 1.0, 1.0, true});
  auto count_absent = [](const std::vector<qoi::WitnessReport>& v) {
    return std::count_if(v.begin(), v.end(), [](auto& r) { return !r.present; });
  };
  EXPECT_EQ(count_absent(apply_link_failures(msgs, 0.0, 1, 0)), 0);
  EXPECT_EQ(count_absent(apply_link_failures(msgs, 1.0, 1, 0)), 10000);
  const double sigma = std::sqrt(10000 * 0.1 * 0.9);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto dropped = static_cast<double>(count_absent(apply_link_failures(msgs, 0.1, seed, 3)));
    EXPECT_LE(std::abs(dropped - 1000.0), 3 * sigma) << "seed " << seed;
  }
  EXPECT_THROW(apply_link_failures(msgs, 1.5, 1, 0), PreconditionError);
}

TEST(LinkFailureTest, DeterministicPerKey) {
  EXPECT_EQ(link_delivers(0.5, 9, 2, 3, 4, 0), link_delivers(0.5, 9, 2, 3, 4, 0));
  int differ = 0;
  for (std::uint64_t s = 0; s < 200; ++s) differ += link_delivers(0.5, 9, 2, s, 4, 0) != link_delivers(0.5, 9, 3, s, 4, 0);
  EXPECT_GT(differ, 50);
}

TEST(AdversaryConfigTest, Validation) {
  EXPECT_NO_THROW(AdversaryConfig{}.validate());
  auto c = with(Model::kNaive, 1.2);
  EXPECT_THROW(c.validate(), ConfigError);
  c = with(Model::kNaive, 0.1);
  c.naive_factor_lo = 0.95;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_model("smart_topology"), Model::kSmartTopology);
  EXPECT_FALSE(parse_model("evil").has_value());
}

}  // namespace
}  // namespace fair::adv
