#include <gtest/gtest.h>

#include "poolkit/instance.hpp"
#include "support.hpp"

using namespace poolkit;

namespace {

const std::string kData = POOLKIT_DATA_DIR;

MiningSchedule small_schedule() {
  MiningSchedule s;
  s.stockpiles = {"a", "b"};
  s.supplies = {{"a", 0.0, 10.0, {0.2}}, {"b", 1.0, 20.0, {0.6}}, {"a", 2.0, 5.0, {0.4}}};
  s.demands = {{0.5, 8.0, {0.5}, {}}, {2.5, 20.0, {0.5}, {}}};
  return s;
}

}  // namespace

TEST(Instance, ParsesHaverly) {
  const PoolingInstance h = parse_instance(kData + "/instances/haverly1.json");
  EXPECT_EQ(h.name, "Haverly1");
  EXPECT_EQ(h.sources.size(), 3u);
  EXPECT_EQ(h.pools.size(), 2u);
  EXPECT_EQ(h.terminals.size(), 2u);
  EXPECT_EQ(h.K, 1);
  EXPECT_TRUE(h.has_pool_pool_arcs());
  EXPECT_FALSE(h.soft_specs());
  EXPECT_DOUBLE_EQ(h.lambda[h.node_index("c1")][0], 3.0);
  EXPECT_DOUBLE_EQ(h.mu_hi[h.node_index("y")][0], 1.5);
}

TEST(Instance, JsonRoundTrip) {
  const PoolingInstance h = parse_instance(kData + "/instances/haverly2.json");
  const std::string text = instance_to_json(h);
  EXPECT_EQ(instance_to_json(parse_instance_json(text, h.name)), text);
}

TEST(Instance, DerivedReachability) {
  const PoolingInstance h = parse_instance(kData + "/instances/haverly1.json");
  const int p1 = h.node_index("p1"), c3 = h.node_index("c3"), x = h.node_index("x");
  // p2 -> p1 makes c3 reach p1
  const auto& S = h.S[p1];
  EXPECT_NE(std::find(S.begin(), S.end(), c3), S.end());
  EXPECT_EQ(h.T[x], std::vector<int>{x});
  EXPECT_FALSE(h.find_arc(c3, p1).has_value());
  // ghost commodity flow defaults to [0, U_pool]
  const Interval g = h.commodity_interval(c3, p1);
  EXPECT_EQ(g.lo, 0.0);
  EXPECT_EQ(g.hi, 300.0);
}

TEST(Instance, GeneralizeAddsPoolPairsOnce) {
  PoolingInstance h;
  h.add_node("s", NodeKind::kSource);
  h.add_node("p", NodeKind::kPool, 0, 5);
  h.add_node("q", NodeKind::kPool, 0, 7);
  h.add_node("t", NodeKind::kTerminal, 0, 10);
  h.add_arc("s", "p");
  h.add_arc("s", "q");
  h.add_arc("p", "t");
  h.add_arc("q", "t");
  h.K = 0;
  h.finalize();
  const PoolingInstance g = generalize(h);
  ASSERT_EQ(g.arcs.size(), 6u);
  const auto pq = g.find_arc(g.node_index("p"), g.node_index("q"));
  ASSERT_TRUE(pq.has_value());
  EXPECT_EQ(g.arcs[*pq].u, 5.0);
  EXPECT_EQ(g.arcs[*pq].cost, 0.0);
  EXPECT_EQ(generalize(g).arcs.size(), 6u);
}

TEST(Instance, RejectsBadGraphs) {
  PoolingInstance h;
  h.add_node("s", NodeKind::kSource);
  h.add_node("t", NodeKind::kTerminal);
  EXPECT_THROW(h.add_node("s", NodeKind::kPool), InstanceError);
  EXPECT_THROW(h.add_arc("s", "zz"), InstanceError);
  h.add_arc("t", "s");
  EXPECT_THROW(h.finalize(), InstanceError);
}

TEST(Instance, SchemaErrors) {
  EXPECT_THROW(parse_instance_json("[1,2]"), SchemaError);
  EXPECT_THROW(parse_instance_json("{\"nodes\": []}"), SchemaError);
  EXPECT_THROW(parse_instance_json("{\"nodes\": [{\"id\": \"a\", \"kind\": \"tank\"}], \"arcs\": []}"),
               SchemaError);
  EXPECT_THROW(parse_instance_json("{not json"), SchemaError);
  EXPECT_THROW(parse_instance(kData + "/instances/does_not_exist.json"), InstanceError);
}

TEST(Mining, ConvertBuildsChainsAndWindows) {
  const PoolingInstance inst = convert_mining(small_schedule());
  ASSERT_TRUE(inst.mining.has_value());
  const MiningCounts c = mining_arc_counts(inst);
  EXPECT_EQ(c.asi, 3);
  EXPECT_EQ(c.aii, 1);
  EXPECT_EQ(c.ait, 3);
  EXPECT_TRUE(inst.soft_specs());
  const int j1 = inst.node_index("j_1"), sur = inst.node_index("j_surplus");
  EXPECT_EQ(inst.nodes[j1].L, 8.0);
  EXPECT_EQ(inst.nodes[j1].U, 8.0);
  EXPECT_EQ(inst.nodes[sur].L, 7.0);
  EXPECT_EQ(inst.nodes[inst.node_index("i_a_2")].U, 15.0);
  EXPECT_TRUE(inst.find_arc(inst.node_index("i_a_1"), inst.node_index("i_a_2")));
  EXPECT_TRUE(inst.find_arc(inst.node_index("i_b_1"), inst.node_index("j_2")));
  EXPECT_FALSE(inst.find_arc(inst.node_index("i_b_1"), j1));
}

TEST(Mining, ScheduleJsonRoundTrip) {
  const MiningSchedule s = fixtures::random_schedule(4);
  const std::string text = mining_to_json(s);
  EXPECT_EQ(mining_to_json(parse_mining_json(text)), text);
}

TEST(Mining, ValidationErrors) {
  MiningSchedule s = small_schedule();
  s.demands[1].qty = 100.0;
  EXPECT_THROW(convert_mining(s), InstanceError);
  s = small_schedule();
  s.supplies[2].time = 0.0;  // ties with the first supply of "a"
  EXPECT_THROW(s.validate(), InstanceError);
  s = small_schedule();
  s.demands[0].time = -1.0;
  EXPECT_THROW(convert_mining(s), InstanceError);
  s = small_schedule();
  s.supplies[0].stockpile = "c";
  EXPECT_THROW(s.validate(), InstanceError);
}

TEST(Mining, RandomSchedulesConvert) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const MiningSchedule s = fixtures::random_schedule(seed);
    EXPECT_NO_THROW(convert_mining(s)) << "seed " << seed;
  }
}
