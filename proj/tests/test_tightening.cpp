#include <gtest/gtest.h>

#include <cmath>

#include "poolkit/tightening.hpp"
#include "support.hpp"

using namespace poolkit;

namespace {

const std::string kData = POOLKIT_DATA_DIR;

PoolingInstance haverly(int k) {
  return generalize(parse_instance(kData + "/instances/haverly" + std::to_string(k) + ".json"));
}

double lp_value(const PoolingInstance& inst, const std::string& method) {
  const SolveResult r = solve(build_method(inst, parse_method(method)).ir);
  EXPECT_EQ(r.status, SolveStatus::kOptimal) << method;
  return r.objective;
}

// Pools a_1 (cap 5) and b_1 (cap 20) both feed the single demand of 8.
MiningSchedule two_pool_schedule() {
  MiningSchedule s;
  s.stockpiles = {"a", "b"};
  s.supplies = {{"a", 0.0, 5.0, {0.2}}, {"b", 0.0, 20.0, {0.4}}};
  s.demands = {{0.5, 8.0, {0.5}, {}}};
  return s;
}

// min / max of one arc flow over the MCF relaxation
Interval arc_range(const PoolingInstance& inst, const std::string& from, const std::string& to) {
  const BilinearModel bm = build_bilinear(inst, Basis::kSource);
  ModelIR lp = build_mcf_relaxation(bm);
  const int k = *inst.find_arc(inst.node_index(from), inst.node_index(to));
  Interval out;
  lp.set_objective({{bm.arc_flow[k], 1.0}});
  out.lo = solve(lp).objective;
  lp.set_objective({{bm.arc_flow[k], -1.0}});
  out.hi = -solve(lp).objective;
  return out;
}

bool inside(const Interval& inner, const Interval& outer, double tol) {
  return inner.lo >= outer.lo - tol && inner.hi <= outer.hi + tol;
}

}  // namespace

TEST(Mining, StepThreeLowerBound) {
  const PoolingInstance inst = convert_mining(two_pool_schedule());
  const BoundUpdate upd = mining_tighten(inst);
  const BoundEntry* e = upd.find(TargetKind::kArc, "i_b_1", "j_1");
  ASSERT_NE(e, nullptr);
  EXPECT_DOUBLE_EQ(e->after.lo, 3.0);
  EXPECT_EQ(e->lo_tag, "mining-step-3");
  EXPECT_NEAR(arc_range(inst, "i_b_1", "j_1").lo, 3.0, 1e-7);
  const BoundEntry* other = upd.find(TargetKind::kArc, "i_a_1", "j_1");
  ASSERT_NE(other, nullptr);
  EXPECT_DOUBLE_EQ(other->after.lo, 0.0);
  EXPECT_DOUBLE_EQ(other->after.hi, 5.0);
}

TEST(Mining, SupplyAndDemandAreFixed) {
  const PoolingInstance inst = convert_mining(two_pool_schedule());
  const BoundUpdate upd = mining_tighten(inst);
  const BoundEntry* s = upd.find(TargetKind::kNode, "s_a_1");
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->after.lo, 5.0);
  EXPECT_EQ(s->after.hi, 5.0);
  const BoundEntry* a = upd.find(TargetKind::kArc, "s_a_1", "i_a_1");
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->after.lo, 5.0);
  EXPECT_EQ(a->lo_tag, "mining-step-1");
  const BoundEntry* t = upd.find(TargetKind::kNode, "j_1");
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->after.lo, 8.0);
  EXPECT_EQ(t->after.hi, 8.0);
}

TEST(Mining, RejectsNonMiningInstances) {
  EXPECT_THROW(mining_tighten(haverly(1)), TighteningError);
}

TEST(Mining, SyntheticSchedulesKeepMcfValue) {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const PoolingInstance inst = convert_mining(fixtures::random_schedule(seed));
    for (bool fix : {false, true}) {
      const BoundUpdate upd = mining_tighten(inst, fix);
      for (const auto& e : upd.entries) EXPECT_TRUE(inside(e.after, e.before, 1e-9));
      const PoolingInstance tight = apply_bounds(inst, upd);
      const double before = lp_value(inst, "MCF:S"), after = lp_value(tight, "MCF:S");
      EXPECT_NEAR(before, after, 1e-6 * std::max(1.0, std::abs(before))) << "seed " << seed;
      EXPECT_GE(lp_value(tight, "F4:S"), lp_value(inst, "F4:S") - 1e-6 * std::max(1.0, std::abs(before)));
    }
  }
}

TEST(Obbt, ClosesHaverlyOneGaps) {
  const PoolingInstance h = haverly(1);
  const BoundUpdate upd = obbt_recipe(h, parse_method("F4:T"), 2);
  EXPECT_GT(upd.num_changed(), 0);
  EXPECT_LE(upd.z_lb, -400.0 + 1e-6);
  EXPECT_GE(upd.z_ub, -400.0 - 1e-6);
  const PoolingInstance tight = apply_bounds(h, upd);
  for (const char* m : {"F1:S", "F2:S", "F3:S", "F4:S"})
    EXPECT_NEAR(lp_value(tight, m), -400.0, 0.05 / 100 * 400.0) << m;
}

TEST(Obbt, KeepsTheKnownOptimum) {
  const PoolingInstance h = haverly(1);
  const BoundUpdate upd = obbt(h, parse_method("F1:S"), -500.0, -400.0);
  // optimum: c2 -> p1 -> y and c3 -> p2 -> y, 100 units each
  const std::map<std::pair<std::string, std::string>, double> opt{
      {{"c2", "p1"}, 100.0}, {{"p1", "y"}, 100.0}, {{"c3", "p2"}, 100.0}, {{"p2", "y"}, 100.0}};
  for (const auto& e : upd.entries) {
    EXPECT_TRUE(inside(e.after, e.before, 1e-9)) << e.from << "->" << e.to;
    if (e.kind != TargetKind::kArc) continue;
    const auto it = opt.find({e.from, e.to});
    const double f = it == opt.end() ? 0.0 : it->second;
    EXPECT_GE(f, e.after.lo - 1e-6) << e.from << "->" << e.to;
    EXPECT_LE(f, e.after.hi + 1e-6) << e.from << "->" << e.to;
  }
}

TEST(Obbt, SecondPassIsNoLooser) {
  const PoolingInstance h = haverly(2);
  const MethodSpec relax = parse_method("F4:T");
  const BoundUpdate first = obbt(h, relax, -1000.0, -600.0);
  const PoolingInstance t1 = apply_bounds(h, first);
  const BoundUpdate second = obbt(t1, relax, -1000.0, -600.0);
  for (const auto& e : second.entries) {
    const BoundEntry* f = first.find(e.kind, e.from, e.to);
    ASSERT_NE(f, nullptr);
    EXPECT_TRUE(inside(e.after, f->after, 1e-9)) << e.from << "->" << e.to;
  }
}

TEST(Obbt, WorkerCountDoesNotChangeResults) {
  const PoolingInstance h = haverly(3);
  const MethodSpec relax = parse_method("F2:T");
  const BoundUpdate a = obbt(h, relax, -875.0, -750.0, {}, 1);
  const BoundUpdate b = obbt(h, relax, -875.0, -750.0, {}, 4);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    EXPECT_EQ(a.entries[k].from, b.entries[k].from);
    EXPECT_EQ(a.entries[k].to, b.entries[k].to);
    EXPECT_EQ(a.entries[k].after.lo, b.entries[k].after.lo);
    EXPECT_EQ(a.entries[k].after.hi, b.entries[k].after.hi);
    EXPECT_EQ(a.entries[k].lo_tag, b.entries[k].lo_tag);
  }
}

TEST(Obbt, TargetSelection) {
  ObbtTargets only_pools;
  only_pools.arcs = only_pools.ghosts = only_pools.sources = only_pools.terminals = false;
  const BoundUpdate upd = obbt(haverly(1), parse_method("F1:S"), -500.0, -400.0, only_pools);
  ASSERT_EQ(upd.entries.size(), 2u);
  for (const auto& e : upd.entries) EXPECT_EQ(e.kind, TargetKind::kNode);
}

TEST(Obbt, RejectsInvertedBox) {
  EXPECT_THROW(obbt(haverly(1), parse_method("F1:S"), -300.0, -400.0), TighteningError);
}

TEST(Bounds, IdentityUpdateLeavesInstanceUnchanged) {
  const PoolingInstance h = haverly(1);
  EXPECT_EQ(instance_to_json(apply_bounds(h, BoundUpdate{})), instance_to_json(h));
}

TEST(Bounds, EmptyIntervalNamesTheTarget) {
  const PoolingInstance h = haverly(1);
  BoundUpdate upd;
  BoundEntry e;
  e.kind = TargetKind::kArc;
  e.from = "p1";
  e.to = "y";
  e.before = {0.0, kInf};
  e.after = {250.0, 260.0};  // y holds at most 200
  e.lo_tag = "obbt-min";
  upd.entries.push_back(e);
  PoolingInstance h2 = h;
  h2.arcs[*h2.find_arc(h2.node_index("p1"), h2.node_index("y"))].u = 200.0;
  try {
    apply_bounds(h2, upd);
    FAIL() << "expected TighteningError";
  } catch (const TighteningError& err) {
    EXPECT_NE(std::string(err.what()).find("p1"), std::string::npos);
  }
}

TEST(Bounds, JsonRoundTrip) {
  const BoundUpdate upd = mining_tighten(convert_mining(fixtures::random_schedule(7)));
  const std::string text = bound_update_to_json(upd);
  const BoundUpdate back = bound_update_from_json(text);
  EXPECT_EQ(bound_update_to_json(back), text);
  EXPECT_EQ(back.num_changed(), upd.num_changed());
}

TEST(Bounds, InstanceHashIsStable) {
  const PoolingInstance h = haverly(1);
  EXPECT_EQ(instance_hash(h), instance_hash(parse_instance_json(instance_to_json(h))));
  EXPECT_NE(instance_hash(h), instance_hash(haverly(2)));
  EXPECT_EQ(instance_hash(h).size(), 16u);
}
