#include <gtest/gtest.h>

#include <map>

#include "poolkit/formulations.hpp"
#include "poolkit/solver.hpp"

using namespace poolkit;

namespace {

const std::string kData = POOLKIT_DATA_DIR;

PoolingInstance haverly(int k) {
  return parse_instance(kData + "/instances/haverly" + std::to_string(k) + ".json");
}

// Fixes the listed arc flows (others zero) and completes the assignment
// through the MCF LP.
std::vector<double> complete(const BilinearModel& bm, const PoolingInstance& inst,
                             const std::map<std::pair<std::string, std::string>, double>& flows) {
  ModelIR lp = build_mcf_relaxation(bm);
  for (std::size_t k = 0; k < inst.arcs.size(); ++k) {
    const auto key = std::make_pair(inst.nodes[inst.arcs[k].tail].id, inst.nodes[inst.arcs[k].head].id);
    const auto it = flows.find(key);
    auto& v = lp.vars()[bm.arc_flow[k]];
    v.lower = v.upper = it == flows.end() ? 0.0 : it->second;
  }
  const SolveResult r = solve(lp);
  EXPECT_EQ(r.status, SolveStatus::kOptimal);
  std::vector<double> x(r.values.begin(), r.values.begin() + bm.ir.num_vars());
  rederive_proportions(bm, x);
  return x;
}

const std::map<std::pair<std::string, std::string>, double> kHaverly1Opt{
    {{"c2", "p1"}, 100.0}, {{"p1", "y"}, 100.0}, {{"c3", "p2"}, 100.0}, {{"p2", "y"}, 100.0}};

}  // namespace

TEST(Formulations, KnownOptimumIsFeasibleInBothBases) {
  const PoolingInstance h = haverly(1);
  for (Basis b : {Basis::kSource, Basis::kTerminal}) {
    const BilinearModel bm = build_bilinear(h, b);
    const auto x = complete(bm, h, kHaverly1Opt);
    const SolutionReport rep = check_solution(bm, x, 1e-6);
    EXPECT_TRUE(rep.ok) << to_string(b) << " worst " << rep.worst_family << " " << rep.worst;
    EXPECT_NEAR(objective_arcs(bm, x), -400.0, 1e-6);
    EXPECT_NEAR(objective_decomposed(bm, h, x), -400.0, 1e-6);
  }
}

TEST(Formulations, SpecViolationIsReported) {
  const PoolingInstance h = haverly(1);
  const BilinearModel bm = build_bilinear(h, Basis::kSource);
  const auto x = complete(bm, h, kHaverly1Opt);
  // y blends to exactly 1.5; a tighter window breaks it, same variable layout
  PoolingInstance tight = h;
  tight.mu_hi[tight.node_index("y")] = {1.4};
  const BilinearModel bt = build_bilinear(tight, Basis::kSource);
  ASSERT_EQ(bt.ir.num_vars(), bm.ir.num_vars());
  const SolutionReport rep = check_solution(bt, x, 1e-6);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.worst_family.rfind("spec", 0), 0u) << rep.worst_family;
}

TEST(Formulations, BilinearMismatchIsReported) {
  const PoolingInstance h = haverly(1);
  const BilinearModel bm = build_bilinear(h, Basis::kSource);
  auto x = complete(bm, h, kHaverly1Opt);
  const auto& blk = bm.blocks.front();
  x[blk.q[0]] = 0.5 * x[blk.q[0]] + 0.25;
  EXPECT_FALSE(check_solution(bm, x, 1e-6).ok);
}

TEST(Formulations, BlockOrientation) {
  const PoolingInstance h = haverly(1);
  const BilinearModel s = build_bilinear(h, Basis::kSource);
  const BilinearModel t = build_bilinear(h, Basis::kTerminal);
  ASSERT_EQ(s.blocks.size(), 2u);
  const PoolBlock& sp1 = s.blocks[0];
  EXPECT_EQ(sp1.label, "p1");
  // generalized: c3 reaches p1 through p2
  EXPECT_EQ(sp1.row_labels, (std::vector<std::string>{"c1", "c2", "c3"}));
  EXPECT_EQ(sp1.col_labels, (std::vector<std::string>{"p2", "x", "y"}));
  const PoolBlock& tp1 = t.blocks[0];
  EXPECT_EQ(tp1.row_labels, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(tp1.col_labels, (std::vector<std::string>{"c1", "c2", "p2"}));
  EXPECT_EQ(sp1.q.size(), 3u);
  EXPECT_EQ(tp1.q.size(), 2u);
}

TEST(Formulations, ImpliedBoundsCloseInfiniteCaps) {
  const PoolingInstance h = haverly(1);
  const PoolingInstance b = with_implied_bounds(h);
  for (const auto& a : b.arcs) EXPECT_TRUE(std::isfinite(a.u));
  EXPECT_TRUE(std::isfinite(b.nodes[b.node_index("c1")].U));
  EXPECT_LE(b.arcs[*b.find_arc(b.node_index("c1"), b.node_index("p1"))].u, 300.0);
}

TEST(Formulations, McfIsARelaxation) {
  for (int k = 1; k <= 3; ++k) {
    const PoolingInstance h = haverly(k);
    for (Basis b : {Basis::kSource, Basis::kTerminal}) {
      const SolveResult r = solve(build_mcf_relaxation(build_bilinear(h, b)));
      ASSERT_EQ(r.status, SolveStatus::kOptimal);
      const double opt[] = {-400.0, -600.0, -750.0};
      EXPECT_LE(r.objective, opt[k - 1] + 1e-6);
    }
  }
}

TEST(Formulations, SoftSpecsAddPenaltyColumns) {
  PoolingInstance h = haverly(1);
  h.penalty.assign(h.nodes.size(), {});
  h.penalty[h.node_index("y")] = {10.0};
  h.finalize();
  ASSERT_TRUE(h.soft_specs());
  const BilinearModel bm = build_bilinear(h, Basis::kSource);
  const SolveResult r = solve(build_mcf_relaxation(bm));
  EXPECT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_GT(bm.ir.num_vars(), build_bilinear(haverly(1), Basis::kSource).ir.num_vars());
}
