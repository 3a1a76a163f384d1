#include <gtest/gtest.h>

#include <cmath>

#include "poolkit/exact.hpp"
#include "poolkit/relaxations.hpp"

using namespace poolkit;

namespace {

const std::string kData = POOLKIT_DATA_DIR;

PoolingInstance haverly(int k) {
  return generalize(parse_instance(kData + "/instances/haverly" + std::to_string(k) + ".json"));
}

}  // namespace

TEST(Exact, HaverlyOptimaInBothBases) {
  const double opt[] = {-400.0, -600.0, -750.0};
  for (int k = 1; k <= 3; ++k) {
    double found[2];
    for (Basis b : {Basis::kSource, Basis::kTerminal}) {
      ExactOptions o;
      o.basis = b;
      const ExactResult r = solve_exact(haverly(k), o);
      ASSERT_EQ(r.status, SolveStatus::kOptimal) << "Haverly" << k << " " << to_string(b);
      EXPECT_NEAR(r.objective, opt[k - 1], 1e-4 * std::abs(opt[k - 1]));
      EXPECT_LE(r.dual_bound, r.objective + 1e-9);
      EXPECT_LE(r.gap(), o.rel_tol);
      EXPECT_FALSE(r.incumbent_from.empty());
      const BilinearModel bm = build_bilinear(haverly(k), b);
      EXPECT_TRUE(check_solution(bm, r.values, 1e-6).ok);
      found[b == Basis::kTerminal] = r.objective;
    }
    EXPECT_NEAR(found[0], found[1], 1e-4 * std::abs(opt[k - 1]));
  }
}

TEST(Exact, InfeasibleInstance) {
  PoolingInstance h = haverly(1);
  // every source has quality >= 1 but x must take 50 units at most 0.5
  h.nodes[h.node_index("x")].L = 50.0;
  h.mu_hi[h.node_index("x")] = {0.5};
  h.finalize();
  const ExactResult r = solve_exact(h);
  EXPECT_EQ(r.status, SolveStatus::kInfeasible);
  EXPECT_FALSE(std::isfinite(r.objective));
}

TEST(Polish, NeverWorsensAFeasiblePoint) {
  const PoolingInstance h = haverly(3);
  const BuiltModel g = build_method(h, parse_method("G2:S:H=2:drop"));
  const SolveResult r = solve(g.ir);
  ASSERT_TRUE(r.has_solution());
  std::vector<double> v = base_solution(g, r.values);
  const double before = g.base.ir.objective_value(v);
  ASSERT_TRUE(polish_solution(g.base, v));
  EXPECT_LE(g.base.ir.objective_value(v), before + 1e-7 * std::abs(before));
  EXPECT_TRUE(check_solution(g.base, v, 1e-6).ok);
}
