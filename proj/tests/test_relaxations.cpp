#include <gtest/gtest.h>

#include <cmath>

#include "poolkit/relaxations.hpp"
#include "poolkit/solver.hpp"

using namespace poolkit;

namespace {

const std::string kData = POOLKIT_DATA_DIR;
constexpr double kOpt[] = {-400.0, -600.0, -750.0};

PoolingInstance haverly(int k) {
  return parse_instance(kData + "/instances/haverly" + std::to_string(k) + ".json");
}

SolveResult run(const PoolingInstance& inst, const std::string& method) {
  return solve(build_method(inst, parse_method(method)).ir);
}

double dgap(double opt, double bound) { return (opt - bound) / std::abs(opt) * 100.0; }

}  // namespace

TEST(MethodSpec, ParsesAndPrints) {
  const MethodSpec a = parse_method("F3:T+Vab(x,r)");
  EXPECT_EQ(a.kind, MethodKind::kF3);
  EXPECT_EQ(a.basis, Basis::kTerminal);
  EXPECT_TRUE(a.vab);
  EXPECT_FALSE(a.vac);
  EXPECT_EQ(a.space, IneqSpace::kBoth);
  const MethodSpec b = parse_method("G2:S:H=4:drop");
  EXPECT_TRUE(b.is_restriction());
  EXPECT_TRUE(b.drop_remainder);
  EXPECT_EQ(b.H, 4);
  for (const char* s : {"F1:S", "M2:T:H=3", "F4:S+Vab(x)+Vac(x)", "G1:T:H=2:drop", "MCF:T"})
    EXPECT_EQ(parse_method(parse_method(s).str()).str(), parse_method(s).str()) << s;
  EXPECT_EQ(parse_method("F2").basis, Basis::kSource);
}

TEST(MethodSpec, RejectsMalformed) {
  for (const char* s : {"", "F5:S", "F1:Q", "M1:S", "F1:S:H=3", "M2:S:H=x", "F1:S:drop",
                        "F1:S+Vx", "F1:S+Vab(x)+Vac(r)"})
    EXPECT_THROW(parse_method(s), MethodError) << s;
}

// Duality gaps of the LP relaxations without bound tightening.
TEST(LpRelaxations, HaverlyGapsWithoutTightening) {
  struct Case {
    int inst;
    const char* method;
    double gap;
  };
  const Case cases[] = {
      {1, "F1:S", 25.00}, {1, "F4:S", 25.00}, {1, "F4:T", 25.00},
      {2, "F1:S", 66.67}, {2, "F4:S", 66.67}, {2, "F4:T", 66.67},
      {3, "F1:S", 16.67}, {3, "F4:S", 16.67}, {3, "F1:T", 16.67},
      {3, "F2:T", 6.67},  {3, "F3:T", 6.67},  {3, "F4:T", 6.67},
  };
  for (const auto& c : cases) {
    const SolveResult r = run(haverly(c.inst), c.method);
    ASSERT_EQ(r.status, SolveStatus::kOptimal) << c.method;
    EXPECT_NEAR(dgap(kOpt[c.inst - 1], r.objective), c.gap, 0.05)
        << "Haverly" << c.inst << " " << c.method;
  }
}

TEST(LpRelaxations, ValidInequalitiesNeverWeaken) {
  for (int k = 1; k <= 3; ++k) {
    const PoolingInstance h = haverly(k);
    for (const char* base : {"F1:S", "F4:T"}) {
      const double plain = run(h, base).objective;
      for (const char* extra : {"+Vab(x)", "+Vab(r)", "+Vac(x,r)", "+Vab+Vac"}) {
        const SolveResult r = run(h, std::string(base) + extra);
        ASSERT_EQ(r.status, SolveStatus::kOptimal);
        EXPECT_GE(r.objective, plain - 1e-6);
        EXPECT_LE(r.objective, kOpt[k - 1] + 1e-6);
      }
    }
  }
}

TEST(LpRelaxations, RltGuardSkipsPoolsWithoutFlowFloor) {
  const BuiltModel skipped = build_method(haverly(1), parse_method("F4:S+Vab(x)"));
  EXPECT_EQ(skipped.rlt_rows, 0);
  EXPECT_EQ(skipped.rlt_skipped, 2);
  PoolingInstance h = haverly(1);
  h.nodes[h.node_index("p1")].L = 50.0;
  h.finalize();
  const BuiltModel bm = build_method(h, parse_method("F4:S+Vab(x)+Vac(x)"));
  EXPECT_GT(bm.rlt_rows, 0);
  EXPECT_EQ(bm.rlt_skipped, 1);
  const SolveResult r = solve(bm.ir);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_GE(r.objective, run(h, "F4:S").objective - 1e-6);
}

TEST(MipRelaxations, BoundsBracketOptimum) {
  for (int k = 1; k <= 3; ++k) {
    const PoolingInstance h = haverly(k);
    for (const char* m : {"M1:S:H=3", "M2:S:H=3", "M1:T:H=2", "M2:T:H=3"}) {
      const SolveResult r = run(h, m);
      ASSERT_EQ(r.status, SolveStatus::kOptimal) << m;
      EXPECT_LE(r.dual_bound, kOpt[k - 1] + 1e-6 * std::abs(kOpt[k - 1])) << m;
    }
  }
}

TEST(MipRelaxations, BoundGrowsWithLevel) {
  for (int k = 1; k <= 3; ++k) {
    const PoolingInstance h = haverly(k);
    for (const char* base : {"M1:S", "M2:T"}) {
      double prev = -kInf;
      for (int H = 1; H <= 4; ++H) {
        const SolveResult r = run(h, std::string(base) + ":H=" + std::to_string(H));
        ASSERT_EQ(r.status, SolveStatus::kOptimal);
        EXPECT_GE(r.dual_bound, prev - 1e-4 * std::abs(kOpt[k - 1])) << base << " H=" << H;
        prev = std::max(prev, r.dual_bound);
      }
    }
  }
}

TEST(MipRelaxations, HaverlyOneColumnExpansionIsTight) {
  const SolveResult r = run(haverly(1), "M2:S:H=3");
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_NEAR(dgap(-400.0, r.dual_bound), 0.0, 0.1);
}

TEST(Restrictions, SolutionsAreFeasiblePoolingPoints) {
  for (int k = 1; k <= 3; ++k) {
    const PoolingInstance h = haverly(k);
    for (const char* m : {"G1:S:H=3", "G2:S:H=3", "G1:T:H=3", "G2:T:H=3", "G2:T:H=2:drop"}) {
      const BuiltModel bm = build_method(h, parse_method(m));
      const SolveResult r = solve(bm.ir);
      ASSERT_TRUE(r.has_solution()) << m;
      const std::vector<double> v = base_solution(bm, r.values);
      const SolutionReport rep = check_solution(bm.base, v, 1e-6);
      EXPECT_TRUE(rep.ok) << "Haverly" << k << " " << m << " " << rep.worst_family << " "
                          << rep.worst;
      EXPECT_GE(r.objective, kOpt[k - 1] - 1e-6 * std::abs(kOpt[k - 1]));
    }
  }
}

TEST(Restrictions, FinerLevelsNeverLoseTheCoarseGrid) {
  // the H = 2 grid is a subset of the H = 4 grid
  const PoolingInstance h = haverly(3);
  const double coarse = run(h, "G2:T:H=2:drop").objective;
  const double fine = run(h, "G2:T:H=4:drop").objective;
  EXPECT_LE(fine, coarse + 1e-6 * std::abs(coarse));
}

TEST(Restrictions, HaverlyOneFound) {
  const SolveResult r = run(haverly(1), "G2:T:H=3");
  ASSERT_TRUE(r.has_solution());
  EXPECT_NEAR(r.objective, -400.0, 1e-4 * 400.0);
}
