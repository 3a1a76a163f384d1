#include <gtest/gtest.h>

#include <cmath>

#include "poolkit/model_ir.hpp"
#include "poolkit/solver.hpp"

using namespace poolkit;

namespace {

ModelIR small_model() {
  ModelIR m;
  const VarId x = m.add_var("x[a]", 0.0, 4.0);
  const VarId y = m.add_var("y[a,b]", -1.0, kInf);
  const VarId z = m.add_var("z", 0.0, 1.0, VarType::kBinary);
  const VarId w = m.add_var("w", 0.0, kInf);
  m.add_row("cap[a]", {{x, 1.0}, {y, 2.0}}, Sense::kLessEqual, 6.0);
  m.add_row("link[a]", {{x, 1.0}, {z, -4.0}}, Sense::kLessEqual, 0.0);
  m.add_range("span", {{x, 1.0}, {y, 1.0}}, 1.0, 5.0);
  m.add_bilinear(w, x, y);
  m.set_objective({{x, -1.0}, {y, 0.1}}, 2.5);
  return m;
}

}  // namespace

TEST(ModelIr, FamilyIsPrefixBeforeBracket) {
  EXPECT_EQ(family_of("balance[s1,p1]"), "balance");
  EXPECT_EQ(family_of("plain"), "plain");
}

TEST(ModelIr, DuplicateNamesRejected) {
  ModelIR m;
  m.add_var("x", 0, 1);
  EXPECT_THROW(m.add_var("x", 0, 1), ModelError);
  m.add_row("r", {{0, 1.0}}, Sense::kEqual, 0.0);
  EXPECT_THROW(m.add_row("r", {{0, 1.0}}, Sense::kEqual, 0.0), ModelError);
}

TEST(ModelIr, RangeDropsInfiniteSides) {
  ModelIR m;
  const VarId x = m.add_var("x", 0, 1);
  m.add_range("a", {{x, 1.0}}, -kInf, 1.0);
  m.add_range("b", {{x, 1.0}}, 0.5, kInf);
  EXPECT_EQ(m.num_rows(), 2u);
}

TEST(ModelIr, DumpParseRoundTrip) {
  const ModelIR m = small_model();
  const std::string text = dump_model(m);
  const ModelIR back = parse_model(text);
  EXPECT_EQ(dump_model(back), text);
  EXPECT_EQ(back.num_vars(), m.num_vars());
  EXPECT_EQ(back.num_rows(), m.num_rows());
  EXPECT_EQ(back.bilinears().size(), 1u);
  EXPECT_TRUE(back.has_binaries());
}

TEST(ModelIr, DumpIsOrderIndependent) {
  ModelIR a, b;
  a.add_var("u", 0, 1);
  a.add_var("v", 0, 2);
  b.add_var("v", 0, 2);
  b.add_var("u", 0, 1);
  EXPECT_EQ(dump_model(a), dump_model(b));
}

TEST(ModelIr, FormatNumberRoundTripsShortDecimals) {
  for (double v : {0.1, -2.75, 1e-300, 123456789.125, kInf, -kInf}) {
    const ModelIR m = parse_model("var x C " + format_number(v) + " " + format_number(kInf) +
                                  "\nobj 0 :\n");
    EXPECT_EQ(m.vars()[0].lower, v);
  }
}

TEST(ModelIr, ViolationAndObjective) {
  const ModelIR m = small_model();
  std::vector<double> x{1.0, 1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(m.objective_value(x), 2.5 - 1.0 + 0.1);
  EXPECT_LE(m.max_linear_violation(x), 0.0);
  x[0] = 5.0;  // above its bound and breaks link
  EXPECT_NEAR(m.max_linear_violation(x), 1.0, 1e-12);
}

TEST(Solver, SolvesSmallMilp) {
  ModelIR m = small_model();
  m.drop_bilinears();
  const SolveResult r = solve(m);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_LE(m.max_linear_violation(r.values), 1e-7);
  // x <= 4 and x + y <= 5 with y >= -1; best is x = 4, y = -1 (cap allows)
  EXPECT_NEAR(r.objective, 2.5 - 4.0 - 0.1, 1e-7);
}

TEST(Solver, ReportsInfeasible) {
  ModelIR m;
  const VarId x = m.add_var("x", 0, 1);
  m.add_row("r", {{x, 1.0}}, Sense::kGreaterEqual, 2.0);
  EXPECT_EQ(solve(m).status, SolveStatus::kInfeasible);
}

TEST(Solver, RejectsBilinearWithoutCapability) {
  const auto backend = make_backend();
  EXPECT_FALSE(backend->capabilities() & kCapNonconvex);
  EXPECT_THROW(backend->solve(small_model(), {}), CapabilityError);
}
