#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "poolkit/rank1.hpp"
#include "poolkit/solver.hpp"
#include "support.hpp"

using namespace poolkit;

namespace {

double block_value(const BoundBox& box, BlockKind kind, const Matrix& c) {
  const SolveResult r = solve(build_block_lp(box, kind, c));
  EXPECT_EQ(r.status, SolveStatus::kOptimal);
  return r.objective;
}

Matrix random_cost(std::mt19937_64& rng, std::size_t m, std::size_t n) {
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  Matrix c(m, n);
  for (auto& v : c.a) v = d(rng);
  return c;
}

BoundBox example_box() {
  BoundBox b(2, 2);
  b.l = {1, 0};
  b.u = {3, 2};
  b.lc = {0, 1};
  b.uc = {2, 4};
  b.L = 2;
  b.U = 5;
  return b;
}

}  // namespace

TEST(BoundBox, RejectsInvertedIntervals) {
  BoundBox b = example_box();
  b.lc[0] = 3;
  EXPECT_THROW(b.validate(), GeometryError);
}

TEST(BoundBox, NormalizeDropsZeroCapacityLines) {
  BoundBox b = example_box();
  b.u[1] = 0;
  b.l[1] = 0;
  const NormalizedBox nb = normalize(b);
  EXPECT_EQ(nb.box.m(), 1u);
  EXPECT_EQ(nb.rows, std::vector<std::size_t>{0});
  EXPECT_EQ(nb.box.n(), 2u);
}

TEST(Membership, RankAndBounds) {
  const BoundBox b = example_box();
  Matrix X(2, 2);
  X.a = {0.5, 1.5, 0.25, 0.75};  // rows 2 / 1, cols .75 / 2.25, rank one
  EXPECT_TRUE(membership_T(X, b, 1e-9));
  EXPECT_TRUE(is_rank_le_one(X));
  X(1, 1) = 1.0;
  EXPECT_FALSE(is_rank_le_one(X));
  X.a = {0.1, 0.1, 0.1, 0.1};  // total below L
  EXPECT_FALSE(membership_T(X, b, 1e-9));
}

TEST(Fragments, LiftedRankOnePointsSatisfyEveryFamily) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const BoundBox box = random_box(1 + rng() % 4, 1 + rng() % 4, rng);
    const ModelFragment frags[] = {build_rowwise_extension(box), build_colwise_extension(box),
                                   build_intersection(box), build_rowcol_extension(box)};
    for (int s = 0; s < 20; ++s) {
      const Matrix X = sample_rank_one(box, rng);
      for (const auto& f : frags)
        EXPECT_LE(fragment_violation(f, X, lift_aux(f, X)), 1e-7 * box.scale());
    }
  }
}

// F4 >= F3 >= max(F1, F2) >= plain, and none exceeds the rank-one minimum.
TEST(Dominance, RandomBoxes) {
  std::mt19937_64 rng(2024);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const BoundBox box = random_box(1 + rng() % 4, 1 + rng() % 4, rng);
    const Matrix c = random_cost(rng, box.m(), box.n());
    const double tol = 1e-7 * box.scale() * (1.0 + std::abs(c.a[0]));
    const double plain = block_value(box, BlockKind::kPlain, c);
    const double f1 = block_value(box, BlockKind::kColwise, c);
    const double f2 = block_value(box, BlockKind::kRowwise, c);
    const double f3 = block_value(box, BlockKind::kIntersection, c);
    const double f4 = block_value(box, BlockKind::kRowCol, c);
    if (f4 < f3 - tol || f3 < std::max(f1, f2) - tol || std::min(f1, f2) < plain - tol)
      ++violations;
    if (box.m() * box.n() <= 6) {
      const double exact = brute_force_bound(box, c, 25);
      if (f4 > exact + 1e-6 * box.scale() * 10) ++violations;
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(Dominance, SingleRowOrColumnIsExact) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const BoundBox box = random_box(1, 1 + rng() % 4, rng);
    const Matrix c = random_cost(rng, box.m(), box.n());
    EXPECT_NEAR(block_value(box, BlockKind::kPlain, c), block_value(box, BlockKind::kRowCol, c),
                1e-7 * box.scale());
  }
}

TEST(Rlt, ValidOnSampledRankOnePoints) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const BoundBox box = random_box(1 + rng() % 4, 1 + rng() % 4, rng, true);
    const ValidityReport rep = sample_rlt_validity(box, 5000, 1000 + trial);
    ASSERT_FALSE(rep.skipped);
    EXPECT_TRUE(rep.ok(1e-8)) << "linear " << rep.max_linear << " conic " << rep.max_conic;
  }
}

TEST(Rlt, GuardSkipsZeroTotal) {
  BoundBox box = example_box();
  box.L = 0;
  EXPECT_TRUE(gen_rlt_mccormick(box, IneqSpace::kBoth).skipped);
  EXPECT_TRUE(gen_rlt_conic(box).skipped);
}

// Pieces fix every row but one and every column but one at a bound, so they
// cover the extreme points.
TEST(HullPieces, GridVerticesLieInSomePiece) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const BoundBox box = fixtures::integer_box(rng, 3);
    const auto pieces = enumerate_hull_pieces(box);
    ASSERT_FALSE(pieces.empty());
    for (const auto& X : fixtures::extreme_points(fixtures::rank_one_grid(box))) {
      bool inside = false;
      for (const auto& p : pieces) inside = inside || piece_contains(p, box, X, 1e-7);
      EXPECT_TRUE(inside);
    }
  }
}

TEST(ExtremePoints, CountsOnKnownVertex) {
  const BoundBox b = example_box();
  Matrix X(2, 2);
  X.a = {0.5, 1.5, 0.25, 0.75};  // row 0 interior, row 1 interior
  const ExtremeCounts c = check_extreme_point_property(X, b, 1e-9);
  EXPECT_EQ(c.count_row, 2);
  Matrix bad(2, 2);
  bad.a = {1, 0, 0, 1};
  EXPECT_THROW(check_extreme_point_property(bad, b, 1e-9), GeometryError);
}

TEST(ExtremePoints, GridVerticesHaveAtMostOneInteriorLine) {
  std::mt19937_64 rng(91);
  for (int trial = 0; trial < 10; ++trial) {
    const BoundBox box = fixtures::integer_box(rng, 3);
    const auto verts = fixtures::extreme_points(fixtures::rank_one_grid(box));
    ASSERT_FALSE(verts.empty());
    for (const auto& X : verts) {
      const ExtremeCounts c = check_extreme_point_property(X, box, 1e-9);
      EXPECT_LE(c.count_row, 1);
      EXPECT_LE(c.count_col, 1);
    }
  }
}

TEST(Oracles, BruteForceMatchesClosedFormOnSingleCell) {
  BoundBox box(1, 1);
  box.l = {1};
  box.u = {4};
  box.lc = {0};
  box.uc = {3};
  box.L = 0;
  box.U = 10;
  Matrix c(1, 1);
  c(0, 0) = -2.0;
  EXPECT_NEAR(brute_force_bound(box, c, 5), -6.0, 1e-9);
}
