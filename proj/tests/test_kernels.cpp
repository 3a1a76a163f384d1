#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "poolkit/kernels.hpp"

using namespace poolkit;
namespace k = poolkit::kernels;

namespace {

std::vector<double> randv(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// Odd sizes exercise the tail loops.
constexpr std::size_t kSizes[] = {0, 1, 3, 4, 7, 8, 13, 64, 257};

}  // namespace

TEST(Kernels, ScalarMatchesDefinition) {
  const std::vector<double> L{1, 2, -1, 0};  // two forms over dim 2
  const std::vector<double> b{0.5, 0.0};
  const std::vector<double> P{1, 2, 3, 0, 1, 1};  // 3 points, SoA
  // form 0: p0 = 1, p1 = 4, p2 = 5 ; form 1: -1, -2, -3
  EXPECT_DOUBLE_EQ(k::scalar::max_linear_violation(L.data(), b.data(), 2, 2, P.data(), 3), 4.5);
  EXPECT_EQ(k::scalar::max_linear_violation(L.data(), b.data(), 0, 2, P.data(), 3), -INFINITY);
  const std::vector<double> X{1, 2, 2, 4.5};
  EXPECT_DOUBLE_EQ(k::scalar::max_abs_minor(X.data(), 2, 2), 0.5);
}

TEST(Kernels, DispatchIsPinnable) {
  k::force_isa(k::Isa::kScalar);
  EXPECT_EQ(k::active_isa(), k::Isa::kScalar);
  k::reset_isa();
  EXPECT_TRUE(k::isa_available(k::active_isa()));
  if (!k::isa_available(k::Isa::kAvx2)) {
    EXPECT_ANY_THROW(k::force_isa(k::Isa::kAvx2));
  }
}

#if defined(POOLKIT_HAVE_AVX2)

class Avx2Equivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!k::isa_available(k::Isa::kAvx2)) GTEST_SKIP() << "cpu lacks avx2";
  }
};

TEST_F(Avx2Equivalence, LinearForms) {
  std::mt19937_64 rng(11);
  for (std::size_t npts : kSizes) {
    for (std::size_t dim : {1u, 5u, 10u}) {
      const std::size_t nf = 6;
      const auto L = randv(rng, nf * dim), b = randv(rng, nf), P = randv(rng, dim * npts);
      std::vector<double> o1(nf * npts), o2(nf * npts);
      k::scalar::linear_forms(L.data(), nf, dim, P.data(), npts, o1.data());
      k::avx2::linear_forms(L.data(), nf, dim, P.data(), npts, o2.data());
      for (std::size_t i = 0; i < o1.size(); ++i)
        EXPECT_NEAR(o1[i], o2[i], 1e-12 * (1 + std::abs(o1[i])));
      const double v1 = k::scalar::max_linear_violation(L.data(), b.data(), nf, dim, P.data(), npts);
      const double v2 = k::avx2::max_linear_violation(L.data(), b.data(), nf, dim, P.data(), npts);
      if (npts == 0) {
        EXPECT_EQ(v1, v2);
      } else {
        EXPECT_NEAR(v1, v2, 1e-12 * (1 + std::abs(v1)));
      }
    }
  }
}

TEST_F(Avx2Equivalence, Quadratic) {
  std::mt19937_64 rng(12);
  for (std::size_t npts : kSizes) {
    for (std::size_t kk : {0u, 1u, 3u}) {
      std::vector<std::vector<double>> sq(kk);
      std::vector<const double*> ptr(kk);
      for (std::size_t t = 0; t < kk; ++t) {
        sq[t] = randv(rng, npts);
        ptr[t] = sq[t].data();
      }
      const auto coef = randv(rng, kk), a = randv(rng, npts), b = randv(rng, npts);
      const double v1 = k::scalar::max_quadratic_violation(ptr.data(), coef.data(), kk, a.data(),
                                                           b.data(), npts);
      const double v2 = k::avx2::max_quadratic_violation(ptr.data(), coef.data(), kk, a.data(),
                                                         b.data(), npts);
      if (npts == 0) {
        EXPECT_EQ(v1, v2);
      } else {
        EXPECT_NEAR(v1, v2, 1e-12 * (1 + std::abs(v1)));
      }
    }
  }
}

TEST_F(Avx2Equivalence, Minors) {
  std::mt19937_64 rng(13);
  for (std::size_t m = 1; m <= 6; ++m) {
    for (std::size_t n = 1; n <= 9; ++n) {
      const auto X = randv(rng, m * n);
      const double v1 = k::scalar::max_abs_minor(X.data(), m, n);
      const double v2 = k::avx2::max_abs_minor(X.data(), m, n);
      EXPECT_NEAR(v1, v2, 1e-12 * (1 + v1)) << m << "x" << n;
    }
  }
}

#endif
