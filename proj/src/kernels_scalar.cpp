#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "poolkit/kernels.hpp"

namespace poolkit::kernels {

namespace scalar {

double max_linear_violation(const double* L, const double* b, std::size_t nf,
                            std::size_t dim, const double* P,
                            std::size_t npts) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < nf; ++f) {
    const double* row = L + f * dim;
    for (std::size_t p = 0; p < npts; ++p) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s += row[d] * P[d * npts + p];
      worst = std::max(worst, s - b[f]);
    }
  }
  return worst;
}

void linear_forms(const double* L, std::size_t nf, std::size_t dim,
                  const double* P, std::size_t npts, double* out) {
  for (std::size_t f = 0; f < nf; ++f) {
    const double* row = L + f * dim;
    double* o = out + f * npts;
    for (std::size_t p = 0; p < npts; ++p) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s += row[d] * P[d * npts + p];
      o[p] = s;
    }
  }
}

double max_quadratic_violation(const double* const* sq, const double* coef,
                               std::size_t k, const double* a, const double* b,
                               std::size_t npts) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < npts; ++p) {
    double s = 0.0;
    for (std::size_t q = 0; q < k; ++q) s += coef[q] * sq[q][p] * sq[q][p];
    worst = std::max(worst, s - a[p] * b[p]);
  }
  return worst;
}

double max_abs_minor(const double* X, std::size_t m, std::size_t n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t I = i + 1; I < m; ++I)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t J = j + 1; J < n; ++J) {
          const double d = X[i * n + j] * X[I * n + J] - X[i * n + J] * X[I * n + j];
          worst = std::max(worst, std::abs(d));
        }
  return worst;
}

}  // namespace scalar

namespace {

Isa detect() {
  if (const char* env = std::getenv("POOLKIT_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::kScalar;
  }
#if defined(POOLKIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Isa::kAvx2;
#endif
  return Isa::kScalar;
}

std::atomic<int> g_isa{-1};

}  // namespace

bool isa_available(Isa isa) {
  if (isa == Isa::kScalar) return true;
#if defined(POOLKIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() {
  int v = g_isa.load(std::memory_order_relaxed);
  if (v < 0) {
    v = static_cast<int>(detect());
    g_isa.store(v, std::memory_order_relaxed);
  }
  return static_cast<Isa>(v);
}

std::string_view isa_name(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

void force_isa(Isa isa) {
  if (!isa_available(isa)) throw std::runtime_error("ISA not available");
  g_isa.store(static_cast<int>(isa));
}

void reset_isa() { g_isa.store(-1); }

#if defined(POOLKIT_HAVE_AVX2)
#define POOLKIT_DISPATCH(fn, ...)                                   \
  (active_isa() == Isa::kAvx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define POOLKIT_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double max_linear_violation(const double* L, const double* b, std::size_t nf,
                            std::size_t dim, const double* P,
                            std::size_t npts) {
  return POOLKIT_DISPATCH(max_linear_violation, L, b, nf, dim, P, npts);
}

void linear_forms(const double* L, std::size_t nf, std::size_t dim,
                  const double* P, std::size_t npts, double* out) {
  POOLKIT_DISPATCH(linear_forms, L, nf, dim, P, npts, out);
}

double max_quadratic_violation(const double* const* sq, const double* coef,
                               std::size_t k, const double* a, const double* b,
                               std::size_t npts) {
  return POOLKIT_DISPATCH(max_quadratic_violation, sq, coef, k, a, b, npts);
}

double max_abs_minor(const double* X, std::size_t m, std::size_t n) {
  return POOLKIT_DISPATCH(max_abs_minor, X, m, n);
}

}  // namespace poolkit::kernels
