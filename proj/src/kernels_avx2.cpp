#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "poolkit/kernels.hpp"

namespace poolkit::kernels::avx2 {

namespace {

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  hi = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, hi));
}

}  // namespace

double max_linear_violation(const double* L, const double* b, std::size_t nf,
                            std::size_t dim, const double* P,
                            std::size_t npts) {
  double worst = -std::numeric_limits<double>::infinity();
  const std::size_t vec_end = npts - npts % 4;
  for (std::size_t f = 0; f < nf; ++f) {
    const double* row = L + f * dim;
    __m256d vworst = _mm256_set1_pd(worst);
    const __m256d vb = _mm256_set1_pd(b[f]);
    for (std::size_t p = 0; p < vec_end; p += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t d = 0; d < dim; ++d)
        acc = _mm256_fmadd_pd(_mm256_set1_pd(row[d]),
                              _mm256_loadu_pd(P + d * npts + p), acc);
      vworst = _mm256_max_pd(vworst, _mm256_sub_pd(acc, vb));
    }
    worst = std::max(worst, hmax(vworst));
    for (std::size_t p = vec_end; p < npts; ++p) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s = std::fma(row[d], P[d * npts + p], s);
      worst = std::max(worst, s - b[f]);
    }
  }
  return worst;
}

void linear_forms(const double* L, std::size_t nf, std::size_t dim,
                  const double* P, std::size_t npts, double* out) {
  const std::size_t vec_end = npts - npts % 4;
  for (std::size_t f = 0; f < nf; ++f) {
    const double* row = L + f * dim;
    double* o = out + f * npts;
    for (std::size_t p = 0; p < vec_end; p += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t d = 0; d < dim; ++d)
        acc = _mm256_fmadd_pd(_mm256_set1_pd(row[d]),
                              _mm256_loadu_pd(P + d * npts + p), acc);
      _mm256_storeu_pd(o + p, acc);
    }
    for (std::size_t p = vec_end; p < npts; ++p) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s = std::fma(row[d], P[d * npts + p], s);
      o[p] = s;
    }
  }
}

double max_quadratic_violation(const double* const* sq, const double* coef,
                               std::size_t k, const double* a, const double* b,
                               std::size_t npts) {
  double worst = -std::numeric_limits<double>::infinity();
  const std::size_t vec_end = npts - npts % 4;
  __m256d vworst = _mm256_set1_pd(worst);
  for (std::size_t p = 0; p < vec_end; p += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t q = 0; q < k; ++q) {
      const __m256d s = _mm256_loadu_pd(sq[q] + p);
      acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_set1_pd(coef[q]), s), s, acc);
    }
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + p), _mm256_loadu_pd(b + p));
    vworst = _mm256_max_pd(vworst, _mm256_sub_pd(acc, prod));
  }
  worst = hmax(vworst);
  for (std::size_t p = vec_end; p < npts; ++p) {
    double s = 0.0;
    for (std::size_t q = 0; q < k; ++q) s += coef[q] * sq[q][p] * sq[q][p];
    worst = std::max(worst, s - a[p] * b[p]);
  }
  return worst;
}

// Vectorized over the J index of each (i, I, j) triple.
double max_abs_minor(const double* X, std::size_t m, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  double worst = 0.0;
  __m256d vworst = _mm256_setzero_pd();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t I = i + 1; I < m; ++I) {
      const double* ri = X + i * n;
      const double* rI = X + I * n;
      for (std::size_t j = 0; j < n; ++j) {
        const __m256d xij = _mm256_set1_pd(ri[j]);
        const __m256d xIj = _mm256_set1_pd(rI[j]);
        std::size_t J = j + 1;
        for (; J + 4 <= n; J += 4) {
          const __m256d d = _mm256_sub_pd(_mm256_mul_pd(xij, _mm256_loadu_pd(rI + J)),
                                          _mm256_mul_pd(_mm256_loadu_pd(ri + J), xIj));
          vworst = _mm256_max_pd(vworst, _mm256_andnot_pd(sign, d));
        }
        for (; J < n; ++J)
          worst = std::max(worst, std::abs(ri[j] * rI[J] - ri[J] * rI[j]));
      }
    }
  return std::max(worst, hmax(vworst));
}

}  // namespace poolkit::kernels::avx2
