#pragma once

#include <cstddef>
#include <string_view>

// Batched evaluation kernels used by the sampling oracles. Points are stored
// structure-of-arrays: coordinate d of point p lives at P[d * npts + p].
namespace poolkit::kernels {

enum class Isa { kScalar, kAvx2 };

Isa active_isa();
std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);
// Pins dispatch (tests, benchmarking). Throws if unavailable.
void force_isa(Isa isa);
void reset_isa();

// max over forms f and points p of (L_f . P_p - b_f); -inf for empty input.
double max_linear_violation(const double* L, const double* b, std::size_t nf,
                            std::size_t dim, const double* P, std::size_t npts);

// out[f * npts + p] = L_f . P_p
void linear_forms(const double* L, std::size_t nf, std::size_t dim,
                  const double* P, std::size_t npts, double* out);

// max over p of sum_k coef[k] * sq[k][p]^2 - a[p] * b[p]
double max_quadratic_violation(const double* const* sq, const double* coef,
                               std::size_t k, const double* a, const double* b,
                               std::size_t npts);

// max |X(i,j) X(I,J) - X(i,J) X(I,j)| over all 2x2 minors, X row-major m x n.
double max_abs_minor(const double* X, std::size_t m, std::size_t n);

namespace scalar {
double max_linear_violation(const double* L, const double* b, std::size_t nf,
                            std::size_t dim, const double* P, std::size_t npts);
void linear_forms(const double* L, std::size_t nf, std::size_t dim,
                  const double* P, std::size_t npts, double* out);
double max_quadratic_violation(const double* const* sq, const double* coef,
                               std::size_t k, const double* a, const double* b,
                               std::size_t npts);
double max_abs_minor(const double* X, std::size_t m, std::size_t n);
}  // namespace scalar

#if defined(POOLKIT_HAVE_AVX2)
namespace avx2 {
double max_linear_violation(const double* L, const double* b, std::size_t nf,
                            std::size_t dim, const double* P, std::size_t npts);
void linear_forms(const double* L, std::size_t nf, std::size_t dim,
                  const double* P, std::size_t npts, double* out);
double max_quadratic_violation(const double* const* sq, const double* coef,
                               std::size_t k, const double* a, const double* b,
                               std::size_t npts);
double max_abs_minor(const double* X, std::size_t m, std::size_t n);
}  // namespace avx2
#endif

}  // namespace poolkit::kernels
