#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "poolkit/model_ir.hpp"

namespace poolkit {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix.
struct Matrix {
  std::size_t m = 0, n = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : m(rows), n(cols), a(rows * cols, fill) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  double row_sum(std::size_t i) const;
  double col_sum(std::size_t j) const;
  double total() const;
  Matrix transposed() const;
};

// Row-sum [l,u], column-sum [lc,uc] and overall [L,U] bounds on a nonnegative
// m x n matrix.
struct BoundBox {
  std::vector<double> l, u;
  std::vector<double> lc, uc;
  double L = 0.0, U = kInf;

  BoundBox() = default;
  BoundBox(std::size_t m, std::size_t n);
  std::size_t m() const { return l.size(); }
  std::size_t n() const { return lc.size(); }
  void validate() const;
  BoundBox transposed() const;
  // Largest finite bound, at least 1.
  double scale() const;
};

struct NormalizedBox {
  BoundBox box;
  std::vector<std::size_t> rows;  // kept original row indices
  std::vector<std::size_t> cols;
};

// Deletes rows with u = 0 and columns with uc = 0.
NormalizedBox normalize(const BoundBox& box);

bool membership_T(const Matrix& X, const BoundBox& box, double tol);
bool is_rank_le_one(const Matrix& X, double tol = 1e-7);

// ---------------------------------------------------------------- fragments

enum class AuxRole { kColumnFraction, kRowFraction, kCellFraction };

struct AuxVar {
  AuxRole role;
  std::size_t i = 0, j = 0;
  double lower = 0.0, upper = kInf;
};

struct FragTerm {
  bool aux;           // false: cell x(i,j) with index i*n+j
  std::size_t index;  // cell or aux index
  double coef;
};

struct FragRow {
  std::string family;
  int i = -1, j = -1;  // label indices, -1 when unused
  std::vector<FragTerm> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

struct ModelFragment {
  std::size_t m = 0, n = 0;
  std::vector<AuxVar> aux;
  std::vector<FragRow> rows;
  // Appends other's rows and any aux variables not yet declared.
  void merge(const ModelFragment& other);
  std::size_t find_aux(AuxRole role, std::size_t i, std::size_t j) const;
};

ModelFragment build_rowwise_extension(const BoundBox& box);
ModelFragment build_colwise_extension(const BoundBox& box);
ModelFragment build_intersection(const BoundBox& box);
ModelFragment build_rowcol_extension(const BoundBox& box);
// Plain bounds of the set T itself (no auxiliaries).
ModelFragment build_plain_bounds(const BoundBox& box);

// Aux values for a rank-one X from the explicit constructions (t_j = column
// share, t'_i = row share, r_ij = x_ij / total).
std::vector<double> lift_aux(const ModelFragment& frag, const Matrix& X);
double fragment_violation(const ModelFragment& frag, const Matrix& X,
                          const std::vector<double>& aux);

std::string aux_name(const AuxVar& v, const std::string& tag,
                     const std::vector<std::string>& row_labels,
                     const std::vector<std::string>& col_labels);

struct FragmentBinding {
  std::string tag;  // block label, e.g. the pool id
  std::vector<std::string> row_labels, col_labels;
  std::vector<VarId> cells;  // m*n; -1 marks a cell fixed at zero
};

// Adds aux variables (reusing ones already present by name) and rows.
// Returns the aux variable ids.
std::vector<VarId> instantiate(const ModelFragment& frag,
                               const FragmentBinding& bind, ModelIR& model);

// -------------------------------------------------------------- RLT

enum class IneqSpace { kX, kR, kBoth };

struct RltResult {
  ModelFragment frag;  // r-space rows use kCellFraction aux variables
  bool skipped = false;
  std::string note;
};

RltResult gen_rlt_mccormick(const BoundBox& box, IneqSpace space);
RltResult gen_rlt_reverse_convex(const BoundBox& box, IneqSpace space);

// Dense linear form over [cells..., 1].
using LinearForm = std::vector<double>;

// sum_k coef_k * (sq_k . v)^2 <= (a . v) * (b . v), v = [cells..., 1]
struct ConicIneq {
  std::string family;
  std::size_t i = 0, j = 0;
  bool r_space = false;
  std::vector<double> coef;
  std::vector<LinearForm> sq;
  LinearForm a, b;
};

struct ConicResult {
  std::vector<ConicIneq> ineqs;
  bool skipped = false;
  std::string note;
};

ConicResult gen_rlt_conic(const BoundBox& box);

// Dense form of fragment rows for batch evaluation: rows normalized to
// L . [cells..., 1] <= 0 (equalities give two rows). Aux terms are only
// allowed for kCellFraction variables and map onto the cell of the same index.
struct DenseRows {
  std::size_t dim = 0;
  std::vector<double> L;
  std::vector<bool> r_space;  // per row
  std::size_t rows() const { return dim ? L.size() / dim : 0; }
};
DenseRows densify(const ModelFragment& frag);

// ------------------------------------------------------------- hull pieces

enum class HullCase { kQuadratic4, kZeroRows, kZeroColumns };

struct HullPiece {
  std::size_t i = 0, j = 0;
  std::vector<double> b;   // size m, b[i] unused (NaN)
  std::vector<double> bp;  // size n, bp[j] unused (NaN)
  HullCase tag = HullCase::kQuadratic4;
  std::size_t I = 0, J = 0;
  double B = 0.0, Bp = 0.0;
};

std::vector<HullPiece> enumerate_hull_pieces(const BoundBox& box);
bool piece_contains(const HullPiece& piece, const BoundBox& box,
                    const Matrix& X, double tol);
// Equalities among (x_ij, x_IJ, x_iJ, x_Ij) implied by a case-1 piece,
// including interval constraints that collapse to a point.
std::vector<std::vector<double>> case1_equalities(const HullPiece& piece,
                                                  const BoundBox& box);

struct ExtremeCounts {
  int count_row = 0;
  int count_col = 0;
};
ExtremeCounts check_extreme_point_property(const Matrix& X,
                                           const BoundBox& box, double tol);

// ------------------------------------------------------------- oracles

double brute_force_bound(const BoundBox& box, const Matrix& c,
                         int grid_density);

enum class SampleMode { kInterior, kVertexBiased, kMixed };
// Rank-one point of T~ as T * a * b^T; throws if the box admits none.
Matrix sample_rank_one(const BoundBox& box, std::mt19937_64& rng,
                       SampleMode mode = SampleMode::kMixed);

// Random box whose T~ is nonempty; positive_total forces L > 0.
BoundBox random_box(std::size_t m, std::size_t n, std::mt19937_64& rng,
                    bool positive_total = false);

// Feasible interval of the overall sum implied by all bounds.
std::pair<double, double> total_range(const BoundBox& box);

struct ValidityReport {
  std::size_t samples = 0;
  std::size_t linear_rows = 0;
  std::size_t conic_rows = 0;
  double max_linear = -kInf;  // scaled violation, x and r space
  double max_conic = -kInf;   // scaled violation
  bool skipped = false;
  bool ok(double tol) const { return max_linear <= tol && max_conic <= tol; }
};

// Monte Carlo check of every Vab / Vac / conic inequality on rank-one points.
ValidityReport sample_rlt_validity(const BoundBox& box, std::size_t samples,
                                   std::uint64_t seed);

enum class BlockKind { kPlain, kRowwise, kColwise, kIntersection, kRowCol };
// Standalone LP: x >= 0 in T plus the fragment for kind, objective <c, x>.
ModelIR build_block_lp(const BoundBox& box, BlockKind kind, const Matrix& c);

}  // namespace poolkit
