#include "poolkit/rank1.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "poolkit/kernels.hpp"

namespace poolkit {

// ------------------------------------------------------------------ Matrix

double Matrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += (*this)(i, j);
  return s;
}

double Matrix::col_sum(std::size_t j) const {
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += (*this)(i, j);
  return s;
}

double Matrix::total() const { return std::accumulate(a.begin(), a.end(), 0.0); }

Matrix Matrix::transposed() const {
  Matrix t(n, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) t(j, i) = (*this)(i, j);
  return t;
}

// ---------------------------------------------------------------- BoundBox

BoundBox::BoundBox(std::size_t m, std::size_t n)
    : l(m, 0.0), u(m, kInf), lc(n, 0.0), uc(n, kInf) {}

void BoundBox::validate() const {
  if (u.size() != l.size() || uc.size() != lc.size())
    throw GeometryError("bound vector size mismatch");
  auto check = [](double lo, double hi, const char* what) {
    if (std::isnan(lo) || std::isnan(hi) || lo < 0 || hi < lo)
      throw GeometryError(std::string("bad ") + what + " interval");
  };
  for (std::size_t i = 0; i < l.size(); ++i) check(l[i], u[i], "row");
  for (std::size_t j = 0; j < lc.size(); ++j) check(lc[j], uc[j], "column");
  check(L, U, "total");
}

BoundBox BoundBox::transposed() const {
  BoundBox t;
  t.l = lc;
  t.u = uc;
  t.lc = l;
  t.uc = u;
  t.L = L;
  t.U = U;
  return t;
}

double BoundBox::scale() const {
  double s = 1.0;
  for (const auto* v : {&l, &u, &lc, &uc})
    for (double x : *v)
      if (std::isfinite(x)) s = std::max(s, x);
  if (std::isfinite(U)) s = std::max(s, U);
  return std::max(s, L);
}

NormalizedBox normalize(const BoundBox& box) {
  box.validate();
  NormalizedBox nb;
  for (std::size_t i = 0; i < box.m(); ++i)
    if (box.u[i] > 0) nb.rows.push_back(i);
  for (std::size_t j = 0; j < box.n(); ++j)
    if (box.uc[j] > 0) nb.cols.push_back(j);
  for (std::size_t i : nb.rows) {
    nb.box.l.push_back(box.l[i]);
    nb.box.u.push_back(box.u[i]);
  }
  for (std::size_t j : nb.cols) {
    nb.box.lc.push_back(box.lc[j]);
    nb.box.uc.push_back(box.uc[j]);
  }
  nb.box.L = box.L;
  nb.box.U = box.U;
  return nb;
}

bool membership_T(const Matrix& X, const BoundBox& box, double tol) {
  if (X.m != box.m() || X.n != box.n())
    throw GeometryError("dimension mismatch");
  for (double v : X.a)
    if (v < -tol) return false;
  for (std::size_t i = 0; i < X.m; ++i) {
    const double s = X.row_sum(i);
    if (s < box.l[i] - tol || s > box.u[i] + tol) return false;
  }
  for (std::size_t j = 0; j < X.n; ++j) {
    const double s = X.col_sum(j);
    if (s < box.lc[j] - tol || s > box.uc[j] + tol) return false;
  }
  const double t = X.total();
  return t >= box.L - tol && t <= box.U + tol;
}

bool is_rank_le_one(const Matrix& X, double tol) {
  double norm = 0.0;
  for (double v : X.a) norm = std::max(norm, std::abs(v));
  const double worst = kernels::max_abs_minor(X.a.data(), X.m, X.n);
  return worst <= tol * std::max(1.0, norm * norm);
}

// --------------------------------------------------------------- fragments

namespace {

std::size_t cell(const ModelFragment& f, std::size_t i, std::size_t j) {
  return i * f.n + j;
}

FragTerm X(const ModelFragment& f, std::size_t i, std::size_t j, double c) {
  return {false, cell(f, i, j), c};
}

FragTerm A(std::size_t k, double c) { return {true, k, c}; }

}  // namespace

void ModelFragment::merge(const ModelFragment& other) {
  std::vector<std::size_t> remap(other.aux.size());
  for (std::size_t k = 0; k < other.aux.size(); ++k) {
    const AuxVar& v = other.aux[k];
    std::size_t found = find_aux(v.role, v.i, v.j);
    if (found == aux.size()) aux.push_back(v);
    remap[k] = found;
  }
  for (FragRow r : other.rows) {
    for (auto& t : r.terms)
      if (t.aux) t.index = remap[t.index];
    rows.push_back(std::move(r));
  }
}

std::size_t ModelFragment::find_aux(AuxRole role, std::size_t i,
                                    std::size_t j) const {
  for (std::size_t k = 0; k < aux.size(); ++k)
    if (aux[k].role == role && aux[k].i == i && aux[k].j == j) return k;
  return aux.size();
}

ModelFragment build_rowwise_extension(const BoundBox& box) {
  box.validate();
  ModelFragment f;
  f.m = box.m();
  f.n = box.n();
  for (std::size_t j = 0; j < f.n; ++j)
    f.aux.push_back({AuxRole::kColumnFraction, 0, j, 0.0, 1.0});
  for (std::size_t i = 0; i < f.m; ++i)
    for (std::size_t j = 0; j < f.n; ++j) {
      const int ii = static_cast<int>(i), jj = static_cast<int>(j);
      f.rows.push_back({"rw_lo", ii, jj, {A(j, box.l[i]), X(f, i, j, -1)},
                        Sense::kLessEqual, 0.0});
      if (std::isfinite(box.u[i]))
        f.rows.push_back({"rw_hi", ii, jj, {X(f, i, j, 1), A(j, -box.u[i])},
                          Sense::kLessEqual, 0.0});
    }
  for (std::size_t j = 0; j < f.n; ++j) {
    FragRow lo{"rw_tlo", -1, static_cast<int>(j), {A(j, box.L)},
               Sense::kLessEqual, 0.0};
    FragRow hi{"rw_thi", -1, static_cast<int>(j), {A(j, -box.U)},
               Sense::kLessEqual, 0.0};
    for (std::size_t i = 0; i < f.m; ++i) {
      lo.terms.push_back(X(f, i, j, -1));
      hi.terms.push_back(X(f, i, j, 1));
    }
    f.rows.push_back(std::move(lo));
    if (std::isfinite(box.U)) f.rows.push_back(std::move(hi));
  }
  FragRow sum{"rw_sum", -1, -1, {}, Sense::kEqual, 1.0};
  for (std::size_t j = 0; j < f.n; ++j) sum.terms.push_back(A(j, 1));
  f.rows.push_back(std::move(sum));
  return f;
}

ModelFragment build_colwise_extension(const BoundBox& box) {
  box.validate();
  ModelFragment f;
  f.m = box.m();
  f.n = box.n();
  for (std::size_t i = 0; i < f.m; ++i)
    f.aux.push_back({AuxRole::kRowFraction, i, 0, 0.0, 1.0});
  for (std::size_t i = 0; i < f.m; ++i)
    for (std::size_t j = 0; j < f.n; ++j) {
      const int ii = static_cast<int>(i), jj = static_cast<int>(j);
      f.rows.push_back({"cw_lo", ii, jj, {A(i, box.lc[j]), X(f, i, j, -1)},
                        Sense::kLessEqual, 0.0});
      if (std::isfinite(box.uc[j]))
        f.rows.push_back({"cw_hi", ii, jj, {X(f, i, j, 1), A(i, -box.uc[j])},
                          Sense::kLessEqual, 0.0});
    }
  for (std::size_t i = 0; i < f.m; ++i) {
    FragRow lo{"cw_tlo", static_cast<int>(i), -1, {A(i, box.L)},
               Sense::kLessEqual, 0.0};
    FragRow hi{"cw_thi", static_cast<int>(i), -1, {A(i, -box.U)},
               Sense::kLessEqual, 0.0};
    for (std::size_t j = 0; j < f.n; ++j) {
      lo.terms.push_back(X(f, i, j, -1));
      hi.terms.push_back(X(f, i, j, 1));
    }
    f.rows.push_back(std::move(lo));
    if (std::isfinite(box.U)) f.rows.push_back(std::move(hi));
  }
  FragRow sum{"cw_sum", -1, -1, {}, Sense::kEqual, 1.0};
  for (std::size_t i = 0; i < f.m; ++i) sum.terms.push_back(A(i, 1));
  f.rows.push_back(std::move(sum));
  return f;
}

ModelFragment build_intersection(const BoundBox& box) {
  ModelFragment f = build_rowwise_extension(box);
  f.merge(build_colwise_extension(box));
  return f;
}

ModelFragment build_rowcol_extension(const BoundBox& box) {
  box.validate();
  ModelFragment f;
  f.m = box.m();
  f.n = box.n();
  for (std::size_t i = 0; i < f.m; ++i)
    for (std::size_t j = 0; j < f.n; ++j)
      f.aux.push_back({AuxRole::kCellFraction, i, j, 0.0, 1.0});
  auto r = [&](std::size_t i, std::size_t j, double c) {
    return A(i * f.n + j, c);
  };
  for (std::size_t i = 0; i < f.m; ++i)
    for (std::size_t j = 0; j < f.n; ++j) {
      const int ii = static_cast<int>(i), jj = static_cast<int>(j);
      FragRow rlo{"rc_rlo", ii, jj, {X(f, i, j, -1)}, Sense::kLessEqual, 0.0};
      FragRow rhi{"rc_rhi", ii, jj, {X(f, i, j, 1)}, Sense::kLessEqual, 0.0};
      for (std::size_t k = 0; k < f.m; ++k) {
        rlo.terms.push_back(r(k, j, box.l[i]));
        rhi.terms.push_back(r(k, j, -box.u[i]));
      }
      FragRow clo{"rc_clo", ii, jj, {X(f, i, j, -1)}, Sense::kLessEqual, 0.0};
      FragRow chi{"rc_chi", ii, jj, {X(f, i, j, 1)}, Sense::kLessEqual, 0.0};
      for (std::size_t k = 0; k < f.n; ++k) {
        clo.terms.push_back(r(i, k, box.lc[j]));
        chi.terms.push_back(r(i, k, -box.uc[j]));
      }
      f.rows.push_back(std::move(rlo));
      if (std::isfinite(box.u[i])) f.rows.push_back(std::move(rhi));
      f.rows.push_back({"rc_tlo", ii, jj, {r(i, j, box.L), X(f, i, j, -1)},
                        Sense::kLessEqual, 0.0});
      if (std::isfinite(box.U))
        f.rows.push_back({"rc_thi", ii, jj, {X(f, i, j, 1), r(i, j, -box.U)},
                          Sense::kLessEqual, 0.0});
      f.rows.push_back(std::move(clo));
      if (std::isfinite(box.uc[j])) f.rows.push_back(std::move(chi));
    }
  FragRow sum{"rc_sum", -1, -1, {}, Sense::kEqual, 1.0};
  for (std::size_t k = 0; k < f.m * f.n; ++k) sum.terms.push_back(A(k, 1));
  f.rows.push_back(std::move(sum));
  return f;
}

ModelFragment build_plain_bounds(const BoundBox& box) {
  box.validate();
  ModelFragment f;
  f.m = box.m();
  f.n = box.n();
  auto add = [&f](std::string fam, int i, int j, std::vector<FragTerm> terms,
                  double lo, double hi) {
    f.rows.push_back({fam + "_lo", i, j, terms, Sense::kGreaterEqual, lo});
    if (std::isfinite(hi))
      f.rows.push_back({fam + "_hi", i, j, std::move(terms), Sense::kLessEqual, hi});
  };
  for (std::size_t i = 0; i < f.m; ++i) {
    std::vector<FragTerm> t;
    for (std::size_t j = 0; j < f.n; ++j) t.push_back(X(f, i, j, 1));
    add("T_row", static_cast<int>(i), -1, std::move(t), box.l[i], box.u[i]);
  }
  for (std::size_t j = 0; j < f.n; ++j) {
    std::vector<FragTerm> t;
    for (std::size_t i = 0; i < f.m; ++i) t.push_back(X(f, i, j, 1));
    add("T_col", -1, static_cast<int>(j), std::move(t), box.lc[j], box.uc[j]);
  }
  std::vector<FragTerm> t;
  for (std::size_t k = 0; k < f.m * f.n; ++k) t.push_back({false, k, 1.0});
  add("T_tot", -1, -1, std::move(t), box.L, box.U);
  return f;
}

std::vector<double> lift_aux(const ModelFragment& frag, const Matrix& Xm) {
  const double T = Xm.total();
  std::vector<double> v(frag.aux.size());
  for (std::size_t k = 0; k < frag.aux.size(); ++k) {
    const AuxVar& a = frag.aux[k];
    switch (a.role) {
      case AuxRole::kColumnFraction:
        v[k] = T > 0 ? Xm.col_sum(a.j) / T : 1.0 / frag.n;
        break;
      case AuxRole::kRowFraction:
        v[k] = T > 0 ? Xm.row_sum(a.i) / T : 1.0 / frag.m;
        break;
      case AuxRole::kCellFraction:
        v[k] = T > 0 ? Xm(a.i, a.j) / T : 1.0 / (frag.m * frag.n);
        break;
    }
  }
  return v;
}

double fragment_violation(const ModelFragment& frag, const Matrix& Xm,
                          const std::vector<double>& aux) {
  double worst = 0.0;
  for (std::size_t k = 0; k < frag.aux.size(); ++k) {
    worst = std::max(worst, frag.aux[k].lower - aux[k]);
    worst = std::max(worst, aux[k] - frag.aux[k].upper);
  }
  for (const auto& r : frag.rows) {
    double s = 0.0;
    for (const auto& t : r.terms) s += t.coef * (t.aux ? aux[t.index] : Xm.a[t.index]);
    double v = r.sense == Sense::kLessEqual      ? s - r.rhs
               : r.sense == Sense::kGreaterEqual ? r.rhs - s
                                                 : std::abs(s - r.rhs);
    worst = std::max(worst, v);
  }
  return worst;
}

std::string aux_name(const AuxVar& v, const std::string& tag,
                     const std::vector<std::string>& rl,
                     const std::vector<std::string>& cl) {
  switch (v.role) {
    case AuxRole::kColumnFraction: return "t[" + tag + "," + cl[v.j] + "]";
    case AuxRole::kRowFraction: return "tp[" + tag + "," + rl[v.i] + "]";
    case AuxRole::kCellFraction:
      return "r[" + tag + "," + rl[v.i] + "," + cl[v.j] + "]";
  }
  return {};
}

std::vector<VarId> instantiate(const ModelFragment& frag,
                               const FragmentBinding& bind, ModelIR& model) {
  if (bind.cells.size() != frag.m * frag.n || bind.row_labels.size() != frag.m ||
      bind.col_labels.size() != frag.n)
    throw GeometryError("fragment binding size mismatch");
  std::vector<VarId> ids;
  for (const auto& a : frag.aux) {
    const std::string name = aux_name(a, bind.tag, bind.row_labels, bind.col_labels);
    auto existing = model.find(name);
    ids.push_back(existing ? *existing : model.add_var(name, a.lower, a.upper));
  }
  for (const auto& r : frag.rows) {
    std::string name = r.family + "[" + bind.tag;
    if (r.i >= 0) name += "," + bind.row_labels[r.i];
    if (r.j >= 0) name += "," + bind.col_labels[r.j];
    name += "]";
    std::vector<Term> terms;
    for (const auto& t : r.terms) {
      const VarId v = t.aux ? ids[t.index] : bind.cells[t.index];
      if (v >= 0) terms.push_back({v, t.coef});
    }
    model.add_row(std::move(name), std::move(terms), r.sense, r.rhs);
  }
  return ids;
}

// -------------------------------------------------------------------- RLT

namespace {

// coefficients of cx*x_ij + cC*colsum_j + cR*rowsum_i + cT*total (<= 0 form
// after adding the constant c0 in r-space); total is the constant 1 in r-space.
FragRow rlt_row(const ModelFragment& f, const std::string& fam, std::size_t i,
                std::size_t j, bool r_space, double cx, double cC, double cR,
                double cT) {
  FragRow row{fam, static_cast<int>(i), static_cast<int>(j), {}, Sense::kLessEqual, 0.0};
  auto term = [&](std::size_t a, std::size_t b, double c) {
    if (c == 0.0) return;
    if (r_space)
      row.terms.push_back({true, a * f.n + b, c});
    else
      row.terms.push_back({false, a * f.n + b, c});
  };
  term(i, j, cx);
  for (std::size_t k = 0; k < f.m; ++k) term(k, j, cC);
  for (std::size_t k = 0; k < f.n; ++k) term(i, k, cR);
  if (r_space)
    row.rhs = -cT;
  else
    for (std::size_t a = 0; a < f.m; ++a)
      for (std::size_t b = 0; b < f.n; ++b) term(a, b, cT);
  return row;
}

bool all_finite(std::initializer_list<double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

void declare_r(ModelFragment& f) {
  for (std::size_t i = 0; i < f.m; ++i)
    for (std::size_t j = 0; j < f.n; ++j)
      f.aux.push_back({AuxRole::kCellFraction, i, j, 0.0, 1.0});
}

std::vector<bool> spaces(IneqSpace s) {
  if (s == IneqSpace::kX) return {false};
  if (s == IneqSpace::kR) return {true};
  return {false, true};
}

// l/U with the convention x/inf = 0 for finite x.
double ratio(double a, double b) {
  if (std::isinf(b) && std::isfinite(a)) return 0.0;
  return a / b;
}

}  // namespace

RltResult gen_rlt_mccormick(const BoundBox& box, IneqSpace space) {
  box.validate();
  RltResult res;
  res.frag.m = box.m();
  res.frag.n = box.n();
  if (!(box.L > 0)) {
    res.skipped = true;
    res.note = "skipped: L=0";
    return res;
  }
  const double L = box.L, U = box.U;
  ModelFragment& f = res.frag;
  if (space != IneqSpace::kX) declare_r(f);
  for (bool rs : spaces(space)) {
    const std::string sfx = rs ? "_r" : "_x";
    for (std::size_t i = 0; i < f.m; ++i)
      for (std::size_t j = 0; j < f.n; ++j) {
        const double li = box.l[i], ui = box.u[i], lj = box.lc[j], uj = box.uc[j];
        // (t'_i - l_i/U)(t_j - l'_j/U) >= 0
        double a = ratio(li, U), b = ratio(lj, U), c = ratio(li * lj, U * U);
        if (all_finite({a, b, c}))
          f.rows.push_back(rlt_row(f, "vab1" + sfx, i, j, rs, -1, a, b, -c));
        // (t'_i - l_i/U)(u'_j/L - t_j) >= 0
        a = ratio(li, U), b = uj / L, c = ratio(li * uj, U * L);
        if (li == 0.0) c = 0.0;
        if (all_finite({a, b, c}))
          f.rows.push_back(rlt_row(f, "vab2" + sfx, i, j, rs, 1, -a, -b, c));
        // (u_i/L - t'_i)(t_j - l'_j/U) >= 0
        a = ui / L, b = ratio(lj, U), c = ratio(ui * lj, U * L);
        if (lj == 0.0) c = 0.0;
        if (all_finite({a, b, c}))
          f.rows.push_back(rlt_row(f, "vab3" + sfx, i, j, rs, 1, -a, -b, c));
        // (u_i/L - t'_i)(u'_j/L - t_j) >= 0
        a = ui / L, b = uj / L, c = ui * uj / (L * L);
        if (all_finite({a, b, c}))
          f.rows.push_back(rlt_row(f, "vab4" + sfx, i, j, rs, -1, a, b, -c));
      }
  }
  return res;
}

RltResult gen_rlt_reverse_convex(const BoundBox& box, IneqSpace space) {
  box.validate();
  RltResult res;
  res.frag.m = box.m();
  res.frag.n = box.n();
  if (!(box.L > 0)) {
    res.skipped = true;
    res.note = "skipped: L=0";
    return res;
  }
  const double L = box.L, U = box.U;
  ModelFragment& f = res.frag;
  if (space != IneqSpace::kX) declare_r(f);
  for (bool rs : spaces(space)) {
    const std::string sfx = rs ? "_r" : "_x";
    for (std::size_t i = 0; i < f.m; ++i)
      for (std::size_t j = 0; j < f.n; ++j) {
        const double li = box.l[i], ui = box.u[i], lj = box.lc[j], uj = box.uc[j];
        {
          // u_i[(u'_j/L + l'_j/U) C_j - u'_j l'_j/(UL) T]
          //   >= (u_i l'_j/U) C_j - (l'_j^2/U) R_i + l'_j x_ij
          const double k1 = uj / L + ratio(lj, U);
          const double k2 = lj == 0.0 ? 0.0 : ratio(uj * lj, U * L);
          const double cC = ratio(ui * lj, U) - ui * k1;
          const double cR = -ratio(lj * lj, U);
          const double cT = lj == 0.0 ? 0.0 : ui * k2;
          if (all_finite({cC, cR, cT, ui * k1}))
            f.rows.push_back(rlt_row(f, "vac" + sfx, i, j, rs, lj, cC, cR, cT));
        }
        {
          // transposed orientation
          const double k1 = ui / L + ratio(li, U);
          const double k2 = li == 0.0 ? 0.0 : ratio(ui * li, U * L);
          const double cR = ratio(uj * li, U) - uj * k1;
          const double cC = -ratio(li * li, U);
          const double cT = li == 0.0 ? 0.0 : uj * k2;
          if (all_finite({cC, cR, cT, uj * k1}))
            f.rows.push_back(rlt_row(f, "vacT" + sfx, i, j, rs, li, cC, cR, cT));
        }
      }
  }
  return res;
}

ConicResult gen_rlt_conic(const BoundBox& box) {
  box.validate();
  ConicResult res;
  if (!(box.L > 0)) {
    res.skipped = true;
    res.note = "skipped: L=0";
    return res;
  }
  const std::size_t m = box.m(), n = box.n(), dim = m * n + 1;
  const double U = box.U;
  auto colsum = [&](std::size_t j, double c) {
    LinearForm v(dim, 0.0);
    for (std::size_t k = 0; k < m; ++k) v[k * n + j] = c;
    return v;
  };
  auto rowsum = [&](std::size_t i, double c) {
    LinearForm v(dim, 0.0);
    for (std::size_t k = 0; k < n; ++k) v[i * n + k] = c;
    return v;
  };
  auto total = [&](bool rs) {
    LinearForm v(dim, 0.0);
    if (rs)
      v[dim - 1] = 1.0;
    else
      for (std::size_t k = 0; k + 1 < dim; ++k) v[k] = 1.0;
    return v;
  };
  auto add = [](LinearForm a, const LinearForm& b) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
    return a;
  };
  for (bool rs : {false, true})
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double li = box.l[i], ui = box.u[i], lj = box.lc[j], uj = box.uc[j];
        LinearForm xij(dim, 0.0);
        xij[i * n + j] = 1.0;
        // l_i u_i C_j^2 + l'_j u'_j R_i^2 <= (l_i l'_j + u_i u'_j) x_ij T
        if (all_finite({li * ui, lj * uj, li * lj + ui * uj})) {
          ConicIneq c{"cone_a", i, j, rs, {li * ui, lj * uj},
                      {colsum(j, 1), rowsum(i, 1)}, {}, total(rs)};
          c.a = xij;
          for (double& v : c.a) v *= li * lj + ui * uj;
          res.ineqs.push_back(std::move(c));
        }
        // l_i C_j^2 <= [(l_i l'_j/U) C_j - (l'_j u'_j/U) R_i + u'_j x_ij] T
        {
          const double a1 = ratio(li * lj, U), a2 = lj == 0.0 ? 0.0 : ratio(lj * uj, U);
          if (all_finite({a1, a2, uj})) {
            LinearForm a = add(colsum(j, a1), rowsum(i, -a2));
            a[i * n + j] += uj;
            res.ineqs.push_back({"cone_b", i, j, rs, {li}, {colsum(j, 1)}, a, total(rs)});
          }
        }
        // l'_j R_i^2 <= [(l_i l'_j/U) R_i - (l_i u_i/U) C_j + u_i x_ij] T
        {
          const double a1 = ratio(li * lj, U), a2 = li == 0.0 ? 0.0 : ratio(li * ui, U);
          if (all_finite({a1, a2, ui})) {
            LinearForm a = add(rowsum(i, a1), colsum(j, -a2));
            a[i * n + j] += ui;
            res.ineqs.push_back({"cone_bT", i, j, rs, {lj}, {rowsum(i, 1)}, a, total(rs)});
          }
        }
      }
  return res;
}

DenseRows densify(const ModelFragment& frag) {
  DenseRows d;
  d.dim = frag.m * frag.n + 1;
  for (const auto& r : frag.rows) {
    std::vector<double> v(d.dim, 0.0);
    bool has_x = false, has_r = false;
    for (const auto& t : r.terms) {
      if (t.aux) {
        const AuxVar& a = frag.aux[t.index];
        if (a.role != AuxRole::kCellFraction)
          throw GeometryError("densify supports cell-fraction aux only");
        v[a.i * frag.n + a.j] += t.coef;
        has_r = true;
      } else {
        v[t.index] += t.coef;
        has_x = true;
      }
    }
    if (has_x && has_r) throw GeometryError("mixed-space row in densify");
    v[d.dim - 1] = -r.rhs;
    auto push = [&](double sign) {
      for (double c : v) d.L.push_back(sign * c);
      d.r_space.push_back(has_r);
    };
    if (r.sense != Sense::kGreaterEqual) push(1.0);
    if (r.sense != Sense::kLessEqual) push(-1.0);
  }
  return d;
}

// ------------------------------------------------------------ hull pieces

std::vector<HullPiece> enumerate_hull_pieces(const BoundBox& box) {
  box.validate();
  const std::size_t m = box.m(), n = box.n();
  if (m * n > 16) throw GeometryError("enumerate_hull_pieces: m*n > 16");
  std::vector<HullPiece> out;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t rbits = m - 1, cbits = n - 1;
      for (std::size_t rmask = 0; rmask < (std::size_t{1} << rbits); ++rmask)
        for (std::size_t cmask = 0; cmask < (std::size_t{1} << cbits); ++cmask) {
          HullPiece p;
          p.i = i;
          p.j = j;
          p.b.assign(m, std::nan(""));
          p.bp.assign(n, std::nan(""));
          bool dup = false;
          std::size_t bit = 0;
          for (std::size_t k = 0; k < m; ++k) {
            if (k == i) continue;
            const bool up = (rmask >> bit++) & 1u;
            if (up && box.l[k] == box.u[k]) dup = true;
            p.b[k] = up ? box.u[k] : box.l[k];
          }
          bit = 0;
          for (std::size_t k = 0; k < n; ++k) {
            if (k == j) continue;
            const bool up = (cmask >> bit++) & 1u;
            if (up && box.lc[k] == box.uc[k]) dup = true;
            p.bp[k] = up ? box.uc[k] : box.lc[k];
          }
          if (dup) continue;
          std::size_t I = m, J = n;
          for (std::size_t k = 0; k < m && I == m; ++k)
            if (k != i && p.b[k] > 0) I = k;
          for (std::size_t k = 0; k < n && J == n; ++k)
            if (k != j && p.bp[k] > 0) J = k;
          if (I < m && J < n) {
            p.tag = HullCase::kQuadratic4;
            p.I = I;
            p.J = J;
            for (std::size_t k = 0; k < m; ++k)
              if (k != i) p.B += p.b[k] / p.b[I];
            for (std::size_t k = 0; k < n; ++k)
              if (k != j) p.Bp += p.bp[k] / p.bp[J];
            out.push_back(p);
            continue;
          }
          if (I == m) {
            HullPiece q = p;
            q.tag = HullCase::kZeroRows;
            out.push_back(q);
          }
          if (J == n) {
            HullPiece q = p;
            q.tag = HullCase::kZeroColumns;
            out.push_back(q);
          }
        }
    }
  return out;
}

bool piece_contains(const HullPiece& p, const BoundBox& box, const Matrix& Xm,
                    double tol) {
  if (!membership_T(Xm, box, tol) || !is_rank_le_one(Xm, tol)) return false;
  for (std::size_t k = 0; k < Xm.m; ++k)
    if (k != p.i && std::abs(Xm.row_sum(k) - p.b[k]) > tol) return false;
  for (std::size_t k = 0; k < Xm.n; ++k)
    if (k != p.j && std::abs(Xm.col_sum(k) - p.bp[k]) > tol) return false;
  return true;
}

std::vector<std::vector<double>> case1_equalities(const HullPiece& p,
                                                  const BoundBox& box) {
  if (p.tag != HullCase::kQuadratic4) return {};
  // columns: x_ij, x_IJ, x_iJ, x_Ij, rhs
  std::vector<std::vector<double>> eq;
  eq.push_back({0, p.Bp, 0, 1, p.b[p.I]});
  eq.push_back({0, p.B, 1, 0, p.bp[p.J]});
  if (box.l[p.i] == box.u[p.i]) eq.push_back({1, 0, p.Bp, 0, box.l[p.i]});
  if (box.lc[p.j] == box.uc[p.j]) eq.push_back({1, 0, 0, p.B, box.lc[p.j]});
  if (box.L == box.U) eq.push_back({1, p.B * p.Bp, p.Bp, p.B, box.L});
  return eq;
}

ExtremeCounts check_extreme_point_property(const Matrix& Xm,
                                           const BoundBox& box, double tol) {
  if (!membership_T(Xm, box, tol) || !is_rank_le_one(Xm, std::max(tol, 1e-7)))
    throw GeometryError("point is not in the rank-one set");
  ExtremeCounts c;
  for (std::size_t i = 0; i < Xm.m; ++i) {
    const double s = Xm.row_sum(i);
    if (box.l[i] + tol < s && s < box.u[i] - tol) ++c.count_row;
  }
  for (std::size_t j = 0; j < Xm.n; ++j) {
    const double s = Xm.col_sum(j);
    if (box.lc[j] + tol < s && s < box.uc[j] - tol) ++c.count_col;
  }
  return c;
}

// ---------------------------------------------------------------- oracles

std::pair<double, double> total_range(const BoundBox& box) {
  double lo = box.L, hi = box.U;
  double sl = 0, su = 0, slc = 0, suc = 0;
  for (std::size_t i = 0; i < box.m(); ++i) {
    sl += box.l[i];
    su += box.u[i];
  }
  for (std::size_t j = 0; j < box.n(); ++j) {
    slc += box.lc[j];
    suc += box.uc[j];
  }
  lo = std::max({lo, sl, slc});
  hi = std::min({hi, su, suc});
  return {lo, hi};
}

namespace {

// min w.y s.t. l <= y <= u, lo <= sum y <= hi; returns +inf if infeasible.
double knapsack_min(const std::vector<double>& w, const std::vector<double>& l,
                    const std::vector<double>& u, double lo, double hi) {
  std::vector<double> y = l;
  double s = std::accumulate(l.begin(), l.end(), 0.0);
  if (s > hi + 1e-12) return kInf;
  std::vector<std::size_t> ord(w.size());
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(), [&](auto a, auto b) { return w[a] < w[b]; });
  for (std::size_t k : ord) {
    if (w[k] >= 0) break;
    const double room = std::min(u[k] - l[k], hi - s);
    if (std::isinf(room)) return -kInf;
    if (room > 0) {
      y[k] += room;
      s += room;
    }
  }
  for (std::size_t k : ord) {
    if (s >= lo) break;
    const double room = std::min(u[k] - y[k], lo - s);
    if (room > 0) {
      y[k] += room;
      s += room;
    }
  }
  if (s < lo - 1e-9 * std::max(1.0, lo)) return kInf;
  double v = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    if (y[k] != 0.0) v += w[k] * y[k];
  return v;
}

void for_each_composition(std::size_t parts, int total,
                          const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> k(parts, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos + 1 == parts) {
      k[pos] = left;
      fn(k);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  if (parts == 0) return;
  rec(0, total);
}

}  // namespace

double brute_force_bound(const BoundBox& box, const Matrix& c,
                         int grid_density) {
  box.validate();
  const std::size_t m = box.m(), n = box.n();
  if (m * n > 9) throw GeometryError("brute_force_bound: m*n > 9");
  if (c.m != m || c.n != n) throw GeometryError("cost dimension mismatch");
  if (grid_density < 2) grid_density = 2;
  const auto [tlo, thi] = total_range(box);
  double best = kInf;
  bool any = false;
  for_each_composition(n, grid_density - 1, [&](const std::vector<int>& k) {
    std::vector<double> b(n);
    double lo = tlo, hi = thi;
    for (std::size_t j = 0; j < n; ++j) {
      b[j] = static_cast<double>(k[j]) / (grid_density - 1);
      if (b[j] > 0) {
        lo = std::max(lo, box.lc[j] / b[j]);
        hi = std::min(hi, box.uc[j] / b[j]);
      } else if (box.lc[j] > 0) {
        return;
      }
    }
    if (lo > hi) return;
    std::vector<double> w(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) w[i] += c(i, j) * b[j];
    const double v = knapsack_min(w, box.l, box.u, lo, hi);
    if (v == kInf) return;
    any = true;
    best = std::min(best, v);
  });
  if (!any) throw GeometryError("brute_force_bound: empty feasible sample");
  return best;
}

namespace {

// Point of {a : sum a = 1, lo <= a <= hi}.
std::vector<double> sample_simplex_box(const std::vector<double>& lo,
                                       const std::vector<double>& hi,
                                       std::mt19937_64& rng, bool vertex) {
  const std::size_t k = lo.size();
  std::vector<double> a = lo;
  double rest = 1.0 - std::accumulate(lo.begin(), lo.end(), 0.0);
  std::vector<std::size_t> ord(k);
  std::iota(ord.begin(), ord.end(), 0);
  std::shuffle(ord.begin(), ord.end(), rng);
  if (vertex) {
    for (std::size_t i : ord) {
      const double add = std::min(rest, hi[i] - a[i]);
      if (add > 0) {
        a[i] += add;
        rest -= add;
      }
    }
  } else {
    std::exponential_distribution<double> ex(1.0);
    for (int pass = 0; pass < 64 && rest > 1e-15; ++pass) {
      std::vector<double> w(k, 0.0);
      double sw = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        if (hi[i] - a[i] > 1e-15) {
          w[i] = ex(rng);
          sw += w[i];
        }
      if (sw == 0.0) break;
      double placed = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double add = std::min(rest * w[i] / sw, hi[i] - a[i]);
        a[i] += add;
        placed += add;
      }
      rest -= placed;
    }
    for (std::size_t i : ord) {
      const double add = std::min(rest, hi[i] - a[i]);
      if (add > 0) {
        a[i] += add;
        rest -= add;
      }
    }
  }
  return a;
}

}  // namespace

Matrix sample_rank_one(const BoundBox& box, std::mt19937_64& rng,
                       SampleMode mode) {
  auto [lo, hi] = total_range(box);
  if (lo > hi) throw GeometryError("box admits no rank-one point");
  if (std::isinf(hi)) hi = 2.0 * std::max(lo, 1.0);
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  bool vertex = mode == SampleMode::kVertexBiased ||
                (mode == SampleMode::kMixed && U01(rng) < 0.3);
  double T;
  const double pick = U01(rng);
  if (vertex && pick < 0.25)
    T = lo;
  else if (vertex && pick < 0.5)
    T = hi;
  else
    T = lo + (hi - lo) * U01(rng);
  const std::size_t m = box.m(), n = box.n();
  Matrix Xm(m, n);
  if (T <= 0) return Xm;
  std::vector<double> alo(m), ahi(m), blo(n), bhi(n);
  for (std::size_t i = 0; i < m; ++i) {
    alo[i] = box.l[i] / T;
    ahi[i] = std::min(box.u[i] / T, 1.0);
  }
  for (std::size_t j = 0; j < n; ++j) {
    blo[j] = box.lc[j] / T;
    bhi[j] = std::min(box.uc[j] / T, 1.0);
  }
  const auto a = sample_simplex_box(alo, ahi, rng, vertex && U01(rng) < 0.7);
  const auto b = sample_simplex_box(blo, bhi, rng, vertex && U01(rng) < 0.7);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) Xm(i, j) = T * a[i] * b[j];
  return Xm;
}

BoundBox random_box(std::size_t m, std::size_t n, std::mt19937_64& rng,
                    bool positive_total) {
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  BoundBox box(m, n);
  const double T0 = 1.0 + 9.0 * U01(rng);
  auto weights = [&](std::size_t k) {
    std::vector<double> w(k);
    double s = 0;
    for (auto& v : w) {
      v = U01(rng) < 0.15 ? 0.0 : 0.1 + U01(rng);
      s += v;
    }
    if (s == 0) {
      w[0] = 1;
      s = 1;
    }
    for (auto& v : w) v /= s;
    return w;
  };
  const auto a = weights(m), b = weights(n);
  for (std::size_t i = 0; i < m; ++i) {
    const double r = T0 * a[i];
    box.l[i] = U01(rng) < 0.3 ? 0.0 : r * U01(rng);
    box.u[i] = r * (1.0 + U01(rng)) + 0.5 * U01(rng) + 1e-3;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double c = T0 * b[j];
    box.lc[j] = U01(rng) < 0.3 ? 0.0 : c * U01(rng);
    box.uc[j] = c * (1.0 + U01(rng)) + 0.5 * U01(rng) + 1e-3;
  }
  box.L = positive_total ? T0 * (0.3 + 0.7 * U01(rng))
                         : (U01(rng) < 0.5 ? 0.0 : T0 * U01(rng));
  box.U = T0 * (1.0 + U01(rng));
  return box;
}

ModelIR build_block_lp(const BoundBox& box, BlockKind kind, const Matrix& c) {
  ModelIR model;
  FragmentBinding bind;
  bind.tag = "B";
  for (std::size_t i = 0; i < box.m(); ++i) bind.row_labels.push_back(std::to_string(i));
  for (std::size_t j = 0; j < box.n(); ++j) bind.col_labels.push_back(std::to_string(j));
  for (std::size_t i = 0; i < box.m(); ++i)
    for (std::size_t j = 0; j < box.n(); ++j) {
      const VarId v = model.add_var("x[" + std::to_string(i) + "," + std::to_string(j) + "]",
                                    0.0, kInf);
      bind.cells.push_back(v);
      model.add_objective_term(v, c(i, j));
    }
  instantiate(build_plain_bounds(box), bind, model);
  switch (kind) {
    case BlockKind::kPlain: break;
    case BlockKind::kRowwise: instantiate(build_rowwise_extension(box), bind, model); break;
    case BlockKind::kColwise: instantiate(build_colwise_extension(box), bind, model); break;
    case BlockKind::kIntersection: instantiate(build_intersection(box), bind, model); break;
    case BlockKind::kRowCol: instantiate(build_rowcol_extension(box), bind, model); break;
  }
  return model;
}

}  // namespace poolkit

namespace poolkit {

ValidityReport sample_rlt_validity(const BoundBox& box, std::size_t samples,
                                   std::uint64_t seed) {
  ValidityReport rep;
  RltResult mc = gen_rlt_mccormick(box, IneqSpace::kBoth);
  RltResult rc = gen_rlt_reverse_convex(box, IneqSpace::kBoth);
  ConicResult cc = gen_rlt_conic(box);
  if (mc.skipped || rc.skipped || cc.skipped) {
    rep.skipped = true;
    return rep;
  }
  mc.frag.merge(rc.frag);
  const DenseRows dense = densify(mc.frag);
  const std::size_t dim = dense.dim, m = box.m(), n = box.n();
  // split by space and normalize each row by its largest coefficient
  std::vector<double> Lx, Lr, bx, br;
  for (std::size_t k = 0; k < dense.rows(); ++k) {
    const double* row = dense.L.data() + k * dim;
    double mx = 0.0;
    for (std::size_t d = 0; d < dim; ++d) mx = std::max(mx, std::abs(row[d]));
    if (mx == 0.0) mx = 1.0;
    auto& L = dense.r_space[k] ? Lr : Lx;
    auto& b = dense.r_space[k] ? br : bx;
    for (std::size_t d = 0; d < dim; ++d) L.push_back(row[d] / mx);
    b.push_back(0.0);
  }
  rep.linear_rows = dense.rows();
  rep.conic_rows = cc.ineqs.size();
  rep.samples = samples;

  const auto [tlo, thi_raw] = total_range(box);
  const double thi = std::isinf(thi_raw) ? 2.0 * std::max(tlo, 1.0) : thi_raw;
  const double tscale = std::max(1.0, thi);

  std::mt19937_64 rng(seed);
  constexpr std::size_t kChunk = 4096;
  std::vector<double> Px, Pr, forms;
  for (std::size_t done = 0; done < samples;) {
    const std::size_t np = std::min(kChunk, samples - done);
    Px.assign(dim * np, 0.0);
    Pr.assign(dim * np, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
      const Matrix Xm = sample_rank_one(box, rng);
      const double T = Xm.total();
      for (std::size_t c = 0; c < m * n; ++c) {
        Px[c * np + p] = Xm.a[c];
        Pr[c * np + p] = T > 0 ? Xm.a[c] / T : 1.0 / (m * n);
      }
      Px[(dim - 1) * np + p] = 1.0;
      Pr[(dim - 1) * np + p] = 1.0;
    }
    if (!bx.empty())
      rep.max_linear = std::max(
          rep.max_linear, kernels::max_linear_violation(Lx.data(), bx.data(), bx.size(),
                                                        dim, Px.data(), np) /
                              tscale);
    if (!br.empty())
      rep.max_linear = std::max(
          rep.max_linear, kernels::max_linear_violation(Lr.data(), br.data(), br.size(),
                                                        dim, Pr.data(), np));
    for (const auto& ci : cc.ineqs) {
      const std::size_t k = ci.sq.size();
      std::vector<double> L;
      for (const auto& f : ci.sq) L.insert(L.end(), f.begin(), f.end());
      L.insert(L.end(), ci.a.begin(), ci.a.end());
      L.insert(L.end(), ci.b.begin(), ci.b.end());
      forms.assign((k + 2) * np, 0.0);
      const double* P = ci.r_space ? Pr.data() : Px.data();
      kernels::linear_forms(L.data(), k + 2, dim, P, np, forms.data());
      std::vector<const double*> sq(k);
      for (std::size_t q = 0; q < k; ++q) sq[q] = forms.data() + q * np;
      double s = 0.0, amax = 0.0, bmax = 0.0;
      for (double v : ci.coef) s += std::abs(v);
      for (double v : ci.a) amax = std::max(amax, std::abs(v));
      for (double v : ci.b) bmax = std::max(bmax, std::abs(v));
      const double t2 = ci.r_space ? 1.0 : tscale * tscale;
      const double scale = std::max(1e-300, (s + amax * bmax) * t2);
      const double v = kernels::max_quadratic_violation(
          sq.data(), ci.coef.data(), k, forms.data() + k * np,
          forms.data() + (k + 1) * np, np);
      rep.max_conic = std::max(rep.max_conic, v / scale);
    }
    done += np;
  }
  return rep;
}

}  // namespace poolkit
