#include "poolkit/relaxations.hpp"

#include <cmath>
#include <regex>
#include <sstream>

namespace poolkit {

std::string_view to_string(MethodKind k) {
  switch (k) {
    case MethodKind::kF1: return "F1";
    case MethodKind::kF2: return "F2";
    case MethodKind::kF3: return "F3";
    case MethodKind::kF4: return "F4";
    case MethodKind::kM1: return "M1";
    case MethodKind::kM2: return "M2";
    case MethodKind::kG1: return "G1";
    case MethodKind::kG2: return "G2";
    case MethodKind::kMcf: return "MCF";
    case MethodKind::kExact: return "EXACT";
  }
  return "?";
}

bool MethodSpec::is_lp() const {
  switch (kind) {
    case MethodKind::kF1:
    case MethodKind::kF2:
    case MethodKind::kF3:
    case MethodKind::kF4:
    case MethodKind::kMcf: return true;
    default: return false;
  }
}

namespace {

std::string space_str(IneqSpace s) {
  switch (s) {
    case IneqSpace::kX: return "x";
    case IneqSpace::kR: return "r";
    case IneqSpace::kBoth: return "x,r";
  }
  return "";
}

IneqSpace parse_space(const std::string& s) {
  if (s.empty() || s == "x,r" || s == "r,x" || s == "both") return IneqSpace::kBoth;
  if (s == "x") return IneqSpace::kX;
  if (s == "r") return IneqSpace::kR;
  throw MethodError("unknown inequality space '" + s + "'");
}

}  // namespace

std::string MethodSpec::str() const {
  std::string s(to_string(kind));
  s += ":";
  s += to_string(basis);
  if (H > 0) s += ":H=" + std::to_string(H);
  if (drop_remainder) s += ":drop";
  if (vab) s += "+Vab(" + space_str(space) + ")";
  if (vac) s += "+Vac(" + space_str(space) + ")";
  return s;
}

MethodSpec parse_method(const std::string& text) {
  MethodSpec spec;
  std::string head = text, tail;
  if (auto p = text.find('+'); p != std::string::npos) {
    head = text.substr(0, p);
    tail = text.substr(p);
  }
  std::vector<std::string> parts;
  std::stringstream ss(head);
  for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
  if (parts.empty() || parts[0].empty()) throw MethodError("empty method");
  static const std::pair<const char*, MethodKind> kinds[] = {
      {"F1", MethodKind::kF1}, {"F2", MethodKind::kF2}, {"F3", MethodKind::kF3},
      {"F4", MethodKind::kF4}, {"M1", MethodKind::kM1}, {"M2", MethodKind::kM2},
      {"G1", MethodKind::kG1}, {"G2", MethodKind::kG2}, {"MCF", MethodKind::kMcf},
      {"EXACT", MethodKind::kExact}};
  bool found = false;
  for (const auto& [name, k] : kinds)
    if (parts[0] == name) {
      spec.kind = k;
      found = true;
    }
  if (!found) throw MethodError("unknown method kind '" + parts[0] + "'");
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string& p = parts[i];
    if (p == "S") {
      spec.basis = Basis::kSource;
    } else if (p == "T") {
      spec.basis = Basis::kTerminal;
    } else if (p.rfind("H=", 0) == 0) {
      try {
        std::size_t used = 0;
        spec.H = std::stoi(p.substr(2), &used);
        if (used != p.size() - 2) throw MethodError("bad H");
      } catch (const std::exception&) {
        throw MethodError("bad discretization level '" + p + "'");
      }
    } else if (p == "drop") {
      spec.drop_remainder = true;
    } else {
      throw MethodError("unknown method option '" + p + "'");
    }
  }
  static const std::regex ineq(R"(\+(Vab|Vac)(?:\(([a-z,]*)\))?)");
  std::string rest = tail;
  std::smatch m;
  bool space_set = false;
  while (!rest.empty()) {
    if (!std::regex_search(rest, m, ineq) || m.position(0) != 0)
      throw MethodError("cannot parse inequality list '" + tail + "'");
    (m[1] == "Vab" ? spec.vab : spec.vac) = true;
    if (m[2].matched) {
      const IneqSpace s = parse_space(m[2]);
      if (space_set && s != spec.space) throw MethodError("conflicting inequality spaces");
      spec.space = s;
      space_set = true;
    }
    rest = m.suffix();
  }
  const bool needs_h = spec.is_mip();
  if (needs_h && spec.H < 1) throw MethodError("discretization level H >= 1 required for " + parts[0]);
  if (!needs_h && spec.H != 0) throw MethodError("H only applies to M and G methods");
  if (spec.drop_remainder && !spec.is_restriction())
    throw MethodError("'drop' only applies to restrictions");
  return spec;
}

namespace {

// Block restricted to rows/columns with positive upper bounds.
struct Normalized {
  BoundBox box;
  FragmentBinding bind;
};

Normalized normalized_block(const PoolBlock& blk, const std::string& tag) {
  NormalizedBox nb = normalize(blk.box);
  Normalized out{nb.box, {}};
  out.bind.tag = tag;
  for (auto r : nb.rows) out.bind.row_labels.push_back(blk.row_labels[r]);
  for (auto c : nb.cols) out.bind.col_labels.push_back(blk.col_labels[c]);
  for (auto r : nb.rows)
    for (auto c : nb.cols) out.bind.cells.push_back(blk.cell(r, c));
  return out;
}

ModelFragment r_linking(const BoundBox& box) {
  ModelFragment f;
  f.m = box.m();
  f.n = box.n();
  for (std::size_t i = 0; i < f.m; ++i)
    for (std::size_t j = 0; j < f.n; ++j)
      f.aux.push_back({AuxRole::kCellFraction, i, j, 0.0, 1.0});
  for (std::size_t i = 0; i < f.m; ++i)
    for (std::size_t j = 0; j < f.n; ++j) {
      const std::size_t k = i * f.n + j;
      const int ii = static_cast<int>(i), jj = static_cast<int>(j);
      f.rows.push_back({"rl_lo", ii, jj, {{true, k, box.L}, {false, k, -1.0}}, Sense::kLessEqual, 0.0});
      if (std::isfinite(box.U))
        f.rows.push_back({"rl_hi", ii, jj, {{false, k, 1.0}, {true, k, -box.U}}, Sense::kLessEqual, 0.0});
    }
  FragRow sum{"rl_sum", -1, -1, {}, Sense::kEqual, 1.0};
  for (std::size_t k = 0; k < f.m * f.n; ++k) sum.terms.push_back({true, k, 1.0});
  f.rows.push_back(std::move(sum));
  return f;
}

bool has_r(const ModelIR& ir, const Normalized& nb) {
  if (nb.bind.cells.empty()) return false;
  AuxVar probe{AuxRole::kCellFraction, 0, 0, 0.0, 1.0};
  return ir.find(aux_name(probe, nb.bind.tag, nb.bind.row_labels, nb.bind.col_labels))
      .has_value();
}

}  // namespace

void inject_valid_inequalities(BuiltModel& bm, const MethodSpec& spec) {
  if (!spec.vab && !spec.vac) return;
  for (const auto& blk : bm.base.blocks) {
    Normalized nb = normalized_block(blk, blk.label);
    if (nb.box.m() == 0 || nb.box.n() == 0) continue;
    if (!(nb.box.L > 0.0)) {
      ++bm.rlt_skipped;
      continue;
    }
    const bool want_r = spec.space != IneqSpace::kX;
    if (want_r && !has_r(bm.ir, nb)) instantiate(r_linking(nb.box), nb.bind, bm.ir);
    if (spec.vab) {
      RltResult r = gen_rlt_mccormick(nb.box, spec.space);
      instantiate(r.frag, nb.bind, bm.ir);
      bm.rlt_rows += static_cast<int>(r.frag.rows.size());
    }
    if (spec.vac) {
      RltResult r = gen_rlt_reverse_convex(nb.box, spec.space);
      instantiate(r.frag, nb.bind, bm.ir);
      bm.rlt_rows += static_cast<int>(r.frag.rows.size());
    }
  }
}

BuiltModel build_relaxation(const PoolingInstance& inst, const MethodSpec& spec) {
  if (!spec.is_lp()) throw MethodError("build_relaxation needs an LP method, got " + spec.str());
  BuiltModel bm;
  bm.spec = spec;
  bm.base = build_bilinear(inst, spec.basis);
  bm.ir = build_mcf_relaxation(bm.base);
  for (const auto& blk : bm.base.blocks) {
    Normalized nb = normalized_block(blk, blk.label);
    if (nb.box.m() == 0 || nb.box.n() == 0) continue;
    switch (spec.kind) {
      case MethodKind::kF1: instantiate(build_colwise_extension(nb.box), nb.bind, bm.ir); break;
      case MethodKind::kF2: instantiate(build_rowwise_extension(nb.box), nb.bind, bm.ir); break;
      case MethodKind::kF3: instantiate(build_intersection(nb.box), nb.bind, bm.ir); break;
      case MethodKind::kF4: instantiate(build_rowcol_extension(nb.box), nb.bind, bm.ir); break;
      default: break;
    }
  }
  inject_valid_inequalities(bm, spec);
  return bm;
}

}  // namespace poolkit

namespace poolkit {

namespace {

// Block seen with either orientation: rows carry the bounded sums that multiply
// the binary digits, columns carry the discretized fractions.
struct DiscView {
  const PoolBlock* blk;
  bool transposed;
  std::size_t m() const { return transposed ? blk->n() : blk->m(); }
  std::size_t n() const { return transposed ? blk->m() : blk->n(); }
  VarId cell(std::size_t r, std::size_t c) const {
    return transposed ? blk->cell(c, r) : blk->cell(r, c);
  }
  VarId row_flow(std::size_t r) const { return transposed ? blk->col_flow[r] : blk->row_flow[r]; }
  double lo(std::size_t r) const { return transposed ? blk->box.lc[r] : blk->box.l[r]; }
  double hi(std::size_t r) const { return transposed ? blk->box.uc[r] : blk->box.u[r]; }
  const std::string& row_label(std::size_t r) const {
    return transposed ? blk->col_labels[r] : blk->row_labels[r];
  }
  const std::string& col_label(std::size_t c) const {
    return transposed ? blk->row_labels[c] : blk->col_labels[c];
  }
};

enum class Remainder { kContinuous, kBinaryDigit, kNone };

void add_discretization(ModelIR& ir, const DiscView& v, int H, Remainder rem) {
  const std::string& pool = v.blk->label;
  const double eps = std::ldexp(1.0, -H);
  for (std::size_t c = 0; c < v.n(); ++c) {
    const std::string pc = pool + "," + v.col_label(c);
    std::vector<VarId> z;
    for (int h = 1; h <= H; ++h)
      z.push_back(ir.add_var("z[" + pc + "," + std::to_string(h) + "]", 0, 1, VarType::kBinary));
    VarId gam = -1;
    if (rem == Remainder::kContinuous) gam = ir.add_var("gam[" + pc + "]", 0.0, eps);
    if (rem == Remainder::kBinaryDigit)
      gam = ir.add_var("z[" + pc + ",0]", 0, 1, VarType::kBinary);
    for (std::size_t r = 0; r < v.m(); ++r) {
      const double l = v.lo(r), u = v.hi(r);
      if (!std::isfinite(u))
        throw MethodError("discretization needs a finite bound on " + v.row_label(r) + " at pool " + pool);
      const VarId w = v.row_flow(r);
      const std::string rc = pc + "," + v.row_label(r);
      std::vector<Term> link{{v.cell(r, c), -1.0}};
      for (int h = 1; h <= H; ++h) {
        const std::string tag = "[" + rc + "," + std::to_string(h) + "]";
        const VarId a = ir.add_var("al" + tag, 0.0, u);
        const VarId zh = z[h - 1];
        ir.add_row("da_lo" + tag, {{a, 1.0}, {zh, -l}}, Sense::kGreaterEqual, 0.0);
        ir.add_row("da_hi" + tag, {{a, 1.0}, {zh, -u}}, Sense::kLessEqual, 0.0);
        ir.add_row("da_wlo" + tag, {{a, 1.0}, {w, -1.0}, {zh, -u}}, Sense::kGreaterEqual, -u);
        ir.add_row("da_whi" + tag, {{a, 1.0}, {w, -1.0}, {zh, -l}}, Sense::kLessEqual, -l);
        link.push_back({a, std::ldexp(1.0, -h)});
      }
      if (rem == Remainder::kContinuous) {
        const std::string tag = "[" + rc + "]";
        const VarId b = ir.add_var("be" + tag, 0.0, u * eps);
        ir.add_row("db_lo" + tag, {{b, 1.0}, {gam, -l}}, Sense::kGreaterEqual, 0.0);
        ir.add_row("db_hi" + tag, {{b, 1.0}, {gam, -u}}, Sense::kLessEqual, 0.0);
        ir.add_row("db_wlo" + tag, {{b, 1.0}, {gam, -u}, {w, -eps}}, Sense::kGreaterEqual, -eps * u);
        ir.add_row("db_whi" + tag, {{b, 1.0}, {gam, -l}, {w, -eps}}, Sense::kLessEqual, -eps * l);
        link.push_back({b, 1.0});
      } else if (rem == Remainder::kBinaryDigit) {
        const std::string tag = "[" + rc + ",0]";
        const VarId a = ir.add_var("al" + tag, 0.0, u);
        ir.add_row("da_lo" + tag, {{a, 1.0}, {gam, -l}}, Sense::kGreaterEqual, 0.0);
        ir.add_row("da_hi" + tag, {{a, 1.0}, {gam, -u}}, Sense::kLessEqual, 0.0);
        ir.add_row("da_wlo" + tag, {{a, 1.0}, {w, -1.0}, {gam, -u}}, Sense::kGreaterEqual, -u);
        ir.add_row("da_whi" + tag, {{a, 1.0}, {w, -1.0}, {gam, -l}}, Sense::kLessEqual, -l);
        link.push_back({a, eps});
      }
      ir.add_row("dx[" + rc + "]", link, Sense::kEqual, 0.0);
    }
  }
}

BuiltModel build_discretized(const PoolingInstance& inst, const MethodSpec& spec, Remainder rem) {
  if (spec.H < 1) throw MethodError("discretization level H must be >= 1");
  BuiltModel bm;
  bm.spec = spec;
  bm.base = build_bilinear(inst, spec.basis);
  bm.ir = build_mcf_relaxation(bm.base);
  // variant 2 expands the column fractions against row-sum bounds, variant 1
  // works on the transposed block
  const bool transposed = spec.kind == MethodKind::kM1 || spec.kind == MethodKind::kG1;
  for (const auto& blk : bm.base.blocks) {
    if (blk.m() == 0 || blk.n() == 0) continue;
    add_discretization(bm.ir, DiscView{&blk, transposed}, spec.H, rem);
  }
  return bm;
}

}  // namespace

BuiltModel build_mip_relaxation(const PoolingInstance& inst, const MethodSpec& spec) {
  if (spec.kind != MethodKind::kM1 && spec.kind != MethodKind::kM2)
    throw MethodError("not a MIP relaxation: " + spec.str());
  return build_discretized(inst, spec, Remainder::kContinuous);
}

BuiltModel build_mip_restriction(const PoolingInstance& inst, const MethodSpec& spec) {
  if (!spec.is_restriction()) throw MethodError("not a restriction: " + spec.str());
  return build_discretized(inst, spec,
                           spec.drop_remainder ? Remainder::kNone : Remainder::kBinaryDigit);
}

BuiltModel build_method(const PoolingInstance& inst, const MethodSpec& spec) {
  switch (spec.kind) {
    case MethodKind::kM1:
    case MethodKind::kM2: return build_mip_relaxation(inst, spec);
    case MethodKind::kG1:
    case MethodKind::kG2: return build_mip_restriction(inst, spec);
    case MethodKind::kExact: {
      BuiltModel bm;
      bm.spec = spec;
      bm.base = build_bilinear(inst, spec.basis);
      bm.ir = bm.base.ir;
      return bm;
    }
    default: return build_relaxation(inst, spec);
  }
}

void normalize_proportions(const BilinearModel& model, std::vector<double>& v) {
  rederive_proportions(model, v);
  for (const auto& blk : model.blocks) {
    double s = 0.0;
    for (VarId q : blk.q) s += std::max(0.0, v[q]);
    for (VarId q : blk.q)
      v[q] = s > 0.0 ? std::max(0.0, v[q]) / s : 1.0 / static_cast<double>(blk.q.size());
  }
}

std::vector<double> base_solution(const BuiltModel& model, const std::vector<double>& values) {
  const std::size_t n = model.base.ir.num_vars();
  if (values.size() < n) throw ModelError("solution does not cover the base model");
  std::vector<double> v(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n));
  normalize_proportions(model.base, v);
  return v;
}

}  // namespace poolkit
