#include "poolkit/formulations.hpp"

#include <algorithm>
#include <cmath>

#include "poolkit/kernels.hpp"

namespace poolkit {

std::string_view to_string(Basis b) { return b == Basis::kSource ? "S" : "T"; }

FragmentBinding PoolBlock::binding() const {
  FragmentBinding b;
  b.tag = label;
  b.row_labels = row_labels;
  b.col_labels = col_labels;
  b.cells = cells;
  return b;
}

PoolingInstance with_implied_bounds(const PoolingInstance& src) {
  PoolingInstance inst = src;
  const std::size_t nn = inst.nodes.size();
  for (std::size_t pass = 0; pass < 2 * nn + 2; ++pass) {
    bool changed = false;
    auto lower = [&changed](double& v, double cap) {
      if (cap < v) {
        v = cap;
        changed = true;
      }
    };
    for (auto& a : inst.arcs) {
      lower(a.u, inst.nodes[a.tail].U);
      lower(a.u, inst.nodes[a.head].U);
    }
    for (std::size_t v = 0; v < nn; ++v) {
      double in = 0.0, out = 0.0;
      for (int k : inst.in_arcs[v]) in += inst.arcs[k].u;
      for (int k : inst.out_arcs[v]) out += inst.arcs[k].u;
      if (!inst.is_source(v)) lower(inst.nodes[v].U, in);
      if (!inst.is_terminal(v)) lower(inst.nodes[v].U, out);
    }
    if (!changed) break;
  }
  for (auto& a : inst.arcs)
    if (a.l > a.u) throw InstanceError("implied capacities are inconsistent");
  for (auto& n : inst.nodes)
    if (n.L > n.U) throw InstanceError("implied capacity of " + n.id + " is below its lower bound");
  return inst;
}

namespace {

std::string key(const PoolingInstance& inst, int a, int b) {
  return "[" + inst.nodes[a].id + "," + inst.nodes[b].id + "]";
}

std::string key(const PoolingInstance& inst, int a, int b, int c) {
  return "[" + inst.nodes[a].id + "," + inst.nodes[b].id + "," + inst.nodes[c].id + "]";
}

void add_arcs_and_capacities(const PoolingInstance& inst, BilinearModel& bm) {
  ModelIR& ir = bm.ir;
  for (const auto& a : inst.arcs) {
    const VarId v = ir.add_var("f" + key(inst, a.tail, a.head), a.l, a.u);
    bm.arc_flow.push_back(v);
    if (a.cost != 0.0) bm.cost.push_back({v, a.cost});
  }
  for (std::size_t v = 0; v < inst.nodes.size(); ++v) {
    const Node& nd = inst.nodes[v];
    std::vector<Term> t;
    const auto& arcs = inst.is_source(v) ? inst.out_arcs[v] : inst.in_arcs[v];
    for (int k : arcs) t.push_back({bm.arc_flow[k], 1.0});
    ir.add_range("cap[" + nd.id + "]", t, nd.L, nd.U);
  }
}

// Window rows at every terminal; `numerator[t]` lists the spec-weighted
// source contributions as (variable, source) pairs.
void add_specs(const PoolingInstance& inst, BilinearModel& bm,
               const std::vector<std::vector<std::pair<VarId, int>>>& numerator) {
  ModelIR& ir = bm.ir;
  const bool soft = inst.soft_specs();
  for (int t : inst.terminals) {
    for (int k = 0; k < inst.K; ++k) {
      double lo = inst.mu_lo[t][k], hi = inst.mu_hi[t][k];
      double lmin = kInf, lmax = -kInf;
      for (int s : inst.S[t]) {
        lmin = std::min(lmin, inst.lambda[s][k]);
        lmax = std::max(lmax, inst.lambda[s][k]);
      }
      const std::string tag = "[" + inst.nodes[t].id + "," + std::to_string(k) + "]";
      auto row = [&](double mu) {
        std::vector<Term> terms;
        for (const auto& [v, s] : numerator[t]) terms.push_back({v, inst.lambda[s][k]});
        for (int a : inst.in_arcs[t]) terms.push_back({bm.arc_flow[a], -mu});
        return terms;
      };
      const double pen = soft ? inst.penalty[t][k] : 0.0;
      if (std::isfinite(hi) && hi < lmax) {
        auto terms = row(hi);
        if (soft) {
          const VarId v = ir.add_var("vp" + tag, 0.0, kInf);
          ir.add_objective_term(v, pen);
          terms.push_back({v, -1.0});
        }
        ir.add_row("spec_hi" + tag, terms, Sense::kLessEqual, 0.0);
      }
      if (std::isfinite(lo) && lo > lmin) {
        auto terms = row(lo);
        if (soft) {
          const VarId v = ir.add_var("vm" + tag, 0.0, kInf);
          ir.add_objective_term(v, pen);
          terms.push_back({v, 1.0});
        }
        ir.add_row("spec_lo" + tag, terms, Sense::kGreaterEqual, 0.0);
      }
    }
  }
}

void finish_objective(BilinearModel& bm) {
  for (const auto& t : bm.cost) bm.ir.add_objective_term(t.var, t.coef);
}

}  // namespace

BilinearModel build_source_based(const PoolingInstance& raw) {
  const PoolingInstance inst = with_implied_bounds(raw);
  BilinearModel bm;
  bm.basis = Basis::kSource;
  ModelIR& ir = bm.ir;
  add_arcs_and_capacities(inst, bm);

  // commodity row variable: arc flow or ghost flow
  std::map<std::pair<int, int>, VarId> through;
  for (int i : inst.pools)
    for (int s : inst.S[i]) {
      if (auto a = inst.find_arc(s, i)) {
        through[{s, i}] = bm.arc_flow[*a];
      } else {
        const Interval iv = inst.commodity_interval(s, i);
        const VarId g = ir.add_var("g" + key(inst, s, i), iv.lo, iv.hi);
        bm.ghost[{s, i}] = g;
        through[{s, i}] = g;
      }
    }
  // decomposed flows x[s,i,j] on pool out-arcs
  std::map<std::tuple<int, int, int>, VarId> x;
  for (int i : inst.pools)
    for (int s : inst.S[i]) {
      const Interval row = inst.commodity_interval(s, i);
      for (int a : inst.out_arcs[i]) {
        const int j = inst.arcs[a].head;
        x[{s, i, j}] = ir.add_var("x" + key(inst, s, i, j), 0.0,
                                  std::min(inst.arcs[a].u, row.hi));
      }
    }

  for (int i : inst.pools) {
    PoolBlock blk;
    blk.pool = i;
    blk.label = inst.nodes[i].id;
    blk.rows = inst.S[i];
    for (int a : inst.out_arcs[i]) blk.cols.push_back(inst.arcs[a].head);
    const std::size_t m = blk.rows.size(), n = blk.cols.size();
    blk.box = BoundBox(m, n);
    blk.box.L = inst.nodes[i].L;
    blk.box.U = inst.nodes[i].U;
    for (std::size_t r = 0; r < m; ++r) {
      const int s = blk.rows[r];
      const Interval iv = inst.commodity_interval(s, i);
      blk.box.l[r] = iv.lo;
      blk.box.u[r] = iv.hi;
      blk.row_flow.push_back(through.at({s, i}));
      blk.row_labels.push_back(inst.nodes[s].id);
      blk.q.push_back(ir.add_var("q" + key(inst, i, s), 0.0, 1.0));
    }
    for (std::size_t c = 0; c < n; ++c) {
      const int a = inst.out_arcs[i][c];
      blk.box.lc[c] = inst.arcs[a].l;
      blk.box.uc[c] = inst.arcs[a].u;
      blk.col_flow.push_back(bm.arc_flow[a]);
      blk.col_labels.push_back(inst.nodes[blk.cols[c]].id);
    }
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) blk.cells.push_back(x.at({blk.rows[r], i, blk.cols[c]}));
    bm.blocks.push_back(std::move(blk));
  }

  for (const auto& blk : bm.blocks) {
    const int i = blk.pool;
    const std::string pid = inst.nodes[i].id;
    for (std::size_t r = 0; r < blk.m(); ++r) {
      const int s = blk.rows[r];
      // conservation of commodity s at pool i
      std::vector<Term> bal;
      for (int j : inst.N_minus_s(s, i))
        bal.push_back({j == s ? through.at({s, i}) : x.at({s, j, i}), 1.0});
      for (std::size_t c = 0; c < blk.n(); ++c) bal.push_back({blk.cell(r, c), -1.0});
      ir.add_row("bal" + key(inst, i, s), bal, Sense::kEqual, 0.0);
      std::vector<Term> gh;
      for (std::size_t c = 0; c < blk.n(); ++c) gh.push_back({blk.cell(r, c), 1.0});
      gh.push_back({blk.row_flow[r], -1.0});
      ir.add_row("ghost" + key(inst, i, s), gh, Sense::kEqual, 0.0);
    }
    for (std::size_t c = 0; c < blk.n(); ++c) {
      std::vector<Term> dec;
      for (std::size_t r = 0; r < blk.m(); ++r) dec.push_back({blk.cell(r, c), 1.0});
      dec.push_back({blk.col_flow[c], -1.0});
      ir.add_row("dec" + key(inst, i, blk.cols[c]), dec, Sense::kEqual, 0.0);
    }
    std::vector<Term> qs;
    for (VarId q : blk.q) qs.push_back({q, 1.0});
    ir.add_row("qsum[" + pid + "]", qs, Sense::kEqual, 1.0);
    for (std::size_t r = 0; r < blk.m(); ++r)
      for (std::size_t c = 0; c < blk.n(); ++c)
        ir.add_bilinear(blk.cell(r, c), blk.q[r], blk.col_flow[c]);
  }

  std::vector<std::vector<std::pair<VarId, int>>> num(inst.nodes.size());
  for (int t : inst.terminals)
    for (int a : inst.in_arcs[t]) {
      const int j = inst.arcs[a].tail;
      if (inst.is_source(j)) {
        num[t].push_back({bm.arc_flow[a], j});
      } else {
        for (int s : inst.S[j]) num[t].push_back({x.at({s, j, t}), s});
      }
    }
  add_specs(inst, bm, num);
  finish_objective(bm);
  return bm;
}

BilinearModel build_terminal_based(const PoolingInstance& raw) {
  const PoolingInstance inst = with_implied_bounds(raw);
  BilinearModel bm;
  bm.basis = Basis::kTerminal;
  ModelIR& ir = bm.ir;
  add_arcs_and_capacities(inst, bm);

  std::map<std::pair<int, int>, VarId> through;
  for (int i : inst.pools)
    for (int t : inst.T[i]) {
      if (auto a = inst.find_arc(i, t)) {
        through[{i, t}] = bm.arc_flow[*a];
      } else {
        const Interval iv = inst.commodity_interval(i, t);
        const VarId g = ir.add_var("g" + key(inst, i, t), iv.lo, iv.hi);
        bm.ghost[{i, t}] = g;
        through[{i, t}] = g;
      }
    }
  // x[t,j,i]: flow on pool in-arc (j,i) destined for terminal t
  std::map<std::tuple<int, int, int>, VarId> x;
  for (int i : inst.pools)
    for (int t : inst.T[i]) {
      const Interval col = inst.commodity_interval(i, t);
      for (int a : inst.in_arcs[i]) {
        const int j = inst.arcs[a].tail;
        x[{t, j, i}] = ir.add_var("x" + key(inst, t, j, i), 0.0,
                                  std::min(inst.arcs[a].u, col.hi));
      }
    }

  for (int i : inst.pools) {
    PoolBlock blk;
    blk.pool = i;
    blk.label = inst.nodes[i].id;
    blk.rows = inst.T[i];
    for (int a : inst.in_arcs[i]) blk.cols.push_back(inst.arcs[a].tail);
    const std::size_t m = blk.rows.size(), n = blk.cols.size();
    blk.box = BoundBox(m, n);
    blk.box.L = inst.nodes[i].L;
    blk.box.U = inst.nodes[i].U;
    for (std::size_t r = 0; r < m; ++r) {
      const int t = blk.rows[r];
      const Interval iv = inst.commodity_interval(i, t);
      blk.box.l[r] = iv.lo;
      blk.box.u[r] = iv.hi;
      blk.row_flow.push_back(through.at({i, t}));
      blk.row_labels.push_back(inst.nodes[t].id);
      blk.q.push_back(ir.add_var("q" + key(inst, i, t), 0.0, 1.0));
    }
    for (std::size_t c = 0; c < n; ++c) {
      const int a = inst.in_arcs[i][c];
      blk.box.lc[c] = inst.arcs[a].l;
      blk.box.uc[c] = inst.arcs[a].u;
      blk.col_flow.push_back(bm.arc_flow[a]);
      blk.col_labels.push_back(inst.nodes[blk.cols[c]].id);
    }
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) blk.cells.push_back(x.at({blk.rows[r], blk.cols[c], i}));
    bm.blocks.push_back(std::move(blk));
  }

  for (const auto& blk : bm.blocks) {
    const int i = blk.pool;
    const std::string pid = inst.nodes[i].id;
    for (std::size_t r = 0; r < blk.m(); ++r) {
      const int t = blk.rows[r];
      std::vector<Term> bal;
      for (std::size_t c = 0; c < blk.n(); ++c) bal.push_back({blk.cell(r, c), 1.0});
      for (int j : inst.N_plus_t(t, i))
        bal.push_back({j == t ? through.at({i, t}) : x.at({t, i, j}), -1.0});
      ir.add_row("bal" + key(inst, i, t), bal, Sense::kEqual, 0.0);
      std::vector<Term> gh;
      for (std::size_t c = 0; c < blk.n(); ++c) gh.push_back({blk.cell(r, c), 1.0});
      gh.push_back({blk.row_flow[r], -1.0});
      ir.add_row("ghost" + key(inst, i, t), gh, Sense::kEqual, 0.0);
    }
    for (std::size_t c = 0; c < blk.n(); ++c) {
      std::vector<Term> dec;
      for (std::size_t r = 0; r < blk.m(); ++r) dec.push_back({blk.cell(r, c), 1.0});
      dec.push_back({blk.col_flow[c], -1.0});
      ir.add_row("dec" + key(inst, blk.cols[c], i), dec, Sense::kEqual, 0.0);
    }
    std::vector<Term> qs;
    for (VarId q : blk.q) qs.push_back({q, 1.0});
    ir.add_row("qsum[" + pid + "]", qs, Sense::kEqual, 1.0);
    for (std::size_t r = 0; r < blk.m(); ++r)
      for (std::size_t c = 0; c < blk.n(); ++c)
        ir.add_bilinear(blk.cell(r, c), blk.q[r], blk.col_flow[c]);
  }

  // spec numerators: direct source arcs plus each source's share entering a
  // pool that is destined for t
  std::vector<std::vector<std::pair<VarId, int>>> num(inst.nodes.size());
  for (int t : inst.terminals)
    for (int a : inst.in_arcs[t])
      if (inst.is_source(inst.arcs[a].tail)) num[t].push_back({bm.arc_flow[a], inst.arcs[a].tail});
  for (int i : inst.pools)
    for (int a : inst.in_arcs[i]) {
      const int s = inst.arcs[a].tail;
      if (!inst.is_source(s)) continue;
      for (int t : inst.T[i]) num[t].push_back({x.at({t, s, i}), s});
    }
  add_specs(inst, bm, num);
  finish_objective(bm);
  return bm;
}

BilinearModel build_bilinear(const PoolingInstance& inst, Basis basis) {
  return basis == Basis::kSource ? build_source_based(inst) : build_terminal_based(inst);
}

ModelIR build_mcf_relaxation(const BilinearModel& model) {
  ModelIR ir = model.ir;
  ir.drop_bilinears();
  return ir;
}

const std::vector<PoolBlock>& pool_blocks(const BilinearModel& model) { return model.blocks; }

double objective_arcs(const BilinearModel& model, const std::vector<double>& values) {
  double z = 0.0;
  for (const auto& t : model.cost) z += t.coef * values.at(t.var);
  return z;
}

double objective_decomposed(const BilinearModel& model, const PoolingInstance& inst,
                            const std::vector<double>& values) {
  // arcs whose cost is charged through a block's decomposed flows
  std::vector<char> charged(inst.arcs.size(), 0);
  double z = 0.0;
  for (const auto& blk : model.blocks) {
    for (std::size_t r = 0; r < blk.m(); ++r)
      for (std::size_t c = 0; c < blk.n(); ++c) {
        int a = -1;
        if (model.basis == Basis::kSource) {
          if (auto k = inst.find_arc(blk.rows[r], blk.pool)) a = *k;
        } else {
          if (auto k = inst.find_arc(blk.pool, blk.rows[r])) a = *k;
        }
        if (a < 0) continue;
        charged[a] = 1;
        z += inst.arcs[a].cost * values.at(blk.cell(r, c));
      }
  }
  for (std::size_t a = 0; a < inst.arcs.size(); ++a)
    if (!charged[a]) z += inst.arcs[a].cost * values.at(model.arc_flow[a]);
  return z;
}

Matrix block_matrix(const PoolBlock& blk, const std::vector<double>& values) {
  Matrix X(blk.m(), blk.n());
  for (std::size_t r = 0; r < blk.m(); ++r)
    for (std::size_t c = 0; c < blk.n(); ++c) X(r, c) = values.at(blk.cell(r, c));
  return X;
}

SolutionReport check_solution(const BilinearModel& model, const std::vector<double>& values,
                              double tol) {
  const ModelIR& ir = model.ir;
  if (values.size() != ir.num_vars()) throw ModelError("assignment does not cover all variables");
  SolutionReport rep;
  auto note = [&rep](const std::string& fam, double r) {
    auto& slot = rep.residual[fam];
    slot = std::max(slot, r);
  };
  note("bounds", 0.0);
  for (std::size_t v = 0; v < ir.num_vars(); ++v) {
    const auto& var = ir.vars()[v];
    note("bounds", std::max({0.0, var.lower - values[v], values[v] - var.upper}));
  }
  for (const auto& row : ir.rows()) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * values[t.var];
    double r = 0.0;
    if (row.sense != Sense::kGreaterEqual) r = std::max(r, lhs - row.rhs);
    if (row.sense != Sense::kLessEqual) r = std::max(r, row.rhs - lhs);
    note(std::string(family_of(row.name)), r);
  }
  note("bilinear", 0.0);
  for (const auto& b : ir.bilinears())
    note("bilinear", std::abs(values[b.product] - values[b.left] * values[b.right]));
  note("rank", 0.0);
  for (const auto& blk : model.blocks) {
    const Matrix X = block_matrix(blk, values);
    double norm = 1.0;
    for (double v : X.a) norm = std::max(norm, std::abs(v));
    note("rank", kernels::max_abs_minor(X.a.data(), X.m, X.n) / norm);
  }
  rep.ok = true;
  for (const auto& [fam, r] : rep.residual) {
    if (r > rep.worst) {
      rep.worst = r;
      rep.worst_family = fam;
    }
    if (r > tol) rep.ok = false;
  }
  return rep;
}

void rederive_proportions(const BilinearModel& model, std::vector<double>& values) {
  for (const auto& blk : model.blocks) {
    const Matrix X = block_matrix(blk, values);
    const double total = X.total();
    if (total <= 0.0) continue;
    for (std::size_t r = 0; r < blk.m(); ++r) values[blk.q[r]] = X.row_sum(r) / total;
  }
}

}  // namespace poolkit
