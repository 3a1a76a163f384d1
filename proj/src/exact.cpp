#include "poolkit/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "poolkit/relaxations.hpp"

namespace poolkit {

double ExactResult::gap() const {
  if (!std::isfinite(objective) || !std::isfinite(dual_bound)) return kInf;
  return (objective - dual_bound) / std::max(1.0, std::abs(objective));
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// LP with one factor of every bilinear term fixed at its current value.
ModelIR fixed_lp(const BilinearModel& model, const std::vector<double>& v, bool fix_left) {
  ModelIR ir = model.ir;
  ir.drop_bilinears();
  std::vector<char> fixed(ir.num_vars(), 0);
  for (const auto& b : model.ir.bilinears()) {
    const VarId f = fix_left ? b.left : b.right;
    const VarId o = fix_left ? b.right : b.left;
    if (!fixed[f]) {
      fixed[f] = 1;
      auto& var = ir.vars()[f];
      const double val = std::clamp(v[f], var.lower, var.upper);
      var.lower = var.upper = val;
    }
    const double c = ir.vars()[f].lower;
    ir.add_row("fix[" + ir.vars()[b.product].name + "]", {{b.product, 1.0}, {o, -c}},
               Sense::kEqual, 0.0);
  }
  return ir;
}

}  // namespace

bool polish_solution(const BilinearModel& model, std::vector<double>& values, int max_iters,
                     double time_limit) {
  const auto t0 = Clock::now();
  if (values.size() < model.ir.num_vars()) return false;
  values.resize(model.ir.num_vars());
  normalize_proportions(model, values);
  auto backend = make_backend();
  SolveParams params;
  double best = kInf;
  std::vector<double> best_v;
  for (int it = 0; it < max_iters && since(t0) < time_limit; ++it) {
    bool moved = false;
    for (bool fix_left : {true, false}) {
      params.time_limit_s = std::max(1.0, time_limit - since(t0));
      const ModelIR lp = fixed_lp(model, values, fix_left);
      const SolveResult r = backend->solve(lp, params);
      if (r.status != SolveStatus::kOptimal) continue;
      std::vector<double> cand(r.values.begin(), r.values.begin() + model.ir.num_vars());
      if (!fix_left) normalize_proportions(model, cand);
      const double z = model.ir.objective_value(cand);
      if (best_v.empty() || z < best - 1e-9 * std::max(1.0, std::abs(best))) {
        best = z;
        best_v = cand;
        moved = true;
      }
      values = cand;
    }
    if (!moved) break;
  }
  if (best_v.empty()) return false;
  values = std::move(best_v);
  return true;
}

ExactResult solve_exact(const PoolingInstance& inst, const ExactOptions& opt) {
  const auto t0 = Clock::now();
  ExactResult res;
  const BilinearModel target = build_bilinear(inst, opt.basis);
  auto remaining = [&]() { return std::max(0.5, opt.time_limit - since(t0)); };

  auto try_restriction = [&](const std::string& method) {
    const MethodSpec spec = parse_method(method);
    const BuiltModel g = build_method(inst, spec);
    SolveParams p;
    p.time_limit_s = remaining();
    const SolveResult r = solve(g.ir, p);
    if (!r.has_solution()) return;
    std::vector<double> v = base_solution(g, r.values);
    polish_solution(g.base, v, 50, remaining());
    if (!check_solution(g.base, v, 1e-6).ok) return;
    const double z = g.base.ir.objective_value(v);
    if (z >= res.objective - 1e-9 * std::max(1.0, std::abs(z))) return;
    // carry the arc flows into the requested basis and repair the rest there
    std::vector<double> w;
    if (spec.basis == opt.basis) {
      w = v;
    } else {
      ModelIR fix = build_mcf_relaxation(target);
      for (std::size_t k = 0; k < target.arc_flow.size(); ++k) {
        auto& var = fix.vars()[target.arc_flow[k]];
        const double f = std::clamp(v[g.base.arc_flow[k]], var.lower, var.upper);
        var.lower = var.upper = f;
      }
      SolveParams q;
      q.time_limit_s = remaining();
      const SolveResult fr = solve(fix, q);
      if (!fr.has_solution()) return;
      w.assign(fr.values.begin(), fr.values.begin() + target.ir.num_vars());
      normalize_proportions(target, w);
      polish_solution(target, w, 50, remaining());
      if (!check_solution(target, w, 1e-6).ok) return;
    }
    res.objective = target.ir.objective_value(w);
    res.values = std::move(w);
    res.incumbent_from = method;
  };

  auto try_lower = [&](const PoolingInstance& tight) {
    for (const char* m : {"F4:T", "F4:S"}) {
      SolveParams p;
      p.time_limit_s = remaining();
      const SolveResult r = solve(build_method(tight, parse_method(m)).ir, p);
      if (r.status == SolveStatus::kOptimal) res.dual_bound = std::max(res.dual_bound, r.objective);
    }
  };

  auto closed = [&]() { return res.gap() <= opt.rel_tol; };

  // bounds do not depend on the basis; the terminal-based F4 tightens best
  const MethodSpec relax = parse_method("F4:T");
  try {
    const ObjectiveBox box = objective_box(inst, remaining());
    res.dual_bound = box.z_lb;
    for (int H = 3; H <= opt.max_H && !closed() && since(t0) < opt.time_limit; ++H) {
      const std::string h = ":H=" + std::to_string(H);
      for (const char* k : {"G2:T", "G1:T", "G2:S", "G1:S"}) try_restriction(k + h);
      if (!std::isfinite(res.objective)) continue;
      PoolingInstance tight = inst;
      BoundUpdate total;
      total.z_lb = res.dual_bound;
      total.z_ub = res.objective;
      for (int round = 0; round < 10; ++round) {
        const BoundUpdate upd = obbt(tight, relax, res.dual_bound, res.objective, {}, opt.workers,
                                     remaining());
        total = round == 0 ? upd : compose(total, upd);
        if (upd.num_changed() == 0 || since(t0) > opt.time_limit) break;
        tight = apply_bounds(tight, upd);
      }
      res.bounds = total;
      try_lower(tight);
    }
    if (!std::isfinite(res.objective)) {
      res.status = since(t0) >= opt.time_limit ? SolveStatus::kTimeLimit : SolveStatus::kInfeasible;
    } else {
      res.status = closed() ? SolveStatus::kOptimal
                            : (since(t0) >= opt.time_limit ? SolveStatus::kTimeLimit
                                                           : SolveStatus::kFeasible);
    }
  } catch (const TighteningError&) {
    // MCF infeasible, or an objective box lost to LP tolerances
    res.status = std::isfinite(res.objective) ? SolveStatus::kFeasible : SolveStatus::kInfeasible;
  }
  res.seconds = since(t0);
  return res;
}

}  // namespace poolkit
