#include "poolkit/tightening.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <thread>

#include "json.hpp"

namespace poolkit {

std::string_view to_string(TargetKind k) {
  switch (k) {
    case TargetKind::kArc: return "arc";
    case TargetKind::kNode: return "node";
    case TargetKind::kGhost: return "ghost";
  }
  return "arc";
}

int BoundUpdate::num_changed() const {
  return static_cast<int>(std::count_if(entries.begin(), entries.end(),
                                        [](const BoundEntry& e) { return e.changed(); }));
}

const BoundEntry* BoundUpdate::find(TargetKind kind, const std::string& from,
                                    const std::string& to) const {
  for (const auto& e : entries)
    if (e.kind == kind && e.from == from && e.to == to) return &e;
  return nullptr;
}

namespace {

using nlohmann::json;

json num(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return v;
}

double read_num(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw TighteningError("bad number " + s);
  }
  return j.get<double>();
}

TargetKind kind_from(const std::string& s) {
  if (s == "arc") return TargetKind::kArc;
  if (s == "node") return TargetKind::kNode;
  if (s == "ghost") return TargetKind::kGhost;
  throw TighteningError("unknown target kind " + s);
}

double scale_of(double v) { return std::max(1.0, std::abs(v)); }

}  // namespace

std::string bound_update_to_json(const BoundUpdate& upd) {
  json j;
  j["recipe"] = upd.recipe;
  j["z_lb"] = num(upd.z_lb);
  j["z_ub"] = num(upd.z_ub);
  j["seconds"] = upd.seconds;
  json arr = json::array();
  for (const auto& e : upd.entries) {
    json je;
    je["kind"] = std::string(to_string(e.kind));
    je["from"] = e.from;
    if (!e.to.empty()) je["to"] = e.to;
    je["before"] = {num(e.before.lo), num(e.before.hi)};
    je["after"] = {num(e.after.lo), num(e.after.hi)};
    je["lo_tag"] = e.lo_tag;
    je["hi_tag"] = e.hi_tag;
    if (e.flagged) je["flagged"] = true;
    arr.push_back(std::move(je));
  }
  j["entries"] = std::move(arr);
  return j.dump(1);
}

BoundUpdate bound_update_from_json(const std::string& text) {
  BoundUpdate upd;
  try {
    const json j = json::parse(text);
    upd.recipe = j.value("recipe", "");
    upd.z_lb = j.contains("z_lb") ? read_num(j["z_lb"]) : -kInf;
    upd.z_ub = j.contains("z_ub") ? read_num(j["z_ub"]) : kInf;
    upd.seconds = j.value("seconds", 0.0);
    for (const auto& je : j.at("entries")) {
      BoundEntry e;
      e.kind = kind_from(je.at("kind").get<std::string>());
      e.from = je.at("from").get<std::string>();
      e.to = je.value("to", "");
      e.before = {read_num(je.at("before")[0]), read_num(je.at("before")[1])};
      e.after = {read_num(je.at("after")[0]), read_num(je.at("after")[1])};
      e.lo_tag = je.value("lo_tag", "unchanged");
      e.hi_tag = je.value("hi_tag", "unchanged");
      e.flagged = je.value("flagged", false);
      upd.entries.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    throw TighteningError(std::string("bad bound update: ") + ex.what());
  }
  if (upd.z_lb > upd.z_ub) throw TighteningError("bound update has z_lb > z_ub");
  return upd;
}

std::string instance_hash(const PoolingInstance& inst) {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : instance_to_json(inst)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct Target {
  BoundEntry entry;
  std::vector<Term> expr;
};

std::vector<Target> collect_targets(const PoolingInstance& inst, const BilinearModel& bm,
                                    const ObbtTargets& want) {
  std::vector<Target> out;
  auto id = [&inst](int v) { return inst.nodes[v].id; };
  if (want.arcs)
    for (std::size_t k = 0; k < inst.arcs.size(); ++k) {
      const Arc& a = inst.arcs[k];
      Target t;
      t.entry.kind = TargetKind::kArc;
      t.entry.from = id(a.tail);
      t.entry.to = id(a.head);
      t.entry.before = {a.l, a.u};
      t.expr = {{bm.arc_flow[k], 1.0}};
      out.push_back(std::move(t));
    }
  if (want.ghosts)
    for (const auto& [key, var] : bm.ghost) {
      Target t;
      t.entry.kind = TargetKind::kGhost;
      t.entry.from = id(key.first);
      t.entry.to = id(key.second);
      t.entry.before = inst.commodity_interval(key.first, key.second);
      t.expr = {{var, 1.0}};
      out.push_back(std::move(t));
    }
  for (std::size_t v = 0; v < inst.nodes.size(); ++v) {
    const Node& nd = inst.nodes[v];
    const bool src = nd.kind == NodeKind::kSource;
    if (src && !want.sources) continue;
    if (nd.kind == NodeKind::kPool && !want.pools) continue;
    if (nd.kind == NodeKind::kTerminal && !want.terminals) continue;
    Target t;
    t.entry.kind = TargetKind::kNode;
    t.entry.from = nd.id;
    t.entry.before = {nd.L, nd.U};
    for (int k : src ? inst.out_arcs[v] : inst.in_arcs[v]) t.expr.push_back({bm.arc_flow[k], 1.0});
    if (t.expr.empty()) continue;
    out.push_back(std::move(t));
  }
  return out;
}

struct JobResult {
  SolveStatus status = SolveStatus::kError;
  double value = 0.0;
};

}  // namespace

BoundUpdate obbt(const PoolingInstance& inst, const MethodSpec& relax, double z_lb, double z_ub,
                 const ObbtTargets& targets, int workers, double lp_time_limit) {
  if (z_lb > z_ub) throw TighteningError("objective box is empty: z_lb > z_ub");
  if (!relax.is_lp()) throw TighteningError("obbt needs an LP relaxation, got " + relax.str());
  const auto t0 = std::chrono::steady_clock::now();
  BuiltModel bm = build_relaxation(inst, relax);
  ModelIR ir = bm.ir;
  {
    const double off = ir.objective_offset();
    const double lo = std::isfinite(z_lb) ? z_lb - 1e-7 * scale_of(z_lb) - off : -kInf;
    const double hi = std::isfinite(z_ub) ? z_ub + 1e-7 * scale_of(z_ub) - off : kInf;
    ir.add_range("obj_box", ir.objective(), lo, hi);
  }
  SolveParams params;
  params.time_limit_s = lp_time_limit;
  {
    ModelIR probe = ir;
    probe.set_objective({});
    const SolveResult r = make_backend()->solve(probe, params);
    if (r.status == SolveStatus::kInfeasible)
      throw TighteningError("relaxation " + relax.str() + " of " + inst.name +
                            " is infeasible inside the objective box");
  }

  std::vector<Target> tg = collect_targets(inst, bm.base, targets);
  const std::size_t jobs = 2 * tg.size();
  std::vector<JobResult> results(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    auto backend = make_backend();
    ModelIR local = ir;
    for (std::size_t k = next++; k < jobs; k = next++) {
      const Target& t = tg[k / 2];
      const double sign = k % 2 == 0 ? 1.0 : -1.0;
      std::vector<Term> obj;
      for (const auto& term : t.expr) obj.push_back({term.var, sign * term.coef});
      local.set_objective(std::move(obj));
      const SolveResult r = backend->solve(local, params);
      results[k].status = r.status;
      if (r.status == SolveStatus::kOptimal) results[k].value = sign * r.objective;
    }
  };
  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(jobs)));
  if (nw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  BoundUpdate upd;
  upd.z_lb = z_lb;
  upd.z_ub = z_ub;
  upd.recipe = "obbt:" + relax.str();
  for (std::size_t i = 0; i < tg.size(); ++i) {
    BoundEntry e = tg[i].entry;
    e.after = e.before;
    const JobResult& lo = results[2 * i];
    const JobResult& hi = results[2 * i + 1];
    if (lo.status == SolveStatus::kOptimal) {
      const double v = lo.value - 1e-7 * scale_of(lo.value);
      if (v > e.before.lo + 1e-6 * scale_of(e.before.lo)) {
        e.after.lo = std::min(v, e.before.hi);
        e.lo_tag = "obbt-min";
      }
    } else {
      e.flagged = true;
    }
    if (hi.status == SolveStatus::kOptimal) {
      const double v = hi.value + 1e-7 * scale_of(hi.value);
      if (v < e.before.hi - 1e-6 * scale_of(e.before.hi)) {
        e.after.hi = std::max(v, e.before.lo);
        e.hi_tag = "obbt-max";
      }
    } else if (hi.status != SolveStatus::kUnbounded) {
      e.flagged = true;
    }
    if (e.after.lo > e.after.hi) {
      // rounding crossed over: collapse onto the midpoint
      const double mid = 0.5 * (e.after.lo + e.after.hi);
      e.after = {mid, mid};
    }
    upd.entries.push_back(std::move(e));
  }
  upd.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return upd;
}

ObjectiveBox objective_box(const PoolingInstance& inst, double time_limit) {
  const auto t0 = std::chrono::steady_clock::now();
  ObjectiveBox box;
  SolveParams params;
  params.time_limit_s = time_limit;
  const BuiltModel mcf = build_method(inst, parse_method("MCF:T"));
  const SolveResult lr = solve(mcf.ir, params);
  if (lr.status == SolveStatus::kInfeasible)
    throw TighteningError("MCF relaxation of " + inst.name + " is infeasible");
  if (lr.status == SolveStatus::kOptimal) box.z_lb = lr.objective;
  const BuiltModel g = build_method(inst, parse_method("G2:T:H=3"));
  const SolveResult ur = solve(g.ir, params);
  if (ur.has_solution()) box.z_ub = ur.objective;
  if (box.z_ub < box.z_lb) box.z_ub = box.z_lb;
  box.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return box;
}

BoundUpdate compose(const BoundUpdate& first, const BoundUpdate& second) {
  BoundUpdate out = first;
  out.z_lb = std::max(first.z_lb, second.z_lb);
  out.z_ub = std::min(first.z_ub, second.z_ub);
  out.seconds = first.seconds + second.seconds;
  for (const auto& e : second.entries) {
    auto it = std::find_if(out.entries.begin(), out.entries.end(), [&e](const BoundEntry& o) {
      return o.kind == e.kind && o.from == e.from && o.to == e.to;
    });
    if (it == out.entries.end()) {
      out.entries.push_back(e);
      continue;
    }
    if (e.after.lo > it->after.lo) {
      it->after.lo = e.after.lo;
      it->lo_tag = e.lo_tag;
    }
    if (e.after.hi < it->after.hi) {
      it->after.hi = e.after.hi;
      it->hi_tag = e.hi_tag;
    }
    it->flagged = it->flagged || e.flagged;
  }
  return out;
}

BoundUpdate obbt_recipe(const PoolingInstance& inst, const MethodSpec& relax, int workers,
                        double time_limit, int max_rounds) {
  const ObjectiveBox box = objective_box(inst, time_limit);
  BoundUpdate total;
  total.z_lb = box.z_lb;
  total.z_ub = box.z_ub;
  PoolingInstance cur = inst;
  for (int round = 0; round < std::max(1, max_rounds); ++round) {
    const BoundUpdate upd = obbt(cur, relax, box.z_lb, box.z_ub, {}, workers);
    total = round == 0 ? upd : compose(total, upd);
    if (upd.num_changed() == 0) break;
    cur = apply_bounds(cur, upd);
  }
  total.seconds += box.seconds;
  total.recipe = "box(MCF:T,G2:T:H=3)+obbt(" + relax.str() + ")";
  return total;
}

namespace {

// One pass of the mining tightening. Returns the new bounds keyed like the
// instance (arc index / node index) and the step that set each side.
struct MiningPass {
  std::vector<Interval> arc, node;
  std::vector<int> arc_lo_step, arc_hi_step, node_lo_step, node_hi_step;
};

MiningPass mining_pass(const PoolingInstance& inst) {
  const MiningMeta& meta = *inst.mining;
  const std::size_t na = inst.arcs.size(), nn = inst.nodes.size();
  MiningPass out;
  out.arc.resize(na);
  out.node.resize(nn);
  out.arc_lo_step.assign(na, 0);
  out.arc_hi_step.assign(na, 0);
  out.node_lo_step.assign(nn, 0);
  out.node_hi_step.assign(nn, 0);
  for (std::size_t k = 0; k < na; ++k) out.arc[k] = {inst.arcs[k].l, inst.arcs[k].u};
  for (std::size_t v = 0; v < nn; ++v) out.node[v] = {inst.nodes[v].L, inst.nodes[v].U};

  auto set = [](Interval& iv, std::vector<int>& lo_step, std::vector<int>& hi_step,
                std::size_t idx, double lo, double hi, int step) {
    if (lo > iv.lo) {
      iv.lo = lo;
      lo_step[idx] = step;
    }
    if (hi < iv.hi) {
      iv.hi = hi;
      hi_step[idx] = step;
    }
  };
  auto set_arc = [&](int k, double lo, double hi, int step) {
    set(out.arc[k], out.arc_lo_step, out.arc_hi_step, k, lo, hi, step);
  };
  auto set_node = [&](int v, double lo, double hi, int step) {
    set(out.node[v], out.node_lo_step, out.node_hi_step, v, lo, hi, step);
  };

  // pre-pass pool bounds: [0, cumulative supply of the stockpile so far]
  std::map<std::string, double> cum;
  std::vector<Interval> pre(nn);
  std::map<int, std::size_t> supply_of_pool;
  std::map<int, const MiningMeta::Supply*> supply_of_source;
  for (std::size_t k = 0; k < meta.supplies.size(); ++k) {
    const auto& s = meta.supplies[k];
    cum[s.stockpile] += s.qty;
    pre[s.pool] = {0.0, cum[s.stockpile]};
    supply_of_pool[s.pool] = k;
    supply_of_source[s.source] = &s;
  }
  for (std::size_t p = 0; p < meta.surplus_pools.size(); ++p)
    pre[meta.surplus_pools[p]] = {0.0, cum[meta.stockpiles[p]]};
  for (int i : inst.pools) {
    pre[i].lo = std::max(pre[i].lo, inst.nodes[i].L);
    pre[i].hi = std::min(pre[i].hi, inst.nodes[i].U);
  }

  // step 1: sources and their arcs carry exactly the supply
  for (int s : inst.sources) {
    const auto it = supply_of_source.find(s);
    if (it == supply_of_source.end() || inst.out_arcs[s].size() != 1)
      throw TighteningError("source " + inst.nodes[s].id + " is not a mining supply");
    const double q = it->second->qty;
    set_node(s, q, q, 1);
    set_arc(inst.out_arcs[s][0], q, q, 1);
  }
  // step 2: terminals take exactly their demand
  for (const auto& d : meta.demands) set_node(d.terminal, d.qty, d.qty, 2);
  // step 3: pool-to-terminal arcs
  for (std::size_t k = 0; k < na; ++k) {
    const Arc& a = inst.arcs[k];
    if (!inst.is_pool(a.tail) || !inst.is_terminal(a.head)) continue;
    double others = 0.0;
    for (int b : inst.in_arcs[a.head])
      if (inst.arcs[b].tail != a.tail) others += pre[inst.arcs[b].tail].hi;
    const Interval& t = out.node[a.head];
    set_arc(static_cast<int>(k), std::max(t.lo - others, 0.0), std::min(pre[a.tail].hi, t.hi), 3);
  }
  // step 4: pool-to-pool arcs, capped by the supply surplus reachable there
  for (std::size_t k = 0; k < na; ++k) {
    const Arc& a = inst.arcs[k];
    if (!inst.is_pool(a.tail) || !inst.is_pool(a.head)) continue;
    const auto ti = supply_of_pool.find(a.tail);
    if (ti == supply_of_pool.end())
      throw TighteningError("pool " + inst.nodes[a.tail].id + " has no supply");
    const auto& tail_sup = meta.supplies[ti->second];
    double tu = 0.0, tl = 0.0;
    for (int b : inst.out_arcs[a.tail]) {
      const Arc& ob = inst.arcs[b];
      if (!inst.is_terminal(ob.head)) continue;
      tu += out.node[ob.head].hi;
      tl += out.arc[b].lo;
    }
    const auto hj = supply_of_pool.find(a.head);
    const double tau_next = hj == supply_of_pool.end() ? kInf : meta.supplies[hj->second].time;
    double avail = 0.0, used = 0.0;
    for (std::size_t q = 0; q < meta.supplies.size(); ++q) {
      const auto& s = meta.supplies[q];
      const bool same_chain_before = s.stockpile == tail_sup.stockpile && q <= ti->second;
      if (s.time < tau_next || same_chain_before) avail += s.qty;
    }
    for (const auto& d : meta.demands)
      if (d.time < tau_next) used += d.qty;
    const double surplus = std::max(avail - used, 0.0);
    set_arc(static_cast<int>(k), std::max(pre[a.tail].lo - tu, 0.0),
            std::min(pre[a.tail].hi - tl, surplus), 4);
  }
  // step 5: pools from their incoming arcs
  for (int i : inst.pools) {
    double lo = 0.0, hi = 0.0;
    for (int b : inst.in_arcs[i]) {
      lo += out.arc[b].lo;
      hi += out.arc[b].hi;
    }
    set_node(i, lo, hi, 5);
  }
  return out;
}

void validate_mining(const PoolingInstance& inst) {
  if (!inst.mining) throw TighteningError("mining_tighten needs an instance from convert_mining");
  std::vector<int> seen(inst.nodes.size(), 0);
  for (const auto& s : inst.mining->supplies) {
    if (s.source < 0 || s.pool < 0 || !inst.is_source(s.source) || !inst.is_pool(s.pool))
      throw TighteningError("mining metadata does not match the network");
    if (++seen[s.pool] > 1)
      throw TighteningError("pool " + inst.nodes[s.pool].id + " has more than one supply");
  }
  for (int i : inst.pools) {
    int pool_in = 0;
    for (int b : inst.in_arcs[i]) pool_in += inst.is_pool(inst.arcs[b].tail);
    if (pool_in > 1) throw TighteningError("pool " + inst.nodes[i].id + " is not on a chain");
  }
}

}  // namespace

BoundUpdate mining_tighten(const PoolingInstance& inst, bool fixpoint) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_mining(inst);
  const std::size_t na = inst.arcs.size(), nn = inst.nodes.size();
  std::vector<std::string> arc_lo(na, "unchanged"), arc_hi(na, "unchanged");
  std::vector<std::string> node_lo(nn, "unchanged"), node_hi(nn, "unchanged");
  PoolingInstance cur = inst;
  const int passes = fixpoint ? 10 : 1;
  for (int pass = 0; pass < passes; ++pass) {
    const MiningPass mp = mining_pass(cur);
    bool changed = false;
    auto tag = [](int step) { return "mining-step-" + std::to_string(step); };
    for (std::size_t k = 0; k < na; ++k) {
      Arc& a = cur.arcs[k];
      if (mp.arc[k].lo > a.l) {
        a.l = mp.arc[k].lo;
        arc_lo[k] = tag(mp.arc_lo_step[k]);
        changed = true;
      }
      if (mp.arc[k].hi < a.u) {
        a.u = mp.arc[k].hi;
        arc_hi[k] = tag(mp.arc_hi_step[k]);
        changed = true;
      }
      if (a.l > a.u)
        throw TighteningError("mining tightening emptied arc " + cur.nodes[a.tail].id + "->" +
                              cur.nodes[a.head].id);
    }
    for (std::size_t v = 0; v < nn; ++v) {
      Node& nd = cur.nodes[v];
      if (mp.node[v].lo > nd.L) {
        nd.L = mp.node[v].lo;
        node_lo[v] = tag(mp.node_lo_step[v]);
        changed = true;
      }
      if (mp.node[v].hi < nd.U) {
        nd.U = mp.node[v].hi;
        node_hi[v] = tag(mp.node_hi_step[v]);
        changed = true;
      }
      if (nd.L > nd.U) throw TighteningError("mining tightening emptied node " + nd.id);
    }
    if (!changed) break;
  }

  BoundUpdate upd;
  upd.recipe = fixpoint ? "mining:fixpoint" : "mining";
  for (std::size_t k = 0; k < na; ++k) {
    BoundEntry e;
    e.kind = TargetKind::kArc;
    e.from = inst.nodes[inst.arcs[k].tail].id;
    e.to = inst.nodes[inst.arcs[k].head].id;
    e.before = {inst.arcs[k].l, inst.arcs[k].u};
    e.after = {cur.arcs[k].l, cur.arcs[k].u};
    e.lo_tag = arc_lo[k];
    e.hi_tag = arc_hi[k];
    upd.entries.push_back(std::move(e));
  }
  for (std::size_t v = 0; v < nn; ++v) {
    BoundEntry e;
    e.kind = TargetKind::kNode;
    e.from = inst.nodes[v].id;
    e.before = {inst.nodes[v].L, inst.nodes[v].U};
    e.after = {cur.nodes[v].L, cur.nodes[v].U};
    e.lo_tag = node_lo[v];
    e.hi_tag = node_hi[v];
    upd.entries.push_back(std::move(e));
  }
  upd.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return upd;
}

PoolingInstance apply_bounds(const PoolingInstance& inst, const BoundUpdate& upd) {
  PoolingInstance out = inst;
  auto meet = [](Interval cur, Interval nw, const std::string& what) {
    Interval r{std::max(cur.lo, nw.lo), std::min(cur.hi, nw.hi)};
    if (r.lo > r.hi) {
      if (r.lo - r.hi > 1e-9 * scale_of(r.hi))
        throw TighteningError("empty interval at " + what);
      r.lo = r.hi;
    }
    return r;
  };
  for (const auto& e : upd.entries) {
    const auto from = out.find_node(e.from);
    if (!from) throw TighteningError("unknown node " + e.from + " in bound update");
    if (e.kind == TargetKind::kNode) {
      Node& nd = out.nodes[*from];
      const Interval r = meet({nd.L, nd.U}, e.after, "node " + e.from);
      nd.L = r.lo;
      nd.U = r.hi;
      continue;
    }
    const auto to = out.find_node(e.to);
    if (!to) throw TighteningError("unknown node " + e.to + " in bound update");
    const std::string what = std::string(to_string(e.kind)) + " " + e.from + "->" + e.to;
    if (e.kind == TargetKind::kArc) {
      const auto k = out.find_arc(*from, *to);
      if (!k) throw TighteningError("unknown " + what);
      Arc& a = out.arcs[*k];
      const Interval r = meet({a.l, a.u}, e.after, what);
      a.l = r.lo;
      a.u = r.hi;
    } else {
      out.commodity_bounds[{*from, *to}] = meet(out.commodity_interval(*from, *to), e.after, what);
    }
  }
  out.finalize();
  return out;
}

}  // namespace poolkit
