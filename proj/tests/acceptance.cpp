// Acceptance report: one PASS/FAIL line per criterion. With an argument only
// that criterion runs; the exit code is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "poolkit/bench.hpp"
#include "poolkit/exact.hpp"
#include "poolkit/rank1.hpp"
#include "poolkit/relaxations.hpp"
#include "poolkit/tightening.hpp"
#include "support.hpp"

using namespace poolkit;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    pass = false;
    detail << " [" << why << "]";
  }
};

std::string data_path(const std::string& name) {
  std::string lower = name;
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return std::string(POOLKIT_DATA_DIR) + "/instances/" + lower + ".json";
}

// Generalized instance, or nullopt with a failure noted.
std::optional<PoolingInstance> load(const std::string& name, Outcome& out) {
  const std::string path = data_path(name);
  if (!std::filesystem::exists(path)) {
    out.fail(name + ": benchmark file missing");
    return std::nullopt;
  }
  return generalize(parse_instance(path));
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double exact_value(const PoolingInstance& inst) {
  ExactOptions o;
  o.time_limit = 60.0;
  const ExactResult r = solve_exact(inst, o);
  return r.status == SolveStatus::kOptimal ? r.objective : kInf;
}

// 1. exact optima
Outcome exact_values() {
  Outcome out;
  const std::pair<const char*, double> cases[] = {{"Haverly1", -400},  {"Haverly2", -600},
                                                  {"Haverly3", -750},  {"BenTal4", -450},
                                                  {"BenTal5", -3500}, {"Foulds2", -1100}};
  for (const auto& [name, want] : cases) {
    const auto inst = load(name, out);
    if (!inst) continue;
    const auto t0 = Clock::now();
    ExactOptions o;
    o.time_limit = 60.0;
    const ExactResult r = solve_exact(*inst, o);
    const double secs = since(t0);
    out.detail << " " << name << "=" << fmt("%.6g", r.objective) << "(" << fmt("%.1fs", secs) << ")";
    if (!(std::abs(r.objective - want) <= 1e-4 * std::abs(want))) out.fail(std::string(name) + " value");
    if (r.status != SolveStatus::kOptimal) out.fail(std::string(name) + " not proven optimal");
    if (secs > 60.0) out.fail(std::string(name) + " over 60 s");
  }
  return out;
}

// D-gap of an LP relaxation; also checks the time cap.
double lp_gap(const PoolingInstance& inst, double opt, const std::string& method, double cap,
              Outcome& out) {
  const BuiltModel bm = build_method(inst, parse_method(method));
  SolveParams p;
  p.time_limit_s = cap;
  const SolveResult r = solve(bm.ir, p);
  if (r.seconds > cap) out.fail(method + " over time cap");
  if (r.status != SolveStatus::kOptimal) {
    out.fail(method + " " + std::string(to_string(r.status)));
    return kUndefinedGap;
  }
  return compute_gap(opt, bm.spec.is_mip() ? r.dual_bound : r.objective) + 0.0;
}

void expect_gap(Outcome& out, const std::string& label, double got, double want, double tol) {
  out.detail << " " << label << "=" << fmt("%.2f%%", got + 0.0);
  if (!(std::abs(got - want) <= tol)) out.fail(label + " expected " + fmt("%.2f%%", want));
}

// 2. LP gaps without tightening, source basis
Outcome lp_gaps() {
  Outcome out;
  struct Case {
    const char* inst;
    std::vector<const char*> methods;
    double gap;
  };
  const Case cases[] = {{"Haverly1", {"F1:S"}, 25.00},
                        {"Haverly2", {"F1:S"}, 66.67},
                        {"BenTal5", {"F1:S", "F2:S", "F3:S", "F4:S"}, 0.00},
                        {"Adhya2", {"F1:S"}, 4.51}};
  for (const auto& c : cases) {
    const auto inst = load(c.inst, out);
    if (!inst) continue;
    const double opt = exact_value(*inst);
    for (const char* m : c.methods)
      expect_gap(out, std::string(c.inst) + ":" + m, lp_gap(*inst, opt, m, 5.0, out), c.gap, 0.05);
  }
  return out;
}

// 3. OBBT closes the gaps
Outcome obbt_effect() {
  Outcome out;
  for (const char* name : {"Haverly1", "Haverly2", "Haverly3", "BenTal4"}) {
    const auto inst = load(name, out);
    if (!inst) continue;
    const double opt = exact_value(*inst);
    const BoundUpdate upd = obbt_recipe(*inst, parse_method("F4:T"), 8);
    out.detail << " " << name << "(prep " << fmt("%.2fs", upd.seconds) << ")";
    if (upd.seconds > 30.0) out.fail(std::string(name) + " prep over 30 s");
    const PoolingInstance tight = apply_bounds(*inst, upd);
    for (const char* m : {"F1:S", "F2:S", "F3:S", "F4:S"})
      expect_gap(out, m, lp_gap(tight, opt, m, 60.0, out), 0.0, 0.05);
  }
  return out;
}

double block_value(const BoundBox& box, BlockKind kind, const Matrix& c) {
  const SolveResult r = solve(build_block_lp(box, kind, c));
  return r.status == SolveStatus::kOptimal ? r.objective : std::nan("");
}

// 4. relaxation dominance on random and literature blocks
Outcome dominance() {
  Outcome out;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> cost(-5.0, 5.0);
  int checked = 0, violations = 0;
  auto check = [&](const BoundBox& box) {
    Matrix c(box.m(), box.n());
    for (auto& v : c.a) v = cost(rng);
    const double tol = 1e-7 * box.scale();
    const double t = block_value(box, BlockKind::kPlain, c);
    const double f1 = block_value(box, BlockKind::kColwise, c);
    const double f2 = block_value(box, BlockKind::kRowwise, c);
    const double f3 = block_value(box, BlockKind::kIntersection, c);
    const double f4 = block_value(box, BlockKind::kRowCol, c);
    ++checked;
    if (!(f4 >= f3 - tol && f3 >= std::max(f1, f2) - tol && std::min(f1, f2) >= t - tol))
      ++violations;
  };
  for (int k = 0; k < 200; ++k) check(random_box(1 + rng() % 4, 1 + rng() % 4, rng));
  for (const auto& entry : std::filesystem::directory_iterator(std::string(POOLKIT_DATA_DIR) + "/instances")) {
    if (entry.path().extension() != ".json") continue;
    const PoolingInstance inst = generalize(parse_instance(entry.path().string()));
    for (Basis b : {Basis::kSource, Basis::kTerminal})
      for (const auto& blk : build_bilinear(inst, b).blocks) {
        const NormalizedBox nb = normalize(blk.box);
        if (nb.box.m() > 0 && nb.box.n() > 0) check(nb.box);
      }
  }
  out.detail << " blocks=" << checked << " violations=" << violations;
  if (violations) out.fail("dominance violated");
  return out;
}

// 5. strict F4 < F3 witness
Outcome strictness() {
  Outcome out;
  const auto inst = load("Adhya3", out);
  if (!inst) return out;
  const double opt = exact_value(*inst);
  const PoolingInstance tight = apply_bounds(*inst, obbt_recipe(*inst, parse_method("F4:T"), 8));
  expect_gap(out, "F4:S", lp_gap(tight, opt, "F4:S", 60.0, out), 2.06, 0.05);
  expect_gap(out, "F3:S", lp_gap(tight, opt, "F3:S", 60.0, out), 2.11, 0.05);
  return out;
}

// 6. MIP relaxations on Haverly1
Outcome mip_relaxation() {
  Outcome out;
  const auto inst = load("Haverly1", out);
  if (!inst) return out;
  const double opt = exact_value(*inst);
  expect_gap(out, "M2:S:H=3", lp_gap(*inst, opt, "M2:S:H=3", 120.0, out), 0.00, 0.1);
  expect_gap(out, "M1:S:H=3", lp_gap(*inst, opt, "M1:S:H=3", 120.0, out), 6.45, 0.1);
  return out;
}

// 7. restriction primal bounds
Outcome restrictions() {
  Outcome out;
  const std::pair<const char*, double> cases[] = {{"Haverly1", 0.00}, {"Haverly3", 4.17}};
  for (const auto& [name, want] : cases) {
    const auto inst = load(name, out);
    if (!inst) continue;
    const double opt = exact_value(*inst);
    const BuiltModel g = build_method(*inst, parse_method("G2:T:H=3"));
    const SolveResult r = solve(g.ir);
    if (!r.has_solution()) {
      out.fail(std::string(name) + " no restriction solution");
      continue;
    }
    const SolutionReport rep = check_solution(g.base, base_solution(g, r.values), 1e-6);
    if (!rep.ok) out.fail(std::string(name) + " check_solution " + rep.worst_family);
    out.detail << " " << name << "=" << fmt("%.6g", r.objective);
    expect_gap(out, std::string(name) + " P-gap", -compute_gap(opt, r.objective), want, 0.1);
  }
  return out;
}

// 8. RLT validity on sampled rank-one points
Outcome rlt_validity() {
  Outcome out;
  std::mt19937_64 rng(8);
  double worst = -kInf;
  int bad = 0;
  for (int k = 0; k < 100; ++k) {
    const BoundBox box = random_box(1 + rng() % 4, 1 + rng() % 4, rng, true);
    const ValidityReport rep = sample_rlt_validity(box, 100000, 5000 + k);
    if (rep.skipped) out.fail("box skipped by the L > 0 guard");
    worst = std::max({worst, rep.max_linear, rep.max_conic});
    if (!rep.ok(1e-8)) ++bad;
  }
  out.detail << " boxes=100 samples=1e5 worst_scaled=" << fmt("%.3g", worst) << " bad=" << bad;
  if (bad) out.fail("violations found");
  return out;
}

// 9. extreme points have at most one interior row and column
Outcome extreme_points() {
  Outcome out;
  std::mt19937_64 rng(9);
  std::size_t verts = 0;
  int exceptions = 0;
  for (int k = 0; k < 50; ++k) {
    const BoundBox box = fixtures::integer_box(rng, 3);
    for (const auto& X : fixtures::extreme_points(fixtures::rank_one_grid(box))) {
      ++verts;
      const ExtremeCounts c = check_extreme_point_property(X, box, 1e-9);
      if (c.count_row > 1 || c.count_col > 1) ++exceptions;
    }
  }
  out.detail << " boxes=50 vertices=" << verts << " exceptions=" << exceptions;
  if (exceptions) out.fail("lemma violated");
  return out;
}

// 10. mining pipeline on synthetic schedules
Outcome mining_pipeline() {
  Outcome out;
  int bad = 0;
  double slowest = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t0 = Clock::now();
    const PoolingInstance inst = convert_mining(fixtures::random_schedule(seed, 2, 20));
    const BoundUpdate upd = mining_tighten(inst);
    const PoolingInstance tight = apply_bounds(inst, upd);
    auto value = [](const PoolingInstance& i, const char* m) {
      const SolveResult r = solve(build_method(i, parse_method(m)).ir);
      return r.status == SolveStatus::kOptimal ? r.objective : std::nan("");
    };
    const double mcf0 = value(inst, "MCF:S"), mcf1 = value(tight, "MCF:S");
    const double f40 = value(inst, "F4:S"), f41 = value(tight, "F4:S");
    const double scale = std::max(1.0, std::abs(mcf0));
    if (!(std::abs(mcf0 - mcf1) <= 1e-6 * scale) || !(f41 >= f40 - 1e-6 * scale)) ++bad;
    slowest = std::max(slowest, since(t0));
  }
  out.detail << " schedules=50 violations=" << bad << " slowest=" << fmt("%.2fs", slowest);
  if (bad) out.fail("pipeline property violated");
  if (slowest > 10.0) out.fail("over 10 s");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance report"};
  int only = 0;
  app.add_option("criterion", only, "run a single criterion (1-10)")->check(CLI::Range(0, 10));
  CLI11_PARSE(app, argc, argv);

  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"exact values", exact_values},
      {"LP gaps without OBBT (source basis)", lp_gaps},
      {"OBBT closes F1-F4 gaps", obbt_effect},
      {"relaxation dominance", dominance},
      {"strict F4 < F3 witness", strictness},
      {"MIP relaxation gaps", mip_relaxation},
      {"restriction primal bounds", restrictions},
      {"RLT validity", rlt_validity},
      {"extreme-point property", extreme_points},
      {"mining pipeline", mining_pipeline},
  };
  int failed = 0;
  for (int k = 0; k < 10; ++k) {
    if (only && only != k + 1) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::printf("%s %2d %s:%s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed;
}
