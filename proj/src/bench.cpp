#include "poolkit/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "poolkit/tightening.hpp"

namespace poolkit {

double compute_gap(double ub, double lb) {
  if (ub == 0.0) return kUndefinedGap;
  return (ub - lb) / std::abs(ub) * 100.0;
}

std::string_view to_string(GapKind k) {
  switch (k) {
    case GapKind::kO: return "O";
    case GapKind::kD: return "D";
    case GapKind::kP: return "P";
  }
  return "D";
}

std::vector<std::string> list_instances(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) throw InstanceError("not a directory: " + dir);
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Prepared {
  PoolingInstance inst;       // tightened when obbt
  double prep_seconds = 0.0;
  double reference = kInf;    // best known optimum of the untightened instance
  std::string error;
};

BoundUpdate cached_obbt(const PoolingInstance& inst, const GridConfig& cfg) {
  const MethodSpec relax = parse_method("F4:T");
  namespace fs = std::filesystem;
  fs::path file;
  if (!cfg.bounds_cache.empty()) {
    fs::create_directories(cfg.bounds_cache);
    file = fs::path(cfg.bounds_cache) / (instance_hash(inst) + "-obbt-F4T.json");
    std::ifstream in(file);
    if (in) {
      std::stringstream ss;
      ss << in.rdbuf();
      return bound_update_from_json(ss.str());
    }
  }
  BoundUpdate upd = obbt_recipe(inst, relax, cfg.threads, cfg.time_limit);
  if (!file.empty()) std::ofstream(file) << bound_update_to_json(upd);
  return upd;
}

RunRecord run_cell(const Prepared& prep, const std::string& name, const std::string& method,
                   bool obbt, const GridConfig& cfg) {
  RunRecord rec;
  rec.instance = name;
  rec.method = method;
  rec.obbt = obbt;
  rec.prep_seconds = prep.prep_seconds;
  try {
    if (!prep.error.empty()) throw std::runtime_error(prep.error);
    const MethodSpec spec = parse_method(method);
    if (spec.kind == MethodKind::kExact) {
      ExactOptions opt;
      opt.basis = spec.basis;
      opt.time_limit = cfg.time_limit;
      const ExactResult r = solve_exact(prep.inst, opt);
      rec.solve_seconds = r.seconds;
      rec.objective = r.objective;
      rec.dual_bound = r.dual_bound;
      rec.status = std::string(to_string(r.status));
      rec.gap_kind = GapKind::kO;
      rec.gap_percent = compute_gap(r.objective, r.dual_bound);
      return rec;
    }
    const BuiltModel bm = build_method(prep.inst, spec);
    SolveParams params;
    params.time_limit_s = cfg.time_limit;
    const SolveResult r = solve(bm.ir, params);
    rec.solve_seconds = r.seconds;
    rec.objective = r.objective;
    rec.dual_bound = r.dual_bound;
    rec.status = std::string(to_string(r.status));
    if (spec.is_restriction()) {
      rec.gap_kind = GapKind::kP;
      // (restriction value - optimum) / |optimum|
      if (r.has_solution()) rec.gap_percent = -compute_gap(prep.reference, r.objective);
    } else {
      rec.gap_kind = GapKind::kD;
      if (std::isfinite(r.dual_bound)) rec.gap_percent = compute_gap(prep.reference, r.dual_bound);
    }
    if (r.status == SolveStatus::kError) {
      rec.status = "error";
      rec.message = r.message;
    }
  } catch (const std::exception& e) {
    rec.status = "error";
    rec.message = e.what();
  }
  return rec;
}

}  // namespace

std::vector<RunRecord> run_grid(const GridConfig& cfg) {
  struct Cell {
    std::size_t inst;
    bool obbt;
    std::string method;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < cfg.instances.size(); ++i)
    for (bool ob : cfg.obbt)
      for (const auto& m : cfg.methods) cells.push_back({i, ob, m});
  if (cells.empty()) return {};

  // per instance: reference optimum, then the tightened copy when asked
  std::vector<std::string> names(cfg.instances.size());
  std::vector<Prepared> plain(cfg.instances.size()), tight(cfg.instances.size());
  const bool want_obbt = std::find(cfg.obbt.begin(), cfg.obbt.end(), true) != cfg.obbt.end();
  for (std::size_t i = 0; i < cfg.instances.size(); ++i) {
    names[i] = std::filesystem::path(cfg.instances[i]).stem().string();
    try {
      PoolingInstance inst = parse_instance(cfg.instances[i]);
      if (!inst.name.empty()) names[i] = inst.name;
      if (cfg.generalize) inst = generalize(inst);
      ExactOptions opt;
      opt.time_limit = cfg.time_limit;
      opt.workers = cfg.threads;
      const ExactResult ex = solve_exact(inst, opt);
      plain[i].inst = inst;
      plain[i].reference = ex.objective;
      if (!std::isfinite(ex.objective)) plain[i].error = "no reference solution";
      if (want_obbt) {
        tight[i] = plain[i];
        try {
          const auto t0 = Clock::now();
          const BoundUpdate upd = cached_obbt(inst, cfg);
          tight[i].inst = apply_bounds(inst, upd);
          tight[i].prep_seconds = upd.seconds > 0.0 ? upd.seconds : since(t0);
        } catch (const std::exception& e) {
          tight[i].error = e.what();
        }
      }
    } catch (const std::exception& e) {
      plain[i].error = e.what();
      tight[i].error = e.what();
    }
  }

  std::vector<RunRecord> out(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      const Cell& c = cells[k];
      out[k] = run_cell(c.obbt ? tight[c.inst] : plain[c.inst], names[c.inst], c.method, c.obbt,
                        cfg);
    }
  };
  const int nw = std::max(1, std::min<int>(cfg.threads, static_cast<int>(cells.size())));
  if (nw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

namespace {

const char* kHeader =
    "instance,method,obbt,prep_seconds,solve_seconds,objective,dual_bound,gap_percent,gap_kind,"
    "status,message";

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad number " + s);
  return v;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits CSV text into records of fields; quoted fields may contain commas,
// doubled quotes and newlines.
std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quote in CSV");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::string out = std::string(kHeader) + "\n";
  for (const auto& r : records) {
    out += quote(r.instance) + "," + quote(r.method) + "," + (r.obbt ? "1" : "0") + "," +
           fmt(r.prep_seconds) + "," + fmt(r.solve_seconds) + "," + fmt(r.objective) + "," +
           fmt(r.dual_bound) + "," + fmt(r.gap_percent) + "," +
           std::string(to_string(r.gap_kind)) + "," + quote(r.status) + "," + quote(r.message) +
           "\n";
  }
  return out;
}

std::vector<RunRecord> records_from_csv(const std::string& text) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw std::invalid_argument("empty CSV");
  std::vector<RunRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != 11)
      throw std::invalid_argument("CSV row " + std::to_string(i) + " has " +
                                  std::to_string(f.size()) + " fields");
    RunRecord r;
    r.instance = f[0];
    r.method = f[1];
    r.obbt = f[2] == "1";
    r.prep_seconds = parse_double(f[3]);
    r.solve_seconds = parse_double(f[4]);
    r.objective = parse_double(f[5]);
    r.dual_bound = parse_double(f[6]);
    r.gap_percent = parse_double(f[7]);
    if (f[8] == "O") r.gap_kind = GapKind::kO;
    else if (f[8] == "P") r.gap_kind = GapKind::kP;
    else if (f[8] == "D") r.gap_kind = GapKind::kD;
    else throw std::invalid_argument("bad gap kind " + f[8]);
    r.status = f[9];
    r.message = f[10];
    out.push_back(std::move(r));
  }
  return out;
}

bool same_record(const RunRecord& a, const RunRecord& b) {
  auto eq = [](double x, double y) {
    return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y) ||
           (std::isnan(x) && std::isnan(y));
  };
  return a.instance == b.instance && a.method == b.method && a.obbt == b.obbt &&
         eq(a.prep_seconds, b.prep_seconds) && eq(a.solve_seconds, b.solve_seconds) &&
         eq(a.objective, b.objective) && eq(a.dual_bound, b.dual_bound) &&
         eq(a.gap_percent, b.gap_percent) && a.gap_kind == b.gap_kind && a.status == b.status &&
         a.message == b.message;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  std::vector<SummaryRow> out;
  for (const auto& r : records) {
    if (std::isnan(r.gap_percent)) continue;
    auto it = std::find_if(out.begin(), out.end(), [&r](const SummaryRow& s) {
      return s.method == r.method && s.obbt == r.obbt;
    });
    if (it == out.end()) {
      out.push_back({r.method, r.obbt, 0, 0.0, 0.0});
      it = out.end() - 1;
    }
    ++it->count;
    it->mean_seconds += r.solve_seconds;
    it->mean_gap += r.gap_percent;
  }
  for (auto& s : out) {
    s.mean_seconds /= s.count;
    s.mean_gap /= s.count;
  }
  return out;
}

std::string format_table(const std::vector<RunRecord>& records) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %-16s %-4s %9s %9s %8s  %s\n", "instance", "method", "obbt",
                "prep", "time", "gap", "status");
  out += buf;
  for (const auto& r : records) {
    std::string gap = std::isnan(r.gap_percent) ? "-" : "";
    if (gap.empty()) {
      char g[32];
      std::snprintf(g, sizeof g, "%.2f%%%s", r.gap_percent, std::string(to_string(r.gap_kind)).c_str());
      gap = g;
    }
    std::snprintf(buf, sizeof buf, "%-12s %-16s %-4s %9.2f %9.2f %8s  %s\n", r.instance.c_str(),
                  r.method.c_str(), r.obbt ? "on" : "off", r.prep_seconds, r.solve_seconds,
                  gap.c_str(), r.status.c_str());
    out += buf;
  }
  for (const auto& s : summarize(records)) {
    std::snprintf(buf, sizeof buf, "%-12s %-16s %-4s %9s %9.2f %7.2f%%  n=%d\n", "Average",
                  s.method.c_str(), s.obbt ? "on" : "off", "", s.mean_seconds, s.mean_gap, s.count);
    out += buf;
  }
  return out;
}

}  // namespace poolkit
