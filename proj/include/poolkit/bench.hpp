#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "poolkit/exact.hpp"
#include "poolkit/instance.hpp"
#include "poolkit/relaxations.hpp"

namespace poolkit {

// Returned by compute_gap when ub == 0.
inline constexpr double kUndefinedGap = std::numeric_limits<double>::quiet_NaN();

// (ub - lb) / |ub| * 100.
double compute_gap(double ub, double lb);

enum class GapKind { kO, kD, kP };

std::string_view to_string(GapKind k);

struct RunRecord {
  std::string instance;
  std::string method;
  bool obbt = false;
  double prep_seconds = 0.0;
  double solve_seconds = 0.0;
  double objective = kInf;
  double dual_bound = -kInf;
  double gap_percent = kUndefinedGap;
  GapKind gap_kind = GapKind::kD;
  std::string status;  // solver status, or "error"
  std::string message;

  bool errored() const { return status == "error"; }
};

struct GridConfig {
  std::vector<std::string> instances;  // file paths
  std::vector<std::string> methods;    // MethodSpec strings
  std::vector<bool> obbt{false};
  double time_limit = 3600.0;
  int threads = 1;
  bool generalize = true;
  std::string bounds_cache;  // directory; empty disables caching
};

// Instance files in `dir` with a .json extension, sorted by name.
std::vector<std::string> list_instances(const std::string& dir);

// One record per (instance, obbt, method) in that order. Cells that fail are
// recorded with status "error" and never stop the grid.
std::vector<RunRecord> run_grid(const GridConfig& config);

std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(const std::string& text);

// Bit-exact comparison, NaN equal to NaN.
bool same_record(const RunRecord& a, const RunRecord& b);

struct SummaryRow {
  std::string method;
  bool obbt = false;
  int count = 0;  // records with a defined gap
  double mean_seconds = 0.0;
  double mean_gap = 0.0;
};

// Mean solve time and gap per (method, obbt) over the records with a
// defined gap, in first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

std::string format_table(const std::vector<RunRecord>& records);

}  // namespace poolkit
