#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "poolkit/model_ir.hpp"

namespace poolkit {

class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum Capability : unsigned {
  kCapLp = 1u,
  kCapMilp = 2u,
  kCapNonconvex = 4u,
};

enum class SolveStatus { kOptimal, kFeasible, kInfeasible, kUnbounded, kTimeLimit, kError };

std::string_view to_string(SolveStatus s);

struct SolveParams {
  double time_limit_s = 3600.0;
  double rel_gap = -1.0;  // negative: 1e-6 for LP, 1e-4 for MILP
  int threads = 1;
  std::uint64_t seed = 0;
  bool verbose = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kError;
  double objective = kInf;
  double dual_bound = -kInf;
  std::vector<double> values;
  double seconds = 0.0;
  double gap = kInf;
  std::string message;

  bool has_solution() const {
    return status == SolveStatus::kOptimal ||
           (status == SolveStatus::kFeasible && !values.empty()) ||
           (status == SolveStatus::kTimeLimit && !values.empty());
  }
};

class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  virtual unsigned capabilities() const = 0;
  // One solve per call; instances are not shared between threads.
  virtual SolveResult solve(const ModelIR& model, const SolveParams& params) = 0;
};

std::unique_ptr<SolverBackend> make_backend(std::string_view name = "highs");

// Convenience: fresh default backend per call.
SolveResult solve(const ModelIR& model, const SolveParams& params = {});

}  // namespace poolkit
