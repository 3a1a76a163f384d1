#pragma once

#include <string>

#include "poolkit/formulations.hpp"
#include "poolkit/instance.hpp"
#include "poolkit/rank1.hpp"

namespace poolkit {

enum class MethodKind { kF1, kF2, kF3, kF4, kM1, kM2, kG1, kG2, kMcf, kExact };

// Grammar: KIND[:S|:T][:H=n][:drop][+Vab[(x|r|x,r|both)]][+Vac[(...)]]
// e.g. "F4:S", "M2:T:H=3", "F3:S+Vab(x,r)".
struct MethodSpec {
  MethodKind kind = MethodKind::kF1;
  Basis basis = Basis::kSource;
  int H = 0;
  bool vab = false;
  bool vac = false;
  IneqSpace space = IneqSpace::kBoth;
  // Restrictions only: drop the remainder term entirely ("drop") instead of
  // replacing it by one extra binary digit of weight 2^-H.
  bool drop_remainder = false;

  bool is_lp() const;
  bool is_mip() const { return kind == MethodKind::kM1 || kind == MethodKind::kM2 || is_restriction(); }
  bool is_restriction() const { return kind == MethodKind::kG1 || kind == MethodKind::kG2; }
  std::string str() const;
};

class MethodError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MethodSpec parse_method(const std::string& text);
std::string_view to_string(MethodKind k);

struct BuiltModel {
  MethodSpec spec;
  BilinearModel base;  // blocks and variable handles
  ModelIR ir;          // the model to solve
  int rlt_rows = 0;
  int rlt_skipped = 0;  // blocks skipped by the L > 0 guard
};

// MCF backbone plus one fragment per pool block (F1 column-wise, F2 row-wise,
// F3 both, F4 row-column). Valid inequalities are injected when requested.
BuiltModel build_relaxation(const PoolingInstance& inst, const MethodSpec& spec);

// Adds the Vab / Vac families of spec to every block with L > 0. r-space rows
// on models without r variables first add them with L r <= x <= U r, sum r = 1.
void inject_valid_inequalities(BuiltModel& model, const MethodSpec& spec);

// M1 / M2: binary expansion of the column (M2) or row (M1) fractions of
// every block with remainder gamma in [0, 2^-H].
BuiltModel build_mip_relaxation(const PoolingInstance& inst, const MethodSpec& spec);

// G1 / G2: the same expansion without the continuous remainder, so every
// feasible point is a pooling solution.
BuiltModel build_mip_restriction(const PoolingInstance& inst, const MethodSpec& spec);

// Dispatch on spec.kind; EXACT keeps the bilinear terms.
BuiltModel build_method(const PoolingInstance& inst, const MethodSpec& spec);

// Restriction (or relaxation) values mapped onto model.base.ir with the
// proportions re-derived from the flows. Blocks without flow get a uniform
// proportion vector.
std::vector<double> base_solution(const BuiltModel& model, const std::vector<double>& values);
void normalize_proportions(const BilinearModel& model, std::vector<double>& values);

}  // namespace poolkit
