#pragma once

#include <string>
#include <vector>

#include "poolkit/formulations.hpp"
#include "poolkit/solver.hpp"
#include "poolkit/tightening.hpp"

namespace poolkit {

// Alternately fixes the proportions and the flows they multiply and solves
// the remaining LP. `values` must satisfy the linear rows of model.ir; on
// return it is a pooling solution no worse than where it started, or the
// function returns false.
bool polish_solution(const BilinearModel& model, std::vector<double>& values,
                     int max_iters = 50, double time_limit = 60.0);

struct ExactOptions {
  Basis basis = Basis::kTerminal;
  double time_limit = 60.0;
  double rel_tol = 1e-4;
  int workers = 1;
  int max_H = 6;
};

struct ExactResult {
  SolveStatus status = SolveStatus::kError;
  double objective = kInf;      // best pooling solution found
  double dual_bound = -kInf;    // valid lower bound
  std::vector<double> values;   // assignment of build_bilinear(inst, basis).ir
  std::string incumbent_from;   // method that produced the incumbent
  BoundUpdate bounds;           // tightening used for the lower bound
  double seconds = 0.0;
  double gap() const;           // relative, (ub - lb) / max(1, |ub|)
};

// Squeeze: restrictions G1/G2 in both bases (H = 3..max_H) polished by
// polish_solution give upper bounds; F4 relaxations after OBBT boxed by the
// incumbent give lower bounds. Optimal when they meet within rel_tol.
ExactResult solve_exact(const PoolingInstance& inst, const ExactOptions& opt = {});

}  // namespace poolkit
