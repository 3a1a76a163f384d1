#pragma once

#include <map>
#include <string>
#include <vector>

#include "poolkit/instance.hpp"
#include "poolkit/model_ir.hpp"
#include "poolkit/rank1.hpp"

namespace poolkit {

enum class Basis { kSource, kTerminal };

std::string_view to_string(Basis b);

// Decomposed-flow matrix of one pool. Rows are commodities, columns arcs.
// Source basis: rows S_i, columns the out-neighbours N_i^+. Terminal basis:
// rows T_i, columns the in-neighbours N_i^-.
struct PoolBlock {
  int pool = -1;
  std::string label;  // pool id
  std::vector<int> rows, cols;  // node indices, sorted by id
  BoundBox box;
  std::vector<VarId> cells;     // rows.size() * cols.size()
  std::vector<VarId> row_flow;  // variable equal to each row sum
  std::vector<VarId> col_flow;  // variable equal to each column sum
  std::vector<VarId> q;         // commodity proportions, one per row
  std::vector<std::string> row_labels, col_labels;

  std::size_t m() const { return rows.size(); }
  std::size_t n() const { return cols.size(); }
  VarId cell(std::size_t r, std::size_t c) const { return cells[r * cols.size() + c]; }
  FragmentBinding binding() const;
};

struct BilinearModel {
  Basis basis = Basis::kSource;
  ModelIR ir;
  std::vector<VarId> arc_flow;                // per arc of the instance
  std::map<std::pair<int, int>, VarId> ghost;  // (source, pool) or (pool, terminal)
  std::vector<PoolBlock> blocks;               // sorted by pool id
  std::vector<Term> cost;                      // sum C_ij f_ij
};

// Copy whose infinite upper capacities are replaced by the ones implied by
// neighbouring node and arc capacities. The feasible set is unchanged.
PoolingInstance with_implied_bounds(const PoolingInstance& inst);

// Both builders apply with_implied_bounds first. Specs are soft when the
// instance carries penalty weights.
BilinearModel build_source_based(const PoolingInstance& inst);
BilinearModel build_terminal_based(const PoolingInstance& inst);
BilinearModel build_bilinear(const PoolingInstance& inst, Basis basis);

ModelIR build_mcf_relaxation(const BilinearModel& model);

const std::vector<PoolBlock>& pool_blocks(const BilinearModel& model);

// Cost form written with decomposed flows on pool out-arcs (source basis) or
// pool in-arcs (terminal basis). Equals the arc form on every feasible point.
double objective_decomposed(const BilinearModel& model, const PoolingInstance& inst,
                            const std::vector<double>& values);
double objective_arcs(const BilinearModel& model, const std::vector<double>& values);

struct SolutionReport {
  std::map<std::string, double> residual;  // per family, plus "bounds", "bilinear", "rank"
  std::string worst_family;
  double worst = 0.0;
  bool ok = false;
};

SolutionReport check_solution(const BilinearModel& model, const std::vector<double>& values,
                              double tol);

// Sets every q to the row share of its block; leaves q untouched on
// blocks without flow.
void rederive_proportions(const BilinearModel& model, std::vector<double>& values);

Matrix block_matrix(const PoolBlock& block, const std::vector<double>& values);

}  // namespace poolkit
