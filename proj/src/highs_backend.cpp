#include <chrono>
#include <cmath>

#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wunused-parameter"
#include "Highs.h"
#pragma GCC diagnostic pop
#include "poolkit/solver.hpp"

namespace poolkit {

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kFeasible: return "feasible";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kTimeLimit: return "time-limit";
    case SolveStatus::kError: return "error";
  }
  return "error";
}

namespace {

// Fixes the integer columns at their rounded values and re-solves the LP, so
// the continuous part is exact rather than within the MIP tolerance.
void polish_integers(HighsLp lp, SolveResult& res, const SolveParams& params) {
  for (std::size_t j = 0; j < lp.integrality_.size(); ++j) {
    if (lp.integrality_[j] != HighsVarType::kInteger) continue;
    const double v = std::round(res.values[j]);
    lp.col_lower_[j] = lp.col_upper_[j] = v;
  }
  lp.integrality_.clear();
  Highs h;
  h.setOptionValue("output_flag", false);
  h.setOptionValue("threads", 1);
  h.setOptionValue("time_limit", std::max(1.0, params.time_limit_s));
  h.setOptionValue("primal_feasibility_tolerance", 1e-9);
  h.setOptionValue("dual_feasibility_tolerance", 1e-9);
  if (h.passModel(std::move(lp)) == HighsStatus::kError) return;
  h.run();
  if (h.getModelStatus() != HighsModelStatus::kOptimal) return;
  res.values = h.getSolution().col_value;
  res.objective = h.getInfo().objective_function_value;
}

class HighsBackend final : public SolverBackend {
 public:
  std::string name() const override { return "highs"; }
  unsigned capabilities() const override { return kCapLp | kCapMilp; }

  SolveResult solve(const ModelIR& model, const SolveParams& params) override {
    if (!model.bilinears().empty())
      throw CapabilityError("highs backend has no nonconvex capability; drop "
                            "bilinear terms or use a restriction");
    model.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const bool mip = model.has_binaries();

    HighsLp lp;
    const HighsInt nc = static_cast<HighsInt>(model.num_vars());
    const HighsInt nr = static_cast<HighsInt>(model.num_rows());
    lp.num_col_ = nc;
    lp.num_row_ = nr;
    lp.col_cost_.assign(nc, 0.0);
    lp.col_lower_.resize(nc);
    lp.col_upper_.resize(nc);
    for (HighsInt j = 0; j < nc; ++j) {
      lp.col_lower_[j] = model.vars()[j].lower;
      lp.col_upper_[j] = model.vars()[j].upper;
    }
    for (const auto& t : model.objective()) lp.col_cost_[t.var] += t.coef;
    lp.offset_ = model.objective_offset();
    lp.row_lower_.resize(nr);
    lp.row_upper_.resize(nr);
    auto& a = lp.a_matrix_;
    a.format_ = MatrixFormat::kRowwise;
    a.num_col_ = nc;
    a.num_row_ = nr;
    a.start_.assign(1, 0);
    for (HighsInt i = 0; i < nr; ++i) {
      const Row& r = model.rows()[i];
      lp.row_lower_[i] = r.sense == Sense::kLessEqual ? -kHighsInf : r.rhs;
      lp.row_upper_[i] = r.sense == Sense::kGreaterEqual ? kHighsInf : r.rhs;
      for (const auto& t : r.terms) {
        a.index_.push_back(t.var);
        a.value_.push_back(t.coef);
      }
      a.start_.push_back(static_cast<HighsInt>(a.index_.size()));
    }
    if (mip) {
      lp.integrality_.assign(nc, HighsVarType::kContinuous);
      for (HighsInt j = 0; j < nc; ++j)
        if (model.vars()[j].type == VarType::kBinary)
          lp.integrality_[j] = HighsVarType::kInteger;
    }

    Highs h;
    h.setOptionValue("output_flag", params.verbose);
    h.setOptionValue("threads", 1);
    h.setOptionValue("random_seed", static_cast<HighsInt>(params.seed % 2147483647));
    h.setOptionValue("time_limit", params.time_limit_s);
    const double gap = params.rel_gap >= 0 ? params.rel_gap : (mip ? 1e-4 : 1e-6);
    if (mip) {
      h.setOptionValue("mip_rel_gap", gap);
      h.setOptionValue("mip_feasibility_tolerance", 1e-7);
    }
    h.setOptionValue("primal_feasibility_tolerance", 1e-9);
    h.setOptionValue("dual_feasibility_tolerance", 1e-9);

    SolveResult res;
    HighsLp keep;
    if (mip) keep = lp;
    if (h.passModel(std::move(lp)) == HighsStatus::kError) {
      res.status = SolveStatus::kError;
      res.message = "passModel failed";
      return res;
    }
    const HighsStatus rs = h.run();
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const HighsModelStatus ms = h.getModelStatus();
    const auto& info = h.getInfo();
    const bool have_primal = info.primal_solution_status == kSolutionStatusFeasible;
    switch (ms) {
      case HighsModelStatus::kOptimal:
        res.status = SolveStatus::kOptimal;
        break;
      case HighsModelStatus::kInfeasible:
        res.status = SolveStatus::kInfeasible;
        break;
      case HighsModelStatus::kUnbounded:
      case HighsModelStatus::kUnboundedOrInfeasible:
        res.status = SolveStatus::kUnbounded;
        break;
      case HighsModelStatus::kTimeLimit:
      case HighsModelStatus::kIterationLimit:
      case HighsModelStatus::kSolutionLimit:
      case HighsModelStatus::kInterrupt:
        res.status = SolveStatus::kTimeLimit;
        break;
      default:
        res.status = have_primal ? SolveStatus::kFeasible : SolveStatus::kError;
        res.message = h.modelStatusToString(ms);
    }
    if (rs == HighsStatus::kError && res.status == SolveStatus::kOptimal)
      res.status = SolveStatus::kError;
    if (have_primal) {
      res.values = h.getSolution().col_value;
      res.objective = info.objective_function_value;
    }
    if (mip) {
      res.dual_bound = info.mip_dual_bound;
      res.gap = info.mip_gap;
      if (have_primal) polish_integers(keep, res, params);
    } else if (res.status == SolveStatus::kOptimal) {
      res.dual_bound = res.objective;
      res.gap = 0.0;
    }
    if (res.status == SolveStatus::kOptimal && !mip) res.gap = 0.0;
    return res;
  }
};

}  // namespace

std::unique_ptr<SolverBackend> make_backend(std::string_view name) {
  if (name == "highs" || name.empty()) return std::make_unique<HighsBackend>();
  throw CapabilityError("unknown backend " + std::string(name));
}

SolveResult solve(const ModelIR& model, const SolveParams& params) {
  return make_backend()->solve(model, params);
}

}  // namespace poolkit
