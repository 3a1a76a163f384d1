#pragma once

#include <string>
#include <vector>

#include "poolkit/instance.hpp"
#include "poolkit/relaxations.hpp"
#include "poolkit/solver.hpp"

namespace poolkit {

class TighteningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TargetKind { kArc, kNode, kGhost };

std::string_view to_string(TargetKind k);

// One tightened interval. Ghost entries address the commodity flow
// (from -> to) of a missing source-pool or pool-terminal arc; node entries
// leave `to` empty.
struct BoundEntry {
  TargetKind kind = TargetKind::kArc;
  std::string from, to;
  Interval before, after;
  // obbt-min, obbt-max, mining-step-1..5 or unchanged
  std::string lo_tag = "unchanged", hi_tag = "unchanged";
  bool flagged = false;  // a subproblem was infeasible or failed

  bool changed() const { return lo_tag != "unchanged" || hi_tag != "unchanged"; }
};

struct BoundUpdate {
  std::vector<BoundEntry> entries;
  double z_lb = -kInf;
  double z_ub = kInf;
  std::string recipe;
  double seconds = 0.0;  // box computation plus tightening

  int num_changed() const;
  const BoundEntry* find(TargetKind kind, const std::string& from,
                         const std::string& to = "") const;
};

std::string bound_update_to_json(const BoundUpdate& upd);
BoundUpdate bound_update_from_json(const std::string& text);

// Stable 64-bit fingerprint of the serialized instance, for cache keys.
std::string instance_hash(const PoolingInstance& inst);

struct ObbtTargets {
  bool arcs = true;
  bool ghosts = true;
  bool sources = true;
  bool pools = true;
  bool terminals = true;
};

// Two LP solves per target over `relax` with z_lb <= objective <= z_ub added.
// Results do not depend on `workers`.
BoundUpdate obbt(const PoolingInstance& inst, const MethodSpec& relax, double z_lb,
                 double z_ub, const ObbtTargets& targets = {}, int workers = 1,
                 double lp_time_limit = 60.0);

struct ObjectiveBox {
  double z_lb = -kInf;
  double z_ub = kInf;
  double seconds = 0.0;
};

// Lower bound from the terminal-based MCF relaxation, upper bound from the
// G2:T:H=3 restriction (+inf when the restriction finds nothing).
ObjectiveBox objective_box(const PoolingInstance& inst, double time_limit = 600.0);

// Chains two updates of the same instance: intervals from `first` feed
// `second`, tags keep the latest change per side.
BoundUpdate compose(const BoundUpdate& first, const BoundUpdate& second);

// objective_box followed by obbt rounds over `relax` until no interval changes
// or max_rounds is reached; seconds covers everything.
BoundUpdate obbt_recipe(const PoolingInstance& inst, const MethodSpec& relax, int workers = 1,
                        double time_limit = 600.0, int max_rounds = 10);

// Single pass of the time-indexed tightening on an instance produced by
// convert_mining; `fixpoint` repeats passes until nothing changes (at most 10).
BoundUpdate mining_tighten(const PoolingInstance& inst, bool fixpoint = false);

// Copy with every entry intersected in. Throws TighteningError naming the
// target when an interval becomes empty.
PoolingInstance apply_bounds(const PoolingInstance& inst, const BoundUpdate& upd);

}  // namespace poolkit
