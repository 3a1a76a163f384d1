#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "poolkit/model_ir.hpp"

namespace poolkit {

class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Field missing or mistyped.
class SchemaError : public InstanceError {
 public:
  using InstanceError::InstanceError;
};

enum class NodeKind { kSource, kPool, kTerminal };

std::string_view to_string(NodeKind k);

struct Interval {
  double lo = 0.0;
  double hi = kInf;
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::kPool;
  double L = 0.0;
  double U = kInf;
};

struct Arc {
  int tail = -1;
  int head = -1;
  double l = 0.0;
  double u = kInf;
  double cost = 0.0;
};

// Structure recorded by convert_mining and required by mining_tighten.
struct MiningMeta {
  struct Supply {
    std::string stockpile;
    double time = 0.0;
    double qty = 0.0;
    int source = -1;
    int pool = -1;
  };
  struct Demand {
    double time = 0.0;
    double qty = 0.0;
    int terminal = -1;
  };
  std::vector<std::string> stockpiles;
  std::vector<Supply> supplies;  // grouped by stockpile, time order
  std::vector<Demand> demands;   // time order
  std::vector<int> surplus_pools;  // per stockpile
  int surplus_terminal = -1;
};

class PoolingInstance {
 public:
  std::string name;
  std::vector<Node> nodes;
  std::vector<Arc> arcs;
  int K = 0;
  std::vector<std::vector<double>> lambda;  // per node (sources only), size K
  std::vector<std::vector<double>> mu_lo;   // per node (terminals only)
  std::vector<std::vector<double>> mu_hi;
  std::vector<std::vector<double>> penalty;  // per node (terminals); empty = hard
  // Bounds on commodity ("ghost") flows keyed by (node a, pool b): source a
  // reaching pool b, or pool a reaching terminal b. Defaults to [0, U_pool].
  std::map<std::pair<int, int>, Interval> commodity_bounds;
  std::optional<MiningMeta> mining;

  // Derived by finalize().
  std::vector<int> sources, pools, terminals;
  std::vector<std::vector<int>> out_arcs, in_arcs;  // arc indices
  std::vector<std::vector<int>> S;  // S[v]: sources with a path to v (S_s = {s})
  std::vector<std::vector<int>> T;  // T[v]: terminals reachable from v (T_t = {t})

  int add_node(std::string id, NodeKind kind, double L = 0.0, double U = kInf);
  int add_arc(const std::string& from, const std::string& to, double l = 0.0,
              double u = kInf, double cost = 0.0);
  // Validates and computes derived sets. Throws InstanceError.
  void finalize();

  int node_index(const std::string& id) const;
  std::optional<int> find_node(const std::string& id) const;
  std::optional<int> find_arc(int tail, int head) const;
  bool is_source(int v) const { return nodes[v].kind == NodeKind::kSource; }
  bool is_pool(int v) const { return nodes[v].kind == NodeKind::kPool; }
  bool is_terminal(int v) const { return nodes[v].kind == NodeKind::kTerminal; }
  bool has_pool_pool_arcs() const;
  bool soft_specs() const;

  // N_si^- : in-neighbours j of pool i with j not in S\{s} and s in S_j.
  std::vector<int> N_minus_s(int s, int i) const;
  // Mirror for terminal commodities: out-neighbours j of pool i with j not in
  // T\{t} and t in T_j.
  std::vector<int> N_plus_t(int t, int i) const;

  // Bounds of the commodity flow (a -> b); physical arc bounds when the arc
  // exists, otherwise the stored ghost interval or [0, U_pool].
  Interval commodity_interval(int a, int b) const;

 private:
  std::map<std::string, int> node_index_;
  std::map<std::pair<int, int>, int> arc_index_;
};

PoolingInstance parse_instance(const std::string& path);
PoolingInstance parse_instance_json(const std::string& text,
                                    const std::string& name = "");
std::string instance_to_json(const PoolingInstance& inst);

// Adds (i,j) and (j,i) for every pool pair, bounds [0, min(U_i,U_j)], cost 0.
PoolingInstance generalize(const PoolingInstance& inst);

struct MiningSchedule {
  struct Supply {
    std::string stockpile;
    double time = 0.0;
    double qty = 0.0;
    std::vector<double> spec;
  };
  struct Demand {
    double time = 0.0;
    double qty = 0.0;
    std::vector<double> spec_max;
    std::vector<double> penalty;
  };
  std::vector<std::string> stockpiles;
  std::vector<Supply> supplies;
  std::vector<Demand> demands;

  void validate() const;
};

MiningSchedule parse_mining(const std::string& path);
MiningSchedule parse_mining_json(const std::string& text);
std::string mining_to_json(const MiningSchedule& s);

// default_penalty applies to demands without explicit penalty weights.
PoolingInstance convert_mining(const MiningSchedule& sched,
                               double default_penalty = 1.0);

struct MiningCounts {
  int asi = 0, aii = 0, ait = 0;  // listed arcs, surplus structure excluded
};
MiningCounts mining_arc_counts(const PoolingInstance& inst);

}  // namespace poolkit
