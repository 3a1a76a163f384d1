#include "poolkit/instance.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace poolkit {

using nlohmann::json;

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::kSource: return "source";
    case NodeKind::kPool: return "pool";
    case NodeKind::kTerminal: return "terminal";
  }
  return "?";
}

namespace {

void check_id(const std::string& id) {
  if (id.empty()) throw InstanceError("empty node id");
  for (char c : id)
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '[' ||
        c == ']' || c == '"')
      throw InstanceError("node id contains a reserved character: " + id);
}

}  // namespace

int PoolingInstance::add_node(std::string id, NodeKind kind, double L, double U) {
  check_id(id);
  if (node_index_.count(id)) throw InstanceError("duplicate node " + id);
  const int v = static_cast<int>(nodes.size());
  node_index_[id] = v;
  nodes.push_back({std::move(id), kind, L, U});
  return v;
}

int PoolingInstance::add_arc(const std::string& from, const std::string& to,
                             double l, double u, double cost) {
  auto a = find_node(from), b = find_node(to);
  if (!a || !b) throw InstanceError("arc references unknown node " + from + "->" + to);
  if (arc_index_.count({*a, *b})) throw InstanceError("duplicate arc " + from + "->" + to);
  const int k = static_cast<int>(arcs.size());
  arc_index_[{*a, *b}] = k;
  arcs.push_back({*a, *b, l, u, cost});
  return k;
}

std::optional<int> PoolingInstance::find_node(const std::string& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

int PoolingInstance::node_index(const std::string& id) const {
  auto v = find_node(id);
  if (!v) throw InstanceError("unknown node " + id);
  return *v;
}

std::optional<int> PoolingInstance::find_arc(int tail, int head) const {
  auto it = arc_index_.find({tail, head});
  if (it == arc_index_.end()) return std::nullopt;
  return it->second;
}

bool PoolingInstance::has_pool_pool_arcs() const {
  return std::any_of(arcs.begin(), arcs.end(), [this](const Arc& a) {
    return is_pool(a.tail) && is_pool(a.head);
  });
}

bool PoolingInstance::soft_specs() const { return !penalty.empty(); }

void PoolingInstance::finalize() {
  const int nn = static_cast<int>(nodes.size());
  node_index_.clear();
  for (int v = 0; v < nn; ++v) {
    check_id(nodes[v].id);
    if (!node_index_.emplace(nodes[v].id, v).second)
      throw InstanceError("duplicate node " + nodes[v].id);
  }
  arc_index_.clear();
  sources.clear();
  pools.clear();
  terminals.clear();
  for (int v = 0; v < nn; ++v) {
    const Node& nd = nodes[v];
    if (std::isnan(nd.L) || std::isnan(nd.U) || nd.L < 0 || nd.L > nd.U)
      throw InstanceError("inconsistent node bounds at " + nd.id);
    switch (nd.kind) {
      case NodeKind::kSource: sources.push_back(v); break;
      case NodeKind::kPool: pools.push_back(v); break;
      case NodeKind::kTerminal: terminals.push_back(v); break;
    }
  }
  out_arcs.assign(nn, {});
  in_arcs.assign(nn, {});
  for (int k = 0; k < static_cast<int>(arcs.size()); ++k) {
    const Arc& a = arcs[k];
    if (a.tail < 0 || a.tail >= nn || a.head < 0 || a.head >= nn)
      throw InstanceError("arc references unknown node");
    const std::string label = nodes[a.tail].id + "->" + nodes[a.head].id;
    if (a.tail == a.head) throw InstanceError("self loop " + label);
    if (is_terminal(a.tail)) throw InstanceError("arc leaves a terminal: " + label);
    if (is_source(a.head)) throw InstanceError("arc enters a source: " + label);
    if (std::isnan(a.l) || std::isnan(a.u) || a.l < 0 || a.l > a.u)
      throw InstanceError("inconsistent arc bounds on " + label);
    if (!arc_index_.emplace(std::make_pair(a.tail, a.head), k).second)
      throw InstanceError("duplicate arc " + label);
    out_arcs[a.tail].push_back(k);
    in_arcs[a.head].push_back(k);
  }
  auto by_head = [this](int x, int y) { return nodes[arcs[x].head].id < nodes[arcs[y].head].id; };
  auto by_tail = [this](int x, int y) { return nodes[arcs[x].tail].id < nodes[arcs[y].tail].id; };
  for (auto& v : out_arcs) std::sort(v.begin(), v.end(), by_head);
  for (auto& v : in_arcs) std::sort(v.begin(), v.end(), by_tail);
  auto by_id = [this](int x, int y) { return nodes[x].id < nodes[y].id; };
  std::sort(sources.begin(), sources.end(), by_id);
  std::sort(pools.begin(), pools.end(), by_id);
  std::sort(terminals.begin(), terminals.end(), by_id);

  // reachability
  S.assign(nn, {});
  T.assign(nn, {});
  for (int s : sources) {
    std::vector<char> seen(nn, 0);
    std::deque<int> q{s};
    seen[s] = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      S[v].push_back(s);
      for (int k : out_arcs[v])
        if (!seen[arcs[k].head]) {
          seen[arcs[k].head] = 1;
          q.push_back(arcs[k].head);
        }
    }
  }
  for (int t : terminals) {
    std::vector<char> seen(nn, 0);
    std::deque<int> q{t};
    seen[t] = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      T[v].push_back(t);
      for (int k : in_arcs[v])
        if (!seen[arcs[k].tail]) {
          seen[arcs[k].tail] = 1;
          q.push_back(arcs[k].tail);
        }
    }
  }
  for (auto& v : S) std::sort(v.begin(), v.end(), by_id);
  for (auto& v : T) std::sort(v.begin(), v.end(), by_id);
  for (int i : pools)
    if (S[i].empty() || T[i].empty())
      throw InstanceError("pool " + nodes[i].id + " is unreachable from sources or cannot reach a terminal");

  // specifications
  if (K < 0) throw InstanceError("negative spec count");
  lambda.resize(nn);
  mu_lo.resize(nn);
  mu_hi.resize(nn);
  for (int s : sources) {
    if (K > 0 && lambda[s].size() != static_cast<std::size_t>(K))
      throw InstanceError("missing spec data for source " + nodes[s].id);
  }
  for (int t : terminals) {
    if (mu_lo[t].empty()) mu_lo[t].assign(K, 0.0);
    if (mu_hi[t].empty()) mu_hi[t].assign(K, kInf);
    if (mu_lo[t].size() != static_cast<std::size_t>(K) ||
        mu_hi[t].size() != static_cast<std::size_t>(K))
      throw InstanceError("spec window size mismatch at " + nodes[t].id);
    for (int k = 0; k < K; ++k)
      if (mu_lo[t][k] > mu_hi[t][k])
        throw InstanceError("inconsistent spec window at " + nodes[t].id);
  }
  if (!penalty.empty()) {
    penalty.resize(nn);
    for (int t : terminals) {
      if (penalty[t].empty()) penalty[t].assign(K, 0.0);
      if (penalty[t].size() != static_cast<std::size_t>(K))
        throw InstanceError("penalty size mismatch at " + nodes[t].id);
    }
  }
  for (const auto& [key, iv] : commodity_bounds) {
    if (key.first < 0 || key.first >= nn || key.second < 0 || key.second >= nn)
      throw InstanceError("commodity bound references unknown node");
    if (iv.lo > iv.hi || iv.lo < 0)
      throw InstanceError("inconsistent commodity bound");
  }
}

std::vector<int> PoolingInstance::N_minus_s(int s, int i) const {
  std::vector<int> out;
  for (int k : in_arcs[i]) {
    const int j = arcs[k].tail;
    if (is_source(j) && j != s) continue;
    const auto& Sj = S[j];
    if (std::find(Sj.begin(), Sj.end(), s) == Sj.end()) continue;
    out.push_back(j);
  }
  return out;
}

std::vector<int> PoolingInstance::N_plus_t(int t, int i) const {
  std::vector<int> out;
  for (int k : out_arcs[i]) {
    const int j = arcs[k].head;
    if (is_terminal(j) && j != t) continue;
    const auto& Tj = T[j];
    if (std::find(Tj.begin(), Tj.end(), t) == Tj.end()) continue;
    out.push_back(j);
  }
  return out;
}

Interval PoolingInstance::commodity_interval(int a, int b) const {
  if (auto k = find_arc(a, b)) return {arcs[*k].l, arcs[*k].u};
  auto it = commodity_bounds.find({a, b});
  if (it != commodity_bounds.end()) return it->second;
  const int pool = is_pool(b) && !is_pool(a) ? b : (is_pool(a) ? a : b);
  return {0.0, nodes[pool].U};
}

// ------------------------------------------------------------------- JSON

namespace {

double num(const json& j, const char* key, double dflt) {
  if (!j.contains(key) || j.at(key).is_null()) return dflt;
  const json& v = j.at(key);
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return kInf;
    throw SchemaError(std::string("field '") + key + "' must be a number");
  }
  if (!v.is_number()) throw SchemaError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::string str(const json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  if (!j.at(key).is_string())
    throw SchemaError(std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::vector<double> numvec(const json& v, const std::string& what) {
  if (!v.is_array()) throw SchemaError(what + " must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (e.is_null()) {
      out.push_back(kInf);
    } else if (e.is_string() && (e.get<std::string>() == "inf")) {
      out.push_back(kInf);
    } else if (e.is_number()) {
      out.push_back(e.get<double>());
    } else {
      throw SchemaError(what + " must contain numbers");
    }
  }
  return out;
}

json jnum(double v) {
  if (std::isinf(v)) return v > 0 ? json(nullptr) : json("-inf");
  return v;
}

json jvec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InstanceError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

PoolingInstance parse_instance_json(const std::string& text, const std::string& name) {
  const json j = parse_json(text);
  if (!j.is_object()) throw SchemaError("instance must be a JSON object");
  PoolingInstance inst;
  inst.name = j.value("name", name);
  if (!j.contains("nodes") || !j["nodes"].is_array()) throw SchemaError("missing array 'nodes'");
  if (!j.contains("arcs") || !j["arcs"].is_array()) throw SchemaError("missing array 'arcs'");
  for (const auto& n : j["nodes"]) {
    const std::string kind = str(n, "kind");
    NodeKind k;
    if (kind == "source")
      k = NodeKind::kSource;
    else if (kind == "pool")
      k = NodeKind::kPool;
    else if (kind == "terminal")
      k = NodeKind::kTerminal;
    else
      throw SchemaError("unknown node kind " + kind);
    inst.add_node(str(n, "id"), k, num(n, "L", 0.0), num(n, "U", kInf));
  }
  for (const auto& a : j["arcs"])
    inst.add_arc(str(a, "from"), str(a, "to"), num(a, "l", 0.0), num(a, "u", kInf),
                 num(a, "cost", 0.0));
  const std::size_t nn = inst.nodes.size();
  inst.lambda.assign(nn, {});
  inst.mu_lo.assign(nn, {});
  inst.mu_hi.assign(nn, {});
  if (j.contains("specs")) {
    const json& sp = j["specs"];
    if (!sp.contains("K") || !sp["K"].is_number_integer()) throw SchemaError("specs.K must be an integer");
    inst.K = sp["K"].get<int>();
    if (sp.contains("lambda"))
      for (const auto& [id, v] : sp["lambda"].items())
        inst.lambda[inst.node_index(id)] = numvec(v, "lambda");
    if (sp.contains("mu_lo"))
      for (const auto& [id, v] : sp["mu_lo"].items()) {
        auto vec = numvec(v, "mu_lo");
        for (auto& x : vec)
          if (std::isinf(x)) x = -kInf;
        inst.mu_lo[inst.node_index(id)] = vec;
      }
    if (sp.contains("mu_hi"))
      for (const auto& [id, v] : sp["mu_hi"].items())
        inst.mu_hi[inst.node_index(id)] = numvec(v, "mu_hi");
  }
  if (j.contains("penalty")) {
    inst.penalty.assign(nn, {});
    for (const auto& [id, v] : j["penalty"].items())
      inst.penalty[inst.node_index(id)] = numvec(v, "penalty");
  }
  if (j.contains("ghost")) {
    for (const auto& g : j["ghost"]) {
      const int a = inst.node_index(str(g, "from")), b = inst.node_index(str(g, "to"));
      inst.commodity_bounds[{a, b}] = {num(g, "l", 0.0), num(g, "u", kInf)};
    }
  }
  if (j.contains("mining")) {
    const json& m = j["mining"];
    MiningMeta meta;
    for (const auto& s : m.at("stockpiles")) meta.stockpiles.push_back(s.get<std::string>());
    for (const auto& s : m.at("supplies"))
      meta.supplies.push_back({str(s, "stockpile"), num(s, "time", 0), num(s, "qty", 0),
                               inst.node_index(str(s, "source")),
                               inst.node_index(str(s, "pool"))});
    for (const auto& d : m.at("demands"))
      meta.demands.push_back({num(d, "time", 0), num(d, "qty", 0),
                              inst.node_index(str(d, "terminal"))});
    for (const auto& p : m.at("surplus_pools"))
      meta.surplus_pools.push_back(inst.node_index(p.get<std::string>()));
    meta.surplus_terminal = inst.node_index(str(m, "surplus_terminal"));
    inst.mining = std::move(meta);
  }
  inst.finalize();
  return inst;
}

PoolingInstance parse_instance(const std::string& path) {
  std::string name = path;
  if (auto p = name.find_last_of('/'); p != std::string::npos) name = name.substr(p + 1);
  if (auto p = name.rfind(".json"); p != std::string::npos) name = name.substr(0, p);
  return parse_instance_json(read_file(path), name);
}

std::string instance_to_json(const PoolingInstance& inst) {
  json j;
  j["name"] = inst.name;
  j["nodes"] = json::array();
  for (const auto& n : inst.nodes)
    j["nodes"].push_back({{"id", n.id}, {"kind", std::string(to_string(n.kind))},
                          {"L", jnum(n.L)}, {"U", jnum(n.U)}});
  j["arcs"] = json::array();
  for (const auto& a : inst.arcs)
    j["arcs"].push_back({{"from", inst.nodes[a.tail].id}, {"to", inst.nodes[a.head].id},
                         {"l", jnum(a.l)}, {"u", jnum(a.u)}, {"cost", a.cost}});
  json sp;
  sp["K"] = inst.K;
  sp["lambda"] = json::object();
  sp["mu_lo"] = json::object();
  sp["mu_hi"] = json::object();
  for (int s : inst.sources)
    if (!inst.lambda[s].empty()) sp["lambda"][inst.nodes[s].id] = jvec(inst.lambda[s]);
  for (int t : inst.terminals) {
    if (!inst.mu_lo[t].empty()) sp["mu_lo"][inst.nodes[t].id] = jvec(inst.mu_lo[t]);
    if (!inst.mu_hi[t].empty()) sp["mu_hi"][inst.nodes[t].id] = jvec(inst.mu_hi[t]);
  }
  j["specs"] = sp;
  if (!inst.penalty.empty()) {
    j["penalty"] = json::object();
    for (int t : inst.terminals)
      if (!inst.penalty[t].empty()) j["penalty"][inst.nodes[t].id] = jvec(inst.penalty[t]);
  }
  if (!inst.commodity_bounds.empty()) {
    j["ghost"] = json::array();
    for (const auto& [key, iv] : inst.commodity_bounds)
      j["ghost"].push_back({{"from", inst.nodes[key.first].id},
                            {"to", inst.nodes[key.second].id},
                            {"l", jnum(iv.lo)}, {"u", jnum(iv.hi)}});
  }
  if (inst.mining) {
    const MiningMeta& m = *inst.mining;
    json mj;
    mj["stockpiles"] = m.stockpiles;
    mj["supplies"] = json::array();
    for (const auto& s : m.supplies)
      mj["supplies"].push_back({{"stockpile", s.stockpile}, {"time", s.time}, {"qty", s.qty},
                                {"source", inst.nodes[s.source].id},
                                {"pool", inst.nodes[s.pool].id}});
    mj["demands"] = json::array();
    for (const auto& d : m.demands)
      mj["demands"].push_back({{"time", d.time}, {"qty", d.qty},
                               {"terminal", inst.nodes[d.terminal].id}});
    mj["surplus_pools"] = json::array();
    for (int p : m.surplus_pools) mj["surplus_pools"].push_back(inst.nodes[p].id);
    mj["surplus_terminal"] = inst.nodes[m.surplus_terminal].id;
    j["mining"] = mj;
  }
  return j.dump(1);
}

PoolingInstance generalize(const PoolingInstance& inst) {
  PoolingInstance out = inst;
  for (int i : inst.pools)
    for (int j : inst.pools) {
      if (i == j || out.find_arc(i, j)) continue;
      out.add_arc(out.nodes[i].id, out.nodes[j].id, 0.0,
                  std::min(out.nodes[i].U, out.nodes[j].U), 0.0);
    }
  out.finalize();
  return out;
}

// ----------------------------------------------------------------- mining

void MiningSchedule::validate() const {
  if (stockpiles.empty()) throw InstanceError("schedule has no stockpiles");
  std::set<std::string> names(stockpiles.begin(), stockpiles.end());
  if (names.size() != stockpiles.size()) throw InstanceError("duplicate stockpile");
  for (const auto& p : stockpiles) check_id(p);
  std::size_t K = supplies.empty() ? 0 : supplies.front().spec.size();
  if (supplies.empty() && !demands.empty()) K = demands.front().spec_max.size();
  double total_s = 0, total_d = 0;
  std::map<std::string, std::vector<double>> times;
  for (const auto& s : supplies) {
    if (!names.count(s.stockpile)) throw InstanceError("unknown stockpile " + s.stockpile);
    if (s.qty < 0) throw InstanceError("negative supply");
    if (s.spec.size() != K) throw InstanceError("supply spec size mismatch");
    times[s.stockpile].push_back(s.time);
    total_s += s.qty;
  }
  for (auto& [p, ts] : times) {
    std::sort(ts.begin(), ts.end());
    if (std::adjacent_find(ts.begin(), ts.end()) != ts.end())
      throw InstanceError("supply times not totally ordered in stockpile " + p);
  }
  for (const auto& d : demands) {
    if (d.qty < 0) throw InstanceError("negative demand");
    if (d.spec_max.size() != K) throw InstanceError("demand spec size mismatch");
    if (!d.penalty.empty() && d.penalty.size() != K)
      throw InstanceError("penalty size mismatch");
    total_d += d.qty;
  }
  if (total_d > total_s * (1 + 1e-12) + 1e-12)
    throw InstanceError("negative surplus: total demand exceeds total supply");
}

MiningSchedule parse_mining_json(const std::string& text) {
  const json j = parse_json(text);
  MiningSchedule s;
  if (!j.contains("stockpiles") || !j.contains("supplies") || !j.contains("demands"))
    throw SchemaError("schedule needs stockpiles, supplies and demands");
  for (const auto& p : j["stockpiles"]) {
    if (!p.is_string()) throw SchemaError("stockpile names must be strings");
    s.stockpiles.push_back(p.get<std::string>());
  }
  for (const auto& e : j["supplies"])
    s.supplies.push_back({str(e, "stockpile"), num(e, "time", 0.0), num(e, "qty", 0.0),
                          e.contains("spec") ? numvec(e["spec"], "spec") : std::vector<double>{}});
  for (const auto& e : j["demands"])
    s.demands.push_back({num(e, "time", 0.0), num(e, "qty", 0.0),
                         e.contains("spec_max") ? numvec(e["spec_max"], "spec_max")
                                                : std::vector<double>{},
                         e.contains("penalty") ? numvec(e["penalty"], "penalty")
                                               : std::vector<double>{}});
  s.validate();
  return s;
}

MiningSchedule parse_mining(const std::string& path) { return parse_mining_json(read_file(path)); }

std::string mining_to_json(const MiningSchedule& s) {
  json j;
  j["stockpiles"] = s.stockpiles;
  j["supplies"] = json::array();
  for (const auto& e : s.supplies)
    j["supplies"].push_back({{"stockpile", e.stockpile}, {"time", e.time}, {"qty", e.qty},
                             {"spec", jvec(e.spec)}});
  j["demands"] = json::array();
  for (const auto& e : s.demands) {
    json d{{"time", e.time}, {"qty", e.qty}, {"spec_max", jvec(e.spec_max)}};
    if (!e.penalty.empty()) d["penalty"] = jvec(e.penalty);
    j["demands"].push_back(d);
  }
  return j.dump(1);
}

PoolingInstance convert_mining(const MiningSchedule& sched, double default_penalty) {
  sched.validate();
  const int K = sched.supplies.empty()
                    ? (sched.demands.empty() ? 0 : static_cast<int>(sched.demands[0].spec_max.size()))
                    : static_cast<int>(sched.supplies[0].spec.size());
  PoolingInstance inst;
  inst.name = "mining";
  inst.K = K;
  MiningMeta meta;
  meta.stockpiles = sched.stockpiles;

  // demands in time order (stable)
  std::vector<std::size_t> dord(sched.demands.size());
  std::iota(dord.begin(), dord.end(), 0);
  std::stable_sort(dord.begin(), dord.end(), [&](auto a, auto b) {
    return sched.demands[a].time < sched.demands[b].time;
  });
  double total_s = 0, total_d = 0;
  for (const auto& s : sched.supplies) total_s += s.qty;
  for (const auto& d : sched.demands) total_d += d.qty;

  std::vector<int> term_of(sched.demands.size());
  for (std::size_t k = 0; k < dord.size(); ++k) {
    const auto& d = sched.demands[dord[k]];
    const int t = inst.add_node("j_" + std::to_string(k + 1), NodeKind::kTerminal, d.qty, d.qty);
    term_of[dord[k]] = t;
    meta.demands.push_back({d.time, d.qty, t});
  }
  const double surplus = std::max(0.0, total_s - total_d);
  meta.surplus_terminal =
      inst.add_node("j_surplus", NodeKind::kTerminal, surplus, surplus);

  struct Pending {
    std::string from, to;
  };
  std::vector<Pending> arcs;
  for (const auto& p : sched.stockpiles) {
    std::vector<const MiningSchedule::Supply*> sup;
    for (const auto& s : sched.supplies)
      if (s.stockpile == p) sup.push_back(&s);
    std::sort(sup.begin(), sup.end(), [](auto a, auto b) { return a->time < b->time; });
    double cum = 0.0;
    std::string prev;
    for (std::size_t k = 0; k < sup.size(); ++k) {
      const auto& s = *sup[k];
      cum += s.qty;
      const std::string tag = p + "_" + std::to_string(k + 1);
      const int src = inst.add_node("s_" + tag, NodeKind::kSource, 0.0, s.qty);
      const int pool = inst.add_node("i_" + tag, NodeKind::kPool, 0.0, cum);
      meta.supplies.push_back({p, s.time, s.qty, src, pool});
      if (inst.lambda.size() <= static_cast<std::size_t>(src)) inst.lambda.resize(src + 1);
      inst.lambda[src] = s.spec;
      arcs.push_back({"s_" + tag, "i_" + tag});
      if (!prev.empty()) arcs.push_back({prev, "i_" + tag});
      prev = "i_" + tag;
      const double next = k + 1 < sup.size() ? sup[k + 1]->time : kInf;
      for (std::size_t q = 0; q < dord.size(); ++q) {
        const double dt = sched.demands[dord[q]].time;
        if (dt >= s.time && dt < next) arcs.push_back({"i_" + tag, "j_" + std::to_string(q + 1)});
      }
    }
    const int sp = inst.add_node("i_" + p + "_inf", NodeKind::kPool, 0.0, cum);
    meta.surplus_pools.push_back(sp);
    if (!prev.empty()) arcs.push_back({prev, "i_" + p + "_inf"});
    arcs.push_back({"i_" + p + "_inf", "j_surplus"});
  }
  // every demand must be served by some pool
  std::set<std::string> served;
  for (const auto& a : arcs) served.insert(a.to);
  for (std::size_t q = 0; q < dord.size(); ++q)
    if (!served.count("j_" + std::to_string(q + 1)))
      throw InstanceError("demand at time " + std::to_string(sched.demands[dord[q]].time) +
                          " precedes every supply");
  // stockpiles without supplies have an orphan surplus pool; drop them
  std::set<std::string> fed;
  for (const auto& a : arcs) fed.insert(a.to);
  std::vector<Pending> kept;
  for (const auto& a : arcs)
    if (a.from.rfind("i_", 0) != 0 || fed.count(a.from)) kept.push_back(a);
  for (const auto& a : kept) {
    const int from = inst.node_index(a.from);
    const double u = inst.is_source(from) ? inst.nodes[from].U : kInf;
    inst.add_arc(a.from, a.to, 0.0, u, 0.0);
  }
  if (std::any_of(meta.surplus_pools.begin(), meta.surplus_pools.end(),
                  [&](int p) { return !fed.count(inst.nodes[p].id); }))
    throw InstanceError("stockpile without supplies");

  const std::size_t nn = inst.nodes.size();
  inst.lambda.resize(nn);
  inst.mu_lo.assign(nn, {});
  inst.mu_hi.assign(nn, {});
  inst.penalty.assign(nn, {});
  for (std::size_t q = 0; q < dord.size(); ++q) {
    const auto& d = sched.demands[dord[q]];
    const int t = term_of[dord[q]];
    inst.mu_lo[t].assign(K, 0.0);
    inst.mu_hi[t] = d.spec_max;
    inst.penalty[t] = d.penalty.empty() ? std::vector<double>(K, default_penalty) : d.penalty;
  }
  inst.mu_lo[meta.surplus_terminal].assign(K, 0.0);
  inst.mu_hi[meta.surplus_terminal].assign(K, kInf);
  inst.penalty[meta.surplus_terminal].assign(K, 0.0);
  inst.mining = std::move(meta);
  inst.finalize();
  return inst;
}

MiningCounts mining_arc_counts(const PoolingInstance& inst) {
  MiningCounts c;
  std::set<int> surplus_pools;
  int surplus_t = -1;
  if (inst.mining) {
    surplus_pools.insert(inst.mining->surplus_pools.begin(), inst.mining->surplus_pools.end());
    surplus_t = inst.mining->surplus_terminal;
  }
  for (const auto& a : inst.arcs) {
    if (inst.is_source(a.tail) && inst.is_pool(a.head)) ++c.asi;
    if (inst.is_pool(a.tail) && inst.is_pool(a.head) && !surplus_pools.count(a.head)) ++c.aii;
    if (inst.is_pool(a.tail) && inst.is_terminal(a.head) && a.head != surplus_t) ++c.ait;
  }
  return c;
}

}  // namespace poolkit
