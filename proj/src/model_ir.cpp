#include "poolkit/model_ir.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace poolkit {

VarId ModelIR::add_var(std::string name, double lower, double upper,
                       VarType type) {
  if (index_.count(name)) throw ModelError("duplicate variable " + name);
  if (type == VarType::kBinary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  VarId id = static_cast<VarId>(vars_.size());
  index_.emplace(name, id);
  vars_.push_back({std::move(name), lower, upper, type});
  return id;
}

int ModelIR::add_row(std::string name, std::vector<Term> terms, Sense sense,
                     double rhs) {
  if (row_index_.count(name)) throw ModelError("duplicate row " + name);
  if (!std::isfinite(rhs)) throw ModelError("non-finite rhs in " + name);
  // merge duplicate variables
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const Term& t : terms) {
    if (t.var < 0 || t.var >= static_cast<VarId>(vars_.size()))
      throw ModelError("dangling variable in row " + name);
    if (!merged.empty() && merged.back().var == t.var)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  int id = static_cast<int>(rows_.size());
  row_index_.emplace(name, id);
  rows_.push_back({std::move(name), std::move(merged), sense, rhs});
  return id;
}

void ModelIR::add_range(const std::string& name, const std::vector<Term>& terms,
                        double lo, double hi) {
  if (lo == hi) {
    add_row(name + "=", terms, Sense::kEqual, lo);
    return;
  }
  if (std::isfinite(lo)) add_row(name + ">", terms, Sense::kGreaterEqual, lo);
  if (std::isfinite(hi)) add_row(name + "<", terms, Sense::kLessEqual, hi);
}

void ModelIR::add_bilinear(VarId product, VarId left, VarId right) {
  const VarId n = static_cast<VarId>(vars_.size());
  if (product < 0 || product >= n || left < 0 || left >= n || right < 0 ||
      right >= n)
    throw ModelError("dangling variable in bilinear term");
  bilinears_.push_back({product, left, right});
}

void ModelIR::set_objective(std::vector<Term> terms, double offset) {
  objective_ = std::move(terms);
  offset_ = offset;
}

void ModelIR::add_objective_term(VarId v, double coef) {
  if (coef != 0.0) objective_.push_back({v, coef});
}

std::optional<VarId> ModelIR::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VarId ModelIR::at(std::string_view name) const {
  auto v = find(name);
  if (!v) throw ModelError("unknown variable " + std::string(name));
  return *v;
}

bool ModelIR::has_row(std::string_view name) const {
  return row_index_.count(std::string(name)) > 0;
}

bool ModelIR::has_binaries() const {
  return std::any_of(vars_.begin(), vars_.end(), [](const Variable& v) {
    return v.type == VarType::kBinary;
  });
}

void ModelIR::validate() const {
  const VarId n = static_cast<VarId>(vars_.size());
  for (const auto& v : vars_) {
    if (std::isnan(v.lower) || std::isnan(v.upper))
      throw ModelError("NaN bound on " + v.name);
    if (v.type == VarType::kBinary && (v.lower < 0 || v.upper > 1))
      throw ModelError("binary out of [0,1]: " + v.name);
  }
  for (const auto& r : rows_) {
    if (!std::isfinite(r.rhs)) throw ModelError("non-finite rhs " + r.name);
    for (const auto& t : r.terms)
      if (t.var < 0 || t.var >= n || !std::isfinite(t.coef))
        throw ModelError("bad term in row " + r.name);
  }
  for (const auto& t : objective_)
    if (t.var < 0 || t.var >= n) throw ModelError("bad objective term");
}

double ModelIR::objective_value(const std::vector<double>& x) const {
  double s = offset_;
  for (const auto& t : objective_) s += t.coef * x.at(t.var);
  return s;
}

double ModelIR::max_linear_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max(worst, vars_[j].lower - x[j]);
    worst = std::max(worst, x[j] - vars_[j].upper);
  }
  for (const auto& r : rows_) {
    double a = 0.0;
    for (const auto& t : r.terms) a += t.coef * x[t.var];
    double v = 0.0;
    switch (r.sense) {
      case Sense::kLessEqual: v = a - r.rhs; break;
      case Sense::kGreaterEqual: v = r.rhs - a; break;
      case Sense::kEqual: v = std::abs(a - r.rhs); break;
    }
    worst = std::max(worst, v);
  }
  return worst;
}

std::string_view family_of(std::string_view name) {
  auto p = name.find('[');
  return p == std::string_view::npos ? name : name.substr(0, p);
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

const char* sense_str(Sense s) {
  switch (s) {
    case Sense::kLessEqual: return "<=";
    case Sense::kGreaterEqual: return ">=";
    case Sense::kEqual: return "==";
  }
  return "?";
}

double parse_number(const std::string& tok) {
  if (tok == "inf") return kInf;
  if (tok == "-inf") return -kInf;
  std::size_t used = 0;
  double v = std::stod(tok, &used);
  if (used != tok.size()) throw ModelError("bad number " + tok);
  return v;
}

std::string term_list(const ModelIR& m, const std::vector<Term>& terms) {
  std::map<std::string, double> acc;
  for (const auto& t : terms) acc[m.vars()[t.var].name] += t.coef;
  std::string out;
  for (const auto& [name, c] : acc) {
    if (c == 0.0) continue;
    out += ' ';
    out += format_number(c);
    out += ' ';
    out += name;
  }
  return out;
}

}  // namespace

// Format, one record per line, sorted by name within each section:
//   var <name> <C|B> <lo> <hi>
//   row <name> <sense> <rhs> : <coef> <var> ...
//   bil <product> <left> <right>
//   obj <offset> : <coef> <var> ...
std::string dump_model(const ModelIR& m) {
  std::vector<std::string> vlines, rlines, blines;
  for (const auto& v : m.vars()) {
    vlines.push_back("var " + v.name + " " +
                     (v.type == VarType::kBinary ? "B " : "C ") +
                     format_number(v.lower) + " " + format_number(v.upper));
  }
  for (const auto& r : m.rows()) {
    rlines.push_back("row " + r.name + " " + sense_str(r.sense) + " " +
                     format_number(r.rhs) + " :" + term_list(m, r.terms));
  }
  for (const auto& b : m.bilinears()) {
    blines.push_back("bil " + m.vars()[b.product].name + " " +
                     m.vars()[b.left].name + " " + m.vars()[b.right].name);
  }
  std::sort(vlines.begin(), vlines.end());
  std::sort(rlines.begin(), rlines.end());
  std::sort(blines.begin(), blines.end());
  std::string out = "# poolkit model v1\n";
  for (auto* sec : {&vlines, &rlines, &blines})
    for (const auto& l : *sec) out += l + "\n";
  out += "obj " + format_number(m.objective_offset()) + " :" +
         term_list(m, m.objective()) + "\n";
  return out;
}

ModelIR parse_model(std::string_view text) {
  ModelIR m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> pending_rows, pending_bil;
  std::string obj_line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("var ", 0) == 0) {
      std::istringstream ls(line.substr(4));
      std::string name, type, lo, hi;
      if (!(ls >> name >> type >> lo >> hi)) throw ModelError("bad var line");
      m.add_var(name, parse_number(lo), parse_number(hi),
                type == "B" ? VarType::kBinary : VarType::kContinuous);
    } else if (line.rfind("row ", 0) == 0) {
      pending_rows.push_back(line.substr(4));
    } else if (line.rfind("bil ", 0) == 0) {
      pending_bil.push_back(line.substr(4));
    } else if (line.rfind("obj ", 0) == 0) {
      obj_line = line.substr(4);
    } else {
      throw ModelError("unrecognized dump line: " + line);
    }
  }
  auto read_terms = [&m](std::istringstream& ls) {
    std::vector<Term> terms;
    std::string c, name;
    while (ls >> c >> name) terms.push_back({m.at(name), parse_number(c)});
    return terms;
  };
  for (const auto& r : pending_rows) {
    std::istringstream ls(r);
    std::string name, sense, rhs, colon;
    if (!(ls >> name >> sense >> rhs >> colon) || colon != ":")
      throw ModelError("bad row line");
    Sense s = sense == "<=" ? Sense::kLessEqual
              : sense == ">=" ? Sense::kGreaterEqual
                              : Sense::kEqual;
    m.add_row(name, read_terms(ls), s, parse_number(rhs));
  }
  for (const auto& b : pending_bil) {
    std::istringstream ls(b);
    std::string p, l, r;
    ls >> p >> l >> r;
    m.add_bilinear(m.at(p), m.at(l), m.at(r));
  }
  if (!obj_line.empty()) {
    std::istringstream ls(obj_line);
    std::string off, colon;
    ls >> off >> colon;
    m.set_objective(read_terms(ls), parse_number(off));
  }
  return m;
}

}  // namespace poolkit
