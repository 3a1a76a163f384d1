#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace poolkit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using VarId = int;

enum class VarType { kContinuous, kBinary };
enum class Sense { kLessEqual, kGreaterEqual, kEqual };

struct Term {
  VarId var;
  double coef;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarType type = VarType::kContinuous;
};

struct Row {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

// product == left * right
struct Bilinear {
  VarId product;
  VarId left;
  VarId right;
};

// Minimization model. Names are unique and carry the constraint family as the
// prefix before the first '['.
class ModelIR {
 public:
  VarId add_var(std::string name, double lower, double upper,
                VarType type = VarType::kContinuous);
  int add_row(std::string name, std::vector<Term> terms, Sense sense,
              double rhs);
  // Adds lo <= terms <= hi as up to two rows; infinite sides are dropped.
  void add_range(const std::string& name, const std::vector<Term>& terms,
                 double lo, double hi);
  void add_bilinear(VarId product, VarId left, VarId right);

  void set_objective(std::vector<Term> terms, double offset = 0.0);
  void add_objective_term(VarId v, double coef);

  std::optional<VarId> find(std::string_view name) const;
  VarId at(std::string_view name) const;
  bool has_row(std::string_view name) const;

  const std::vector<Variable>& vars() const { return vars_; }
  std::vector<Variable>& vars() { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<Bilinear>& bilinears() const { return bilinears_; }
  const std::vector<Term>& objective() const { return objective_; }
  double objective_offset() const { return offset_; }
  std::size_t num_vars() const { return vars_.size(); }
  std::size_t num_rows() const { return rows_.size(); }
  bool has_binaries() const;

  void drop_bilinears() { bilinears_.clear(); }
  void validate() const;

  double objective_value(const std::vector<double>& x) const;
  // Largest violation of rows and bounds (bilinears excluded).
  double max_linear_violation(const std::vector<double>& x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  std::vector<Bilinear> bilinears_;
  std::vector<Term> objective_;
  double offset_ = 0.0;
  std::unordered_map<std::string, VarId> index_;
  std::unordered_map<std::string, int> row_index_;
};

std::string format_number(double v);
std::string dump_model(const ModelIR& m);
ModelIR parse_model(std::string_view text);

// Family tag of a row or variable name ("balance[s1,p1]" -> "balance").
std::string_view family_of(std::string_view name);

}  // namespace poolkit
