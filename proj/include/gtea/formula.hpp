#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gtea {

class FormulaSyntaxError : public std::runtime_error {
 public:
  FormulaSyntaxError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class ResourceCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Immutable propositional formula. Construction folds constants, flattens
// nested connectives, and keeps operands of & and | sorted by canonical text.
class Formula {
 public:
  enum class Kind { False, True, Var, Not, And, Or };

  Formula();  // constant true

  static Formula constant(bool value);
  static Formula var(std::string name);
  static Formula negate(const Formula& f);
  static Formula conj(std::vector<Formula> ops);
  static Formula disj(std::vector<Formula> ops);
  static Formula conj(const Formula& a, const Formula& b) { return conj(std::vector<Formula>{a, b}); }
  static Formula disj(const Formula& a, const Formula& b) { return disj(std::vector<Formula>{a, b}); }
  static Formula implies(const Formula& a, const Formula& b) { return disj(negate(a), b); }
  static Formula exclusive_or(const Formula& a, const Formula& b);

  Kind kind() const;
  bool is_const() const { return kind() == Kind::True || kind() == Kind::False; }
  bool is_true() const { return kind() == Kind::True; }
  bool is_false() const { return kind() == Kind::False; }
  const std::string& name() const;
  std::span<const Formula> operands() const;
  const std::string& str() const;
  std::size_t size() const;

  std::set<std::string> variables() const;

  bool operator==(const Formula& o) const { return str() == o.str(); }
  bool operator<(const Formula& o) const { return str() < o.str(); }

 private:
  struct Node;
  static Formula make_nary(Kind kind, std::vector<Formula> ops);
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

using Assignment = std::map<std::string, bool>;

Formula parse_formula(const std::string& text);
std::string canonical(const Formula& f);

bool evaluate(const Formula& f, const Assignment& a);
Formula substitute(const Formula& f, const std::string& var, const Formula& g);
// Simultaneous substitution of several variables.
Formula substitute(const Formula& f, const std::map<std::string, Formula>& subst);
Formula rename(const Formula& f, const std::map<std::string, std::string>& names);

void set_variable_cap(std::size_t cap);
std::size_t variable_cap();

bool is_sat(const Formula& f);
bool is_tautology(const Formula& f);
bool is_essential(const Formula& f, const std::string& var);
Formula simplify_min_vars(const Formula& f);

// A satisfying assignment over variables(f), if any.
bool find_model(const Formula& f, Assignment& out);

// Flattened form for repeated evaluation; variables are bound to slots.
class CompiledFormula {
 public:
  CompiledFormula() = default;
  CompiledFormula(const Formula& f, const std::vector<std::string>& slots);
  bool eval(const std::vector<char>& values) const;
  bool eval_mask(unsigned long long mask) const;

 private:
  struct Op {
    Formula::Kind kind;
    int arg;    // slot for Var
    int first;  // operand range in args_
    int count;
  };
  int build(const Formula& f, const std::vector<std::string>& slots);
  template <class Get>
  bool run(int i, const Get& get) const;
  std::vector<Op> ops_;
  std::vector<int> args_;
  int root_ = -1;
};

}  // namespace gtea
