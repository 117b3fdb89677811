#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gtea {

// Integers and floats are both numeric and compare with each other; text
// compares lexicographically. Comparing a number with text is never true.
class Value {
 public:
  Value() : v_(std::int64_t{0}) {}
  Value(std::int64_t i) : v_(i) {}
  Value(int i) : v_(std::int64_t{i}) {}
  Value(double d) : v_(d) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(const char* s) : v_(std::string(s)) {}

  bool is_text() const { return std::holds_alternative<std::string>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_numeric() const { return !is_text(); }
  double number() const;
  const std::string& text() const { return std::get<std::string>(v_); }
  std::int64_t integer() const { return std::get<std::int64_t>(v_); }
  std::string str() const;

  // Three-way comparison for values of the same kind.
  int compare(const Value& o) const;
  bool same_kind(const Value& o) const { return is_text() == o.is_text(); }
  bool operator==(const Value& o) const { return same_kind(o) && compare(o) == 0; }
  bool operator<(const Value& o) const;

 private:
  std::variant<std::int64_t, double, std::string> v_;
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

const char* op_text(CmpOp op);

struct Atom {
  std::string attr;
  CmpOp op;
  Value literal;

  bool holds(const Value& v) const;
  std::string str() const;
};

class AttributeSyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Attributes = std::map<std::string, Value>;

// Conjunction of atoms. The empty predicate accepts every node.
class AttributePredicate {
 public:
  AttributePredicate() = default;
  explicit AttributePredicate(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}
  static AttributePredicate parse(const std::string& text);

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  std::string str() const;

  template <class Lookup>
  bool satisfied_by(const Lookup& lookup) const {
    for (const auto& a : atoms_) {
      const Value* v = lookup(a.attr);
      if (!v || !a.holds(*v)) return false;
    }
    return true;
  }
  bool satisfied_by(const Attributes& attrs) const;

  bool satisfiable() const;
  // Every attribute map accepted by this predicate is accepted by other.
  bool implies(const AttributePredicate& other) const;

 private:
  std::vector<Atom> atoms_;
};

// Attribute values accepted by `require` and rejected by every predicate in
// `avoid`. Returns nothing if no such map was found.
std::optional<Attributes> find_attributes(const AttributePredicate& require,
                                          const std::vector<AttributePredicate>& avoid);

}  // namespace gtea
