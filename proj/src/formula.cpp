#include "gtea/formula.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <unordered_map>

namespace gtea {

struct Formula::Node {
  Kind kind;
  std::string name;
  std::vector<Formula> ops;
  std::string text;
  std::size_t size = 1;
};

Formula::Formula() : Formula(constant(true)) {}

Formula Formula::constant(bool value) {
  static const std::shared_ptr<const Node> nodes[2] = {
      std::make_shared<const Node>(Node{Kind::False, "", {}, "0", 1}),
      std::make_shared<const Node>(Node{Kind::True, "", {}, "1", 1}),
  };
  return Formula(nodes[value ? 1 : 0]);
}

Formula Formula::var(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->text = name;
  n->name = std::move(name);
  return Formula(std::move(n));
}

Formula Formula::negate(const Formula& f) {
  if (f.is_true()) return constant(false);
  if (f.is_false()) return constant(true);
  if (f.kind() == Kind::Not) return f.operands()[0];
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->ops = {f};
  n->text = "!" + f.str();
  n->size = f.size() + 1;
  return Formula(std::move(n));
}

Formula Formula::make_nary(Kind kind, std::vector<Formula> in) {
  const bool is_and = kind == Kind::And;
  std::vector<Formula> ops;
  ops.reserve(in.size());
  for (auto& f : in) {
    if (f.kind() == kind) {
      for (const auto& g : f.operands()) ops.push_back(g);
    } else if (f.is_const()) {
      if (f.is_true() != is_and) return constant(!is_and);
    } else {
      ops.push_back(std::move(f));
    }
  }
  std::sort(ops.begin(), ops.end());
  ops.erase(std::unique(ops.begin(), ops.end()), ops.end());
  for (const auto& f : ops) {
    if (f.kind() == Kind::Not && std::binary_search(ops.begin(), ops.end(), f.operands()[0]))
      return constant(!is_and);
  }
  if (ops.empty()) return constant(is_and);
  if (ops.size() == 1) return ops[0];
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->text = "(";
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i) n->text += is_and ? " & " : " | ";
    n->text += ops[i].str();
    n->size += ops[i].size();
  }
  n->text += ")";
  n->ops = std::move(ops);
  return Formula(std::move(n));
}

Formula Formula::conj(std::vector<Formula> ops) { return make_nary(Kind::And, std::move(ops)); }
Formula Formula::disj(std::vector<Formula> ops) { return make_nary(Kind::Or, std::move(ops)); }

Formula Formula::exclusive_or(const Formula& a, const Formula& b) {
  return disj(conj(a, negate(b)), conj(negate(a), b));
}

Formula::Kind Formula::kind() const { return node_->kind; }
const std::string& Formula::name() const { return node_->name; }
std::span<const Formula> Formula::operands() const { return node_->ops; }
const std::string& Formula::str() const { return node_->text; }
std::size_t Formula::size() const { return node_->size; }

static void collect_vars(const Formula& f, std::set<std::string>& out) {
  if (f.kind() == Formula::Kind::Var) {
    out.insert(f.name());
    return;
  }
  for (const auto& g : f.operands()) collect_vars(g, out);
}

std::set<std::string> Formula::variables() const {
  std::set<std::string> out;
  collect_vars(*this, out);
  return out;
}

std::string canonical(const Formula& f) { return f.str(); }

namespace {

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  Formula run() {
    Formula f = parse_or();
    skip();
    if (pos_ != s_.size()) throw FormulaSyntaxError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
    return f;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      if (pos_ < s_.size() && s_[pos_] == c && (c == '&' || c == '|')) ++pos_;
      return true;
    }
    return false;
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-' || c == ':';
  }

  Formula parse_or() {
    std::vector<Formula> ops{parse_and()};
    while (eat('|')) ops.push_back(parse_and());
    return ops.size() == 1 ? ops[0] : Formula::disj(std::move(ops));
  }
  Formula parse_and() {
    std::vector<Formula> ops{parse_unary()};
    while (eat('&')) ops.push_back(parse_unary());
    return ops.size() == 1 ? ops[0] : Formula::conj(std::move(ops));
  }
  Formula parse_unary() {
    if (eat('!') || eat('~')) return Formula::negate(parse_unary());
    skip();
    if (pos_ >= s_.size()) throw FormulaSyntaxError("unexpected end of input", pos_);
    if (eat('(')) {
      Formula f = parse_or();
      if (!eat(')')) throw FormulaSyntaxError("expected ')'", pos_);
      return f;
    }
    const std::size_t start = pos_;
    if (!ident_char(s_[pos_]) || s_[pos_] == '-' || s_[pos_] == '.' || s_[pos_] == ':')
      throw FormulaSyntaxError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    std::string tok = s_.substr(start, pos_ - start);
    if (tok == "1" || tok == "true") return Formula::constant(true);
    if (tok == "0" || tok == "false") return Formula::constant(false);
    return Formula::var(std::move(tok));
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(const std::string& text) { return Parser(text).run(); }

bool evaluate(const Formula& f, const Assignment& a) {
  switch (f.kind()) {
    case Formula::Kind::True:
      return true;
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Var: {
      auto it = a.find(f.name());
      if (it == a.end()) throw std::invalid_argument("unassigned variable " + f.name());
      return it->second;
    }
    case Formula::Kind::Not:
      return !evaluate(f.operands()[0], a);
    case Formula::Kind::And:
      for (const auto& g : f.operands())
        if (!evaluate(g, a)) return false;
      return true;
    case Formula::Kind::Or:
      for (const auto& g : f.operands())
        if (evaluate(g, a)) return true;
      return false;
  }
  return false;
}

Formula substitute(const Formula& f, const std::map<std::string, Formula>& subst) {
  switch (f.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False:
      return f;
    case Formula::Kind::Var: {
      auto it = subst.find(f.name());
      return it == subst.end() ? f : it->second;
    }
    case Formula::Kind::Not:
      return Formula::negate(substitute(f.operands()[0], subst));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<Formula> ops;
      ops.reserve(f.operands().size());
      for (const auto& g : f.operands()) ops.push_back(substitute(g, subst));
      return f.kind() == Formula::Kind::And ? Formula::conj(std::move(ops)) : Formula::disj(std::move(ops));
    }
  }
  return f;
}

Formula substitute(const Formula& f, const std::string& var, const Formula& g) {
  return substitute(f, std::map<std::string, Formula>{{var, g}});
}

Formula rename(const Formula& f, const std::map<std::string, std::string>& names) {
  std::map<std::string, Formula> subst;
  for (const auto& [from, to] : names) subst.emplace(from, Formula::var(to));
  return substitute(f, subst);
}

namespace {

std::atomic<std::size_t> g_var_cap{64};
constexpr std::size_t kEnumerateBelow = 16;

void check_cap(std::size_t n) {
  const std::size_t cap = g_var_cap.load();
  if (n > cap)
    throw ResourceCapExceeded("formula has " + std::to_string(n) + " variables, cap is " + std::to_string(cap));
}

bool enumerate(const Formula& f, Assignment& out) {
  const auto vars = f.variables();
  std::vector<std::string> slots(vars.begin(), vars.end());
  CompiledFormula c(f, slots);
  const unsigned long long total = 1ULL << slots.size();
  for (unsigned long long m = 0; m < total; ++m) {
    if (c.eval_mask(m)) {
      for (std::size_t i = 0; i < slots.size(); ++i) out[slots[i]] = (m >> i) & 1ULL;
      return true;
    }
  }
  return false;
}

void count_occurrences(const Formula& f, std::unordered_map<std::string, int>& counts) {
  if (f.kind() == Formula::Kind::Var) {
    ++counts[f.name()];
    return;
  }
  for (const auto& g : f.operands()) count_occurrences(g, counts);
}

bool literal(const Formula& f, std::string& name, bool& value) {
  if (f.kind() == Formula::Kind::Var) {
    name = f.name();
    value = true;
    return true;
  }
  if (f.kind() == Formula::Kind::Not && f.operands()[0].kind() == Formula::Kind::Var) {
    name = f.operands()[0].name();
    value = false;
    return true;
  }
  return false;
}

bool dpll(Formula f, Assignment& out) {
  for (;;) {
    if (f.is_const()) return f.is_true();
    std::string name;
    bool value;
    if (literal(f, name, value)) {
      out[name] = value;
      return true;
    }
    if (f.kind() != Formula::Kind::And) break;
    std::map<std::string, Formula> units;
    for (const auto& g : f.operands()) {
      if (literal(g, name, value)) {
        units.emplace(name, Formula::constant(value));
        out[name] = value;
      }
    }
    if (units.empty()) break;
    f = substitute(f, units);
  }
  if (f.variables().size() < kEnumerateBelow) return enumerate(f, out);
  std::unordered_map<std::string, int> counts;
  count_occurrences(f, counts);
  std::string best;
  int best_count = -1;
  for (const auto& [v, c] : counts) {
    if (c > best_count || (c == best_count && v < best)) {
      best = v;
      best_count = c;
    }
  }
  for (bool v : {true, false}) {
    Assignment trial = out;
    trial[best] = v;
    if (dpll(substitute(f, best, Formula::constant(v)), trial)) {
      out = std::move(trial);
      return true;
    }
  }
  return false;
}

}  // namespace

void set_variable_cap(std::size_t cap) { g_var_cap.store(cap); }
std::size_t variable_cap() { return g_var_cap.load(); }

bool find_model(const Formula& f, Assignment& out) {
  const auto vars = f.variables();
  check_cap(vars.size());
  Assignment a;
  if (!dpll(f, a)) return false;
  out.clear();
  for (const auto& v : vars) {
    auto it = a.find(v);
    out[v] = it != a.end() && it->second;
  }
  return true;
}

bool is_sat(const Formula& f) {
  Assignment a;
  return find_model(f, a);
}

bool is_tautology(const Formula& f) {
  check_cap(f.variables().size());
  return !is_sat(Formula::negate(f));
}

bool is_essential(const Formula& f, const std::string& var) {
  const Formula hi = substitute(f, var, Formula::constant(true));
  const Formula lo = substitute(f, var, Formula::constant(false));
  return is_sat(Formula::exclusive_or(hi, lo));
}

Formula simplify_min_vars(const Formula& f) {
  check_cap(f.variables().size());
  Formula g = f;
  for (const auto& v : f.variables()) {
    if (!g.variables().count(v)) continue;
    if (!is_essential(g, v)) g = substitute(g, v, Formula::constant(false));
  }
  return g;
}

CompiledFormula::CompiledFormula(const Formula& f, const std::vector<std::string>& slots) {
  root_ = build(f, slots);
}

int CompiledFormula::build(const Formula& f, const std::vector<std::string>& slots) {
  Op op{f.kind(), -1, 0, 0};
  if (f.kind() == Formula::Kind::Var) {
    auto it = std::find(slots.begin(), slots.end(), f.name());
    if (it == slots.end()) throw std::invalid_argument("variable without slot: " + f.name());
    op.arg = static_cast<int>(it - slots.begin());
  } else if (!f.is_const()) {
    std::vector<int> kids;
    for (const auto& g : f.operands()) kids.push_back(build(g, slots));
    op.first = static_cast<int>(args_.size());
    op.count = static_cast<int>(kids.size());
    args_.insert(args_.end(), kids.begin(), kids.end());
  }
  ops_.push_back(op);
  return static_cast<int>(ops_.size()) - 1;
}

template <class Get>
bool CompiledFormula::run(int i, const Get& get) const {
  const Op& op = ops_[i];
  switch (op.kind) {
    case Formula::Kind::True:
      return true;
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Var:
      return get(op.arg);
    case Formula::Kind::Not:
      return !run(args_[op.first], get);
    case Formula::Kind::And:
      for (int k = 0; k < op.count; ++k)
        if (!run(args_[op.first + k], get)) return false;
      return true;
    case Formula::Kind::Or:
      for (int k = 0; k < op.count; ++k)
        if (run(args_[op.first + k], get)) return true;
      return false;
  }
  return false;
}

bool CompiledFormula::eval(const std::vector<char>& values) const {
  if (root_ < 0) return true;
  return run(root_, [&](int s) { return values[s] != 0; });
}

bool CompiledFormula::eval_mask(unsigned long long mask) const {
  if (root_ < 0) return true;
  return run(root_, [&](int s) { return ((mask >> s) & 1ULL) != 0; });
}

}  // namespace gtea
