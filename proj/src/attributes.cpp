#include "gtea/attributes.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

namespace gtea {

double Value::number() const {
  if (const auto* i = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v_)) return *d;
  throw std::logic_error("text value has no numeric form");
}

std::string Value::str() const {
  if (const auto* i = std::get_if<std::int64_t>(&v_)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v_)) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, *d);
    std::string s(buf, r.ptr);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
  }
  return text();
}

int Value::compare(const Value& o) const {
  if (is_text() != o.is_text()) throw std::logic_error("comparing text with number");
  if (is_text()) return text().compare(o.text()) < 0 ? -1 : (text() == o.text() ? 0 : 1);
  if (is_int() && o.is_int()) return integer() < o.integer() ? -1 : (integer() == o.integer() ? 0 : 1);
  const double a = number(), b = o.number();
  return a < b ? -1 : (a == b ? 0 : 1);
}

bool Value::operator<(const Value& o) const {
  if (is_text() != o.is_text()) return !is_text();
  return compare(o) < 0;
}

const char* op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq:
      return "=";
    case CmpOp::Ne:
      return "!=";
    case CmpOp::Lt:
      return "<";
    case CmpOp::Le:
      return "<=";
    case CmpOp::Gt:
      return ">";
    case CmpOp::Ge:
      return ">=";
  }
  return "?";
}

bool Atom::holds(const Value& v) const {
  if (!v.same_kind(literal)) return false;
  const int c = v.compare(literal);
  switch (op) {
    case CmpOp::Eq:
      return c == 0;
    case CmpOp::Ne:
      return c != 0;
    case CmpOp::Lt:
      return c < 0;
    case CmpOp::Le:
      return c <= 0;
    case CmpOp::Gt:
      return c > 0;
    case CmpOp::Ge:
      return c >= 0;
  }
  return false;
}

static bool bare_word(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return s != "true" && s != "false";
}

std::string Atom::str() const {
  std::string lit = literal.str();
  if (literal.is_text() && !bare_word(lit)) {
    std::string q = "\"";
    for (char c : lit) {
      if (c == '"' || c == '\\') q += '\\';
      q += c;
    }
    lit = q + "\"";
  }
  return attr + op_text(op) + lit;
}

namespace {

class AtomParser {
 public:
  explicit AtomParser(const std::string& s) : s_(s) {}

  std::vector<Atom> run() {
    std::vector<Atom> out;
    skip();
    if (pos_ == s_.size()) return out;
    if (s_[pos_] == '*' && rest_blank(pos_ + 1)) return out;
    for (;;) {
      out.push_back(atom());
      skip();
      if (pos_ == s_.size()) break;
      if (s_.compare(pos_, 2, "&&") == 0) {
        pos_ += 2;
      } else if (s_[pos_] == '&' || s_[pos_] == ',') {
        ++pos_;
      } else {
        fail("expected '&&'");
      }
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    throw AttributeSyntaxError(what + " at offset " + std::to_string(pos_) + " in '" + s_ + "'");
  }
  bool rest_blank(std::size_t p) const {
    for (; p < s_.size(); ++p)
      if (!std::isspace(static_cast<unsigned char>(s_[p]))) return false;
    return true;
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-' || c == '@' || c == ':';
  }

  Atom atom() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && name_char(s_[pos_])) ++pos_;
    if (pos_ == start) fail("expected attribute name");
    Atom a;
    a.attr = s_.substr(start, pos_ - start);
    skip();
    a.op = op();
    skip();
    a.literal = literal();
    return a;
  }

  CmpOp op() {
    auto take = [&](const char* t) {
      const std::size_t n = std::char_traits<char>::length(t);
      if (s_.compare(pos_, n, t) == 0) {
        pos_ += n;
        return true;
      }
      return false;
    };
    if (take("==") || take("=")) return CmpOp::Eq;
    if (take("!=") || take("<>")) return CmpOp::Ne;
    if (take("<=")) return CmpOp::Le;
    if (take(">=")) return CmpOp::Ge;
    if (take("<")) return CmpOp::Lt;
    if (take(">")) return CmpOp::Gt;
    fail("expected comparison operator");
  }

  Value literal() {
    if (pos_ >= s_.size()) fail("expected literal");
    const char q = s_[pos_];
    if (q == '"' || q == '\'') {
      ++pos_;
      std::string out;
      while (pos_ < s_.size() && s_[pos_] != q) {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
        out += s_[pos_++];
      }
      if (pos_ >= s_.size()) fail("unterminated string");
      ++pos_;
      return Value(std::move(out));
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '&' &&
           s_[pos_] != ',')
      ++pos_;
    const std::string tok = s_.substr(start, pos_ - start);
    if (tok.empty()) fail("expected literal");
    std::int64_t i;
    auto ri = std::from_chars(tok.data(), tok.data() + tok.size(), i);
    if (ri.ec == std::errc() && ri.ptr == tok.data() + tok.size()) return Value(i);
    double d;
    auto rd = std::from_chars(tok.data(), tok.data() + tok.size(), d);
    if (rd.ec == std::errc() && rd.ptr == tok.data() + tok.size()) return Value(d);
    return Value(tok);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

// Feasible values of one attribute under a conjunction of atoms.
struct Range {
  bool has_kind = false;
  bool text = false;
  bool conflict = false;
  std::optional<Value> lo, hi;
  bool lo_strict = false, hi_strict = false;
  std::vector<Value> excluded;
  std::vector<const Atom*> atoms;

  void add(const Atom& a) {
    atoms.push_back(&a);
    if (has_kind && text != a.literal.is_text()) conflict = true;
    has_kind = true;
    text = a.literal.is_text();
    if (conflict) return;
    switch (a.op) {
      case CmpOp::Eq:
        lower(a.literal, false);
        upper(a.literal, false);
        break;
      case CmpOp::Ne:
        excluded.push_back(a.literal);
        break;
      case CmpOp::Lt:
        upper(a.literal, true);
        break;
      case CmpOp::Le:
        upper(a.literal, false);
        break;
      case CmpOp::Gt:
        lower(a.literal, true);
        break;
      case CmpOp::Ge:
        lower(a.literal, false);
        break;
    }
  }
  void lower(const Value& v, bool strict) {
    if (!lo || v.compare(*lo) > 0 || (v.compare(*lo) == 0 && strict)) {
      lo = v;
      lo_strict = strict;
    }
  }
  void upper(const Value& v, bool strict) {
    if (!hi || v.compare(*hi) < 0 || (v.compare(*hi) == 0 && strict)) {
      hi = v;
      hi_strict = strict;
    }
  }
  bool point() const { return lo && hi && !lo_strict && !hi_strict && lo->compare(*hi) == 0; }
  bool accepts(const Value& v) const {
    for (const Atom* a : atoms)
      if (!a->holds(v)) return false;
    return true;
  }

  bool inside(const Atom& b) const {
    if (b.literal.is_text() != text) return false;
    const Value& c = b.literal;
    switch (b.op) {
      case CmpOp::Eq:
        return point() && lo->compare(c) == 0;
      case CmpOp::Ne: {
        if (lo && (c.compare(*lo) < 0 || (c.compare(*lo) == 0 && lo_strict))) return true;
        if (hi && (c.compare(*hi) > 0 || (c.compare(*hi) == 0 && hi_strict))) return true;
        for (const auto& e : excluded)
          if (e.compare(c) == 0) return true;
        return false;
      }
      case CmpOp::Lt:
        return hi && (hi->compare(c) < 0 || (hi->compare(c) == 0 && hi_strict));
      case CmpOp::Le:
        return hi && hi->compare(c) <= 0;
      case CmpOp::Gt:
        return lo && (lo->compare(c) > 0 || (lo->compare(c) == 0 && lo_strict));
      case CmpOp::Ge:
        return lo && lo->compare(c) >= 0;
    }
    return false;
  }
};

Value numeric(double d) {
  if (std::floor(d) == d && std::fabs(d) < 9e15) return Value(static_cast<std::int64_t>(d));
  return Value(d);
}

std::vector<Value> candidates(const Range& r, const std::vector<Value>& points) {
  std::vector<Value> raw;
  if (r.text) {
    std::vector<std::string> base;
    for (const auto& p : points)
      if (p.is_text()) base.push_back(p.text());
    for (const auto& b : base) {
      raw.emplace_back(b);
      raw.emplace_back(b + "a");
      raw.emplace_back(b + "z");
      raw.emplace_back(b + "1");
      if (!b.empty()) raw.emplace_back(b.substr(0, b.size() - 1));
    }
    for (const char* s : {"a", "b", "c", "x", "y", "z", "m", "0", ""}) raw.emplace_back(s);
  } else {
    std::vector<double> base;
    for (const auto& p : points)
      if (p.is_numeric()) base.push_back(p.number());
    std::sort(base.begin(), base.end());
    base.erase(std::unique(base.begin(), base.end()), base.end());
    for (double b : base) raw.push_back(numeric(b));
    for (double b : base)
      for (double d : {1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 0.25, -0.25}) raw.push_back(numeric(b + d));
    for (std::size_t i = 0; i + 1 < base.size(); ++i) {
      const double a = base[i], b = base[i + 1];
      for (double t : {0.5, 0.25, 0.75}) raw.push_back(numeric(a + (b - a) * t));
    }
    for (double d : {0.0, 1.0, -1.0, 2.0, 3.0}) raw.push_back(numeric(d));
  }
  std::vector<Value> out;
  for (auto& v : raw) {
    if (!r.accepts(v)) continue;
    bool seen = false;
    for (const auto& o : out)
      if (o.same_kind(v) && o.compare(v) == 0) seen = true;
    if (!seen) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

AttributePredicate AttributePredicate::parse(const std::string& text) {
  return AttributePredicate(AtomParser(text).run());
}

std::string AttributePredicate::str() const {
  std::string out;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (i) out += " && ";
    out += atoms_[i].str();
  }
  return out;
}

bool AttributePredicate::satisfied_by(const Attributes& attrs) const {
  return satisfied_by([&](const std::string& k) -> const Value* {
    auto it = attrs.find(k);
    return it == attrs.end() ? nullptr : &it->second;
  });
}

bool AttributePredicate::satisfiable() const { return find_attributes(*this, {}).has_value(); }

bool AttributePredicate::implies(const AttributePredicate& other) const {
  if (!satisfiable()) return true;
  std::map<std::string, Range> ranges;
  for (const auto& a : atoms_) ranges[a.attr].add(a);
  for (const auto& b : other.atoms()) {
    auto it = ranges.find(b.attr);
    if (it == ranges.end() || !it->second.inside(b)) return false;
  }
  return true;
}

std::optional<Attributes> find_attributes(const AttributePredicate& require,
                                          const std::vector<AttributePredicate>& avoid) {
  std::map<std::string, Range> ranges;
  for (const auto& a : require.atoms()) ranges[a.attr].add(a);
  for (const auto& [_, r] : ranges)
    if (r.conflict) return std::nullopt;

  std::vector<std::string> attrs;
  std::vector<std::vector<Value>> cands;
  for (const auto& [name, r] : ranges) {
    std::vector<Value> points;
    for (const Atom* a : r.atoms) points.push_back(a->literal);
    for (const auto& p : avoid)
      for (const auto& a : p.atoms())
        if (a.attr == name) points.push_back(a.literal);
    auto c = candidates(r, points);
    if (c.empty()) return std::nullopt;
    attrs.push_back(name);
    cands.push_back(std::move(c));
  }

  // Predicates that mention an attribute outside `require` reject any map built here.
  std::vector<const AttributePredicate*> live;
  for (const auto& p : avoid) {
    bool escapes = false;
    for (const auto& a : p.atoms())
      if (!ranges.count(a.attr)) escapes = true;
    if (!escapes) live.push_back(&p);
  }

  Attributes pick;
  std::size_t budget = 200000;
  auto rejected_all = [&] {
    for (const auto* p : live)
      if (p->satisfied_by(pick)) return false;
    return true;
  };
  auto dfs = [&](auto&& self, std::size_t i) -> bool {
    if (budget-- == 0) return false;
    if (i == attrs.size()) return rejected_all();
    for (const auto& v : cands[i]) {
      pick[attrs[i]] = v;
      if (self(self, i + 1)) return true;
    }
    pick.erase(attrs[i]);
    return false;
  };
  if (!dfs(dfs, 0)) return std::nullopt;
  return pick;
}

}  // namespace gtea
