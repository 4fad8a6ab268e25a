#pragma once

// Quasi-polynomial characteristic functions
//
//   Delta(s) = P0(s) + sum_i Pi(s) * exp(-zeta_i * s^beta_i)
//
// with real fractional powers of s throughout. This header owns the domain
// types, the input DSL parser, normalization to the canonical form above,
// and round-trippable text formatting.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace fracstab {

// ---------------------------------------------------------------------------
// errors

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed DSL input. `offset` is the 0-based byte position in the source.
class SyntaxError : public Error {
public:
  SyntaxError(const std::string& msg, std::size_t off)
      : Error(msg + " at offset " + std::to_string(off)), offset(off) {}
  std::size_t offset;
};

/// Structurally valid input that falls outside the representable family
/// (nested exponentials, unbound parameters, negative powers of s, ...).
class NotRepresentable : public Error {
public:
  using Error::Error;
};

/// A delayed block's degree reaches or exceeds the delay-free degree, so the
/// retarded structure is lost.
class DegenerateLeading : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// domain types

/// One monomial coeff * s^exponent.
struct Term {
  double coeff = 0.0;
  double exponent = 0.0;
  friend bool operator==(const Term&, const Term&) = default;
};

/// Fractional polynomial: terms sorted by strictly decreasing exponent,
/// no zero coefficients. Empty vector encodes the zero polynomial.
struct FracPoly {
  std::vector<Term> terms;

  bool is_zero() const noexcept { return terms.empty(); }
  double leading_exponent() const { return terms.front().exponent; }
  friend bool operator==(const FracPoly&, const FracPoly&) = default;
};

/// exp(-zeta * s^beta), zeta > 0, beta > 0.
struct DelayFactor {
  double zeta = 0.0;
  double beta = 1.0;
  friend bool operator==(const DelayFactor&, const DelayFactor&) = default;
};

/// One delayed summand Pi(s) * exp(-zeta_i * s^beta_i).
struct Block {
  FracPoly poly;
  DelayFactor delay;
  friend bool operator==(const Block&, const Block&) = default;
};

/// Normalized characteristic function. Invariants (enforced by
/// make_charfn / bind_and_normalize):
///  - p0 is non-zero, all exponents >= 0, alpha_n() > 0
///  - every block has a non-zero poly, zeta > 0, beta > 0,
///    and leading exponent < alpha_n()
///  - blocks sorted by (beta, zeta), keys pairwise distinct
struct CharFn {
  FracPoly p0;
  std::vector<Block> delayed;

  double alpha_n() const { return p0.leading_exponent(); }
  friend bool operator==(const CharFn&, const CharFn&) = default;
};

using ParamBinding = std::map<std::string, double>;

// ---------------------------------------------------------------------------
// numeric text helpers

namespace detail {

/// Shortest decimal string that round-trips to exactly `v`.
inline std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline bool is_integer(double v) { return std::nearbyint(v) == v; }

struct Kahan {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// construction / normalization

namespace detail {

/// Sort by descending exponent, merge bit-equal exponents, drop zeros.
inline FracPoly make_poly(std::vector<Term> raw) {
  std::sort(raw.begin(), raw.end(),
            [](const Term& a, const Term& b) { return a.exponent > b.exponent; });
  FracPoly out;
  for (const Term& t : raw) {
    if (!out.terms.empty() && out.terms.back().exponent == t.exponent)
      out.terms.back().coeff += t.coeff;
    else
      out.terms.push_back(t);
  }
  std::erase_if(out.terms, [](const Term& t) { return t.coeff == 0.0; });
  return out;
}

inline void check_finite(const FracPoly& p) {
  for (const Term& t : p.terms)
    if (!std::isfinite(t.coeff) || !std::isfinite(t.exponent))
      throw NotRepresentable("non-finite coefficient or exponent");
}

}  // namespace detail

/// Canonicalize raw parts into a valid CharFn. Merges duplicate (beta, zeta)
/// blocks, drops vanished blocks, sorts, and enforces all invariants.
/// Idempotent: feeding a CharFn's parts back in reproduces it exactly.
inline CharFn make_charfn(FracPoly p0, std::vector<Block> delayed) {
  CharFn cf;
  cf.p0 = detail::make_poly(std::move(p0.terms));
  detail::check_finite(cf.p0);
  if (cf.p0.is_zero())
    throw NotRepresentable("delay-free part is zero");
  for (const Term& t : cf.p0.terms)
    if (t.exponent < 0.0)
      throw NotRepresentable("negative power of s: " + detail::shortest(t.exponent));
  if (!(cf.p0.leading_exponent() > 0.0))
    throw NotRepresentable("delay-free part needs a positive power of s");

  std::map<std::pair<double, double>, std::vector<Term>> groups;
  for (Block& b : delayed) {
    if (!std::isfinite(b.delay.zeta) || !std::isfinite(b.delay.beta))
      throw NotRepresentable("non-finite delay parameter");
    if (!(b.delay.zeta > 0.0))
      throw NotRepresentable("delay coefficient must be positive");
    if (!(b.delay.beta > 0.0))
      throw NotRepresentable("delay exponent must be positive");
    auto& bucket = groups[{b.delay.beta, b.delay.zeta}];
    bucket.insert(bucket.end(), b.poly.terms.begin(), b.poly.terms.end());
  }

  const double an = cf.p0.leading_exponent();
  for (auto& [key, terms] : groups) {
    Block b;
    b.delay = DelayFactor{key.second, key.first};
    b.poly = detail::make_poly(std::move(terms));
    if (b.poly.is_zero()) continue;
    detail::check_finite(b.poly);
    for (const Term& t : b.poly.terms)
      if (t.exponent < 0.0)
        throw NotRepresentable("negative power of s: " + detail::shortest(t.exponent));
    if (b.poly.leading_exponent() >= an)
      throw DegenerateLeading("delayed block degree " +
                              detail::shortest(b.poly.leading_exponent()) +
                              " >= alpha_n " + detail::shortest(an));
    cf.delayed.push_back(std::move(b));
  }
  return cf;
}

// ---------------------------------------------------------------------------
// parsing

/// Syntax tree node. Value-semantic; children owned by vector.
struct ExprNode {
  enum class Kind { Number, Pi, Param, SPower, Exp, Negate, Sum, Product };

  Kind kind = Kind::Number;
  double number = 0.0;              // Number
  std::string name;                 // Param
  std::vector<ExprNode> children;   // SPower: 0 or 1 (exponent), Exp/Negate: 1
  std::vector<signed char> signs;   // Sum: +1 / -1 per child
};

/// Parse result: tree plus the free parameter names found in it.
struct ParsedExpr {
  ExprNode root;
  std::vector<std::string> params;  // sorted, unique
  std::string text;                 // original source
};

namespace detail {

class Parser {
public:
  explicit Parser(std::string_view src) : src_(src) {}

  ParsedExpr run() {
    ParsedExpr out;
    out.text = std::string(src_);
    out.root = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    std::sort(params_.begin(), params_.end());
    params_.erase(std::unique(params_.begin(), params_.end()), params_.end());
    out.params = std::move(params_);
    return out;
  }

private:
  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<std::string> params_;

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t'))
      ++pos_;
  }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

  bool eat(char c) {
    skip_ws();
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  void expect(char c, const char* what) {
    if (!eat(c)) fail(std::string("expected '") + c + "' " + what);
  }

  static bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
  static bool digit(char c) { return c >= '0' && c <= '9'; }

  // expr := ['-'] term (('+' | '-') term)*
  ExprNode expr() {
    ExprNode sum;
    sum.kind = ExprNode::Kind::Sum;
    signed char sign = eat('-') ? -1 : 1;
    sum.children.push_back(term());
    sum.signs.push_back(sign);
    for (;;) {
      if (eat('+')) sign = 1;
      else if (eat('-')) sign = -1;
      else break;
      sum.children.push_back(term());
      sum.signs.push_back(sign);
    }
    if (sum.children.size() == 1 && sum.signs[0] == 1)
      return std::move(sum.children[0]);
    return sum;
  }

  // term := factor ('*' factor)*
  ExprNode term() {
    ExprNode prod;
    prod.kind = ExprNode::Kind::Product;
    prod.children.push_back(factor());
    while (eat('*'))
      prod.children.push_back(factor());
    if (prod.children.size() == 1)
      return std::move(prod.children[0]);
    return prod;
  }

  // factor := number | 'pi' | param | 's' ['^' exponent] | 'exp' '(' expr ')'
  //         | '(' expr ')'
  ExprNode factor() {
    skip_ws();
    char c = peek();
    if (digit(c) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      ExprNode e = expr();
      expect(')', "to close group");
      return e;
    }
    if (ident_start(c)) {
      std::string id = ident();
      if (id == "pi") {
        ExprNode n;
        n.kind = ExprNode::Kind::Pi;
        return n;
      }
      if (id == "s") {
        ExprNode n;
        n.kind = ExprNode::Kind::SPower;
        if (eat('^')) n.children.push_back(exponent());
        return n;
      }
      if (id == "exp") {
        ExprNode n;
        n.kind = ExprNode::Kind::Exp;
        expect('(', "after exp");
        n.children.push_back(expr());
        expect(')', "to close exp");
        return n;
      }
      ExprNode n;
      n.kind = ExprNode::Kind::Param;
      n.name = std::move(id);
      params_.push_back(n.name);
      return n;
    }
    fail("expected a number, 's', 'pi', a parameter, or '('");
  }

  // exponent := number | 'pi' | param | '(' expr ')'
  ExprNode exponent() {
    skip_ws();
    char c = peek();
    if (digit(c) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      ExprNode e = expr();
      expect(')', "to close group");
      return e;
    }
    if (ident_start(c)) {
      std::size_t at = pos_;
      std::string id = ident();
      if (id == "pi") {
        ExprNode n;
        n.kind = ExprNode::Kind::Pi;
        return n;
      }
      if (id == "s" || id == "exp") {
        pos_ = at;
        fail("'" + id + "' not allowed in an exponent");
      }
      ExprNode n;
      n.kind = ExprNode::Kind::Param;
      n.name = std::move(id);
      params_.push_back(n.name);
      return n;
    }
    fail("expected an exponent");
  }

  std::string ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  ExprNode number() {
    std::size_t start = pos_;
    while (digit(peek())) ++pos_;
    if (peek() == '.') {
      ++pos_;
      while (digit(peek())) ++pos_;
    }
    if (pos_ == start || (pos_ == start + 1 && src_[start] == '.')) {
      pos_ = start;
      fail("expected a number");
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t mark = pos_;
      ++pos_;
      if (peek() == '+' || peek() == '-') ++pos_;
      if (digit(peek())) {
        while (digit(peek())) ++pos_;
      } else {
        pos_ = mark;  // bare 'e' belongs to whatever follows
      }
    }
    std::string tok(src_.substr(start, pos_ - start));
    if (tok.front() == '.') tok.insert(tok.begin(), '0');
    if (tok.back() == '.') tok.push_back('0');
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
      pos_ = start;
      fail("malformed number");
    }
    ExprNode n;
    n.kind = ExprNode::Kind::Number;
    n.number = v;
    return n;
  }
};

}  // namespace detail

/// Parse DSL text into a syntax tree. Grammar (whitespace-insensitive):
///   expr   := ['-'] term (('+' | '-') term)*
///   term   := factor ('*' factor)*
///   factor := number | 'pi' | param | 's' ['^' exponent]
///           | 'exp' '(' expr ')' | '(' expr ')'
/// No division. 's', 'exp', 'pi' are reserved.
inline ParsedExpr parse(std::string_view text) {
  return detail::Parser(text).run();
}

// ---------------------------------------------------------------------------
// binding + normalization to CharFn

namespace detail {

/// Intermediate product-of-primitives form: coeff * s^alpha [* exp(-zeta s^beta)].
struct Monomial {
  double coeff = 1.0;
  double alpha = 0.0;
  bool has_delay = false;
  double zeta = 0.0;
  double beta = 0.0;
};

inline double fold_const(const ExprNode& n, const ParamBinding& params) {
  using K = ExprNode::Kind;
  switch (n.kind) {
    case K::Number: return n.number;
    case K::Pi: return std::numbers::pi;
    case K::Param: {
      auto it = params.find(n.name);
      if (it == params.end())
        throw NotRepresentable("unbound parameter '" + n.name + "'");
      return it->second;
    }
    case K::Negate: return -fold_const(n.children[0], params);
    case K::Sum: {
      double acc = 0.0;
      for (std::size_t i = 0; i < n.children.size(); ++i)
        acc += n.signs[i] * fold_const(n.children[i], params);
      return acc;
    }
    case K::Product: {
      double acc = 1.0;
      for (const ExprNode& c : n.children) acc *= fold_const(c, params);
      return acc;
    }
    case K::Exp: return std::exp(fold_const(n.children[0], params));
    case K::SPower: break;
  }
  throw NotRepresentable("exponent must not depend on s");
}

inline Monomial combine(const Monomial& a, const Monomial& b) {
  Monomial m;
  m.coeff = a.coeff * b.coeff;
  m.alpha = a.alpha + b.alpha;
  if (a.has_delay && b.has_delay) {
    if (a.beta != b.beta)
      throw NotRepresentable("cannot merge exp factors with different powers of s");
    m.has_delay = true;
    m.beta = a.beta;
    m.zeta = a.zeta + b.zeta;
  } else if (a.has_delay || b.has_delay) {
    const Monomial& d = a.has_delay ? a : b;
    m.has_delay = true;
    m.beta = d.beta;
    m.zeta = d.zeta;
  }
  return m;
}

inline std::vector<Monomial> fold(const ExprNode& n, const ParamBinding& params) {
  using K = ExprNode::Kind;
  switch (n.kind) {
    case K::Number:
      return {Monomial{n.number, 0.0, false, 0.0, 0.0}};
    case K::Pi:
      return {Monomial{std::numbers::pi, 0.0, false, 0.0, 0.0}};
    case K::Param: {
      auto it = params.find(n.name);
      if (it == params.end())
        throw NotRepresentable("unbound parameter '" + n.name + "'");
      return {Monomial{it->second, 0.0, false, 0.0, 0.0}};
    }
    case K::SPower: {
      double a = n.children.empty() ? 1.0 : fold_const(n.children[0], params);
      return {Monomial{1.0, a, false, 0.0, 0.0}};
    }
    case K::Negate: {
      auto ms = fold(n.children[0], params);
      for (Monomial& m : ms) m.coeff = -m.coeff;
      return ms;
    }
    case K::Sum: {
      std::vector<Monomial> acc;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        auto ms = fold(n.children[i], params);
        for (Monomial& m : ms) {
          if (n.signs[i] < 0) m.coeff = -m.coeff;
          acc.push_back(m);
        }
      }
      return acc;
    }
    case K::Product: {
      std::vector<Monomial> acc = {Monomial{}};
      for (const ExprNode& c : n.children) {
        auto ms = fold(c, params);
        std::vector<Monomial> next;
        next.reserve(acc.size() * ms.size());
        for (const Monomial& a : acc)
          for (const Monomial& b : ms)
            next.push_back(combine(a, b));
        acc = std::move(next);
      }
      return acc;
    }
    case K::Exp: {
      auto ms = fold(n.children[0], params);
      // collapse the argument to c * s^a
      std::vector<Monomial> merged;
      for (const Monomial& m : ms) {
        if (m.has_delay)
          throw NotRepresentable("nested exponential");
        if (m.coeff == 0.0) continue;
        bool found = false;
        for (Monomial& u : merged)
          if (u.alpha == m.alpha) {
            u.coeff += m.coeff;
            found = true;
            break;
          }
        if (!found) merged.push_back(m);
      }
      std::erase_if(merged, [](const Monomial& m) { return m.coeff == 0.0; });
      if (merged.empty())
        return {Monomial{1.0, 0.0, false, 0.0, 0.0}};
      if (merged.size() > 1)
        throw NotRepresentable("exp argument must be a single power of s");
      const Monomial& arg = merged[0];
      if (arg.alpha == 0.0)
        return {Monomial{std::exp(arg.coeff), 0.0, false, 0.0, 0.0}};
      if (arg.alpha < 0.0)
        throw NotRepresentable("negative power of s inside exp");
      if (arg.coeff > 0.0)
        throw NotRepresentable("exp argument must have a negative coefficient");
      return {Monomial{1.0, 0.0, true, -arg.coeff, arg.alpha}};
    }
  }
  throw Error("unreachable");
}

}  // namespace detail

/// Substitute parameter values and normalize to the canonical CharFn form.
/// Throws NotRepresentable / DegenerateLeading when the expression leaves
/// the representable family.
inline CharFn bind_and_normalize(const ParsedExpr& e, const ParamBinding& params = {}) {
  auto monos = detail::fold(e.root, params);
  FracPoly p0;
  std::vector<Block> blocks;
  for (const detail::Monomial& m : monos) {
    if (m.alpha < 0.0)
      throw NotRepresentable("negative power of s: " + detail::shortest(m.alpha));
    if (m.has_delay) {
      Block b;
      b.poly.terms.push_back(Term{m.coeff, m.alpha});
      b.delay = DelayFactor{m.zeta, m.beta};
      blocks.push_back(std::move(b));
    } else {
      p0.terms.push_back(Term{m.coeff, m.alpha});
    }
  }
  return make_charfn(std::move(p0), std::move(blocks));
}

// ---------------------------------------------------------------------------
// formatting

namespace detail {

inline void append_power(std::string& out, double exponent) {
  if (exponent == 1.0) {
    out += 's';
  } else if (exponent < 0.0) {
    out += "s^(";
    out += shortest(exponent);
    out += ')';
  } else {
    out += "s^";
    out += shortest(exponent);
  }
}

inline void append_term_body(std::string& out, const Term& t) {
  double mag = std::fabs(t.coeff);
  if (t.exponent == 0.0) {
    out += shortest(mag);
    return;
  }
  if (mag != 1.0) {
    out += shortest(mag);
    out += '*';
  }
  append_power(out, t.exponent);
}

inline void append_poly(std::string& out, const FracPoly& p) {
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    const Term& t = p.terms[i];
    if (i == 0) {
      if (t.coeff < 0.0) out += '-';
    } else {
      out += t.coeff < 0.0 ? " - " : " + ";
    }
    append_term_body(out, t);
  }
}

inline void append_delay(std::string& out, const DelayFactor& d) {
  out += "exp(-";
  if (d.zeta != 1.0) {
    out += shortest(d.zeta);
    out += '*';
  }
  append_power(out, d.beta);
  out += ')';
}

}  // namespace detail

/// Render a CharFn as DSL text. Round-trip safe:
/// bind_and_normalize(parse(format(cf))) == cf, bit for bit.
inline std::string format(const CharFn& cf) {
  std::string out;
  detail::append_poly(out, cf.p0);
  for (const Block& b : cf.delayed) {
    out += " + ";
    if (b.poly.terms.size() == 1 && b.poly.terms[0].coeff == 1.0 &&
        b.poly.terms[0].exponent == 0.0) {
      // bare exp(...) block
    } else {
      out += '(';
      detail::append_poly(out, b.poly);
      out += ")*";
    }
    detail::append_delay(out, b.delay);
  }
  return out;
}

}  // namespace fracstab
