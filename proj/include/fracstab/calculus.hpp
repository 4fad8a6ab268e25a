#pragma once

// Evaluation and differentiation of characteristic functions on the first
// Riemann sheet. s^alpha means exp(alpha * Log s) with Log the principal
// branch, arg s in (-pi, pi], cut along the negative real axis.

#include <complex>

#include "expr.hpp"

namespace fracstab {

/// Evaluation requested on the branch cut while a non-integer exponent is
/// present.
class BranchCutViolation : public Error {
public:
  using Error::Error;
};

/// Evaluation at s = 0 with a negative exponent present.
class DomainError : public Error {
public:
  using Error::Error;
};

/// |Delta(s)| fell below the log-derivative zero floor.
class RootOnContour : public Error {
public:
  using Error::Error;
};

/// Derivative of a CharFn. Same shape, weaker invariants: term exponents may
/// be negative (from differentiating fractional powers below 1).
struct DerivedFn {
  FracPoly p0;
  std::vector<Block> delayed;
  friend bool operator==(const DerivedFn&, const DerivedFn&) = default;
};

namespace detail {

struct KahanC {
  Kahan re, im;
  void add(std::complex<double> v) {
    re.add(v.real());
    im.add(v.imag());
  }
  std::complex<double> value() const { return {re.sum, im.sum}; }
};

/// Principal-branch power. Integer |alpha| <= 8 uses repeated multiplication
/// so polynomial cases stay exact.
inline std::complex<double> principal_pow(std::complex<double> s, double alpha) {
  if (alpha == 0.0) return {1.0, 0.0};
  if (is_integer(alpha) && std::fabs(alpha) <= 8.0) {
    int n = static_cast<int>(alpha);
    std::complex<double> acc{1.0, 0.0};
    for (int i = 0; i < std::abs(n); ++i) acc *= s;
    return n < 0 ? 1.0 / acc : acc;
  }
  double r = std::abs(s);
  double th = std::arg(s);
  return std::polar(std::exp(alpha * std::log(r)), alpha * th);
}

inline bool all_integer(const FracPoly& p) {
  for (const Term& t : p.terms)
    if (!is_integer(t.exponent)) return false;
  return true;
}

inline bool any_negative(const FracPoly& p) {
  for (const Term& t : p.terms)
    if (t.exponent < 0.0) return true;
  return false;
}

inline std::complex<double> eval_parts(const FracPoly& p0,
                                       const std::vector<Block>& blocks,
                                       std::complex<double> s) {
  if (s.imag() == 0.0 && s.real() < 0.0) {
    bool ok = all_integer(p0);
    for (const Block& b : blocks)
      ok = ok && all_integer(b.poly) && is_integer(b.delay.beta);
    if (!ok)
      throw BranchCutViolation("non-integer exponent on the negative real axis");
  }
  if (s == std::complex<double>{}) {
    bool bad = any_negative(p0);
    for (const Block& b : blocks) bad = bad || any_negative(b.poly);
    if (bad) throw DomainError("negative exponent at s = 0");
  }
  KahanC total;
  for (const Term& t : p0.terms)
    total.add(t.coeff * principal_pow(s, t.exponent));
  for (const Block& b : blocks) {
    KahanC ps;
    for (const Term& t : b.poly.terms)
      ps.add(t.coeff * principal_pow(s, t.exponent));
    std::complex<double> gate =
        std::exp(-b.delay.zeta * principal_pow(s, b.delay.beta));
    total.add(ps.value() * gate);
  }
  return total.value();
}

}  // namespace detail

inline std::complex<double> evaluate(const CharFn& f, std::complex<double> s) {
  return detail::eval_parts(f.p0, f.delayed, s);
}

inline std::complex<double> evaluate(const DerivedFn& f, std::complex<double> s) {
  return detail::eval_parts(f.p0, f.delayed, s);
}

/// Exact term-by-term derivative. Product rule on each block:
///   (Pi * exp(-zeta s^beta))' = (Pi' - zeta beta s^(beta-1) Pi) * exp(-zeta s^beta)
inline DerivedFn differentiate(const CharFn& cf) {
  DerivedFn d;
  {
    std::vector<Term> dt;
    for (const Term& t : cf.p0.terms)
      if (t.exponent != 0.0)
        dt.push_back(Term{t.coeff * t.exponent, t.exponent - 1.0});
    d.p0 = detail::make_poly(std::move(dt));
  }
  for (const Block& b : cf.delayed) {
    std::vector<Term> dt;
    for (const Term& t : b.poly.terms) {
      if (t.exponent != 0.0)
        dt.push_back(Term{t.coeff * t.exponent, t.exponent - 1.0});
      dt.push_back(Term{-b.delay.zeta * b.delay.beta * t.coeff,
                        t.exponent + b.delay.beta - 1.0});
    }
    Block nb{detail::make_poly(std::move(dt)), b.delay};
    if (!nb.poly.is_zero()) d.delayed.push_back(std::move(nb));
  }
  return d;
}

/// Delta'(s) / Delta(s). Throws RootOnContour when |Delta(s)| < zero_floor.
inline std::complex<double> log_derivative(const CharFn& f, const DerivedFn& df,
                                           std::complex<double> s,
                                           double zero_floor = 1e-300) {
  std::complex<double> den = evaluate(f, s);
  if (std::abs(den) < zero_floor)
    throw RootOnContour("|Delta(s)| below zero floor at s = (" +
                        detail::shortest(s.real()) + ", " +
                        detail::shortest(s.imag()) + ")");
  return evaluate(df, s) / den;
}

}  // namespace fracstab
