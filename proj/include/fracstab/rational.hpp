#pragma once

// Cross-check oracle for the delay-free integer-exponent subfamily: exact
// root extraction via companion-matrix eigenvalues, then direct counting of
// right-half-plane roots.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "expr.hpp"

namespace fracstab {

/// CharFn is not a plain integer-exponent polynomial.
class NotRational : public Error {
public:
  using Error::Error;
};

/// A root sits within 1e-9 of the imaginary axis; RHP count undefined.
class BoundaryRoot : public Error {
public:
  using Error::Error;
};

/// Eigen solve produced roots that fail the residual check.
class NonConvergence : public Error {
public:
  using Error::Error;
};

/// Dense polynomial, coefficients ascending by degree, coeffs.back() != 0.
struct IntPoly {
  std::vector<double> coeffs;
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

inline constexpr int kMaxOracleDegree = 12;

/// Flatten a delay-free CharFn with integer exponents (within 1e-12) into a
/// dense polynomial. Throws NotRational otherwise or above degree 12.
inline IntPoly from_charfn(const CharFn& cf) {
  if (!cf.delayed.empty())
    throw NotRational("delay term present");
  int deg = 0;
  for (const Term& t : cf.p0.terms) {
    double k = std::nearbyint(t.exponent);
    if (std::fabs(t.exponent - k) > 1e-12 || k < 0.0)
      throw NotRational("non-integer exponent " + detail::shortest(t.exponent));
    deg = std::max(deg, static_cast<int>(k));
  }
  if (deg > kMaxOracleDegree)
    throw NotRational("degree above oracle limit of " + std::to_string(kMaxOracleDegree));
  IntPoly p;
  p.coeffs.assign(deg + 1, 0.0);
  for (const Term& t : cf.p0.terms)
    p.coeffs[static_cast<int>(std::nearbyint(t.exponent))] += t.coeff;
  while (p.coeffs.size() > 1 && p.coeffs.back() == 0.0) p.coeffs.pop_back();
  return p;
}

/// All complex roots via the companion matrix, sorted by (real, imag).
/// Rejects solutions whose scaled residual max |p(r)| / (||c|| max(1,|r|)^n)
/// exceeds 1e-8.
inline std::vector<std::complex<double>> roots(const IntPoly& p) {
  const int n = p.degree();
  if (n < 1) return {};
  if (p.coeffs.back() == 0.0) throw Error("roots: leading coefficient is zero");

  std::vector<std::complex<double>> rs;
  if (n == 1) {
    rs.push_back({-p.coeffs[0] / p.coeffs[1], 0.0});
  } else {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -p.coeffs[i] / p.coeffs[n];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(comp, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
      throw NonConvergence("eigenvalue iteration failed");
    for (int i = 0; i < n; ++i) rs.push_back(solver.eigenvalues()[i]);
  }

  double norm = 0.0;
  for (double c : p.coeffs) norm = std::hypot(norm, c);
  for (const auto& r : rs) {
    std::complex<double> val{0.0, 0.0};
    for (int i = n; i >= 0; --i) val = val * r + p.coeffs[i];
    double scale = norm * std::pow(std::max(1.0, std::abs(r)), n);
    if (!(std::abs(val) / scale < 1e-8))
      throw NonConvergence("root residual " + detail::shortest(std::abs(val) / scale) +
                           " too large");
  }

  std::sort(rs.begin(), rs.end(), [](const auto& x, const auto& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  return rs;
}

/// Number of roots with Re > margin. Throws BoundaryRoot when any root lies
/// within 1e-9 of the imaginary axis.
inline int count_rhp(const IntPoly& p, double margin = 0.0) {
  auto rs = roots(p);
  int count = 0;
  for (const auto& r : rs) {
    if (std::fabs(r.real()) < 1e-9)
      throw BoundaryRoot("root at Re = " + detail::shortest(r.real()));
    if (r.real() > margin) ++count;
  }
  return count;
}

}  // namespace fracstab
