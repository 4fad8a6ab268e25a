#pragma once

// Unstable-root counting on the first Riemann sheet via the argument
// principle. With alpha_n the leading delay-free exponent,
//
//   M = alpha_n / 2 - (1/pi) * Integral_eps^Inf Re{Delta'(i w) / Delta(i w)} dw
//
// equals the number of roots with Re s > 0 when Delta has no roots on the
// imaginary axis. The improper integral is truncated at Omega and verified
// by doubling Omega until the count settles.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "calculus.hpp"
#include "quadrature.hpp"

namespace fracstab {

struct IntegrationOptions {
  double eps = 1e-9;          // lower contour cutoff
  double omega_max = 1e3;     // initial truncation Omega
  double abs_tol = 1e-8;      // per-segment quadrature tolerance
  double rel_tol = 1e-8;
  int max_doublings = 6;      // tail verification budget
  double residual_warn = 0.05;
  double origin_floor = 1e-9;
};

enum class Verdict { Stable, Unstable, Indeterminate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "Stable";
    case Verdict::Unstable: return "Unstable";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

struct StabilityReport {
  double m_raw = std::numeric_limits<double>::quiet_NaN();
  long m_rounded = 0;
  double residual = std::numeric_limits<double>::quiet_NaN();
  Verdict verdict = Verdict::Indeterminate;
  double integral_value = 0.0;
  double integral_error_estimate = 0.0;
  double omega_used = 0.0;
  int doublings = 0;
  std::vector<double> tail_deltas;    // |M_k - M_{k-1}| per doubling
  std::vector<std::string> warnings;
};

/// Re{Delta'(i omega) / Delta(i omega)} for omega > 0.
inline double integrand(const CharFn& cf, const DerivedFn& dcf, double omega) {
  if (!(omega > 0.0)) throw Error("integrand: omega must be positive");
  return log_derivative(cf, dcf, std::complex<double>{0.0, omega}).real();
}

namespace detail {

/// Scale all coefficients by a power of two so max |coeff| lands in [1/2, 1).
/// Exact in binary floating point, so the report is invariant under
/// Delta -> c * Delta up to the representation of c itself.
inline CharFn rescale_pow2(const CharFn& cf) {
  double maxc = 0.0;
  for (const Term& t : cf.p0.terms) maxc = std::max(maxc, std::fabs(t.coeff));
  for (const Block& b : cf.delayed)
    for (const Term& t : b.poly.terms) maxc = std::max(maxc, std::fabs(t.coeff));
  int e = 0;
  std::frexp(maxc, &e);
  if (e == 0) return cf;
  const double f = std::ldexp(1.0, -e);
  CharFn out = cf;
  for (Term& t : out.p0.terms) t.coeff *= f;
  for (Block& b : out.delayed)
    for (Term& t : b.poly.terms) t.coeff *= f;
  return out;
}

}  // namespace detail

/// Evaluate the counting formula and classify. Never throws on numerical
/// trouble; every failure mode lands in verdict + warnings.
inline StabilityReport count_unstable(const CharFn& cf,
                                      const IntegrationOptions& opts = {}) {
  if (!(opts.eps > 0.0)) throw Error("count_unstable: eps must be positive");
  if (!(opts.omega_max > opts.eps)) throw Error("count_unstable: omega_max must exceed eps");
  if (!(opts.abs_tol > 0.0) || !(opts.rel_tol > 0.0))
    throw Error("count_unstable: tolerances must be positive");
  if (opts.max_doublings < 0) throw Error("count_unstable: max_doublings must be >= 0");
  if (!(opts.residual_warn > 0.0)) throw Error("count_unstable: residual_warn must be positive");
  if (!(opts.origin_floor >= 0.0)) throw Error("count_unstable: origin_floor must be >= 0");

  StabilityReport rep;
  const CharFn work = detail::rescale_pow2(cf);
  const double alpha = work.alpha_n();

  // Delta must approach a nonzero constant as s -> 0 on the sheet; a vanishing
  // limit is a root cluster at the branch point and the system is unstable.
  for (double th : {0.0, 0.25 * std::numbers::pi, -0.25 * std::numbers::pi}) {
    std::complex<double> probe{opts.eps * std::cos(th), opts.eps * std::sin(th)};
    if (std::abs(evaluate(work, probe)) <= opts.origin_floor) {
      rep.warnings.push_back("origin singularity: |Delta| <= origin_floor at |s| = eps");
      rep.verdict = Verdict::Unstable;
      return rep;
    }
  }

  const DerivedFn dwork = differentiate(work);
  auto g = [&](double w) {
    return log_derivative(work, dwork, std::complex<double>{0.0, w}).real();
  };

  const QuadratureOptions qopts{opts.abs_tol, opts.rel_tol, 4096};
  detail::Kahan integral;
  double integral_err = 0.0;
  double omega = opts.omega_max;
  bool converged = false;
  std::vector<std::pair<double, double>> partition;  // final panels, all segments

  try {
    QuadratureResult head = integrate_adaptive(g, opts.eps, omega, qopts);
    integral.add(head.value);
    integral_err += head.error_estimate;
    partition = std::move(head.intervals);
    double m_prev = 0.5 * alpha - integral.sum / std::numbers::pi;
    converged = opts.max_doublings == 0;
    for (int k = 1; k <= opts.max_doublings; ++k) {
      QuadratureResult tail = integrate_adaptive(g, omega, 2.0 * omega, qopts);
      omega *= 2.0;
      integral.add(tail.value);
      integral_err += tail.error_estimate;
      partition.insert(partition.end(), tail.intervals.begin(), tail.intervals.end());
      double m_cur = 0.5 * alpha - integral.sum / std::numbers::pi;
      rep.tail_deltas.push_back(std::fabs(m_cur - m_prev));
      rep.doublings = k;
      m_prev = m_cur;
      if (rep.tail_deltas.back() < 0.5 * opts.residual_warn) {
        converged = true;
        break;
      }
    }
  } catch (const RootOnContour& e) {
    rep.warnings.push_back(e.what());
    rep.verdict = Verdict::Indeterminate;
    rep.omega_used = omega;
    return rep;
  } catch (const MaxSubdivisions& e) {
    rep.warnings.push_back(e.what());
    rep.verdict = Verdict::Indeterminate;
    rep.omega_used = omega;
    return rep;
  }

  rep.integral_value = integral.sum;
  rep.integral_error_estimate = integral_err;
  rep.omega_used = omega;
  rep.m_raw = 0.5 * alpha - integral.sum / std::numbers::pi;

  // contour proximity: |Delta| collapsing against its own panel-local scale
  // means a root hugs the contour. Scan the nodes of the final partition; the
  // discarded coarse ancestors would compare values from far-apart omegas.
  bool proximity = false;
  for (const auto& [pa, pb] : partition) {
    const double c = 0.5 * (pa + pb);
    const double h = 0.5 * (pb - pa);
    std::array<double, 15> mag{};
    for (int i = 0; i < 7; ++i) {
      mag[i] = std::abs(evaluate(work, {0.0, c - h * detail::kXgk[i]}));
      mag[14 - i] = std::abs(evaluate(work, {0.0, c + h * detail::kXgk[i]}));
    }
    mag[7] = std::abs(evaluate(work, {0.0, c}));
    const double local = *std::max_element(mag.begin(), mag.end());
    for (int i = 0; i < 15; ++i)
      if (mag[i] < 1e-6 * local) {
        double w = i < 7 ? c - h * detail::kXgk[i] : (i == 7 ? c : c + h * detail::kXgk[14 - i]);
        rep.warnings.push_back("root near contour: |Delta(i w)| collapsed at w = " +
                               detail::shortest(w));
        proximity = true;
        break;
      }
    if (proximity) break;
  }

  if (!std::isfinite(rep.m_raw)) {
    rep.warnings.push_back("non-finite integrand; count unavailable");
    rep.verdict = Verdict::Indeterminate;
    rep.m_raw = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }

  rep.m_rounded = std::max(0L, std::lround(rep.m_raw));
  rep.residual = std::fabs(rep.m_raw - static_cast<double>(rep.m_rounded));

  if (!converged) {
    rep.warnings.push_back("tail not settled after " +
                           std::to_string(opts.max_doublings) +
                           " doublings; increase omega_max");
    rep.verdict = Verdict::Indeterminate;
  } else if (proximity) {
    rep.verdict = Verdict::Indeterminate;
  } else if (rep.m_raw < -opts.residual_warn) {
    rep.warnings.push_back("negative root count m_raw = " +
                           detail::shortest(rep.m_raw) +
                           "; check the expression's preconditions");
    rep.verdict = Verdict::Indeterminate;
  } else if (rep.residual <= opts.residual_warn) {
    rep.verdict = rep.m_rounded == 0 ? Verdict::Stable : Verdict::Unstable;
  } else {
    rep.warnings.push_back("m_raw = " + detail::shortest(rep.m_raw) +
                           " is far from an integer (residual " +
                           detail::shortest(rep.residual) + ")");
    rep.verdict = Verdict::Indeterminate;
  }
  return rep;
}

}  // namespace fracstab
