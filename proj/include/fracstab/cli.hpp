#pragma once

// Support layer for the command-line tool: parameter sweeps, boundary
// bisection, and the JSON / CSV serializations. Kept out of main() so the
// logic is unit-testable.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "laplace.hpp"
#include "rouche.hpp"

namespace fracstab {

class SameVerdictAtEnds : public Error {
public:
  using Error::Error;
};

class IndeterminateAtEnds : public Error {
public:
  using Error::Error;
};

struct SweepSpec {
  std::string param;
  double lo = 0.0;
  double hi = 0.0;
  int steps = 0;    // sweep
  double tol = 0.0; // bisect
};

/// Display form of a verdict; unstable verdicts carry the root count.
inline std::string verdict_label(Verdict v, long count) {
  if (v == Verdict::Unstable && count > 0)
    return "Unstable(" + std::to_string(count) + ")";
  return to_string(v);
}

inline std::string verdict_label(const StabilityReport& r) {
  return verdict_label(r.verdict, r.m_rounded);
}

inline int verdict_exit_code(Verdict v) {
  switch (v) {
    case Verdict::Stable: return 0;
    case Verdict::Unstable: return 1;
    case Verdict::Indeterminate: return 2;
  }
  return 2;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json report_to_json(const std::string& expr_text,
                                             const ParamBinding& params,
                                             double alpha_n,
                                             const StabilityReport& r) {
  nlohmann::ordered_json j;
  j["expression"] = expr_text;
  nlohmann::ordered_json pj = nlohmann::ordered_json::object();
  for (const auto& [k, v] : params) pj[k] = v;
  j["params"] = pj;
  j["alpha_n"] = alpha_n;
  j["m_raw"] = r.m_raw;
  j["m_rounded"] = r.m_rounded;
  j["residual"] = r.residual;
  j["verdict"] = verdict_label(r);
  j["integral_value"] = r.integral_value;
  j["integral_error_estimate"] = r.integral_error_estimate;
  j["omega_used"] = r.omega_used;
  j["doublings"] = r.doublings;
  j["warnings"] = r.warnings;
  return j;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepPoint {
  double value = 0.0;
  StabilityReport report;
};

inline std::vector<SweepPoint> run_sweep(const ParsedExpr& expr,
                                         const SweepSpec& spec,
                                         const ParamBinding& fixed,
                                         const IntegrationOptions& opts = {}) {
  if (std::find(expr.params.begin(), expr.params.end(), spec.param) ==
      expr.params.end())
    throw Error("parameter '" + spec.param + "' does not appear in the expression");
  if (!(spec.lo < spec.hi)) throw Error("sweep: need lo < hi");
  if (spec.steps < 2) throw Error("sweep: need steps >= 2");

  std::vector<SweepPoint> out;
  out.reserve(spec.steps);
  for (int k = 0; k < spec.steps; ++k) {
    double v = spec.lo + (spec.hi - spec.lo) * k / (spec.steps - 1);
    ParamBinding b = fixed;
    b[spec.param] = v;
    CharFn cf = bind_and_normalize(expr, b);
    out.push_back(SweepPoint{v, count_unstable(cf, opts)});
  }
  return out;
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "value,m_raw,m_rounded,verdict\n";
  for (const SweepPoint& p : points) {
    out += detail::shortest(p.value);
    out += ',';
    out += detail::shortest(p.report.m_raw);
    out += ',';
    out += std::to_string(p.report.m_rounded);
    out += ',';
    out += verdict_label(p.report);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// bisect

struct BisectResult {
  std::string param;
  double critical = 0.0;
  std::string lo_verdict;
  std::string hi_verdict;
  int iterations = 0;
};

/// Bisect on the m_rounded transition between lo and hi. An Indeterminate
/// midpoint (root brushing the contour) shrinks the bracket via quarter
/// points toward whichever side still classifies.
inline BisectResult run_bisect(const ParsedExpr& expr, const SweepSpec& spec,
                               const ParamBinding& fixed,
                               const IntegrationOptions& opts = {}) {
  if (std::find(expr.params.begin(), expr.params.end(), spec.param) ==
      expr.params.end())
    throw Error("parameter '" + spec.param + "' does not appear in the expression");
  if (!(spec.lo < spec.hi)) throw Error("bisect: need lo < hi");
  if (!(spec.tol > 0.0)) throw Error("bisect: need tol > 0");

  auto probe = [&](double v) {
    ParamBinding b = fixed;
    b[spec.param] = v;
    return count_unstable(bind_and_normalize(expr, b), opts);
  };

  StabilityReport lo_r = probe(spec.lo);
  StabilityReport hi_r = probe(spec.hi);
  if (lo_r.verdict == Verdict::Indeterminate || hi_r.verdict == Verdict::Indeterminate)
    throw IndeterminateAtEnds("endpoint verdict is Indeterminate");
  if (lo_r.m_rounded == hi_r.m_rounded)
    throw SameVerdictAtEnds("both endpoints give " + verdict_label(lo_r));

  const long lo_key = lo_r.m_rounded;
  double lo = spec.lo, hi = spec.hi;
  int iterations = 0;

  while (hi - lo > spec.tol && iterations < 200) {
    double mid = 0.5 * (lo + hi);
    StabilityReport r = probe(mid);
    ++iterations;
    if (r.verdict != Verdict::Indeterminate) {
      (r.m_rounded == lo_key ? lo : hi) = mid;
      continue;
    }
    double q1 = 0.5 * (lo + mid);
    StabilityReport r1 = probe(q1);
    ++iterations;
    if (r1.verdict != Verdict::Indeterminate) {
      (r1.m_rounded == lo_key ? lo : hi) = q1;
      continue;
    }
    double q2 = 0.5 * (mid + hi);
    StabilityReport r2 = probe(q2);
    ++iterations;
    if (r2.verdict != Verdict::Indeterminate) {
      (r2.m_rounded == lo_key ? lo : hi) = q2;
      continue;
    }
    break;  // indeterminate plateau; report the bracket center
  }

  return BisectResult{spec.param, 0.5 * (lo + hi), verdict_label(lo_r),
                      verdict_label(hi_r), iterations};
}

inline nlohmann::ordered_json bisect_to_json(const BisectResult& r) {
  nlohmann::ordered_json j;
  j["param"] = r.param;
  j["critical"] = r.critical;
  j["lo_verdict"] = r.lo_verdict;
  j["hi_verdict"] = r.hi_verdict;
  j["iterations"] = r.iterations;
  return j;
}

// ---------------------------------------------------------------------------
// CSV traces

/// Sample grid for integrand dumps: log-spaced by default. points == 1
/// requires from == to (single sample).
inline std::vector<double> sample_grid(double from, double to, int points,
                                       bool linear) {
  if (!(from > 0.0)) throw Error("grid: need from > 0");
  if (points < 1) throw Error("grid: need points >= 1");
  if (points == 1) {
    if (from != to) throw Error("grid: single point needs from == to");
    return {from};
  }
  if (!(from < to)) throw Error("grid: need from < to");
  std::vector<double> g;
  g.reserve(points);
  for (int k = 0; k < points; ++k) {
    double u = static_cast<double>(k) / (points - 1);
    g.push_back(linear ? from + (to - from) * u
                       : from * std::pow(to / from, u));
  }
  return g;
}

inline std::string integrand_csv(const CharFn& cf, const std::vector<double>& grid) {
  const DerivedFn d = differentiate(cf);
  std::string out = "omega,value\n";
  for (double w : grid) {
    out += detail::shortest(w);
    out += ',';
    try {
      out += detail::shortest(integrand(cf, d, w));
    } catch (const Error&) {
      // invalid sample: empty value field
    }
    out += '\n';
  }
  return out;
}

inline std::string impulse_csv(const ImpulseTrace& tr) {
  std::string out = "t,h\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    out += detail::shortest(tr.times[i]);
    out += ',';
    if (std::isfinite(tr.values[i])) out += detail::shortest(tr.values[i]);
    out += '\n';
  }
  const char* verdict = "Inconclusive";
  try {
    verdict = to_string(decay_check(tr));
  } catch (const TooFewSamples&) {
  }
  out += "# decay: ";
  out += verdict;
  out += '\n';
  return out;
}

}  // namespace fracstab
