#pragma once

// Independent stability witness: numerical inverse Laplace transform of
// 1/Delta(s) along a shifted Bromwich line, with Euler acceleration of the
// alternating tail (Valsa-Brancik style), plus a crude decay classifier on
// the resulting impulse trace.
//
// The abscissa a bounds usable horizons: samples at time t see the plane
// Re s <= a/t, so a growing mode at Re s = r is only visible for t < a/r.
// The series length bounds resolvable frequencies by roughly ns*pi/t_max;
// raise series_len when hunting oscillatory growth at long horizons.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "calculus.hpp"

namespace fracstab {

/// Trace too short or too damaged to classify.
class TooFewSamples : public Error {
public:
  using Error::Error;
};

struct InversionOptions {
  double shift_a = 6.0;   // Bromwich shift, e^a amplifies roundoff
  int series_len = 20;    // plain terms before Euler averaging
  int euler_depth = 19;   // binomially weighted tail terms
};

struct ImpulseTrace {
  std::vector<double> times;
  std::vector<double> values;  // NaN marks a failed sample
};

enum class DecayVerdict { Decaying, Growing, Inconclusive };

inline const char* to_string(DecayVerdict v) {
  switch (v) {
    case DecayVerdict::Decaying: return "Decaying";
    case DecayVerdict::Growing: return "Growing";
    case DecayVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

namespace detail {

/// w[j] = 2^-nd * sum_{m=0}^{nd-1-j} C(nd, m), j = 0..nd-1: the Euler
/// averaging weights for the last nd series terms.
inline std::vector<double> euler_weights(int nd) {
  std::vector<double> binom(nd + 1);
  binom[0] = 1.0;
  for (int m = 1; m <= nd; ++m)
    binom[m] = binom[m - 1] * (nd - m + 1) / m;
  std::vector<double> w(nd);
  const double scale = std::ldexp(1.0, -nd);
  for (int j = 0; j < nd; ++j) {
    Kahan acc;
    for (int m = 0; m <= nd - 1 - j; ++m) acc.add(binom[m]);
    w[j] = acc.sum * scale;
  }
  return w;
}

inline double invert_at(const std::function<std::complex<double>(std::complex<double>)>& F,
                        double t, const InversionOptions& opts,
                        const std::vector<double>& euler) {
  const double a = opts.shift_a;
  const int ns = opts.series_len;
  const int nd = opts.euler_depth;
  Kahan acc;
  for (int n = 0; n <= ns + nd; ++n) {
    std::complex<double> sn{a / t, n * std::numbers::pi / t};
    double wn = n == 0 ? 0.5 : (n <= ns ? 1.0 : euler[n - ns - 1]);
    double sign = (n % 2 == 0) ? 1.0 : -1.0;
    acc.add(wn * sign * F(sn).real());
  }
  return std::exp(a) / t * acc.sum;
}

}  // namespace detail

/// f(t) for one F at one t > 0.
inline double invert_laplace(
    const std::function<std::complex<double>(std::complex<double>)>& F, double t,
    const InversionOptions& opts = {}) {
  if (!(t > 0.0)) throw Error("invert_laplace: t must be positive");
  if (!(opts.shift_a > 0.0)) throw Error("invert_laplace: shift_a must be positive");
  if (opts.series_len < 1 || opts.euler_depth < 1)
    throw Error("invert_laplace: series_len and euler_depth must be >= 1");
  return detail::invert_at(F, t, opts, detail::euler_weights(opts.euler_depth));
}

/// Impulse response h(t) of 1/Delta on an equispaced grid
/// t_k = t_max * k / n, k = 1..n. Samples where the transform evaluation
/// fails come back as NaN instead of aborting the trace.
inline ImpulseTrace impulse_response(const CharFn& cf, double t_max, int n_points,
                                     const InversionOptions& opts = {}) {
  if (!(t_max > 0.0)) throw Error("impulse_response: t_max must be positive");
  if (n_points < 2) throw Error("impulse_response: need at least 2 points");
  if (!(opts.shift_a > 0.0)) throw Error("impulse_response: shift_a must be positive");
  if (opts.series_len < 1 || opts.euler_depth < 1)
    throw Error("impulse_response: series_len and euler_depth must be >= 1");

  const auto euler = detail::euler_weights(opts.euler_depth);
  auto F = [&cf](std::complex<double> s) { return 1.0 / evaluate(cf, s); };

  ImpulseTrace tr;
  tr.times.reserve(n_points);
  tr.values.reserve(n_points);
  for (int k = 1; k <= n_points; ++k) {
    double t = t_max * k / n_points;
    tr.times.push_back(t);
    double v;
    try {
      v = detail::invert_at(F, t, opts, euler);
    } catch (const Error&) {
      v = std::numeric_limits<double>::quiet_NaN();
    }
    tr.values.push_back(v);
  }
  return tr;
}

/// Compare RMS amplitude of the last quarter of the trace against the second
/// quarter: ratio < 1/2 decaying, > 2 growing, otherwise inconclusive.
/// Ignores NaN samples; throws TooFewSamples below 16 usable points.
inline DecayVerdict decay_check(const ImpulseTrace& tr) {
  const std::size_t n = tr.values.size();
  std::size_t usable = 0;
  for (double v : tr.values)
    if (std::isfinite(v)) ++usable;
  if (usable < 16) throw TooFewSamples("decay_check: fewer than 16 usable samples");

  auto rms = [&](std::size_t lo, std::size_t hi) -> double {
    detail::Kahan acc;
    std::size_t count = 0;
    for (std::size_t i = lo; i < hi; ++i)
      if (std::isfinite(tr.values[i])) {
        acc.add(tr.values[i] * tr.values[i]);
        ++count;
      }
    return count == 0 ? std::numeric_limits<double>::quiet_NaN()
                      : std::sqrt(acc.sum / count);
  };

  double second = rms(n / 4, n / 2);
  double last = rms(3 * n / 4, n);
  if (!std::isfinite(second) || !std::isfinite(last) || second == 0.0)
    return DecayVerdict::Inconclusive;
  double ratio = last / second;
  if (ratio < 0.5) return DecayVerdict::Decaying;
  if (ratio > 2.0) return DecayVerdict::Growing;
  return DecayVerdict::Inconclusive;
}

}  // namespace fracstab
