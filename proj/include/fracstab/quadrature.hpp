#pragma once

// Globally adaptive Gauss-Kronrod 7-15 quadrature on a finite interval.
// Worst-panel-first bisection; the panel error model follows the classic
// QUADPACK scaling err = resasc * min(1, (200 |K15 - G7| / resasc)^1.5).
//
// Evaluation contract: the integrand is called at exactly 15 strictly
// ascending points per panel, one panel at a time, so callers may log
// samples and reason about them in consecutive groups of 15.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "expr.hpp"

namespace fracstab {

/// Panel budget exhausted before the error target; usually a root on or
/// hugging the contour, or a non-integrable feature.
class MaxSubdivisions : public Error {
public:
  using Error::Error;
};

struct QuadratureOptions {
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  int max_panels = 4096;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int panels = 0;                                    // panels in the final partition
  std::vector<std::pair<double, double>> intervals;  // final partition, ascending
};

namespace detail {

// Kronrod-15 abscissae on [0, 1], descending; odd indices are the Gauss-7
// subset.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a = 0.0, b = 0.0;
  double value = 0.0;
  double error = 0.0;
};

template <class F>
Panel eval_panel(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);

  std::array<double, 15> fv{};
  for (int i = 0; i < 7; ++i) fv[i] = f(c - h * kXgk[i]);
  fv[7] = f(c);
  for (int i = 6; i >= 0; --i) fv[14 - i] = f(c + h * kXgk[i]);

  double resk = kWgk[7] * fv[7];
  double resg = kWg[3] * fv[7];
  double resabs = kWgk[7] * std::fabs(fv[7]);
  for (int i = 0; i < 7; ++i) {
    double pair = fv[i] + fv[14 - i];
    resk += kWgk[i] * pair;
    resabs += kWgk[i] * (std::fabs(fv[i]) + std::fabs(fv[14 - i]));
  }
  resg += kWg[0] * (fv[1] + fv[13]);
  resg += kWg[1] * (fv[3] + fv[11]);
  resg += kWg[2] * (fv[5] + fv[9]);

  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::fabs(fv[7] - mean);
  for (int i = 0; i < 7; ++i)
    resasc += kWgk[i] * (std::fabs(fv[i] - mean) + std::fabs(fv[14 - i] - mean));

  Panel p{a, b, resk * h, std::fabs((resk - resg) * h)};
  resabs *= h;
  resasc *= h;
  if (resasc != 0.0 && p.error != 0.0)
    p.error = resasc * std::min(1.0, std::pow(200.0 * p.error / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  if (resabs > uflow / (50.0 * eps))
    p.error = std::max(50.0 * eps * resabs, p.error);
  return p;
}

}  // namespace detail

/// Integrate f over [a, b] until total error <= max(abs_tol, rel_tol * |I|).
/// Deterministic: the final sum runs over panels in left-to-right order with
/// compensated summation. Throws MaxSubdivisions when the budget runs out or
/// a panel can no longer be split in double precision.
inline QuadratureResult integrate_adaptive(
    const std::function<double(double)>& f, double a, double b,
    const QuadratureOptions& opts = {}) {
  if (!(a < b)) throw Error("integrate_adaptive: need a < b");
  if (!(opts.abs_tol > 0.0) || !(opts.rel_tol > 0.0))
    throw Error("integrate_adaptive: tolerances must be positive");

  std::vector<detail::Panel> panels;
  panels.push_back(detail::eval_panel(f, a, b));
  double total_value = panels[0].value;
  double total_error = panels[0].error;

  auto worse = [](const detail::Panel& x, const detail::Panel& y) {
    if (x.error != y.error) return x.error < y.error;
    return x.a > y.a;  // deterministic tie-break
  };
  std::make_heap(panels.begin(), panels.end(), worse);

  while (total_error > std::max(opts.abs_tol, opts.rel_tol * std::fabs(total_value))) {
    if (static_cast<int>(panels.size()) >= opts.max_panels)
      throw MaxSubdivisions("panel budget " + std::to_string(opts.max_panels) +
                            " exhausted; integrand feature unresolved");
    std::pop_heap(panels.begin(), panels.end(), worse);
    detail::Panel worst = panels.back();
    panels.pop_back();

    double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b))
      throw MaxSubdivisions("panel at " + detail::shortest(worst.a) +
                            " no longer splittable; non-integrable feature");

    detail::Panel left = detail::eval_panel(f, worst.a, mid);
    detail::Panel right = detail::eval_panel(f, mid, worst.b);
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push_back(left);
    std::push_heap(panels.begin(), panels.end(), worse);
    panels.push_back(right);
    std::push_heap(panels.begin(), panels.end(), worse);
  }

  std::sort(panels.begin(), panels.end(),
            [](const detail::Panel& x, const detail::Panel& y) { return x.a < y.a; });
  QuadratureResult out;
  detail::Kahan value;
  out.intervals.reserve(panels.size());
  for (const detail::Panel& p : panels) {
    value.add(p.value);
    out.error_estimate += p.error;
    out.intervals.emplace_back(p.a, p.b);
  }
  out.value = value.sum;
  out.panels = static_cast<int>(panels.size());
  return out;
}

}  // namespace fracstab
