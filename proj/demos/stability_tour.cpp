// Walks four classic fractional delay systems through the full pipeline:
// parse, normalize, count unstable roots, and cross-check with an impulse
// trace. Build and run: ./stability_tour

#include <iostream>
#include <string>
#include <vector>

#include <fracstab/cli.hpp>

int main() {
  using namespace fracstab;

  struct Case {
    const char* label;
    const char* expr;
    ParamBinding params;
    double t_max;
    InversionOptions inv;
  };

  std::vector<Case> cases = {
      {"fractional multi-order",
       "s^2.6179938779914944 + s^1.5707963267948966 + s^1.0471975511965976 + 1",
       {}, 40.0, {}},
      {"feedback gain K = 21 (stable side)",
       "s + K*(s^0.5 + 1)*exp(-s^0.5)", {{"K", 21.0}}, 80.0, {6.0, 400, 19}},
      {"feedback gain K = 22 (unstable side)",
       "s + K*(s^0.5 + 1)*exp(-s^0.5)", {{"K", 22.0}}, 80.0, {6.0, 400, 19}},
      {"retarded delay, tau = 1",
       "s^1.5 - 1.5*s + 4*s^0.5 + 8 - 1.5*s*exp(-tau*s)", {{"tau", 1.0}}, 120.0, {}},
  };

  for (const Case& c : cases) {
    CharFn cf = bind_and_normalize(parse(c.expr), c.params);
    StabilityReport rep = count_unstable(cf);
    DecayVerdict dec = decay_check(impulse_response(cf, c.t_max, 200, c.inv));
    std::cout << c.label << "\n  " << format(cf) << "\n  verdict: " << verdict_label(rep)
              << "  (m_raw = " << detail::shortest(rep.m_raw)
              << ", omega = " << detail::shortest(rep.omega_used)
              << ")\n  impulse trace: " << to_string(dec) << "\n\n";
  }
  return 0;
}
