// fracstab: stability front end for fractional delay systems.

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <fracstab/cli.hpp>

namespace {

struct CommonArgs {
  std::string expr;
  std::vector<std::string> params;
  fracstab::IntegrationOptions iopts;
  bool json = false;
  std::string output;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("expr", a.expr, "characteristic function, e.g. \"s^1.5 + 2*exp(-s)\"")
      ->required();
  cmd->add_option("--param", a.params, "parameter binding NAME=VALUE (repeatable)");
  cmd->add_option("--eps", a.iopts.eps, "lower contour cutoff");
  cmd->add_option("--omega-max", a.iopts.omega_max, "initial truncation frequency");
  cmd->add_option("--abs-tol", a.iopts.abs_tol, "quadrature absolute tolerance");
  cmd->add_option("--rel-tol", a.iopts.rel_tol, "quadrature relative tolerance");
  cmd->add_option("--max-doublings", a.iopts.max_doublings, "tail verification budget");
  cmd->add_flag("--json", a.json, "emit JSON instead of text");
  cmd->add_option("--output", a.output, "write to FILE instead of stdout");
}

fracstab::ParamBinding parse_binding(const std::vector<std::string>& kvs) {
  fracstab::ParamBinding b;
  for (const std::string& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw fracstab::Error("--param expects NAME=VALUE, got '" + kv + "'");
    std::string val = kv.substr(eq + 1);
    double v = 0.0;
    auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec != std::errc{} || p != val.data() + val.size())
      throw fracstab::Error("bad numeric value in '" + kv + "'");
    b[kv.substr(0, eq)] = v;
  }
  return b;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw fracstab::Error("cannot open output file '" + path + "'");
  f << content;
}

void print_warnings(const fracstab::StabilityReport& rep) {
  for (const std::string& w : rep.warnings) std::cerr << "warning: " << w << "\n";
}

int do_check(const CommonArgs& a) {
  using namespace fracstab;
  ParsedExpr pe = parse(a.expr);
  ParamBinding binding = parse_binding(a.params);
  CharFn cf = bind_and_normalize(pe, binding);
  StabilityReport rep = count_unstable(cf, a.iopts);
  print_warnings(rep);
  if (a.json) {
    emit(a.output, report_to_json(a.expr, binding, cf.alpha_n(), rep).dump(2) + "\n");
  } else {
    std::string out = verdict_label(rep) + "\n";
    out += "m_raw = " + detail::shortest(rep.m_raw) + "\n";
    out += "residual = " + detail::shortest(rep.residual) + "\n";
    out += "alpha_n = " + detail::shortest(cf.alpha_n()) + "\n";
    out += "omega_used = " + detail::shortest(rep.omega_used) + "\n";
    out += "doublings = " + std::to_string(rep.doublings) + "\n";
    emit(a.output, out);
  }
  return verdict_exit_code(rep.verdict);
}

int do_integrand(const CommonArgs& a, double from, double to, int points, bool linear) {
  using namespace fracstab;
  CharFn cf = bind_and_normalize(parse(a.expr), parse_binding(a.params));
  emit(a.output, integrand_csv(cf, sample_grid(from, to, points, linear)));
  return 0;
}

int do_impulse(const CommonArgs& a, double t_max, int points,
               const fracstab::InversionOptions& inv) {
  using namespace fracstab;
  CharFn cf = bind_and_normalize(parse(a.expr), parse_binding(a.params));
  emit(a.output, impulse_csv(impulse_response(cf, t_max, points, inv)));
  return 0;
}

int do_sweep(const CommonArgs& a, const fracstab::SweepSpec& spec) {
  using namespace fracstab;
  ParsedExpr pe = parse(a.expr);
  auto points = run_sweep(pe, spec, parse_binding(a.params), a.iopts);
  emit(a.output, sweep_csv(points));
  return 0;
}

int do_bisect(const CommonArgs& a, const fracstab::SweepSpec& spec) {
  using namespace fracstab;
  ParsedExpr pe = parse(a.expr);
  BisectResult r = run_bisect(pe, spec, parse_binding(a.params), a.iopts);
  emit(a.output, bisect_to_json(r).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"root counting and stability verdicts for fractional delay systems"};
  app.require_subcommand(1);

  CommonArgs check_a, integrand_a, impulse_a, sweep_a, bisect_a;

  CLI::App* check = app.add_subcommand("check", "stability verdict for one system");
  add_common(check, check_a);

  CLI::App* integrand = app.add_subcommand("integrand", "dump Re{Delta'/Delta} on i*omega as CSV");
  add_common(integrand, integrand_a);
  double from = 0.0, to = 0.0;
  int ipoints = 200;
  bool linear = false;
  integrand->add_option("--from", from, "first omega")->required();
  integrand->add_option("--to", to, "last omega")->required();
  integrand->add_option("--points", ipoints, "sample count");
  integrand->add_flag("--linear", linear, "linear spacing instead of logarithmic");

  CLI::App* impulse = app.add_subcommand("impulse", "impulse response of 1/Delta as CSV");
  add_common(impulse, impulse_a);
  double t_max = 0.0;
  int tpoints = 200;
  fracstab::InversionOptions inv;
  impulse->add_option("--tmax", t_max, "trace horizon")->required();
  impulse->add_option("--points", tpoints, "sample count");
  impulse->add_option("--invlap-a", inv.shift_a, "Bromwich shift");
  impulse->add_option("--invlap-ns", inv.series_len, "plain series terms");
  impulse->add_option("--invlap-nd", inv.euler_depth, "Euler averaging depth");

  CLI::App* sweep = app.add_subcommand("sweep", "verdicts over a parameter grid as CSV");
  add_common(sweep, sweep_a);
  fracstab::SweepSpec sweep_spec;
  sweep->add_option("--over", sweep_spec.param, "parameter to sweep")->required();
  sweep->add_option("--lo", sweep_spec.lo, "grid start")->required();
  sweep->add_option("--hi", sweep_spec.hi, "grid end")->required();
  sweep_spec.steps = 11;
  sweep->add_option("--steps", sweep_spec.steps, "grid size");

  CLI::App* bisect = app.add_subcommand("bisect", "locate a stability boundary");
  add_common(bisect, bisect_a);
  fracstab::SweepSpec bisect_spec;
  bisect->add_option("--over", bisect_spec.param, "parameter to bisect")->required();
  bisect->add_option("--lo", bisect_spec.lo, "bracket start")->required();
  bisect->add_option("--hi", bisect_spec.hi, "bracket end")->required();
  bisect_spec.tol = 1e-3;
  bisect->add_option("--tol", bisect_spec.tol, "bracket width target");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    if (check->parsed()) return do_check(check_a);
    if (integrand->parsed()) return do_integrand(integrand_a, from, to, ipoints, linear);
    if (impulse->parsed()) return do_impulse(impulse_a, t_max, tpoints, inv);
    if (sweep->parsed()) return do_sweep(sweep_a, sweep_spec);
    if (bisect->parsed()) return do_bisect(bisect_a, bisect_spec);
  } catch (const fracstab::SyntaxError& e) {
    std::cerr << "syntax error: " << e.what() << "\n";
    return 3;
  } catch (const fracstab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
