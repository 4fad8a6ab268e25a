#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "fracstab/rational.hpp"
#include "fracstab/rouche.hpp"
#include "test_support.hpp"

using namespace fracstab;
using Catch::Matchers::WithinAbs;

namespace {

CharFn bind1(const std::string& text, ParamBinding params = {}) {
  return bind_and_normalize(parse(text), params);
}

// expand prod (s - r_i) into ascending real coefficients
std::vector<double> expand(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> c{1.0};
  for (auto r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = next;
  }
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

std::string poly_text(const std::vector<double>& asc) {
  std::string s;
  for (std::size_t i = asc.size(); i-- > 0;) {
    if (asc[i] == 0.0) continue;
    if (!s.empty()) s += " + ";
    s += "(" + detail::shortest(asc[i]) + ")*s^" + std::to_string(i);
  }
  return s;
}

}  // namespace

TEST_CASE("integer polynomial extraction", "[rational]") {
  IntPoly p = from_charfn(bind1("s^2 + 3*s + 2"));
  REQUIRE(p.coeffs == std::vector<double>{2.0, 3.0, 1.0});
  CHECK(p.degree() == 2);

  IntPoly q = from_charfn(bind1("4*s^3 - s + 0.25"));
  REQUIRE(q.coeffs == std::vector<double>{0.25, -1.0, 0.0, 4.0});
}

TEST_CASE("extraction refuses what the oracle cannot handle", "[rational]") {
  CHECK_THROWS_AS(from_charfn(bind1("s + 2*exp(-s)")), NotRational);
  CHECK_THROWS_AS(from_charfn(bind1("s^0.5 + 1")), NotRational);
  CHECK_THROWS_AS(from_charfn(bind1("s^13 + 1")), NotRational);
  CHECK_NOTHROW(from_charfn(bind1("s^12 + 1")));
}

TEST_CASE("companion roots of small polynomials", "[rational]") {
  SECTION("real roots, sorted") {
    auto rs = roots(from_charfn(bind1("s^2 + 3*s + 2")));
    REQUIRE(rs.size() == 2);
    CHECK_THAT(rs[0].real(), WithinAbs(-2.0, 1e-9));
    CHECK_THAT(rs[0].imag(), WithinAbs(0.0, 1e-9));
    CHECK_THAT(rs[1].real(), WithinAbs(-1.0, 1e-9));
  }
  SECTION("complex pair in the right half plane") {
    IntPoly p = from_charfn(bind1("s^2 - 2*s + 5"));
    auto rs = roots(p);
    REQUIRE(rs.size() == 2);
    CHECK_THAT(rs[0].real(), WithinAbs(1.0, 1e-9));
    CHECK_THAT(rs[0].imag(), WithinAbs(-2.0, 1e-9));
    CHECK_THAT(rs[1].imag(), WithinAbs(2.0, 1e-9));
    CHECK(count_rhp(p) == 2);
  }
  SECTION("linear closed form") {
    auto rs = roots(from_charfn(bind1("2*s + 6")));
    REQUIRE(rs.size() == 1);
    CHECK(rs[0] == std::complex<double>(-3.0, 0.0));
  }
}

TEST_CASE("imaginary axis roots are flagged", "[rational]") {
  IntPoly p = from_charfn(bind1("s^2 + 1"));
  CHECK_THROWS_AS(count_rhp(p), BoundaryRoot);
  IntPoly origin = from_charfn(bind1("s^2 + s"));
  CHECK_THROWS_AS(count_rhp(origin), BoundaryRoot);
}

TEST_CASE("planted roots are recovered and counted", "[rational]") {
  std::mt19937 rng(515151);
  std::uniform_real_distribution<double> re(0.1, 2.0);
  std::uniform_real_distribution<double> im(0.2, 3.0);
  std::uniform_int_distribution<int> sign(0, 1);
  std::uniform_int_distribution<int> n_real(0, 2);
  std::uniform_int_distribution<int> n_pairs(0, 2);

  int done = 0;
  while (done < 25) {
    std::vector<std::complex<double>> planted;
    int reals = n_real(rng);
    int pairs = n_pairs(rng);
    if (reals + 2 * pairs == 0) continue;
    for (int i = 0; i < reals; ++i)
      planted.emplace_back(sign(rng) ? re(rng) : -re(rng), 0.0);
    for (int i = 0; i < pairs; ++i) {
      double a = sign(rng) ? re(rng) : -re(rng);
      double b = im(rng);
      planted.emplace_back(a, b);
      planted.emplace_back(a, -b);
    }
    int rhp_true = 0;
    for (auto r : planted)
      if (r.real() > 0) ++rhp_true;

    std::vector<double> asc = expand(planted);
    CharFn cf = bind1(poly_text(asc));
    IntPoly p = from_charfn(cf);
    auto rs = roots(p);
    REQUIRE(rs.size() == planted.size());

    std::sort(planted.begin(), planted.end(), [](auto a, auto b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (std::size_t i = 0; i < rs.size(); ++i)
      CHECK(std::abs(rs[i] - planted[i]) < 1e-7);

    CHECK(count_rhp(p) == rhp_true);

    IntegrationOptions opts;
    opts.omega_max = 200.0;
    StabilityReport rep = count_unstable(cf, opts);
    CHECK(rep.m_rounded == rhp_true);
    CHECK(rep.residual < 0.05);
    ++done;
  }
}
