#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include <fracstab/expr.hpp>

#include "test_support.hpp"

using namespace fracstab;

TEST_CASE("plain polynomial normalizes to sorted terms", "[expr]") {
  CharFn cf = bind_and_normalize(parse("2 + 3*s + s^2"));
  REQUIRE(cf.delayed.empty());
  REQUIRE(cf.p0.terms.size() == 3);
  CHECK(cf.p0.terms[0] == Term{1.0, 2.0});
  CHECK(cf.p0.terms[1] == Term{3.0, 1.0});
  CHECK(cf.p0.terms[2] == Term{2.0, 0.0});
  CHECK(cf.alpha_n() == 2.0);
}

TEST_CASE("binding substitutes parameters and groups delay blocks", "[expr]") {
  ParsedExpr pe = parse(testutil::kEx2);
  REQUIRE(pe.params == std::vector<std::string>{"K"});
  CharFn cf = bind_and_normalize(pe, {{"K", 21.0}});
  REQUIRE(cf.p0.terms.size() == 1);
  CHECK(cf.p0.terms[0] == Term{1.0, 1.0});
  REQUIRE(cf.delayed.size() == 1);
  CHECK(cf.delayed[0].delay == DelayFactor{1.0, 0.5});
  REQUIRE(cf.delayed[0].poly.terms.size() == 2);
  CHECK(cf.delayed[0].poly.terms[0] == Term{21.0, 0.5});
  CHECK(cf.delayed[0].poly.terms[1] == Term{21.0, 0.0});
}

TEST_CASE("delayed-damping example normalizes with two parameters bound", "[expr]") {
  CharFn cf = bind_and_normalize(parse(testutil::kEx3), {{"tau", 1.0}});
  REQUIRE(cf.p0.terms.size() == 4);
  CHECK(cf.alpha_n() == 1.5);
  CHECK(cf.p0.terms[1] == Term{-1.5, 1.0});
  REQUIRE(cf.delayed.size() == 1);
  CHECK(cf.delayed[0].delay == DelayFactor{1.0, 1.0});
  REQUIRE(cf.delayed[0].poly.terms.size() == 1);
  CHECK(cf.delayed[0].poly.terms[0] == Term{-1.5, 1.0});
}

TEST_CASE("blocks sort by (beta, zeta) and duplicates merge", "[expr]") {
  CharFn cf = bind_and_normalize(
      parse("s^2 + exp(-2*s) + s*exp(-s^0.5) + 3*exp(-2*s) + exp(-s)"));
  REQUIRE(cf.delayed.size() == 3);
  CHECK(cf.delayed[0].delay == DelayFactor{1.0, 0.5});
  CHECK(cf.delayed[1].delay == DelayFactor{1.0, 1.0});
  CHECK(cf.delayed[2].delay == DelayFactor{2.0, 1.0});
  CHECK(cf.delayed[2].poly.terms[0] == Term{4.0, 0.0});
}

TEST_CASE("product of exp factors adds delay coefficients", "[expr]") {
  CharFn cf = bind_and_normalize(parse("s^2 + exp(-s)*exp(-2*s)"));
  REQUIRE(cf.delayed.size() == 1);
  CHECK(cf.delayed[0].delay == DelayFactor{3.0, 1.0});
}

TEST_CASE("mixed powers under a product of exp factors are rejected", "[expr]") {
  CHECK_THROWS_AS(bind_and_normalize(parse("s + exp(-s)*exp(-s^0.5)")),
                  NotRepresentable);
}

TEST_CASE("cancelling cross terms vanish exactly", "[expr]") {
  CharFn cf = bind_and_normalize(parse("(s^0.5 + 1)*(s^0.5 - 1)"));
  REQUIRE(cf.delayed.empty());
  REQUIRE(cf.p0.terms.size() == 2);
  CHECK(cf.p0.terms[0] == Term{1.0, 1.0});
  CHECK(cf.p0.terms[1] == Term{-1.0, 0.0});
}

TEST_CASE("pi and constant folding reach exponents and coefficients", "[expr]") {
  CharFn cf = bind_and_normalize(parse("s^(pi*0.5) + exp(-2)*s"));
  CHECK(cf.p0.terms[0].exponent == std::numbers::pi / 2.0);
  CHECK(cf.p0.terms[1].coeff == std::exp(-2.0));
}

TEST_CASE("scientific and fractional literals parse", "[expr]") {
  CharFn cf = bind_and_normalize(parse("1e2*s^2 + .5*s + 2.5e-1"));
  CHECK(cf.p0.terms[0] == Term{100.0, 2.0});
  CHECK(cf.p0.terms[1] == Term{0.5, 1.0});
  CHECK(cf.p0.terms[2] == Term{0.25, 0.0});
}

TEST_CASE("syntax errors carry byte offsets", "[expr]") {
  try {
    parse("s^");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.offset == 2);
  }
  try {
    parse("s + ");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.offset == 4);
  }
  CHECK_THROWS_AS(parse("s^exp"), SyntaxError);
  CHECK_THROWS_AS(parse("exp -s)"), SyntaxError);
  CHECK_THROWS_AS(parse("(s + 1"), SyntaxError);
  CHECK_THROWS_AS(parse("s s"), SyntaxError);
  CHECK_THROWS_AS(parse(""), SyntaxError);
  CHECK_THROWS_AS(parse("2*-s"), SyntaxError);
}

TEST_CASE("division is not part of the grammar", "[expr]") {
  CHECK_THROWS_AS(parse("s/2"), SyntaxError);
}

TEST_CASE("unary minus binds the whole leading term", "[expr]") {
  CharFn cf = bind_and_normalize(parse("-(s + 1)*2 + s^2"));
  CHECK(cf.p0.terms[0] == Term{1.0, 2.0});
  CHECK(cf.p0.terms[1] == Term{-2.0, 1.0});
  CHECK(cf.p0.terms[2] == Term{-2.0, 0.0});
}

TEST_CASE("non-representable shapes are rejected with NotRepresentable", "[expr]") {
  CHECK_THROWS_AS(bind_and_normalize(parse("s*exp(s)")), NotRepresentable);
  CHECK_THROWS_AS(bind_and_normalize(parse("s + exp(-exp(-s))")), NotRepresentable);
  CHECK_THROWS_AS(bind_and_normalize(parse("s + exp(-s - s^0.5)")), NotRepresentable);
  CHECK_THROWS_AS(bind_and_normalize(parse("s + K")), NotRepresentable);
  CHECK_THROWS_AS(bind_and_normalize(parse("s^(-1) + s")), NotRepresentable);
  CHECK_THROWS_AS(bind_and_normalize(parse("exp(-s)")), NotRepresentable);
  CHECK_THROWS_AS(bind_and_normalize(parse("1 + exp(-s)")), NotRepresentable);
  CHECK_THROWS_AS(bind_and_normalize(parse("s - s + 1")), NotRepresentable);
}

TEST_CASE("degenerate leading block is its own error", "[expr]") {
  CHECK_THROWS_AS(bind_and_normalize(parse("s + s*exp(-s)")), DegenerateLeading);
  CHECK_THROWS_AS(bind_and_normalize(parse("s + s^2*exp(-s)")), DegenerateLeading);
}

TEST_CASE("exp argument folds constants before classification", "[expr]") {
  // exp(0 * s) is a plain scalar, exp(-(2-2)*s) likewise
  CharFn a = bind_and_normalize(parse("s + exp(-0*s)"));
  CHECK(a.delayed.empty());
  CHECK(a.p0.terms[1] == Term{1.0, 0.0});
  CharFn b = bind_and_normalize(parse("s + exp(1)"));
  CHECK(b.p0.terms[1] == Term{std::exp(1.0), 0.0});
}

TEST_CASE("format emits shortest round-trip decimals", "[expr]") {
  CharFn cf = bind_and_normalize(parse(testutil::kEx1));
  CHECK(format(cf) ==
        "s^2.6179938779914944 + s^1.5707963267948966 + s^1.0471975511965976 + 1");
  CHECK(cf.p0.terms[0].exponent == 5.0 * std::numbers::pi / 6.0);
  CHECK(cf.p0.terms[1].exponent == std::numbers::pi / 2.0);
  CHECK(cf.p0.terms[2].exponent == std::numbers::pi / 3.0);
}

TEST_CASE("format spells signs, coefficients, and delays", "[expr]") {
  CharFn cf = bind_and_normalize(parse(testutil::kEx3), {{"tau", 0.99}});
  CHECK(format(cf) ==
        "s^1.5 - 1.5*s + 4*s^0.5 + 8 + (-1.5*s)*exp(-0.99*s)");
  CharFn bare = bind_and_normalize(parse("s^2 + exp(-s^0.5)"));
  CHECK(format(bare) == "s^2 + exp(-s^0.5)");
}

TEST_CASE("normalization is idempotent", "[expr][property]") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 100; ++i) {
    CharFn cf = testutil::random_charfn(rng);
    CharFn again = make_charfn(cf.p0, cf.delayed);
    REQUIRE(again == cf);
  }
}

TEST_CASE("format then parse round-trips bit-exactly", "[expr][property]") {
  std::mt19937 rng(77);
  for (int i = 0; i < 200; ++i) {
    CharFn cf = testutil::random_charfn(rng);
    CharFn back = bind_and_normalize(parse(format(cf)));
    REQUIRE(back == cf);
  }
}
