#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "charsweep/profile.hpp"
#include "helpers.hpp"

using namespace charsweep;

TEST_CASE("parse_profile basic shapes") {
  auto p1 = parse_profile(testdata::kExample1);
  REQUIRE(p1.breakpoints.size() == 1);
  CHECK(p1.breakpoints[0] == 0.0);
  REQUIRE(p1.pieces.size() == 2);

  auto step = parse_profile(testdata::kRiemannShock);
  CHECK(step.breakpoints.size() == 1);
  CHECK(eval_profile(step, -5.0, Side::Interior, 0) == 1.0);

  auto smooth = parse_profile(testdata::kExample3);
  CHECK(smooth.breakpoints.empty());
  CHECK(eval_profile(smooth, 1.0, Side::Interior, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("parse_profile rejects bad input") {
  CHECK_THROWS_AS(parse_profile("x < 0: 1/x ; x >= 0: 0"), Error);
  try {
    parse_profile("x < 0: 1/x ; x >= 0: 0");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
  }
  CHECK_THROWS_AS(parse_profile("x < 1: 1 ; 0 <= x < 2: 0 ; x >= 2: 1"), Error);
  CHECK_THROWS_AS(parse_profile("x < 0: 1 +"), Error);
  CHECK_THROWS_AS(parse_profile("x >= 0: 1 ; x < 0: 0"), Error);
  CHECK_THROWS_AS(parse_profile(""), Error);
}

TEST_CASE("side limits and side derivatives") {
  auto p2 = parse_profile(testdata::kExample2);
  CHECK(eval_profile(p2, 0.0, Side::Left, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(eval_profile(p2, 0.0, Side::Right, 1) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(eval_profile(p2, 0.0, Side::Left, 1) == doctest::Approx(-1.0).epsilon(1e-15));

  CHECK_THROWS_AS(eval_profile(p2, 0.0, Side::Interior, 0), Error);
  try {
    eval_profile(p2, 0.0, Side::Interior, 0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AmbiguousSide);
  }
}

TEST_CASE("char_speed composes the speed map exactly") {
  auto burgers = FluxModel::burgers();
  auto quartic = FluxModel::power_quartic();

  auto p2 = parse_profile(testdata::kExample2);
  CHECK(char_speed(p2, burgers, 0.0, Side::Right, 1) == doctest::Approx(-2.0).epsilon(1e-15));

  // h = f^3/3 = -(x+1)^6/24 on the left of example 4; h'(0-) = -1/4.
  auto p4 = parse_profile(testdata::kExample4);
  CHECK(char_speed(p4, quartic, 0.0, Side::Left, 1) == doctest::Approx(-0.25).epsilon(1e-13));

  auto step = parse_profile(testdata::kRiemannShock);
  CHECK(char_speed(step, quartic, -2.0, Side::Interior, 1) == 0.0);
}

TEST_CASE("char_speed derivative orders agree with central differences") {
  auto burgers = FluxModel::burgers();
  auto quartic = FluxModel::power_quartic();
  struct Case { const char* text; const FluxModel* model; double lo, hi; };
  FluxModel b = burgers, q = quartic;
  Case cases[] = {
      {testdata::kExample2, &b, -2.5, -0.1},
      {testdata::kExample2, &b, 0.1, 2.5},
      {testdata::kExample4, &q, -2.5, -0.1},
      {testdata::kExample5, &b, -2.0, 2.0},
  };
  for (const auto& c : cases) {
    auto p = parse_profile(c.text);
    for (int i = 0; i < 12; ++i) {
      double x = testdata::uniform(c.lo, c.hi);
      for (int k = 1; k <= 3; ++k) {
        auto lower = [&](double v) { return char_speed(p, *c.model, v, Side::Interior, k - 1); };
        double fd = testdata::central_diff(lower, x);
        double exact = char_speed(p, *c.model, x, Side::Interior, k);
        CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
      }
    }
  }
}

TEST_CASE("serialize/parse round trip evaluates identically") {
  for (const char* text : {testdata::kExample1, testdata::kExample2, testdata::kExample3,
                           testdata::kExample4, testdata::kExample5, testdata::kHat}) {
    auto p = parse_profile(text);
    auto q = parse_profile(serialize_profile(p));
    REQUIRE(p.breakpoints == q.breakpoints);
    for (int i = 0; i < 100; ++i) {
      double x = testdata::uniform(-4.0, 4.0);
      bool on_bp = false;
      for (double bp : p.breakpoints) on_bp |= (x == bp);
      if (on_bp) continue;
      CHECK(eval_profile(p, x, Side::Interior, 0) == eval_profile(q, x, Side::Interior, 0));
    }
  }
}

TEST_CASE("rational exponents and unary minus parse") {
  auto p = parse_profile("x < 0: (-x)^0.5 ; x >= 0: -x^(1/2)");
  CHECK(eval_profile(p, -4.0, Side::Interior, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(eval_profile(p, 4.0, Side::Interior, 0) == doctest::Approx(-2.0).epsilon(1e-15));
  // Side derivative blows up at the seam; evaluation itself is fine.
  CHECK(eval_profile(p, 0.0, Side::Left, 0) == 0.0);
  CHECK(!std::isfinite(eval_profile(p, 0.0, Side::Left, 1)));
}
