#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "charsweep/sweep.hpp"
#include "helpers.hpp"

using namespace charsweep;

namespace {
const FluxModel kBurgers = FluxModel::burgers();
const FluxModel kQuartic = FluxModel::power_quartic();

void check_single_valued(const SolutionSlice& s) {
  for (std::size_t i = 0; i + 1 < s.samples.size(); ++i)
    CHECK(s.samples[i].X < s.samples[i + 1].X);
}

double slice_at(const SolutionSlice& s, double x) {
  auto it = std::lower_bound(s.samples.begin(), s.samples.end(), x,
                             [](const SlicePoint& a, double v) { return a.X < v; });
  REQUIRE(it != s.samples.begin());
  REQUIRE(it != s.samples.end());
  const auto& b = *it;
  const auto& a = *(it - 1);
  double w = (x - a.X) / (b.X - a.X);
  return a.u + w * (b.u - a.u);
}
}  // namespace

TEST_CASE("rarefaction_value") {
  auto rare = parse_profile(testdata::kRiemannRarefaction, {-2.0, 2.0});
  CHECK(rarefaction_value(kBurgers, rare, 0.0, 0.5, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(rarefaction_value(kBurgers, rare, 0.0, 5.0, 1.0), Error);
  try {
    rarefaction_value(kBurgers, rare, 0.0, 5.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfFan);
  }

  auto p4 = parse_profile(testdata::kExample4, {-2.0, 2.0});
  CHECK(rarefaction_value(kQuartic, p4, 0.0, 1.0 / 3.0, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("straight_line_value") {
  auto hat = parse_profile(testdata::kHat, {-3.0, 3.0});
  auto segs = find_straight_segments(hat, kBurgers, classify_points(hat, kBurgers));
  REQUIRE(segs.size() == 1);
  CHECK(straight_line_value(hat, kBurgers, segs[0], 0.25, 0.5) ==
        doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(straight_line_value(hat, kBurgers, segs[0], 0.25, 0.0) ==
        doctest::Approx(-0.25).epsilon(1e-13));
  CHECK_THROWS_AS(straight_line_value(hat, kBurgers, segs[0], 0.0, 1.0), Error);
  try {
    straight_line_value(hat, kBurgers, segs[0], 0.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FocusedSegment);
  }
}

TEST_CASE("multivalue_surface folds after the break time") {
  auto g = parse_profile(testdata::kGaussian, {-3.0, 3.0});
  std::vector<double> feet;
  for (double x = -3.0; x <= 3.0; x += 0.01) feet.push_back(x);

  auto at0 = multivalue_surface(g, kBurgers, 0.0, feet);
  for (std::size_t i = 0; i < feet.size(); ++i) {
    CHECK(at0[i].first == feet[i]);
  }

  double tb = std::sqrt(std::exp(1.0) / 2.0);
  auto folded = multivalue_surface(g, kBurgers, 2.0 * tb, feet);
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < folded.size(); ++i)
    monotone &= folded[i].first < folded[i + 1].first;
  CHECK(!monotone);

  auto early = multivalue_surface(g, kBurgers, 0.5 * tb, feet);
  bool monotone_early = true;
  for (std::size_t i = 0; i + 1 < early.size(); ++i)
    monotone_early &= early[i].first < early[i + 1].first;
  CHECK(monotone_early);
}

TEST_CASE("Riemann sweeps") {
  auto shock = parse_profile(testdata::kRiemannShock, {-2.0, 2.0});
  auto gs = evolve(shock, kBurgers, 2.0, 1e-3);
  auto s = sweep_solution(shock, kBurgers, gs, 2.0, 0.01);
  check_single_valued(s);
  REQUIRE(s.discontinuities.size() == 1);
  CHECK(s.discontinuities[0].X == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.discontinuities[0].u_left == doctest::Approx(1.0));
  CHECK(s.discontinuities[0].u_right == doctest::Approx(0.0));
  for (const auto& pt : s.samples) {
    if (pt.X < 0.99) CHECK(pt.u == doctest::Approx(1.0));
    if (pt.X > 1.01) CHECK(pt.u == doctest::Approx(0.0));
  }

  auto rare = parse_profile(testdata::kRiemannRarefaction, {-2.0, 2.0});
  auto gr = evolve(rare, kBurgers, 2.0, 1e-3);
  auto r = sweep_solution(rare, kBurgers, gr, 2.0, 0.01);
  check_single_valued(r);
  CHECK(r.discontinuities.empty());
  for (const auto& pt : r.samples) {
    if (pt.X < -0.01) CHECK(pt.u == doctest::Approx(0.0));
    else if (pt.X > 0.01 && pt.X < 1.99) CHECK(pt.u == doctest::Approx(pt.X / 2.0).epsilon(1e-9));
    else if (pt.X > 2.01 && pt.X < 3.0) CHECK(pt.u == doctest::Approx(1.0));
  }
}

TEST_CASE("sweep is exact off shocks") {
  auto p = parse_profile("x/2 + sin(x)/4", {-3.0, 3.0});
  auto g = evolve(p, kBurgers, 1.0, 1e-2);
  CHECK(g.curves.empty());
  auto s = sweep_solution(p, kBurgers, g, 1.0, 0.01);
  check_single_valued(s);
  for (std::size_t i = 0; i < s.samples.size(); i += 7) {
    double X = s.samples[i].X;
    double u = s.samples[i].u;
    // implicit solution z = f(X - z T)
    double lo = u - 0.5, hi = u + 0.5;
    auto F = [&](double z) { return z - eval_profile(p, X - z * 1.0, Side::Interior, 0); };
    REQUIRE(F(lo) * F(hi) <= 0.0);
    for (int it = 0; it < 100; ++it) {
      double mid = 0.5 * (lo + hi);
      if (F(lo) * F(mid) <= 0.0) hi = mid; else lo = mid;
    }
    CHECK(std::abs(u - 0.5 * (lo + hi)) <= 1e-10);
  }
}

TEST_CASE("fan edges join the outer characteristics continuously") {
  auto p4 = parse_profile(testdata::kExample4, {-2.0, 2.0});
  auto g4 = evolve(p4, kQuartic, 10.0, 1e-3);
  auto s4 = sweep_solution(p4, kQuartic, g4, 10.0, 0.01);
  check_single_valued(s4);
  // upper edge of the fan at x* = 0 is untouched at T = 10
  double edge_speed = char_speed(p4, kQuartic, 0.0, Side::Right, 0);
  double X_edge = 0.0 + edge_speed * 10.0;
  double u_fan = rarefaction_value(kQuartic, p4, 0.0, X_edge - 1e-12, 10.0);
  double u_char = eval_profile(p4, 0.0, Side::Right, 0);
  CHECK(std::abs(u_fan - u_char) <= 1e-8);
  // the slice itself is continuous across the edge
  CHECK(std::abs(slice_at(s4, X_edge - 1e-6) - slice_at(s4, X_edge + 1e-6)) <= 1e-4);

  auto rare = parse_profile(testdata::kRiemannRarefaction, {-2.0, 2.0});
  auto gr = evolve(rare, kBurgers, 2.0, 1e-3);
  auto r = sweep_solution(rare, kBurgers, gr, 2.0, 0.01);
  CHECK(std::abs(rarefaction_value(kBurgers, rare, 0.0, 0.0, 2.0) -
                 eval_profile(rare, 0.0, Side::Left, 0)) <= 1e-8);
  CHECK(std::abs(rarefaction_value(kBurgers, rare, 0.0, 2.0, 2.0) -
                 eval_profile(rare, 0.0, Side::Right, 0)) <= 1e-8);
}

TEST_CASE("sweeps of the shock examples are single-valued with Lax-ordered markers") {
  struct Case { const char* txt; const FluxModel* m; Interval hint; double T; };
  FluxModel bur = kBurgers, qua = kQuartic;
  Case cases[] = {
      {testdata::kExample1, &bur, {-3.0, 3.0}, 10.0},
      {testdata::kExample2, &bur, {-3.0, 3.0}, 10.0},
      {testdata::kExample3, &bur, {-4.0, 4.0}, 10.0},
      {testdata::kExample4, &qua, {-2.0, 2.0}, 10.0},
      {testdata::kExample5, &bur, {-5.0, 6.0}, 10.0},
      {testdata::kHat, &bur, {-3.0, 3.0}, 3.0},
      {testdata::kZigzag, &bur, {-3.0, 3.0}, 4.0},
  };
  for (const auto& cs : cases) {
    auto p = parse_profile(cs.txt, cs.hint);
    auto g = evolve(p, *cs.m, cs.T, 1e-3);
    auto s = sweep_solution(p, *cs.m, g, cs.T, 0.01);
    check_single_valued(s);
    CHECK(!s.discontinuities.empty());
    for (const auto& d : s.discontinuities) {
      double hl = flux_derivative(*cs.m, d.u_left, 1);
      double hr = flux_derivative(*cs.m, d.u_right, 1);
      double sigma = shock_speed(*cs.m, d.u_left, d.u_right);
      CHECK(hl >= sigma - 1e-7);
      CHECK(sigma >= hr - 1e-7);
    }
  }
}

TEST_CASE("zigzag slice: fans on both sides of the stationary shock") {
  auto p = parse_profile(testdata::kZigzag, {-3.0, 3.0});
  auto g = evolve(p, kBurgers, 4.0, 1e-3);
  auto s = sweep_solution(p, kBurgers, g, 4.0, 0.01);
  REQUIRE(s.discontinuities.size() == 1);
  CHECK(std::abs(s.discontinuities[0].X) <= 1e-9);
  CHECK(s.discontinuities[0].u_left == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(s.discontinuities[0].u_right == doctest::Approx(-0.25).epsilon(1e-8));
  bool has_rarefaction = false;
  for (const auto& pt : s.samples) has_rarefaction |= (pt.provenance == Provenance::Rarefaction);
  CHECK(has_rarefaction);
}

TEST_CASE("straight segments are emitted analytically before focusing") {
  auto hat = parse_profile(testdata::kHat, {-3.0, 3.0});
  auto g = evolve(hat, kBurgers, 3.0, 1e-3);
  auto s = sweep_solution(hat, kBurgers, g, 0.5, 0.01);
  check_single_valued(s);
  CHECK(s.discontinuities.empty());
  bool has_straight = false;
  for (const auto& pt : s.samples) has_straight |= (pt.provenance == Provenance::StraightLine);
  CHECK(has_straight);
  CHECK(slice_at(s, 0.25) == doctest::Approx(-0.5).epsilon(1e-9));

  // after focusing the segment is gone and the shock marker is there instead
  auto s3 = sweep_solution(hat, kBurgers, g, 3.0, 0.01);
  REQUIRE(s3.discontinuities.size() == 1);
  CHECK(std::abs(s3.discontinuities[0].X) <= 1e-9);
  for (const auto& pt : s3.samples) CHECK(pt.provenance != Provenance::StraightLine);
}

TEST_CASE("weak-form conservation between nearby slices") {
  auto p = parse_profile(testdata::kGaussian, {-3.0, 3.0});
  double T = 0.5, eps = 1e-3;
  auto g = evolve(p, kBurgers, T + eps, 1e-3);
  auto s1 = sweep_solution(p, kBurgers, g, T, 0.002);
  auto s2 = sweep_solution(p, kBurgers, g, T + eps, 0.002);
  double a = -2.0, b = 2.5;
  auto integral = [&](const SolutionSlice& s) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < s.samples.size(); ++i) {
      double x0 = s.samples[i].X, x1 = s.samples[i + 1].X;
      if (x1 < a || x0 > b) continue;
      double lo = std::max(x0, a), hi = std::min(x1, b);
      double u0 = s.samples[i].u, u1 = s.samples[i + 1].u;
      double ulo = u0 + (u1 - u0) * (lo - x0) / (x1 - x0);
      double uhi = u0 + (u1 - u0) * (hi - x0) / (x1 - x0);
      acc += 0.5 * (ulo + uhi) * (hi - lo);
    }
    return acc;
  };
  double dIdt = (integral(s2) - integral(s1)) / eps;
  double ua = 0.5 * (slice_at(s1, a) + slice_at(s2, a));
  double ub = 0.5 * (slice_at(s1, b) + slice_at(s2, b));
  double flux_balance = eval_flux(kBurgers, ua) - eval_flux(kBurgers, ub);
  CHECK(std::abs(dIdt - flux_balance) <= 1e-4);
}

TEST_CASE("sweep needs a graph that covers T") {
  auto p = parse_profile(testdata::kRiemannShock, {-2.0, 2.0});
  auto g = evolve(p, kBurgers, 1.0, 1e-2);
  CHECK_THROWS_AS(sweep_solution(p, kBurgers, g, 2.0, 0.01), Error);
  try {
    sweep_solution(p, kBurgers, g, 2.0, 0.01);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingGraph);
  }
}

TEST_CASE("sweeping at intermediate times uses the state at that time") {
  auto p5 = parse_profile(testdata::kExample5, {-5.0, 6.0});
  auto g = evolve(p5, kBurgers, 10.0, 1e-3);
  double t_merge = 0.0;
  for (const auto& e : g.events)
    if (e.type == EventType::Merge) t_merge = e.time;
  REQUIRE(t_merge > 0.0);
  auto before = sweep_solution(p5, kBurgers, g, t_merge - 0.2, 0.01);
  auto after = sweep_solution(p5, kBurgers, g, t_merge + 0.2, 0.01);
  CHECK(before.discontinuities.size() == 2);
  CHECK(after.discontinuities.size() == 1);
  check_single_valued(before);
  check_single_valued(after);
}
