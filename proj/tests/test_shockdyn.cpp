#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "charsweep/shockdyn.hpp"
#include "charsweep/validate.hpp"
#include "helpers.hpp"

using namespace charsweep;

namespace {
const FluxModel kBurgers = FluxModel::burgers();
const FluxModel kQuartic = FluxModel::power_quartic();

int count_events(const ShockGraph& g, EventType t) {
  int n = 0;
  for (const auto& e : g.events) n += (e.type == t);
  return n;
}

const Event* first_event(const ShockGraph& g, EventType t) {
  for (const auto& e : g.events)
    if (e.type == t) return &e;
  return nullptr;
}
}  // namespace

TEST_CASE("shock_speed is the flux chord") {
  CHECK(shock_speed(kBurgers, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(shock_speed(kQuartic, 1.0, -1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(shock_speed(kBurgers, 1.0, 1.0), Error);
}

TEST_CASE("two-foot velocities") {
  auto step = parse_profile(testdata::kRiemannShock, {-2.0, 2.0});
  auto [dl, dr] = rhs_kind1(step, kBurgers, -1.0, 1.0, 3.0);
  CHECK(dl == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(dr == doctest::Approx(0.5).epsilon(1e-15));

  auto p1 = parse_profile(testdata::kExample1, {-3.0, 3.0});
  auto [sl, sr] = rhs_kind1(p1, kBurgers, 0.0, 0.0, 0.0);
  CHECK(std::isfinite(sl));
  CHECK(std::isfinite(sr));
  CHECK(sl < 0.0);
  CHECK(sr > 0.0);

  CHECK_THROWS_AS(rhs_kind1(step, kBurgers, -2.0, -1.0, 0.0), Error);  // constant piece
}

TEST_CASE("fan-crossing foot velocity") {
  auto p = parse_profile("x < 0: 0 ; x >= 0: 2", {-2.0, 2.0});
  // Burgers reduction: dx/dt = (x - x*) / (2 t (1 + f' t)) with f' = 0
  CHECK(rhs_kind2(p, kBurgers, -1.0, 1.0, 0.0, Side::Left) ==
        doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(rhs_kind2(p, kBurgers, 0.0, 1.0, 0.0, Side::Left) == doctest::Approx(0.0));
  CHECK_THROWS_AS(rhs_kind2(p, kBurgers, -1.0, 0.0, 0.0, Side::Left), Error);
}

TEST_CASE("between-fans velocity") {
  auto zig = parse_profile(testdata::kZigzag, {-3.0, 3.0});
  CHECK(rhs_kind3(zig, kBurgers, 0.0, 1.0, -1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(rhs_kind3(zig, kBurgers, 1.0, 2.0, -1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  // collapsed fans: Burgers limit, other models degenerate
  CHECK(rhs_kind3(zig, kBurgers, 0.5, 2.0, -1.0, -1.0) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("Riemann shock marches exactly") {
  auto step = parse_profile(testdata::kRiemannShock, {-2.0, 2.0});
  EvolveOptions opt;
  opt.dt = 0.1;
  ShockGraph g = init_graph(step, kBurgers, opt);
  for (int i = 0; i < 10; ++i) advance(g, step, kBurgers, 0.1);
  REQUIRE(g.curves.size() == 1);
  CHECK(std::abs(g.curves[0].back().t - 1.0) <= 1e-12);
  CHECK(std::abs(g.curves[0].back().xi - 0.5) <= 1e-12);

  auto g10 = evolve(step, kBurgers, 10.0, 1e-3);
  CHECK(std::abs(g10.curves[0].back().xi - 5.0) <= 1e-12);
  CHECK(detect_events(g10, step, kBurgers, g10.time, 1.0).empty());
}

TEST_CASE("merge of the two smooth shocks") {
  auto p5 = parse_profile(testdata::kExample5, {-5.0, 6.0});
  auto g = evolve(p5, kBurgers, 10.0, 1e-3);
  REQUIRE(g.curves.size() == 3);
  CHECK(count_events(g, EventType::Merge) == 1);
  const Event* merge = first_event(g, EventType::Merge);
  REQUIRE(merge != nullptr);
  const auto& child = g.curves[2];
  CHECK(child.status == CurveStatus::Active);
  CHECK(g.curves[0].status == CurveStatus::Merged);
  CHECK(g.curves[1].status == CurveStatus::Merged);
  CHECK(g.curves[0].merged_into == child.id);
  // the merged curve starts from the(outer) feet of its parents
  const auto* left = &g.curves[0];
  const auto* right = &g.curves[1];
  if (left->back().xi > right->back().xi) std::swap(left, right);
  CHECK(child.samples.front().xl == doctest::Approx(left->back().xl));
  CHECK(child.samples.front().xr == doctest::Approx(right->back().xr));
  CHECK(child.samples.front().t == doctest::Approx(merge->time));
  // terminal times of the parents equal the merge time
  CHECK(g.curves[0].back().t == doctest::Approx(merge->time));
  CHECK(g.curves[1].back().t == doctest::Approx(merge->time));
}

TEST_CASE("straight-line focusing starts a shock") {
  auto hat = parse_profile(testdata::kHat, {-3.0, 3.0});
  auto g = evolve(hat, kBurgers, 3.0, 1e-3);
  REQUIRE(g.curves.size() == 1);
  const Event* act = first_event(g, EventType::StraightLineActivate);
  REQUIRE(act != nullptr);
  CHECK(act->time == doctest::Approx(1.0).epsilon(1e-12));
  const auto& c = g.curves[0];
  CHECK(c.samples.front().t == doctest::Approx(1.0));
  CHECK(c.samples.front().xl == doctest::Approx(-1.0));
  CHECK(c.samples.front().xr == doctest::Approx(1.0));
  CHECK(c.samples.front().xi == doctest::Approx(0.0));
  // symmetric states keep the shock pinned at the focus
  CHECK(std::abs(c.back().xi) <= 1e-9);
  CHECK(c.back().xl == doctest::Approx(-3.0).epsilon(1e-9));

  auto ramp = parse_profile(testdata::kRamp, {-2.0, 3.0});
  auto gr = evolve(ramp, kBurgers, 3.0, 1e-3);
  REQUIRE(gr.curves.size() == 1);
  // exact: xi(t) = 1 + (t-1)/2 after focusing at (1, 1)
  CHECK(gr.curves[0].back().xi == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("two fans joined by a focusing segment give a stationary shock") {
  auto zig = parse_profile(testdata::kZigzag, {-3.0, 3.0});
  auto g = evolve(zig, kBurgers, 4.0, 1e-3);
  REQUIRE(g.curves.size() == 1);
  const auto& c = g.curves[0];
  CHECK(c.regime == Regime::Kind3);
  CHECK(c.samples.front().t == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(c.back().xi) <= 1e-10);
  // the shock stays inside both fan cones
  for (const auto& s : c.samples) {
    double r1 = (s.xi - (-1.0)) / s.t;
    double r2 = (s.xi - 1.0) / s.t;
    CHECK(r1 >= -2.0 - 1e-9);
    CHECK(r1 <= 2.0 + 1e-9);
    CHECK(r2 >= -2.0 - 1e-9);
    CHECK(r2 <= 2.0 + 1e-9);
  }
  // straight-line fit of (t, xi): xi = (x1*+x2*)/2 + C t
  double st = 0, stt = 0, sx = 0, stx = 0;
  int n = 0;
  for (const auto& s : c.samples) {
    st += s.t; stt += s.t * s.t; sx += s.xi - 0.0; stx += s.t * s.xi;
    ++n;
  }
  double slope = (n * stx - st * sx) / (n * stt - st * st);
  double icept = (sx - slope * st) / n;
  double resid = 0;
  for (const auto& s : c.samples)
    resid = std::max(resid, std::abs(s.xi - (icept + slope * s.t)));
  CHECK(resid <= 1e-8);
}

TEST_CASE("entering and leaving a fan, exactly solvable staircase") {
  auto p = parse_profile("x < -1: 3 ; -1 <= x < 0: 0 ; x >= 0: 1", {-3.0, 3.0});
  auto g = evolve(p, kBurgers, 3.0, 1e-3);
  REQUIRE(g.curves.size() == 1);
  const Event* enter = first_event(g, EventType::EnterRarefaction);
  const Event* exit = first_event(g, EventType::ExitRarefaction);
  REQUIRE(enter != nullptr);
  REQUIRE(exit != nullptr);
  // fan entry when the right foot reaches the center: t = 2/3
  CHECK(enter->time == doctest::Approx(2.0 / 3.0).epsilon(1e-7));
  // inside the fan: r(t) = 3 - 3 sqrt(2/3) / sqrt(t); exits r = 1 at t = 1.5
  CHECK(exit->time == doctest::Approx(1.5).epsilon(1e-6));
  // after the exit: kind1 with sigma = (3+1)/2 = 2, xi(3) = 1.5 + 2 * 1.5 = 4.5
  CHECK(g.curves[0].regime == Regime::Kind1);
  CHECK(g.curves[0].back().xi == doctest::Approx(4.5).epsilon(1e-6));
}

TEST_CASE("jump with immediate fan crossing") {
  auto p4 = parse_profile(testdata::kExample4, {-2.0, 2.0});
  auto g = evolve(p4, kQuartic, 10.0, 1e-3);
  REQUIRE(g.curves.size() == 1);
  CHECK(g.curves[0].regime == Regime::Kind2FromLeft);
  const Event* enter = first_event(g, EventType::EnterRarefaction);
  REQUIRE(enter != nullptr);  // the seed is born inside the fan
  CHECK(enter->time == doctest::Approx(g.curves[0].samples.front().t));
  // fan-cone membership along the whole curve
  double lo = -1.0 / 24.0, hi = 1.0 / 3.0;
  for (const auto& s : g.curves[0].samples) {
    double ray = s.xi / s.t;
    CHECK(ray >= lo - 1e-9);
    CHECK(ray <= hi + 1e-9);
  }
  CHECK(g.curves[0].back().xi == doctest::Approx(-0.3252494941).epsilon(1e-6));
}

TEST_CASE("fake point is cancelled permanently") {
  auto p = parse_profile("x < 0: 8 ; x >= 0: exp(-(x - 1.5)^2)", {-2.0, 4.0});
  auto pts = classify_points(p, kBurgers);
  int shock3_id = -1;
  for (const auto& pt : pts)
    if (pt.kind == PointKind::Shock3) shock3_id = pt.id;
  REQUIRE(shock3_id >= 0);
  auto g = evolve(p, kBurgers, 3.0, 1e-3);
  const Event* cancel = first_event(g, EventType::CancelPoint);
  REQUIRE(cancel != nullptr);
  CHECK(cancel->participants.front() == shock3_id);
  CHECK(g.cancelled(shock3_id));
  REQUIRE(g.curves.size() == 1);  // no second curve ever activates
  CHECK(g.curves[0].back().xr > 2.3);
}

TEST_CASE("conserved quantity along two-foot stretches") {
  struct Case { const char* txt; Interval hint; };
  for (const Case& cs : {Case{testdata::kExample1, {-3.0, 3.0}},
                         Case{testdata::kExample2, {-3.0, 3.0}}}) {
    auto p = parse_profile(cs.txt, cs.hint);
    auto g = evolve(p, kBurgers, 10.0, 1e-3);
    for (const auto& c : g.curves) {
      double q0 = std::nan("");
      double scale = 1.0;
      for (std::size_t i = 0; i < c.samples.size(); i += 37) {
        const auto& s = c.samples[i];
        if (s.regime != Regime::Kind1 || s.xl == s.xr) continue;
        double q = burgers_kind1_invariant(p, s.xl, s.xr);
        double fl = eval_profile(p, s.xl, Side::Left, 0);
        double fr = eval_profile(p, s.xr, Side::Right, 0);
        scale = std::max({scale, std::abs((s.xr - s.xl) * (fl + fr))});
        if (std::isnan(q0)) { q0 = q; continue; }
        CHECK(std::abs(q - q0) / scale <= 1e-6);
      }
    }
  }
}

TEST_CASE("fan-crossing stretch satisfies the Burgers closed form") {
  auto p = parse_profile(testdata::kFanCrossing, {-3.0, 3.0});
  auto g = evolve(p, kBurgers, 4.0, 1e-3);
  REQUIRE(g.curves.size() == 1);
  const auto& c = g.curves[0];
  CHECK(c.regime == Regime::Kind2FromLeft);
  // t (2 I(x_l) + C) = (x_l - x*)^2 with C fixed by the first sample
  double x_star = 0.0;
  const auto& s0 = c.samples.front();
  double C = (s0.xl - x_star) * (s0.xl - x_star) / s0.t -
             2.0 * burgers_kind2_integral(p, x_star, s0.xl);
  for (std::size_t i = 0; i < c.samples.size(); i += 53) {
    const auto& s = c.samples[i];
    if (s.regime != Regime::Kind2FromLeft) continue;
    double lhs = s.t * (2.0 * burgers_kind2_integral(p, x_star, s.xl) + C);
    double rhs = (s.xl - x_star) * (s.xl - x_star);
    CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("numerical shock speed obeys the jump condition") {
  for (const char* txt : {testdata::kExample1, testdata::kExample2}) {
    auto p = parse_profile(txt, {-3.0, 3.0});
    auto g = evolve(p, kBurgers, 5.0, 1e-3);
    const auto& c = g.curves[0];
    for (std::size_t i = 20; i + 20 < c.samples.size(); i += 101) {
      const auto& a = c.samples[i - 1];
      const auto& s = c.samples[i];
      const auto& b = c.samples[i + 1];
      if (a.regime != Regime::Kind1 || b.regime != Regime::Kind1) continue;
      if (b.t - a.t <= 0.0) continue;
      double dxi = (b.xi - a.xi) / (b.t - a.t);
      double sigma = shock_speed(kBurgers, eval_profile(p, s.xl, Side::Left, 0),
                                 eval_profile(p, s.xr, Side::Right, 0));
      CHECK(std::abs(dxi - sigma) <= 1e-4 * std::max(1.0, std::abs(sigma)));
    }
  }
}

TEST_CASE("stability condition holds at retained two-foot samples") {
  struct Case { const char* txt; const FluxModel* m; Interval hint; double T; };
  FluxModel bur = kBurgers, qua = kQuartic;
  for (const Case& cs : {Case{testdata::kExample1, &bur, {-3.0, 3.0}, 10.0},
                         Case{testdata::kExample2, &bur, {-3.0, 3.0}, 10.0},
                         Case{testdata::kHat, &bur, {-3.0, 3.0}, 3.0},
                         Case{testdata::kExample5, &bur, {-5.0, 6.0}, 10.0}}) {
    auto p = parse_profile(cs.txt, cs.hint);
    auto g = evolve(p, *cs.m, cs.T, 1e-3);
    for (const auto& c : g.curves)
      for (std::size_t i = 0; i < c.samples.size(); i += 29) {
        const auto& s = c.samples[i];
        if (s.regime != Regime::Kind1 || !(s.xl < s.xr)) continue;
        CHECK(stability_check(p, *cs.m, s.xl, s.xr));
      }
  }
}

TEST_CASE("order four on an event-free stretch") {
  auto p = parse_profile(testdata::kExample2, {-3.0, 3.0});
  auto fine = evolve(p, kBurgers, 0.7, 2.5e-4);
  const auto& s0 = fine.curves[0].back();  // state at t = 0.7

  auto integrate = [&](double dt) {
    double y[2] = {s0.xl, s0.xr};
    double t = s0.t;
    int n = static_cast<int>(std::round(1.0 / dt));
    for (int i = 0; i < n; ++i) {
      double k1[2], k2[2], k3[2], k4[2], tmp[2];
      auto f = [&](double tt, const double* yy, double* dd) {
        auto [a, b] = rhs_kind1(p, kBurgers, yy[0], yy[1], tt);
        dd[0] = a; dd[1] = b;
      };
      f(t, y, k1);
      for (int j = 0; j < 2; ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
      f(t + 0.5 * dt, tmp, k2);
      for (int j = 0; j < 2; ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
      f(t + 0.5 * dt, tmp, k3);
      for (int j = 0; j < 2; ++j) tmp[j] = y[j] + dt * k3[j];
      f(t + dt, tmp, k4);
      for (int j = 0; j < 2; ++j) y[j] += dt / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
      t += dt;
    }
    return std::pair<double, double>{y[0], y[1]};
  };

  auto refv = integrate(1.0 / 16384.0);
  double errs[3];
  double dts[3] = {1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0};
  for (int k = 0; k < 3; ++k) {
    auto v = integrate(dts[k]);
    errs[k] = std::abs(v.first - refv.first) + std::abs(v.second - refv.second);
  }
  double rate1 = std::log2(errs[0] / errs[1]);
  double rate2 = std::log2(errs[1] / errs[2]);
  CHECK(rate1 >= 3.5);
  CHECK(rate2 >= 3.5);
}

TEST_CASE("evolve is reproducible bit for bit") {
  auto p = parse_profile(testdata::kExample5, {-5.0, 6.0});
  auto a = evolve(p, kBurgers, 6.0, 1e-3);
  auto b = evolve(p, kBurgers, 6.0, 1e-3);
  std::ostringstream sa, sb;
  write_curves_csv(a, sa);
  write_curves_csv(b, sb);
  CHECK(sa.str() == sb.str());
  std::ostringstream ea, eb;
  write_events_csv(a, ea);
  write_events_csv(b, eb);
  CHECK(ea.str() == eb.str());
}

TEST_CASE("singular side derivatives run through the fallback seed") {
  auto p = parse_profile("x < 0: (-x)^0.5 ; x >= 0: -x^0.5", {-2.0, 2.0});
  auto g = evolve(p, kBurgers, 2.0, 1e-3);
  REQUIRE(g.curves.size() == 1);
  const auto& s = g.curves[0].back();
  // odd data keeps the shock at the origin; feet stay symmetric
  CHECK(std::abs(s.xi) <= 1e-6);
  CHECK(std::abs(s.xl + s.xr) <= 1e-6);
  CHECK(s.xr > 0.1);
}

TEST_CASE("two-sided crossing point spawns two curves") {
  // jump up with both side slopes negative and boundary minima: both sides
  // cross into the fan, the strong left side eventually absorbs everything
  auto p = parse_profile("x < 0: -4*x - x^2 ; x >= 0: 2 - x/2 + x^3", {-1.0, 1.0});
  auto pts = classify_points(p, kBurgers);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].kind == PointKind::Shock4);
  CHECK(pts[0].crosses_left);
  CHECK(pts[0].crosses_right);
  REQUIRE(pts[0].break_times.size() == 2);
  CHECK(pts[0].break_times[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(pts[0].break_times[1] == doctest::Approx(2.0).epsilon(1e-12));
  auto g = evolve(p, kBurgers, 4.0, 1e-3);
  CHECK(g.curves.size() >= 1);
  int active = 0;
  for (const auto& c : g.curves) active += (c.status == CurveStatus::Active);
  CHECK(active == 1);
}

TEST_CASE("a weak shock rides a collapsing segment through its focus") {
  // exact: the invariant gives x_l = -13/11 when the right foot reaches the
  // segment end, so contact at t = 120/121 and xi(2) = 6/55
  auto p = parse_profile("x < -1: 1.2 ; -1 <= x < 1: -x ; x >= 1: -1", {-3.0, 3.0});
  auto g = evolve(p, kBurgers, 2.0, 1e-3);
  REQUIRE(g.curves.size() == 1);
  const Event* cancel = first_event(g, EventType::CancelPoint);
  REQUIRE(cancel != nullptr);
  CHECK(cancel->time == doctest::Approx(120.0 / 121.0).epsilon(1e-4));
  CHECK(g.curves[0].back().xi == doctest::Approx(6.0 / 55.0).epsilon(1e-4));
  // after contact the left foot moves at sigma - h = 0.1 - 1.2 = -1.1
  CHECK(g.curves[0].back().xl == doctest::Approx(-13.0 / 11.0 - 1.1 * (2.0 - 120.0 / 121.0))
                                     .epsilon(1e-3));
}
