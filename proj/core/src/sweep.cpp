#include "charsweep/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "charsweep/csv.hpp"

namespace charsweep {

namespace {

struct FanEdges {
  double center;
  double speed_lo, speed_hi;
  double value_lo, value_hi;
};

FanEdges fan_edges(const PiecewiseProfile& p, const FluxModel& m, double center) {
  FanEdges f;
  f.center = center;
  f.speed_lo = char_speed(p, m, center, Side::Left, 0);
  f.speed_hi = char_speed(p, m, center, Side::Right, 0);
  double fl = eval_profile(p, center, Side::Left, 0);
  double fr = eval_profile(p, center, Side::Right, 0);
  f.value_lo = std::min(fl, fr);
  f.value_hi = std::max(fl, fr);
  return f;
}

// Curve state at time T (right-continuous at event times).
struct CurveState {
  Regime regime;
  double xl, xr, xi;
};

bool state_at(const ShockCurve& c, double T, CurveState& out) {
  if (c.samples.empty()) return false;
  double t0 = c.samples.front().t;
  double t1 = c.samples.back().t;
  if (T < t0 - 1e-14 * (1.0 + std::abs(T))) return false;
  double t_end_tol = 1e-14 * (1.0 + std::abs(t1));
  if (c.status == CurveStatus::Merged) {
    if (T >= t1 - t_end_tol) return false;  // the merged child takes over
  } else if (T > t1 + t_end_tol) {
    return false;
  }
  auto it = std::upper_bound(c.samples.begin(), c.samples.end(), T,
                             [](double v, const CurveSample& s) { return v < s.t; });
  if (it == c.samples.begin()) return false;
  const CurveSample& a = *(it - 1);  // last sample with t <= T
  out.regime = a.regime;
  out.xl = a.xl;
  out.xr = a.xr;
  out.xi = a.xi;
  if (it != c.samples.end() && a.t < T && it->regime == a.regime) {
    const CurveSample& b = *it;
    double w = (T - a.t) / (b.t - a.t);
    out.xl = a.xl + w * (b.xl - a.xl);
    out.xr = a.xr + w * (b.xr - a.xr);
    out.xi = a.xi + w * (b.xi - a.xi);
  }
  return true;
}

bool left_real(Regime r) { return r == Regime::Kind1 || r == Regime::Kind2FromLeft; }
bool right_real(Regime r) { return r == Regime::Kind1 || r == Regime::Kind2FromRight; }

}  // namespace

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Characteristic: return "characteristic";
    case Provenance::Rarefaction: return "rarefaction";
    case Provenance::StraightLine: return "straight_line";
  }
  return "?";
}

double rarefaction_value(const FluxModel& model, const PiecewiseProfile& profile,
                         double fan_center, double X, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::ValidationError, "rarefaction_value requires t > 0");
  FanEdges f = fan_edges(profile, model, fan_center);
  double ray = (X - fan_center) / t;
  double pad = 1e-12 * (1.0 + std::abs(f.speed_lo) + std::abs(f.speed_hi));
  if (ray < f.speed_lo - pad || ray > f.speed_hi + pad)
    throw Error(ErrorCode::OutOfFan, "requested point lies outside the rarefaction cone", ray);
  return invert_speed(model, std::clamp(ray, f.speed_lo, f.speed_hi),
                      {f.value_lo, f.value_hi});
}

double straight_line_value(const PiecewiseProfile& profile, const FluxModel& model,
                           const StraightSegment& seg, double X, double t) {
  (void)model;
  if (!(t >= 0.0)) throw Error(ErrorCode::ValidationError, "straight_line_value requires t >= 0");
  double denom = 1.0 + seg.k * t;
  if (denom <= 1e-14)
    throw Error(ErrorCode::FocusedSegment,
                "segment has focused; its shock is handled by the tracker", -1.0 / seg.k);
  double x0 = (X - seg.k * seg.c * t) / denom;
  double tol = 1e-12 * (1.0 + std::abs(seg.a) + std::abs(seg.b));
  if (x0 < seg.a - tol || x0 > seg.b + tol)
    throw Error(ErrorCode::OutOfRange, "point outside the segment's characteristic span", x0);
  x0 = std::clamp(x0, seg.a, seg.b);
  if (x0 == seg.a) return eval_profile(profile, x0, Side::Right, 0);
  if (x0 == seg.b) return eval_profile(profile, x0, Side::Left, 0);
  return eval_profile(profile, x0, Side::Interior, 0);
}

std::vector<std::pair<double, double>> multivalue_surface(const PiecewiseProfile& profile,
                                                          const FluxModel& model, double t,
                                                          const std::vector<double>& feet) {
  std::vector<std::pair<double, double>> out;
  out.reserve(feet.size());
  for (double x0 : feet) {
    bool on_bp = false;
    for (double bp : profile.breakpoints) on_bp |= (x0 == bp);
    Side side = on_bp ? Side::Left : Side::Interior;
    out.emplace_back(x0 + char_speed(profile, model, x0, side, 0) * t,
                     eval_profile(profile, x0, side, 0));
  }
  return out;
}

namespace {

// A structure the foot walk passes through when no shock owns it at time T:
// a free fan (emitted as its full cone) or a pristine straight segment.
struct Passive {
  double lo = 0.0, hi = 0.0;  // feet-interval it occupies (fan: lo == hi)
  const Fan* fan = nullptr;
  const StraightSegment* seg = nullptr;
};

struct Walker {
  const PiecewiseProfile& p;
  const FluxModel& m;
  double T, dX;
  double xwin_lo = 0.0, xwin_hi = 0.0;  // X-window the slice must cover
  bool done = false;
  std::vector<Passive> passives;
  std::size_t next_passive = 0;
  double cursor = 0.0;
  Side cursor_side = Side::Interior;
  SolutionSlice slice;

  void emit(double X, double u, Provenance prov) {
    if (!slice.samples.empty()) {
      double prevX = slice.samples.back().X;
      if (X <= prevX + 1e-14 * (1.0 + std::abs(X))) {
        // seam duplicate: collapse when values agree; record a contact
        // unless a marker at this position is already down
        if (std::abs(slice.samples.back().u - u) <= 1e-12 * (1.0 + std::abs(u))) return;
        // interpolated states at off-sample times split the two-sided
        // position by O(dt^2); do not double-report the same jump
        if (!slice.discontinuities.empty() &&
            std::abs(slice.discontinuities.back().X - X) <= 1e-6 * (1.0 + std::abs(X)))
          return;
        slice.discontinuities.push_back({X, slice.samples.back().u, u});
        return;
      }
    }
    slice.samples.push_back({X, u, prov});
  }

  void emit_foot(double x0, Side side) {
    double h = char_speed(p, m, x0, side, 0);
    emit(x0 + h * T, eval_profile(p, x0, side, 0), Provenance::Characteristic);
  }

  // Plain characteristic march of feet in [a, b]. Outside the X-window the
  // walk accelerates (coarse, non-emitting) so unbounded end pieces cost
  // nothing; inside, the foot increment adapts as dX / (1 + h' T).
  void feet_only(double a, double b, Side enter_side) {
    if (done) return;
    if (!(a < b)) {
      if (a == b) emit_foot(a, enter_side == Side::Interior ? Side::Left : enter_side);
      return;
    }
    double x0 = a;
    Side side = enter_side;
    int guard = 0;
    while (x0 < b) {
      if (++guard > 4000000)
        throw Error(ErrorCode::InternalConsistency, "sweep: foot walk runaway");
      double h = char_speed(p, m, x0, side, 0);
      double X = x0 + h * T;
      double hp = char_speed(p, m, x0, side, 1);
      double denom = std::max(1.0 + hp * T, 0.02);  // the step-shrink rule
      double step;
      if (X < xwin_lo) {
        step = std::max(dX, 0.8 * (xwin_lo - X)) / denom;
      } else if (X > xwin_hi) {
        emit_foot(x0, side);
        done = true;
        return;
      } else {
        emit_foot(x0, side);
        step = dX / denom;
      }
      step = std::max(step, 1e-9 * (1.0 + std::abs(x0)));
      double next = std::min(x0 + step, b);
      // stop exactly at interior breakpoints to seal both side limits
      for (double bp : p.breakpoints)
        if (bp > x0 + 1e-15 && bp < next) next = bp;
      if (next >= b) break;
      bool at_bp = false;
      for (double bp : p.breakpoints) at_bp |= (next == bp);
      if (at_bp) {
        emit_foot(next, Side::Left);
        side = Side::Right;
      } else {
        side = Side::Interior;
      }
      x0 = next;
    }
    emit_foot(b, Side::Left);
  }

  void fan_cone(const FanEdges& fan, double ray_lo, double ray_hi) {
    if (done || !(T > 0.0) || !(ray_hi > ray_lo)) return;
    double Xlo = fan.center + ray_lo * T;
    double Xhi = fan.center + ray_hi * T;
    int n = std::max(1, static_cast<int>(std::ceil((Xhi - Xlo) / dX)));
    for (int i = 0; i <= n; ++i) {
      double X = Xlo + (Xhi - Xlo) * i / n;
      double ray = std::clamp((X - fan.center) / T, fan.speed_lo, fan.speed_hi);
      emit(X, invert_speed(m, ray, {fan.value_lo, fan.value_hi}), Provenance::Rarefaction);
    }
  }

  void straight_span(const StraightSegment& seg) {
    if (done) return;
    double Xlo = seg.k * (seg.a + seg.c) * T + seg.a;
    double Xhi = seg.k * (seg.b + seg.c) * T + seg.b;
    int n = std::max(1, static_cast<int>(std::ceil((Xhi - Xlo) / dX)));
    for (int i = 0; i <= n; ++i) {
      double X = Xlo + (Xhi - Xlo) * i / n;
      emit(X, straight_line_value(p, m, seg, X, T), Provenance::StraightLine);
    }
  }

  // Walk feet from the cursor to `target`, passing through any free
  // structures on the way.
  void walk_to(double target) {
    if (done) return;
    double tol = 1e-13 * (1.0 + std::abs(target));
    while (!done && next_passive < passives.size() && passives[next_passive].lo <= target + tol) {
      const Passive& ps = passives[next_passive];
      if (ps.hi < cursor - tol) { ++next_passive; continue; }  // consumed region skipped
      if (ps.fan) {
        feet_only(cursor, ps.fan->center, cursor_side);
        if (T > 0.0) {
          FanEdges fe = fan_edges(p, m, ps.fan->center);
          fan_cone(fe, fe.speed_lo, fe.speed_hi);
        } else {
          double c = ps.fan->center;
          slice.discontinuities.push_back({c, eval_profile(p, c, Side::Left, 0),
                                           eval_profile(p, c, Side::Right, 0)});
        }
        cursor = ps.fan->center;
        cursor_side = Side::Right;
      } else {
        feet_only(cursor, ps.seg->a, cursor_side);
        straight_span(*ps.seg);
        cursor = ps.seg->b;
        cursor_side = Side::Right;
      }
      ++next_passive;
    }
    feet_only(cursor, target, cursor_side);
    cursor = target;
  }

  // Advance the cursor without emitting (a shock jump consumed the feet).
  void jump_to(double target, Side side) {
    cursor = std::max(cursor, target);
    cursor_side = side;
    double tol = 1e-13 * (1.0 + std::abs(target));
    while (next_passive < passives.size() && passives[next_passive].hi < cursor - tol)
      ++next_passive;
  }
};

}  // namespace

SolutionSlice sweep_solution(const PiecewiseProfile& profile, const FluxModel& model,
                             const ShockGraph& graph, double T, double dX) {
  if (!(dX > 0.0)) throw Error(ErrorCode::ValidationError, "sweep requires dX > 0");
  if (!(T >= 0.0)) throw Error(ErrorCode::ValidationError, "sweep requires T >= 0");
  if (graph.time < T - 1e-12 * (1.0 + T))
    throw Error(ErrorCode::MissingGraph,
                "graph evolved only to t = " + std::to_string(graph.time) +
                    " but the sweep needs t = " + std::to_string(T));

  struct ActiveCurve {
    CurveState st;
    const ShockCurve* c;
  };
  std::vector<ActiveCurve> act;
  for (const auto& c : graph.curves) {
    CurveState st;
    if (state_at(c, T, st)) act.push_back({st, &c});
  }
  std::sort(act.begin(), act.end(),
            [](const ActiveCurve& a, const ActiveCurve& b) { return a.st.xi < b.st.xi; });

  Walker w{profile, model, T, dX};
  w.slice.time = T;

  // free structures: fans not owned by any curve at T, segments pristine at T
  for (const auto& fan : graph.fans) {
    bool owned = false;
    for (const auto& ac : act) {
      if (!left_real(ac.st.regime) && ac.st.xl == fan.center) owned = true;
      if (!right_real(ac.st.regime) && ac.st.xr == fan.center) owned = true;
    }
    if (!owned) w.passives.push_back({fan.center, fan.center, &fan, nullptr});
  }
  for (std::size_t si = 0; si < graph.segments.size(); ++si) {
    const auto& ss = graph.segment_state[si];
    bool pristine = (ss.state == 0) || (ss.when > T);
    if (pristine && T < -1.0 / graph.segments[si].k)
      w.passives.push_back({graph.segments[si].a, graph.segments[si].b, nullptr,
                            &graph.segments[si]});
  }
  std::sort(w.passives.begin(), w.passives.end(),
            [](const Passive& a, const Passive& b) {
              if (a.lo != b.lo) return a.lo < b.lo;
              return (a.fan != nullptr) > (b.fan != nullptr);  // fan before segment
            });

  // sweep window: domain hint widened by the largest characteristic excursion
  double h_min = 0.0, h_max = 0.0;
  {
    const int n = 2048;
    for (int i = 0; i <= n; ++i) {
      double x = profile.domain_hint.lo + profile.domain_hint.width() * i / n;
      bool on_bp = false;
      for (double bp : profile.breakpoints) on_bp |= (x == bp);
      double h = char_speed(profile, model, x, on_bp ? Side::Left : Side::Interior, 0);
      h_min = std::min(h_min, h);
      h_max = std::max(h_max, h);
    }
    for (double bp : profile.breakpoints) {
      for (Side sd : {Side::Left, Side::Right}) {
        double h = char_speed(profile, model, bp, sd, 0);
        h_min = std::min(h_min, h);
        h_max = std::max(h_max, h);
      }
    }
  }
  double max_h = std::max(std::abs(h_min), std::abs(h_max));
  double x_left = profile.domain_hint.lo - max_h * T;
  double x_right = profile.domain_hint.hi + max_h * T;
  double pad = 0.05 * profile.domain_hint.width();
  w.xwin_lo = profile.domain_hint.lo + std::min(0.0, h_min) * T - pad;
  w.xwin_hi = profile.domain_hint.hi + std::max(0.0, h_max) * T + pad;
  for (const auto& ac : act) {
    if (left_real(ac.st.regime)) x_left = std::min(x_left, ac.st.xl - dX);
    if (right_real(ac.st.regime)) x_right = std::max(x_right, ac.st.xr + dX);
  }
  w.cursor = x_left;

  const Fan* open_fan = nullptr;  // fan opened by the previous curve's right side
  double open_ray = 0.0;

  auto fan_of = [&](double center) {
    const Fan* f = graph.fan_at(center);
    if (!f) throw Error(ErrorCode::InternalConsistency, "sweep: curve references an unknown fan");
    return f;
  };

  for (const auto& ac : act) {
    const CurveState& st = ac.st;
    double u_left_val = 0.0, u_right_val = 0.0;

    if (left_real(st.regime)) {
      if (open_fan)
        throw Error(ErrorCode::InternalConsistency, "sweep: dangling fan before a real foot");
      w.walk_to(st.xl);
      u_left_val = eval_profile(profile, st.xl, Side::Left, 0);
    } else {
      const Fan* f = fan_of(st.xl);
      FanEdges fe = fan_edges(profile, model, f->center);
      double ray_here = std::clamp((st.xi - f->center) / T, fe.speed_lo, fe.speed_hi);
      if (open_fan && open_fan->center == f->center) {
        w.fan_cone(fe, open_ray, ray_here);
      } else {
        if (open_fan)
          throw Error(ErrorCode::InternalConsistency, "sweep: fan mismatch between curves");
        w.walk_to(f->center);
        w.fan_cone(fe, fe.speed_lo, ray_here);
      }
      open_fan = nullptr;
      u_left_val = invert_speed(model, ray_here, {fe.value_lo, fe.value_hi});
    }

    if (right_real(st.regime)) {
      u_right_val = eval_profile(profile, st.xr, Side::Right, 0);
      w.jump_to(st.xr, Side::Right);
    } else {
      const Fan* f = fan_of(st.xr);
      FanEdges fe = fan_edges(profile, model, f->center);
      double ray = std::clamp((st.xi - f->center) / T, fe.speed_lo, fe.speed_hi);
      u_right_val = invert_speed(model, ray, {fe.value_lo, fe.value_hi});
      open_fan = f;
      open_ray = ray;
      w.jump_to(f->center, Side::Right);
    }
    w.slice.discontinuities.push_back({st.xi, u_left_val, u_right_val});
  }

  if (open_fan) {
    FanEdges fe = fan_edges(profile, model, open_fan->center);
    w.fan_cone(fe, open_ray, fe.speed_hi);
  }
  w.walk_to(x_right);

  std::sort(w.slice.discontinuities.begin(), w.slice.discontinuities.end(),
            [](const Discontinuity& a, const Discontinuity& b) { return a.X < b.X; });
  return w.slice;
}

void write_slice_csv(const SolutionSlice& slice, std::ostream& out) {
  out << "X,u,provenance\n";
  for (const auto& s : slice.samples)
    out << csv_num(s.X) << ',' << csv_num(s.u) << ',' << provenance_name(s.provenance) << '\n';
}

void write_discontinuities_csv(const SolutionSlice& slice, std::ostream& out) {
  out << "X,u_left,u_right\n";
  for (const auto& d : slice.discontinuities)
    out << csv_num(d.X) << ',' << csv_num(d.u_left) << ',' << csv_num(d.u_right) << '\n';
}

}  // namespace charsweep
