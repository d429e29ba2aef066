#include "charsweep/shockdyn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "charsweep/csv.hpp"

namespace charsweep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFlipEnter = 1e-3;  // |1 + h' t| below this switches to x-stepping
constexpr double kFlipExit = 5e-3;
constexpr int kFlipMaxSteps = 4096;

double tiny_rel(double a) { return 1e-13 * (1.0 + std::abs(a)); }

Fan make_fan(const CriticalPoint& pt) {
  Fan f;
  f.point_id = pt.id;
  f.center = pt.x;
  f.speed_lo = pt.left.h[0];
  f.speed_hi = pt.right.h[0];
  f.value_lo = std::min(pt.left.f, pt.right.f);
  f.value_hi = std::max(pt.left.f, pt.right.f);
  return f;
}

double fan_value(const FluxModel& m, const Fan& fan, double ray) {
  if (ray >= fan.speed_lo && ray <= fan.speed_hi)
    return invert_speed(m, ray, {fan.value_lo, fan.value_hi});
  // Off-cone rays appear transiently at entry/exit contacts and in RK4 stage
  // probes; evaluate by the analytic continuation when the speed map stays
  // invertible, otherwise report the fan as exited.
  double span = std::max(fan.value_hi - fan.value_lo, 1e-6);
  Interval bracket{fan.value_lo, fan.value_hi};
  for (int grow = 0; grow < 60; ++grow) {
    bracket.lo -= span;
    bracket.hi += span;
    span *= 2.0;
    double glo = flux_derivative(m, bracket.lo, 1);
    double ghi = flux_derivative(m, bracket.hi, 1);
    if (ray < std::min(glo, ghi) || ray > std::max(glo, ghi)) continue;
    try {
      return invert_speed(m, ray, bracket);
    } catch (const Error&) {
      break;
    }
  }
  throw Error(ErrorCode::ExitedFan, "ray left the rarefaction cone", ray);
}

}  // namespace

std::string event_type_name(EventType type) {
  switch (type) {
    case EventType::CancelPoint: return "cancel_point";
    case EventType::Merge: return "merge";
    case EventType::EnterRarefaction: return "enter_rarefaction";
    case EventType::ExitRarefaction: return "exit_rarefaction";
    case EventType::StraightLineActivate: return "straight_line_activate";
    case EventType::SingularReseed: return "singular_reseed";
  }
  return "?";
}

const CriticalPoint* ShockGraph::point_by_id(int id) const {
  for (const auto& p : points)
    if (p.id == id) return &p;
  return nullptr;
}

const Fan* ShockGraph::fan_at(double center) const {
  for (const auto& f : fans)
    if (f.center == center) return &f;
  return nullptr;
}

bool ShockGraph::cancelled(int point_id) const {
  return std::find(cancelled_points.begin(), cancelled_points.end(), point_id) !=
         cancelled_points.end();
}

double shock_speed(const FluxModel& model, double ul, double ur) {
  if (ul == ur)
    throw Error(ErrorCode::DegenerateJump, "shock_speed: coincident states", ul);
  return flux_chord(model, ul, ur);
}

std::pair<double, double> rhs_kind1(const PiecewiseProfile& p, const FluxModel& m, double x_l,
                                    double x_r, double t) {
  double ul = eval_profile(p, x_l, Side::Left, 0);
  double ur = eval_profile(p, x_r, Side::Right, 0);
  if (std::abs(ul - ur) <= 1e-14 * (1.0 + std::abs(ul) + std::abs(ur)))
    throw Error(ErrorCode::DegenerateJump, "rhs_kind1: side states coincide");
  double sigma = flux_chord(m, ul, ur);
  double hl = char_speed(p, m, x_l, Side::Left, 0);
  double hr = char_speed(p, m, x_r, Side::Right, 0);
  double dl = 1.0 + char_speed(p, m, x_l, Side::Left, 1) * t;
  double dr = 1.0 + char_speed(p, m, x_r, Side::Right, 1) * t;
  if (std::abs(dl) < kSingularEps)
    throw Error(ErrorCode::SingularDenominator, "rhs_kind1: left-foot denominator vanished", 0);
  if (std::abs(dr) < kSingularEps)
    throw Error(ErrorCode::SingularDenominator, "rhs_kind1: right-foot denominator vanished", 1);
  return {(sigma - hl) / dl, (sigma - hr) / dr};
}

double rhs_kind2(const PiecewiseProfile& p, const FluxModel& m, double x_foot, double t,
                 double fan_center, Side side) {
  if (!(t > 0.0)) throw Error(ErrorCode::ValidationError, "rhs_kind2 requires t > 0");
  Fan fan;
  fan.center = fan_center;
  fan.speed_lo = char_speed(p, m, fan_center, Side::Left, 0);
  fan.speed_hi = char_speed(p, m, fan_center, Side::Right, 0);
  double fl = eval_profile(p, fan_center, Side::Left, 0);
  double fr = eval_profile(p, fan_center, Side::Right, 0);
  fan.value_lo = std::min(fl, fr);
  fan.value_hi = std::max(fl, fr);

  double uf = eval_profile(p, x_foot, side, 0);
  double hf = char_speed(p, m, x_foot, side, 0);
  double ray = hf + (x_foot - fan_center) / t;
  double ufan = fan_value(m, fan, ray);
  double sigma = flux_chord(m, uf, ufan);
  double denom = 1.0 + char_speed(p, m, x_foot, side, 1) * t;
  if (std::abs(denom) < kSingularEps)
    throw Error(ErrorCode::SingularDenominator, "rhs_kind2: foot denominator vanished",
                side == Side::Left ? 0 : 1);
  return (sigma - hf) / denom;
}

double rhs_kind3(const PiecewiseProfile& p, const FluxModel& m, double x, double t,
                 double x1_star, double x2_star) {
  if (!(t > 0.0)) throw Error(ErrorCode::ValidationError, "rhs_kind3 requires t > 0");
  auto build = [&](double c) {
    Fan fan;
    fan.center = c;
    fan.speed_lo = char_speed(p, m, c, Side::Left, 0);
    fan.speed_hi = char_speed(p, m, c, Side::Right, 0);
    double fl = eval_profile(p, c, Side::Left, 0);
    double fr = eval_profile(p, c, Side::Right, 0);
    fan.value_lo = std::min(fl, fr);
    fan.value_hi = std::max(fl, fr);
    return fan;
  };
  if (x1_star == x2_star) {
    if (m.kind == FluxKind::Burgers) return (x - x1_star) / t;  // collapsed-fan limit
    throw Error(ErrorCode::DegenerateJump, "rhs_kind3: coincident fans");
  }
  Fan f1 = build(x1_star), f2 = build(x2_star);
  double u1 = fan_value(m, f1, (x - x1_star) / t);
  double u2 = fan_value(m, f2, (x - x2_star) / t);
  if (u1 == u2) throw Error(ErrorCode::DegenerateJump, "rhs_kind3: equal fan states");
  return flux_chord(m, u1, u2);
}

namespace {

// ---- events and targets ---------------------------------------------------

enum class HitKind { Cancel, Enter, SlTouch, SoftCut, Merge, Exit, SlActivate };

struct Hit {
  double time = 0.0;
  HitKind kind = HitKind::SoftCut;
  double position = 0.0;
  int point_id = -1;
  int curve_a = -1, curve_b = -1;
};

struct Target {
  double x = 0.0;
  HitKind kind = HitKind::SoftCut;
  int point_id = -1;
  double break_time = kNaN;  // pending shock points only
};

std::vector<Target> build_targets(const ShockGraph& g) {
  std::vector<Target> targets;
  for (const auto& pt : g.points) {
    if (g.cancelled(pt.id)) continue;
    switch (pt.kind) {
      case PointKind::Shock2:
      case PointKind::Shock3: {
        bool pending = false;
        for (const auto& pa : g.pending)
          if (pa.active && pa.seed.origin_id == pt.id) pending = true;
        if (pending)
          targets.push_back({pt.x, HitKind::Cancel, pt.id,
                             pt.break_times.empty() ? kNaN : pt.break_times.front()});
        else
          targets.push_back({pt.x, HitKind::SoftCut, pt.id, kNaN});
        break;
      }
      case PointKind::Rarefaction:
      case PointKind::Shock4:
        targets.push_back({pt.x, HitKind::Enter, pt.id, kNaN});
        break;
      case PointKind::StraightLine: {
        bool pending_seg = false;
        for (std::size_t si = 0; si < g.segments.size(); ++si)
          if (g.segment_state[si].state == 0 && (g.segments[si].left_point == pt.id ||
                                                 g.segments[si].right_point == pt.id))
            pending_seg = true;
        targets.push_back({pt.x, pending_seg ? HitKind::SlTouch : HitKind::SoftCut, pt.id, kNaN});
        break;
      }
      default:
        targets.push_back({pt.x, HitKind::SoftCut, pt.id, kNaN});
    }
  }
  std::sort(targets.begin(), targets.end(),
            [](const Target& a, const Target& b) { return a.x < b.x; });
  return targets;
}

// Position bounds a curve's feet must not overrun within a step: the nearest
// critical entity in each foot's outward direction. RK4 stages clamp there so
// a contact step never samples the far side of a breakpoint.
struct FootBounds {
  double xl_min = -std::numeric_limits<double>::infinity();
  double xr_max = std::numeric_limits<double>::infinity();
};

FootBounds foot_bounds(const std::vector<Target>& targets, const ShockCurve& c) {
  FootBounds b;
  const auto& s = c.back();
  if (c.regime == Regime::Kind1 || c.regime == Regime::Kind2FromLeft) {
    for (const auto& tg : targets)
      if (tg.x < s.xl - tiny_rel(s.xl)) b.xl_min = std::max(b.xl_min, tg.x);
  }
  if (c.regime == Regime::Kind1 || c.regime == Regime::Kind2FromRight) {
    for (const auto& tg : targets)
      if (tg.x > s.xr + tiny_rel(s.xr)) { b.xr_max = tg.x; break; }
  }
  return b;
}

// ---- integration machinery ----------------------------------------------

struct CurveDyn {
  const PiecewiseProfile& p;
  const FluxModel& m;
  const ShockGraph& g;

  // State vector of a curve: Kind1 -> (xl, xr); Kind2 -> (foot); Kind3 -> (xi).
  int dim(const ShockCurve& c) const { return c.regime == Regime::Kind1 ? 2 : 1; }

  void deriv(const ShockCurve& c, double t, const double* y, double* dy) const {
    switch (c.regime) {
      case Regime::Kind1: {
        auto [dl, dr] = rhs_kind1(p, m, y[0], y[1], t);
        dy[0] = dl;
        dy[1] = dr;
        return;
      }
      case Regime::Kind2FromLeft:
        dy[0] = rhs_kind2(p, m, y[0], t, c.back().xr, Side::Left);
        return;
      case Regime::Kind2FromRight:
        dy[0] = rhs_kind2(p, m, y[0], t, c.back().xl, Side::Right);
        return;
      case Regime::Kind3:
        dy[0] = rhs_kind3(p, m, y[0], t, c.back().xl, c.back().xr);
        return;
    }
  }

  void load(const ShockCurve& c, double* y) const {
    const auto& s = c.back();
    if (c.regime == Regime::Kind1) { y[0] = s.xl; y[1] = s.xr; }
    else if (c.regime == Regime::Kind2FromLeft) y[0] = s.xl;
    else if (c.regime == Regime::Kind2FromRight) y[0] = s.xr;
    else y[0] = s.xi;
  }

  CurveSample sample_from(const ShockCurve& c, double t, const double* y) const {
    CurveSample s;
    s.t = t;
    s.regime = c.regime;
    switch (c.regime) {
      case Regime::Kind1:
        s.xl = y[0];
        s.xr = y[1];
        s.xi = 0.5 * ((y[0] + char_speed(p, m, y[0], Side::Left, 0) * t) +
                      (y[1] + char_speed(p, m, y[1], Side::Right, 0) * t));
        break;
      case Regime::Kind2FromLeft:
        s.xl = y[0];
        s.xr = c.back().xr;
        s.xi = y[0] + char_speed(p, m, y[0], Side::Left, 0) * t;
        break;
      case Regime::Kind2FromRight:
        s.xl = c.back().xl;
        s.xr = y[0];
        s.xi = y[0] + char_speed(p, m, y[0], Side::Right, 0) * t;
        break;
      case Regime::Kind3:
        s.xl = c.back().xl;
        s.xr = c.back().xr;
        s.xi = y[0];
        break;
    }
    return s;
  }

  // Denominator 1 + h'(x) t of a real foot.
  double foot_denom(double x, Side side, double t) const {
    return 1.0 + char_speed(p, m, x, side, 1) * t;
  }
};

struct Rates {
  double dxl = kNaN, dxr = kNaN, dxi = kNaN;
  bool singular = false;
};

Rates curve_rates(const CurveDyn& dyn, const ShockCurve& c) {
  Rates r;
  const auto& s = c.back();
  try {
    switch (c.regime) {
      case Regime::Kind1: {
        auto [dl, dr] = rhs_kind1(dyn.p, dyn.m, s.xl, s.xr, s.t);
        r.dxl = dl;
        r.dxr = dr;
        r.dxi = shock_speed(dyn.m, eval_profile(dyn.p, s.xl, Side::Left, 0),
                            eval_profile(dyn.p, s.xr, Side::Right, 0));
        break;
      }
      case Regime::Kind2FromLeft:
        r.dxl = rhs_kind2(dyn.p, dyn.m, s.xl, s.t, s.xr, Side::Left);
        r.dxi = r.dxl * dyn.foot_denom(s.xl, Side::Left, s.t) +
                char_speed(dyn.p, dyn.m, s.xl, Side::Left, 0);
        break;
      case Regime::Kind2FromRight:
        r.dxr = rhs_kind2(dyn.p, dyn.m, s.xr, s.t, s.xl, Side::Right);
        r.dxi = r.dxr * dyn.foot_denom(s.xr, Side::Right, s.t) +
                char_speed(dyn.p, dyn.m, s.xr, Side::Right, 0);
        break;
      case Regime::Kind3:
        r.dxi = rhs_kind3(dyn.p, dyn.m, s.xi, s.t, s.xl, s.xr);
        break;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularDenominator && e.code() != ErrorCode::ExitedFan) throw;
    r.singular = true;
  }
  return r;
}

struct StepClamp {
  double lo[2] = {-std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  double hi[2] = {std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
  void apply(int n, double* y) const {
    for (int i = 0; i < n; ++i) y[i] = std::clamp(y[i], lo[i], hi[i]);
  }
};

StepClamp make_clamp(const ShockCurve& c, const FootBounds& b) {
  // stop a hair short of the bound: exactly on it the side convention would
  // evaluate the far piece
  auto below = [](double v) {
    return std::isfinite(v) ? v - 1e-12 * (1.0 + std::abs(v)) : v;
  };
  auto above = [](double v) {
    return std::isfinite(v) ? v + 1e-12 * (1.0 + std::abs(v)) : v;
  };
  StepClamp cl;
  switch (c.regime) {
    case Regime::Kind1:
      cl.lo[0] = above(b.xl_min);
      cl.hi[1] = below(b.xr_max);
      break;
    case Regime::Kind2FromLeft: cl.lo[0] = above(b.xl_min); break;
    case Regime::Kind2FromRight: cl.hi[0] = below(b.xr_max); break;
    case Regime::Kind3: break;
  }
  return cl;
}

void rk4_step(const CurveDyn& dyn, const ShockCurve& c, double t, double dt, double* y,
              const StepClamp& clamp) {
  int n = dyn.dim(c);
  double k1[2], k2[2], k3[2], k4[2], tmp[2];
  dyn.deriv(c, t, y, k1);
  for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
  clamp.apply(n, tmp);
  dyn.deriv(c, t + 0.5 * dt, tmp, k2);
  for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
  clamp.apply(n, tmp);
  dyn.deriv(c, t + 0.5 * dt, tmp, k3);
  for (int i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
  clamp.apply(n, tmp);
  dyn.deriv(c, t + dt, tmp, k4);
  for (int i = 0; i < n; ++i)
    y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  clamp.apply(n, y);
}

// x-parameterized integration through a vanishing foot denominator ("flip
// the equation"): integrate (t, other-coordinates) as functions of the
// singular foot until the target time is reached or the denominator
// recovers. foot_index: 0 = xl, 1 = xr within the Kind1 state; Kind2 has a
// single coordinate.
struct FlipResult {
  double t = 0.0;
  bool recovered = false;  // denominator healthy again, resume t-stepping
};

FlipResult flip_step(const CurveDyn& dyn, const ShockCurve& c, int foot_index, double t,
                     double t_target, double* y, const FootBounds& bounds) {
  const bool kind1 = c.regime == Regime::Kind1;
  const Side side = (kind1 ? (foot_index == 0 ? Side::Left : Side::Right)
                           : (c.regime == Regime::Kind2FromLeft ? Side::Left : Side::Right));

  // State for x-stepping: z = (t [, other foot]); independent variable x.
  auto deriv_x = [&](double x, const double* z, double* dz) {
    double state[2];
    double tt = z[0];
    if (kind1) {
      state[foot_index] = x;
      state[1 - foot_index] = z[1];
    } else {
      state[0] = x;
    }
    // dt/dx = denom/(sigma - h) at the singular foot
    double ul, ur;
    double sigma;
    if (kind1) {
      ul = eval_profile(dyn.p, state[0], Side::Left, 0);
      ur = eval_profile(dyn.p, state[1], Side::Right, 0);
      sigma = flux_chord(dyn.m, ul, ur);
    } else {
      double center = kind1 ? 0.0 : (c.regime == Regime::Kind2FromLeft ? c.back().xr : c.back().xl);
      double uf = eval_profile(dyn.p, x, side, 0);
      double hf = char_speed(dyn.p, dyn.m, x, side, 0);
      Fan fanl;
      fanl.center = center;
      fanl.speed_lo = char_speed(dyn.p, dyn.m, center, Side::Left, 0);
      fanl.speed_hi = char_speed(dyn.p, dyn.m, center, Side::Right, 0);
      double fl = eval_profile(dyn.p, center, Side::Left, 0);
      double fr = eval_profile(dyn.p, center, Side::Right, 0);
      fanl.value_lo = std::min(fl, fr);
      fanl.value_hi = std::max(fl, fr);
      double ray = hf + (x - center) / tt;
      double ufan = fan_value(dyn.m, fanl, ray);
      sigma = flux_chord(dyn.m, uf, ufan);
    }
    double h = char_speed(dyn.p, dyn.m, x, side, 0);
    double num = sigma - h;
    if (std::abs(num) < 1e-14 * (1.0 + std::abs(sigma)))
      throw Error(ErrorCode::SingularDenominator, "flip: speed gap vanished at the foot",
                  foot_index);
    double denom = dyn.foot_denom(x, side, tt);
    dz[0] = denom / num;
    if (kind1) {
      // companion foot follows its own velocity times dt/dx
      double ho = char_speed(dyn.p, dyn.m, state[1 - foot_index],
                             foot_index == 0 ? Side::Right : Side::Left, 0);
      double d_o = dyn.foot_denom(state[1 - foot_index],
                                  foot_index == 0 ? Side::Right : Side::Left, tt);
      dz[1] = (sigma - ho) / d_o * dz[0];
    }
  };

  double x = kind1 ? y[foot_index] : y[0];
  double z[2] = {t, kind1 ? y[1 - foot_index] : 0.0};
  const int zn = kind1 ? 2 : 1;

  // Step direction: the way the foot is moving.
  double probe[2];
  deriv_x(x, z, probe);
  double denom0 = dyn.foot_denom(x, side, t);
  double num0 = denom0 / probe[0];
  double dir = (num0 >= 0.0) ? 1.0 : -1.0;
  double hx = dir * std::max(1e-12, 1e-5 * dyn.p.domain_hint.width());

  for (int it = 0; it < kFlipMaxSteps; ++it) {
    // trial RK4 step in x
    double k1[2], k2[2], k3[2], k4[2], tmp2[2], zc[2] = {z[0], z[1]};
    deriv_x(x, zc, k1);
    for (int i = 0; i < zn; ++i) tmp2[i] = zc[i] + 0.5 * hx * k1[i];
    deriv_x(x + 0.5 * hx, tmp2, k2);
    for (int i = 0; i < zn; ++i) tmp2[i] = zc[i] + 0.5 * hx * k2[i];
    deriv_x(x + 0.5 * hx, tmp2, k3);
    for (int i = 0; i < zn; ++i) tmp2[i] = zc[i] + hx * k3[i];
    deriv_x(x + hx, tmp2, k4);
    double znew[2];
    for (int i = 0; i < zn; ++i)
      znew[i] = zc[i] + hx / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    if (znew[0] >= t_target) {
      // scale the final partial step to land on t_target
      double frac = (t_target - z[0]) / (znew[0] - z[0]);
      double hxp = hx * std::clamp(frac, 0.0, 1.0);
      for (int pass = 0; pass < 3; ++pass) {
        deriv_x(x, zc, k1);
        for (int i = 0; i < zn; ++i) tmp2[i] = zc[i] + 0.5 * hxp * k1[i];
        deriv_x(x + 0.5 * hxp, tmp2, k2);
        for (int i = 0; i < zn; ++i) tmp2[i] = zc[i] + 0.5 * hxp * k2[i];
        deriv_x(x + 0.5 * hxp, tmp2, k3);
        for (int i = 0; i < zn; ++i) tmp2[i] = zc[i] + hxp * k3[i];
        deriv_x(x + hxp, tmp2, k4);
        for (int i = 0; i < zn; ++i)
          znew[i] = zc[i] + hxp / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        double err = znew[0] - t_target;
        if (std::abs(err) <= 1e-15 * (1.0 + t_target)) break;
        hxp *= (t_target - z[0]) / (znew[0] - z[0]);
      }
      x += hxp;
      z[0] = t_target;
      z[1] = znew[1];
      break;
    }
    x += hx;
    z[0] = znew[0];
    z[1] = znew[1];
    // positional bound: the event machinery takes over from here
    double xcap = (dir > 0) ? bounds.xr_max : bounds.xl_min;
    if ((dir > 0 && x >= xcap) || (dir < 0 && x <= xcap)) {
      x = xcap;
      if (kind1) {
        y[foot_index] = x;
        y[1 - foot_index] = z[1];
      } else {
        y[0] = x;
      }
      return {z[0], true};
    }
    if (std::abs(dyn.foot_denom(x, side, z[0])) > kFlipExit) {
      if (kind1) {
        y[foot_index] = x;
        y[1 - foot_index] = z[1];
      } else {
        y[0] = x;
      }
      return {z[0], true};
    }
    if (it + 1 == kFlipMaxSteps)
      throw Error(ErrorCode::SingularDenominator,
                  "flip integration exhausted its step budget", foot_index);
  }

  if (kind1) {
    y[foot_index] = x;
    y[1 - foot_index] = z[1];
  } else {
    y[0] = x;
  }
  return {z[0], false};
}

// Integrate one curve from its current sample to exactly t_end, flipping
// through near-singular denominators and rate-limiting young curves.
void step_curve(const CurveDyn& dyn, ShockCurve& c, double t_end, const FootBounds& bounds) {
  double t = c.back().t;
  double y[2];
  dyn.load(c, y);

  int guard = 0;
  while (t < t_end) {
    if (++guard > 100000)
      throw Error(ErrorCode::InternalConsistency, "step_curve: subdivision runaway");
    double dt = t_end - t;

    // near-singular feet -> x-parameterized stepping
    int flip_foot = -1;
    if (c.regime == Regime::Kind1) {
      if (std::abs(dyn.foot_denom(y[0], Side::Left, t)) < kFlipEnter) flip_foot = 0;
      else if (std::abs(dyn.foot_denom(y[1], Side::Right, t)) < kFlipEnter) flip_foot = 1;
    } else if (c.regime == Regime::Kind2FromLeft) {
      if (std::abs(dyn.foot_denom(y[0], Side::Left, t)) < kFlipEnter) flip_foot = 0;
    } else if (c.regime == Regime::Kind2FromRight) {
      if (std::abs(dyn.foot_denom(y[0], Side::Right, t)) < kFlipEnter) flip_foot = 0;
    }
    if (flip_foot >= 0) {
      int idx = (c.regime == Regime::Kind1) ? flip_foot : 0;
      FlipResult fr = flip_step(dyn, c, idx, t, t_end, y, bounds);
      if (fr.t <= t + 1e-15 * (1.0 + t) && fr.recovered) {
        // parked on a positional bound without time progress; let the event
        // machinery resolve it
        CurveSample sp = dyn.sample_from(c, t, y);
        if (!(c.back().t == sp.t && c.back().xl == sp.xl && c.back().xr == sp.xr))
          c.samples.push_back(sp);
        return;
      }
      t = fr.t;
      continue;
    }

    // near a vanishing denominator the rates blow up like 1/denom; shrink the
    // sub-step geometrically with it so the fourth-order error stays uniform
    // until the x-parameterized flip takes over
    {
      double dmin = std::numeric_limits<double>::infinity();
      if (c.regime == Regime::Kind1) {
        dmin = std::min(std::abs(dyn.foot_denom(y[0], Side::Left, t)),
                        std::abs(dyn.foot_denom(y[1], Side::Right, t)));
      } else if (c.regime == Regime::Kind2FromLeft) {
        dmin = std::abs(dyn.foot_denom(y[0], Side::Left, t));
      } else if (c.regime == Regime::Kind2FromRight) {
        dmin = std::abs(dyn.foot_denom(y[0], Side::Right, t));
      }
      if (dmin < 0.2) dt = std::min(dt, std::max(0.25 * dmin, 1e-7));
    }

    // rate limiting: young curves move at most delta/4 per sub-step, mature
    // ones at most 1% of the domain hint
    double cap = (t - c.t_start < 10.0 * dt && c.delta > 0.0)
                     ? 0.25 * c.delta
                     : 0.01 * dyn.p.domain_hint.width();
    double dy0[2] = {0.0, 0.0};
    dyn.deriv(c, t, y, dy0);
    double speed = std::max(std::abs(dy0[0]), dyn.dim(c) == 2 ? std::abs(dy0[1]) : 0.0);
    if (speed * dt > cap) dt = std::max(cap / speed, dt * 1e-6);

    rk4_step(dyn, c, t, dt, y, make_clamp(c, bounds));
    t += dt;
  }

  CurveSample s = dyn.sample_from(c, t_end, y);
  c.samples.push_back(s);
}

// ---- event detection ------------------------------------------------------

// Second derivative of a foot along the flow, by a forward difference of the
// rate; used for the one-Newton-correction event localization.
double refine_crossing(double gap, double rate, double rate_ahead, double eps) {
  double dt1 = gap / rate;
  if (!(dt1 > 0.0) || !std::isfinite(dt1)) return dt1;
  double accel = (rate_ahead - rate) / eps;
  double denom = rate + accel * dt1;
  if (denom != 0.0 && std::isfinite(accel)) {
    double q = gap - (rate * dt1 + 0.5 * accel * dt1 * dt1);
    double dt2 = dt1 + q / denom;
    if (dt2 > 0.0 && std::isfinite(dt2)) return dt2;
  }
  return dt1;
}

std::vector<Hit> scan_hits(const ShockGraph& g, const PiecewiseProfile& p, const FluxModel& m,
                           double t, double dt) {
  CurveDyn dyn{p, m, g};
  std::vector<Hit> hits;
  const double window = dt * (1.0 + 1e-9);
  std::vector<Target> targets = build_targets(g);

  auto foot_hit = [&](const ShockCurve& c, double x, double rate, int dir, Side side) {
    if (!(std::abs(rate) > 0.0)) return;
    if ((rate > 0) != (dir > 0)) return;  // moving away from that side
    // nearest target strictly in the direction of motion
    const Target* best = nullptr;
    for (const auto& tg : targets) {
      if (dir > 0 && tg.x > x + tiny_rel(x)) { best = &tg; break; }
      if (dir < 0 && tg.x < x - tiny_rel(x)) best = &tg;  // keep last one below
    }
    if (!best) return;
    double gap = best->x - x;
    double eps = std::min(dt, std::abs(gap / rate)) * 0.5;
    double rate_ahead = rate;
    if (eps > 0.0 && std::isfinite(eps)) {
      try {
        double ytmp[2];
        dyn.load(c, ytmp);
        double dtmp[2];
        // advance the probe state linearly along the flow
        double yprobe[2] = {ytmp[0], dyn.dim(c) == 2 ? ytmp[1] : 0.0};
        dyn.deriv(c, t, yprobe, dtmp);
        double yfwd[2] = {yprobe[0] + dtmp[0] * eps,
                          dyn.dim(c) == 2 ? yprobe[1] + dtmp[1] * eps : 0.0};
        double dfw[2];
        dyn.deriv(c, t + eps, yfwd, dfw);
        int comp = (c.regime == Regime::Kind1 && side == Side::Right) ? 1 : 0;
        rate_ahead = dfw[comp];
      } catch (const Error&) {
        rate_ahead = rate;
      }
    }
    double dt_hit = refine_crossing(gap, rate, rate_ahead, std::max(eps, 1e-12));
    if (!(dt_hit > 0.0) || dt_hit > window) return;
    Hit h;
    h.time = t + dt_hit;
    h.position = best->x;
    h.curve_a = c.id;
    h.point_id = best->point_id;
    if (best->kind == HitKind::Cancel) {
      // fake point iff crossed before its break time; otherwise the new curve
      // activates first and the pair merges
      h.kind = (h.time <= best->break_time) ? HitKind::Cancel : HitKind::SoftCut;
    } else {
      h.kind = best->kind;
    }
    hits.push_back(h);
  };

  // Active curves, ordered by position.
  std::vector<const ShockCurve*> active;
  for (const auto& c : g.curves)
    if (c.status == CurveStatus::Active) active.push_back(&c);
  std::sort(active.begin(), active.end(),
            [](const ShockCurve* a, const ShockCurve* b) { return a->back().xi < b->back().xi; });

  for (const ShockCurve* cp : active) {
    const auto& c = *cp;
    Rates r = curve_rates(dyn, c);
    const auto& s = c.back();
    double singular_rate = 1e9;
    switch (c.regime) {
      case Regime::Kind1:
        foot_hit(c, s.xl, r.singular ? -singular_rate : r.dxl, -1, Side::Left);
        foot_hit(c, s.xr, r.singular ? singular_rate : r.dxr, +1, Side::Right);
        break;
      case Regime::Kind2FromLeft:
        foot_hit(c, s.xl, r.singular ? -singular_rate : r.dxl, -1, Side::Left);
        break;
      case Regime::Kind2FromRight:
        foot_hit(c, s.xr, r.singular ? singular_rate : r.dxr, +1, Side::Right);
        break;
      case Regime::Kind3:
        break;
    }

    // fan-cone exits
    if (!r.singular && c.regime != Regime::Kind1 && s.t > 0.0) {
      auto exit_check = [&](double center, double edge, double inward) {
        double ray = (s.xi - center) / s.t;
        double dt_hit;
        if ((edge - ray) * inward <= 1e-12 * (1.0 + std::abs(edge))) {
          dt_hit = 0.0;  // already at or past the edge
        } else {
          double drdt = (r.dxi - ray) / s.t;
          if (std::abs(drdt) < 1e-15) return;
          dt_hit = (edge - ray) / drdt;
        }
        if (dt_hit >= 0.0 && dt_hit <= window) {
          Hit h;
          h.time = t + dt_hit;
          h.kind = HitKind::Exit;
          h.position = center + edge * (t + dt_hit);
          h.curve_a = c.id;
          const Fan* fan = g.fan_at(center);
          h.point_id = fan ? fan->point_id : -1;
          hits.push_back(h);
        }
      };
      if (c.regime == Regime::Kind2FromLeft) {
        const Fan* fan = g.fan_at(s.xr);
        if (fan) exit_check(fan->center, fan->speed_hi, 1.0);
      } else if (c.regime == Regime::Kind2FromRight) {
        const Fan* fan = g.fan_at(s.xl);
        if (fan) exit_check(fan->center, fan->speed_lo, -1.0);
      } else {  // Kind3: may consume either fan completely
        const Fan* f1 = g.fan_at(s.xl);
        const Fan* f2 = g.fan_at(s.xr);
        if (f1) exit_check(f1->center, f1->speed_lo, -1.0);
        if (f2) exit_check(f2->center, f2->speed_hi, 1.0);
      }
    }
  }

  // merges between facing sides in the same medium
  for (std::size_t i = 0; i + 1 < active.size(); ++i) {
    const auto& a = *active[i];
    const auto& b = *active[i + 1];
    const auto& sa = a.back();
    const auto& sb = b.back();
    Rates ra = curve_rates(dyn, a);
    Rates rb = curve_rates(dyn, b);

    bool a_right_real = a.regime == Regime::Kind1 || a.regime == Regime::Kind2FromRight;
    bool b_left_real = b.regime == Regime::Kind1 || b.regime == Regime::Kind2FromLeft;
    double gap, closing;
    if (a_right_real && b_left_real) {
      gap = sb.xl - sa.xr;
      double va = ra.singular ? 1e9 : ra.dxr;
      double vb = rb.singular ? -1e9 : rb.dxl;
      closing = va - vb;
    } else if (!a_right_real && !b_left_real) {
      // both sides in a fan: same fan required
      double ca = sa.xr, cb = sb.xl;  // centers stored in the fan-side slots
      if (a.regime == Regime::Kind3) ca = sa.xr;
      if (b.regime == Regime::Kind3) cb = sb.xl;
      if (ca != cb) continue;
      gap = sb.xi - sa.xi;
      closing = ra.dxi - rb.dxi;
    } else {
      continue;  // mixed: an Enter event happens first
    }
    if (!(closing > 0.0)) continue;
    double dt_hit = gap / closing;
    if (dt_hit > window) continue;
    Hit h;
    h.time = t + std::max(dt_hit, 0.0);
    h.kind = HitKind::Merge;
    h.position = 0.5 * (sa.xi + sb.xi);
    h.curve_a = a.id;
    h.curve_b = b.id;
    hits.push_back(h);
  }

  // straight-line activations
  for (std::size_t si = 0; si < g.segments.size(); ++si) {
    if (g.segment_state[si].state != 0) continue;
    double tf = -1.0 / g.segments[si].k;
    if (tf > t && tf <= t + window) {
      Hit h;
      h.time = tf;
      h.kind = HitKind::SlActivate;
      h.position = -g.segments[si].c;
      h.point_id = static_cast<int>(si);
      hits.push_back(h);
    }
  }

  std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) {
    if (x.time != y.time) return x.time < y.time;
    return x.position < y.position;
  });
  return hits;
}

Event hit_to_event(const ShockGraph& g, const Hit& h) {
  Event e;
  e.time = h.time;
  e.position = h.position;
  switch (h.kind) {
    case HitKind::Cancel:
      e.type = EventType::CancelPoint;
      e.participants = {h.point_id, h.curve_a};
      break;
    case HitKind::Enter:
      e.type = EventType::EnterRarefaction;
      e.participants = {h.curve_a, h.point_id};
      break;
    case HitKind::SlTouch:
      e.type = EventType::CancelPoint;
      e.participants = {h.point_id, h.curve_a};
      break;
    case HitKind::Merge:
      e.type = EventType::Merge;
      e.participants = {h.curve_a, h.curve_b};
      break;
    case HitKind::Exit:
      e.type = EventType::ExitRarefaction;
      e.participants = {h.curve_a, h.point_id};
      break;
    case HitKind::SlActivate: {
      e.type = EventType::StraightLineActivate;
      const auto& seg = g.segments[static_cast<std::size_t>(h.point_id)];
      e.participants = {seg.left_point, seg.right_point};
      break;
    }
    case HitKind::SoftCut:
      e.type = EventType::CancelPoint;  // not reported; placeholder
      e.participants = {};
      break;
  }
  return e;
}

}  // namespace

std::vector<Event> detect_events(const ShockGraph& graph, const PiecewiseProfile& profile,
                                 const FluxModel& model, double t, double dt) {
  std::vector<Event> events;
  for (const auto& h : scan_hits(graph, profile, model, t, dt))
    if (h.kind != HitKind::SoftCut) events.push_back(hit_to_event(graph, h));
  return events;
}

namespace {

ShockCurve* find_curve(ShockGraph& g, int id) {
  for (auto& c : g.curves)
    if (c.id == id) return &c;
  return nullptr;
}

void check_kind1_invariants(const ShockGraph& g, const PiecewiseProfile& p, const FluxModel& m,
                            const ShockCurve& c) {
  const auto& s = c.back();
  if (c.regime != Regime::Kind1) return;
  if (s.xl == s.xr) return;  // only legal at a first-kind seed
  double xil = s.xl + char_speed(p, m, s.xl, Side::Left, 0) * s.t;
  double xir = s.xr + char_speed(p, m, s.xr, Side::Right, 0) * s.t;
  double scale = 1.0 + std::abs(xil) + std::abs(s.xl) + std::abs(s.xr);
  double tol = kConsistencyTol * scale;
  // a fallback initial point is not on the intersection manifold; its
  // two-sided split stays O(delta) for the life of the curve
  if (c.fallback_seeded) tol = std::max(tol, 2.5 * c.delta);
  if (std::abs(xil - xir) > tol)
    throw Error(ErrorCode::InternalConsistency,
                "feet characteristics disagree on the shock position at t = " +
                    std::to_string(s.t) + " (curve " + std::to_string(c.id) + ")");
  (void)g;
}

void cancel_pending_for_point(ShockGraph& g, int point_id) {
  for (auto& pa : g.pending)
    if (pa.seed.origin_id == point_id) pa.active = false;
}

void touch_segments(ShockGraph& g) {
  for (std::size_t si = 0; si < g.segments.size(); ++si) {
    if (g.segment_state[si].state != 0) continue;
    const auto& seg = g.segments[si];
    double tol = tiny_rel(seg.b - seg.a);
    for (const auto& c : g.curves) {
      if (c.status != CurveStatus::Active) continue;
      const auto& s = c.back();
      bool inside = false;
      if (c.regime == Regime::Kind1 || c.regime == Regime::Kind2FromLeft)
        inside |= (s.xl > seg.a - tol && s.xl < seg.b + tol);
      if (c.regime == Regime::Kind1 || c.regime == Regime::Kind2FromRight)
        inside |= (s.xr > seg.a - tol && s.xr < seg.b + tol);
      if (inside) {
        g.segment_state[si] = {1, g.time};
        for (int pid : {seg.left_point, seg.right_point}) {
          const CriticalPoint* pt = g.point_by_id(pid);
          if (pt && pt->kind == PointKind::StraightLine && !g.cancelled(pid))
            g.cancelled_points.push_back(pid);
        }
        break;
      }
    }
  }
}

void activate_seed(ShockGraph& g, const PiecewiseProfile& p, const FluxModel& m,
                   const ShockSeed& seed) {
  ShockCurve c;
  c.id = g.next_curve_id++;
  c.regime = seed.regime;
  c.origin_point = seed.origin_id;
  c.t_start = seed.t0;
  c.delta = g.options.delta;
  const CriticalPoint* origin = g.point_by_id(seed.origin_id);
  c.fallback_seeded = origin && origin->singular;
  CurveSample s;
  s.t = seed.t0;
  s.regime = seed.regime;
  s.xl = seed.xl0;
  s.xr = seed.xr0;
  switch (seed.regime) {
    case Regime::Kind1:
      s.xi = 0.5 * ((s.xl + char_speed(p, m, s.xl, Side::Left, 0) * s.t) +
                    (s.xr + char_speed(p, m, s.xr, Side::Right, 0) * s.t));
      break;
    case Regime::Kind2FromLeft:
      s.xi = s.xl + char_speed(p, m, s.xl, Side::Left, 0) * s.t;
      break;
    case Regime::Kind2FromRight:
      s.xi = s.xr + char_speed(p, m, s.xr, Side::Right, 0) * s.t;
      break;
    case Regime::Kind3:
      s.xi = kNaN;  // set by the caller
      break;
  }
  c.samples.push_back(s);
  g.curves.push_back(std::move(c));
}

// A fan-crossing seed is born inside its fan; record the entry.
void note_seed_entry(ShockGraph& g, const ShockSeed& seed) {
  if (seed.regime != Regime::Kind2FromLeft && seed.regime != Regime::Kind2FromRight) return;
  Event e;
  e.time = seed.t0;
  e.type = EventType::EnterRarefaction;
  e.participants = {g.curves.back().id, seed.origin_id};
  e.position = g.curves.back().back().xi;
  g.events.push_back(e);
}

}  // namespace

void apply_event(ShockGraph& g, const PiecewiseProfile& p, const FluxModel& m, const Event& e) {
  switch (e.type) {
    case EventType::CancelPoint: {
      int pid = e.participants.at(0);
      const CriticalPoint* pt = g.point_by_id(pid);
      if (!pt) throw Error(ErrorCode::InternalConsistency, "cancel: unknown point");
      if (!g.cancelled(pid)) g.cancelled_points.push_back(pid);
      cancel_pending_for_point(g, pid);
      if (pt->kind == PointKind::StraightLine) {
        for (std::size_t si = 0; si < g.segments.size(); ++si) {
          const auto& seg = g.segments[si];
          if (g.segment_state[si].state == 0 &&
              (seg.left_point == pid || seg.right_point == pid)) {
            g.segment_state[si] = {1, e.time};
            for (int other : {seg.left_point, seg.right_point}) {
              const CriticalPoint* op = g.point_by_id(other);
              if (op && op->kind == PointKind::StraightLine && !g.cancelled(other))
                g.cancelled_points.push_back(other);
            }
          }
        }
      }
      break;
    }
    case EventType::EnterRarefaction: {
      ShockCurve* c = find_curve(g, e.participants.at(0));
      const CriticalPoint* pt = g.point_by_id(e.participants.at(1));
      if (!c || !pt || c->status != CurveStatus::Active)
        throw Error(ErrorCode::InternalConsistency, "enter: inconsistent participants");
      CurveSample s = c->back();
      // the foot that landed on the center names the entry side
      bool from_left = std::abs(s.xr - pt->x) <= std::abs(s.xl - pt->x);
      if (from_left) {
        // the right foot reached the center
        if (c->regime == Regime::Kind1) c->regime = Regime::Kind2FromLeft;
        else if (c->regime == Regime::Kind2FromRight) c->regime = Regime::Kind3;
        else throw Error(ErrorCode::InternalConsistency, "enter: bad regime");
        s.xr = pt->x;
        cancel_pending_for_point(g, pt->id);  // its own crossing would duplicate
      } else {
        if (c->regime == Regime::Kind1) c->regime = Regime::Kind2FromRight;
        else if (c->regime == Regime::Kind2FromLeft) c->regime = Regime::Kind3;
        else throw Error(ErrorCode::InternalConsistency, "enter: bad regime");
        s.xl = pt->x;
        cancel_pending_for_point(g, pt->id);
      }
      s.t = e.time;
      s.regime = c->regime;
      c->samples.push_back(s);
      break;
    }
    case EventType::ExitRarefaction: {
      ShockCurve* c = find_curve(g, e.participants.at(0));
      const CriticalPoint* pt = g.point_by_id(e.participants.at(1));
      if (!c || !pt || c->status != CurveStatus::Active)
        throw Error(ErrorCode::InternalConsistency, "exit: inconsistent participants");
      CurveSample s = c->back();
      // land the contact exactly on the crossed edge ray, re-solving the real
      // foot onto that characteristic
      auto solve_foot = [&](double x0, Side side, double xi_target) {
        double x = x0;
        for (int it = 0; it < 60; ++it) {
          double f = x + char_speed(p, m, x, side, 0) * s.t - xi_target;
          double d = 1.0 + char_speed(p, m, x, side, 1) * s.t;
          if (std::abs(d) < 1e-12) break;
          double xn = x - f / d;
          if (std::abs(xn - x) <= 1e-15 * (1.0 + std::abs(x))) return xn;
          x = xn;
        }
        return x;
      };
      if (c->regime == Regime::Kind2FromLeft && s.xr == pt->x) {
        double edge = char_speed(p, m, pt->x, Side::Right, 0);
        s.xi = pt->x + edge * s.t;
        s.xl = solve_foot(s.xl, Side::Left, s.xi);
        c->regime = Regime::Kind1;
        s.xr = pt->x;
      } else if (c->regime == Regime::Kind2FromRight && s.xl == pt->x) {
        double edge = char_speed(p, m, pt->x, Side::Left, 0);
        s.xi = pt->x + edge * s.t;
        s.xr = solve_foot(s.xr, Side::Right, s.xi);
        c->regime = Regime::Kind1;
        s.xl = pt->x;
      } else if (c->regime == Regime::Kind3 && s.xl == pt->x) {
        double edge = char_speed(p, m, pt->x, Side::Left, 0);
        s.xi = pt->x + edge * s.t;
        c->regime = Regime::Kind2FromRight;  // left fan consumed; foot restarts there
        s.xl = pt->x;
      } else if (c->regime == Regime::Kind3 && s.xr == pt->x) {
        double edge = char_speed(p, m, pt->x, Side::Right, 0);
        s.xi = pt->x + edge * s.t;
        c->regime = Regime::Kind2FromLeft;
        s.xr = pt->x;
      } else {
        throw Error(ErrorCode::InternalConsistency, "exit: fan/curve mismatch");
      }
      s.t = e.time;
      s.regime = c->regime;
      c->samples.push_back(s);
      break;
    }
    case EventType::Merge: {
      ShockCurve* a = find_curve(g, e.participants.at(0));
      ShockCurve* b = find_curve(g, e.participants.at(1));
      if (!a || !b || a->status != CurveStatus::Active || b->status != CurveStatus::Active)
        throw Error(ErrorCode::InternalConsistency, "merge: inactive participants");
      bool a_left_real = a->regime == Regime::Kind1 || a->regime == Regime::Kind2FromLeft;
      bool b_right_real = b->regime == Regime::Kind1 || b->regime == Regime::Kind2FromRight;
      ShockCurve merged;
      merged.id = g.next_curve_id++;
      merged.regime = a_left_real ? (b_right_real ? Regime::Kind1 : Regime::Kind2FromLeft)
                                  : (b_right_real ? Regime::Kind2FromRight : Regime::Kind3);
      merged.origin_point = a->origin_point;
      merged.t_start = e.time;
      merged.delta = g.options.delta;
      CurveSample s;
      s.t = e.time;
      s.regime = merged.regime;
      s.xl = a->back().xl;
      s.xr = b->back().xr;
      s.xi = 0.5 * (a->back().xi + b->back().xi);
      merged.samples.push_back(s);
      a->status = CurveStatus::Merged;
      a->merged_into = merged.id;
      b->status = CurveStatus::Merged;
      b->merged_into = merged.id;
      g.curves.push_back(std::move(merged));
      break;
    }
    case EventType::StraightLineActivate: {
      const CriticalPoint* lp = g.point_by_id(e.participants.at(0));
      const CriticalPoint* rp = g.point_by_id(e.participants.at(1));
      std::size_t si = g.segments.size();
      for (std::size_t i = 0; i < g.segments.size(); ++i)
        if (g.segments[i].left_point == e.participants.at(0) &&
            g.segments[i].right_point == e.participants.at(1))
          si = i;
      if (si == g.segments.size() || !lp || !rp)
        throw Error(ErrorCode::InternalConsistency, "straight-line activate: unknown segment");
      const auto& seg = g.segments[si];
      g.segment_state[si] = {2, e.time};
      bool left_fan = lp->registers_fan;
      bool right_fan = rp->registers_fan;
      ShockCurve c;
      c.id = g.next_curve_id++;
      c.regime = left_fan ? (right_fan ? Regime::Kind3 : Regime::Kind2FromRight)
                          : (right_fan ? Regime::Kind2FromLeft : Regime::Kind1);
      c.origin_point = lp->id;
      c.t_start = e.time;
      c.delta = g.options.delta;
      CurveSample s;
      s.t = e.time;
      s.regime = c.regime;
      s.xl = seg.a;
      s.xr = seg.b;
      s.xi = -seg.c;  // all characteristics of the segment meet here
      c.samples.push_back(s);
      g.curves.push_back(std::move(c));
      for (int pid : {lp->id, rp->id}) {
        const CriticalPoint* pt = g.point_by_id(pid);
        if (pt && pt->kind == PointKind::StraightLine && !g.cancelled(pid))
          g.cancelled_points.push_back(pid);
      }
      break;
    }
    case EventType::SingularReseed: {
      ShockCurve* c = find_curve(g, e.participants.at(0));
      if (!c || c->status != CurveStatus::Active)
        throw Error(ErrorCode::InternalConsistency, "reseed: inactive curve");
      if (c->regime != Regime::Kind1)
        throw Error(ErrorCode::InternalConsistency, "reseed: only two-foot curves supported");
      CurveSample s = c->back();
      // Which foot sits at a vanishing denominator?
      CurveDyn dyn{p, m, g};
      bool left_bad = std::abs(dyn.foot_denom(s.xl, Side::Left, s.t)) < kFlipEnter;
      double xs = left_bad ? s.xl : s.xr;
      Side side = left_bad ? Side::Left : Side::Right;
      double dir = left_bad ? -1.0 : 1.0;
      // March past the singular stretch.
      double step = 1e-4 * p.domain_hint.width();
      double xn = xs;
      int it = 0;
      while (std::abs(dyn.foot_denom(xn, side, s.t)) < kFlipExit && it++ < 1000)
        xn += dir * step;
      if (it >= 1000)
        throw Error(ErrorCode::SingularDenominator, "reseed: no stable foot location found");
      // Restore the companion foot onto the intersection manifold.
      double xo = left_bad ? s.xr : s.xl;
      double xi_target = xn + char_speed(p, m, xn, side, 0) * s.t;
      Side oside = left_bad ? Side::Right : Side::Left;
      for (int k = 0; k < 60; ++k) {
        double f = xo + char_speed(p, m, xo, oside, 0) * s.t - xi_target;
        double d = 1.0 + char_speed(p, m, xo, oside, 1) * s.t;
        if (std::abs(d) < 1e-12) break;
        double xon = xo - f / d;
        if (std::abs(xon - xo) <= 1e-14 * (1.0 + std::abs(xo))) { xo = xon; break; }
        xo = xon;
      }
      if (left_bad) { s.xl = xn; s.xr = xo; }
      else { s.xr = xn; s.xl = xo; }
      s.xi = xi_target;
      s.t = e.time;
      s.regime = c->regime;
      c->samples.push_back(s);
      break;
    }
  }
  g.events.push_back(e);
  touch_segments(g);
}

ShockGraph init_graph(const PiecewiseProfile& p, const FluxModel& m,
                      const EvolveOptions& options) {
  ShockGraph g;
  g.options = options;
  if (g.options.delta <= 0.0) g.options.delta = default_delta(p);
  g.points = classify_points(p, m);
  for (const auto& pt : g.points)
    if (pt.registers_fan) g.fans.push_back(make_fan(pt));
  g.segments = find_straight_segments(p, m, g.points);
  g.segment_state.assign(g.segments.size(), SegmentState{});

  for (const auto& pt : g.points) {
    if (pt.kind != PointKind::Shock1 && pt.kind != PointKind::Shock2 &&
        pt.kind != PointKind::Shock3 && pt.kind != PointKind::Shock4)
      continue;
    std::vector<ShockSeed> seeds;
    try {
      seeds = seed_all(p, m, pt, g.options.delta, g.options.seed_ratio_A);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SeedRejected && e.detail() > 0.0) {
        seeds = seed_all(p, m, pt, 0.9 * e.detail(), g.options.seed_ratio_A);
      } else {
        throw;
      }
    }
    for (const auto& seed : seeds) g.pending.push_back({seed, true});
  }
  std::sort(g.pending.begin(), g.pending.end(),
            [](const PendingActivation& a, const PendingActivation& b) {
              return a.seed.t0 < b.seed.t0;
            });

  // Activate everything that starts at t = 0.
  for (auto& pa : g.pending) {
    if (!pa.active || pa.seed.t0 > 0.0) continue;
    activate_seed(g, p, m, pa.seed);
    note_seed_entry(g, pa.seed);
    pa.active = false;
  }
  return g;
}

void advance(ShockGraph& g, const PiecewiseProfile& p, const FluxModel& m, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::ValidationError, "advance requires dt > 0");
  CurveDyn dyn{p, m, g};
  double t = g.time;
  double step = dt;

  // pending activations cut the step
  for (const auto& pa : g.pending)
    if (pa.active && pa.seed.t0 > t && pa.seed.t0 <= t + step) step = pa.seed.t0 - t;

  auto hits = scan_hits(g, p, m, t, step);
  if (!hits.empty()) step = std::min(step, hits.front().time - t);
  std::vector<Target> targets = build_targets(g);

  if (step > 1e-15 * (1.0 + t)) {
    for (auto& c : g.curves) {
      if (c.status != CurveStatus::Active) continue;
      try {
        step_curve(dyn, c, t + step, foot_bounds(targets, c));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::SingularDenominator) {
          Event ev;
          ev.time = c.back().t;
          ev.type = EventType::SingularReseed;
          ev.participants = {c.id};
          ev.position = c.back().xi;
          apply_event(g, p, m, ev);
        } else if (e.code() == ErrorCode::ExitedFan) {
          // the cone edge was crossed inside a step: convert on the spot
          const auto& s = c.back();
          const Fan* fan = nullptr;
          if (c.regime == Regime::Kind2FromLeft) fan = g.fan_at(s.xr);
          else if (c.regime == Regime::Kind2FromRight) fan = g.fan_at(s.xl);
          else if (c.regime == Regime::Kind3) {
            const Fan* f1 = g.fan_at(s.xl);
            const Fan* f2 = g.fan_at(s.xr);
            double r1 = f1 ? (s.xi - f1->center) / s.t - f1->speed_lo : 1e300;
            double r2 = f2 ? f2->speed_hi - (s.xi - f2->center) / s.t : 1e300;
            fan = (std::abs(r1) < std::abs(r2)) ? f1 : f2;
          }
          if (!fan) throw;
          Event ev;
          ev.time = s.t;
          ev.type = EventType::ExitRarefaction;
          ev.participants = {c.id, fan->point_id};
          ev.position = s.xi;
          apply_event(g, p, m, ev);
        } else {
          throw;
        }
      }
    }
    g.time = t + step;
  }

  // events due now
  const double due_tol = 1e-9 * (1.0 + std::abs(g.time));
  std::vector<int> touched;
  for (const auto& h : hits) {
    if (h.time > g.time + due_tol) break;
    bool skip = false;
    for (int id : {h.curve_a, h.curve_b, h.point_id})
      if (id >= 0 && std::find(touched.begin(), touched.end(), id) != touched.end()) skip = true;
    if (skip) continue;
    // position contacts: micro-step the participating curve onto the target,
    // then snap and restore the companion foot onto the intersection
    // manifold (the localized step carries a residual that grows with the
    // foot's acceleration)
    if (h.kind == HitKind::Cancel || h.kind == HitKind::Enter || h.kind == HitKind::SlTouch ||
        h.kind == HitKind::SoftCut) {
      ShockCurve* c = find_curve(g, h.curve_a);
      if (c && c->status == CurveStatus::Active && !c->samples.empty()) {
        bool left_side;
        {
          const CurveSample& sl = c->samples.back();
          left_side = (c->regime == Regime::Kind2FromLeft) ||
                      (c->regime == Regime::Kind1 &&
                       std::abs(sl.xl - h.position) < std::abs(sl.xr - h.position));
        }
        int comp = (c->regime == Regime::Kind1 && !left_side) ? 1 : 0;
        double y[2];
        dyn.load(*c, y);
        double tt = c->samples.back().t;
        for (int it = 0; it < 3; ++it) {
          double gap = h.position - y[comp];
          if (std::abs(gap) <= 1e-12 * (1.0 + std::abs(h.position))) break;
          double dy[2];
          try {
            dyn.deriv(*c, tt, y, dy);
          } catch (const Error&) {
            break;
          }
          double dtc = gap / dy[comp];
          if (!(dtc > 0.0) || !std::isfinite(dtc) || dtc > g.options.dt) break;
          rk4_step(dyn, *c, tt, dtc, y, StepClamp{});
          tt += dtc;
        }
        CurveSample& sl = c->samples.back();
        double t_prev = c->samples.size() > 1 ? c->samples[c->samples.size() - 2].t : -1.0;
        if (tt > sl.t && tt > t_prev) {
          CurveSample polished = dyn.sample_from(*c, tt, y);
          sl = polished;
        }
        // the contact value is the approach-side limit at the target; the
        // companion foot is re-solved onto that characteristic
        Side approach = left_side ? Side::Right : Side::Left;
        double xi_t = h.position + char_speed(p, m, h.position, approach, 0) * sl.t;
        auto solve_companion = [&](double x0, Side side) {
          double x = x0;
          for (int it = 0; it < 6; ++it) {
            double f = x + char_speed(p, m, x, side, 0) * sl.t - xi_t;
            double d = 1.0 + char_speed(p, m, x, side, 1) * sl.t;
            if (std::abs(d) < 1e-10) return x0;
            double xn = x - f / d;
            if (std::abs(xn - x) <= 1e-15 * (1.0 + std::abs(x))) return xn;
            x = xn;
          }
          return x;
        };
        if (c->regime == Regime::Kind1) {
          if (left_side) {
            sl.xl = h.position;
            sl.xr = solve_companion(sl.xr, Side::Right);
          } else {
            sl.xr = h.position;
            sl.xl = solve_companion(sl.xl, Side::Left);
          }
          sl.xi = xi_t;
        } else if (c->regime == Regime::Kind2FromLeft) {
          sl.xl = h.position;
          sl.xi = xi_t;
        } else if (c->regime == Regime::Kind2FromRight) {
          sl.xr = h.position;
          sl.xi = xi_t;
        }
      }
    }
    if (h.kind == HitKind::SoftCut) continue;
    Event e = hit_to_event(g, h);
    e.time = g.time;
    apply_event(g, p, m, e);
    for (int id : {h.curve_a, h.curve_b, h.point_id})
      if (id >= 0) touched.push_back(id);
  }
  for (const auto& c : g.curves)
    if (c.status == CurveStatus::Active) check_kind1_invariants(g, p, m, c);

  // activations due now
  for (auto& pa : g.pending) {
    if (!pa.active || pa.seed.t0 > g.time + due_tol) continue;
    activate_seed(g, p, m, pa.seed);
    note_seed_entry(g, pa.seed);
    pa.active = false;
    touch_segments(g);
  }
}

ShockGraph evolve(const PiecewiseProfile& p, const FluxModel& m, double T,
                  const EvolveOptions& options) {
  if (!(T > 0.0)) throw Error(ErrorCode::ValidationError, "evolve requires T > 0");
  if (!(options.dt > 0.0)) throw Error(ErrorCode::ValidationError, "evolve requires dt > 0");
  ShockGraph g = init_graph(p, m, options);

  double anchor = 0.0;
  long long n = 0;
  int stall_guard = 0;
  while (g.time < T) {
    double t_grid = anchor + static_cast<double>(n + 1) * options.dt;
    if (t_grid <= g.time + 1e-15 * (1.0 + g.time)) { ++n; continue; }
    double step = std::min(t_grid, T) - g.time;
    double before = g.time;
    advance(g, p, m, step);
    if (g.time >= t_grid - 1e-15 * (1.0 + g.time)) ++n;
    if (g.time <= before + 1e-15 * (1.0 + before)) {
      if (++stall_guard > 200)
        throw Error(ErrorCode::InternalConsistency,
                    "evolve stalled at t = " + std::to_string(g.time));
    } else {
      stall_guard = 0;
    }
    // an activation or event off the grid re-anchors the fixed-step grid
    if (g.time < t_grid - 1e-15 * (1.0 + g.time)) {
      anchor = g.time;
      n = 0;
      if (options.phased_step) {
        // first step after an activation lands the grid on the next one
        double tnext = kNaN;
        for (const auto& pa : g.pending)
          if (pa.active && pa.seed.t0 > g.time) { tnext = pa.seed.t0; break; }
        if (std::isfinite(tnext)) {
          double frac = std::fmod(tnext - g.time, options.dt);
          if (frac > 1e-12 * options.dt) anchor = g.time + frac - options.dt;
        }
      }
    }
  }
  return g;
}

ShockGraph evolve(const PiecewiseProfile& p, const FluxModel& m, double T, double dt) {
  EvolveOptions opt;
  opt.dt = dt;
  return evolve(p, m, T, opt);
}

void write_curves_csv(const ShockGraph& g, std::ostream& out) {
  out << "curve_id,regime,t,x_l,x_r,xi\n";
  std::vector<const ShockCurve*> ordered;
  for (const auto& c : g.curves) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(),
            [](const ShockCurve* a, const ShockCurve* b) { return a->id < b->id; });
  for (const ShockCurve* c : ordered)
    for (const auto& s : c->samples)
      out << c->id << ',' << regime_name(s.regime) << ',' << csv_num(s.t) << ','
          << csv_num(s.xl) << ',' << csv_num(s.xr) << ',' << csv_num(s.xi) << '\n';
}

void write_events_csv(const ShockGraph& g, std::ostream& out) {
  out << "time,type,participants\n";
  for (const auto& e : g.events) {
    out << csv_num(e.time) << ',' << event_type_name(e.type) << ',';
    for (std::size_t i = 0; i < e.participants.size(); ++i) {
      if (i) out << ';';
      out << e.participants[i];
    }
    out << '\n';
  }
}

}  // namespace charsweep
