#include "charsweep/classify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace charsweep {

namespace {

double eq_tol(double a, double b) { return 1e-9 * (1.0 + std::abs(a) + std::abs(b)); }

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

SideData gather_side(const PiecewiseProfile& p, const FluxModel& m, double x, Side side) {
  SideData d;
  d.f = eval_profile(p, x, side, 0);
  d.fp = eval_profile(p, x, side, 1);
  for (int k = 0; k <= kMaxOrder; ++k) d.h[k] = char_speed(p, m, x, side, k);
  return d;
}

bool side_finite(const SideData& d) {
  if (!std::isfinite(d.fp)) return false;
  for (double v : d.h)
    if (!std::isfinite(v)) return false;
  return true;
}

// Smallest order >= 2 whose h^(k) is meaningfully nonzero relative to the
// magnitude of the whole derivative tail.
std::optional<int> first_nonvanishing(const SideData& d) {
  double scale = 1.0;
  for (int k = 2; k <= kMaxOrder; ++k) scale = std::max(scale, std::abs(d.h[k]));
  for (int k = 2; k <= kMaxOrder; ++k)
    if (std::abs(d.h[k]) > 1e-8 * scale) return k;
  return std::nullopt;
}

// Is h linear (h'' == 0) on the piece containing the probe interval?
bool h_linear_on(const PiecewiseProfile& p, const FluxModel& m, double lo, double hi) {
  if (!(lo < hi)) return false;
  for (int j = 0; j <= 8; ++j) {
    double x = lo + (hi - lo) * (j + 0.5) / 9.0;
    double h2 = char_speed(p, m, x, Side::Interior, 2);
    double h1 = char_speed(p, m, x, Side::Interior, 1);
    if (!(std::abs(h2) <= 1e-10 * (1.0 + std::abs(h1)))) return false;
  }
  return true;
}

// Probe interval of the piece on one side of a breakpoint, clipped to the
// neighbor gap and the domain hint width.
Interval side_probe_interval(const PiecewiseProfile& p, double bp, Side side) {
  std::size_t pi = piece_index(p, bp, side);
  Interval iv = piece_interval(p, pi);
  double w = p.domain_hint.width();
  if (side == Side::Left) {
    double lo = std::max(iv.lo, bp - 0.25 * w);
    return {lo, bp};
  }
  double hi = std::min(iv.hi, bp + 0.25 * w);
  return {bp, hi};
}

// Definition-style check: the side limit of h' at bp is the unique minimum of
// h' over a punctured two-sided neighborhood, verified on shrinking brackets.
bool unique_min_at(const PiecewiseProfile& p, const FluxModel& m, double bp, double min_value) {
  Interval li = side_probe_interval(p, bp, Side::Left);
  Interval ri = side_probe_interval(p, bp, Side::Right);
  double delta0 = std::min(bp - li.lo, ri.hi - bp);
  if (!(delta0 > 0.0)) return false;
  double slack = 1e-10 * (1.0 + std::abs(min_value));
  for (int halving = 0; halving < 3; ++halving) {
    double d = delta0 / (1 << halving);
    const int n = 48;
    for (int j = 1; j <= n; ++j) {
      double off = d * j / n;
      for (double x : {bp - off, bp + off}) {
        double hp = char_speed(p, m, x, Side::Interior, 1);
        if (hp < min_value - slack) return false;       // minimum attained elsewhere
        if (off > d * 2.0 / n && hp <= min_value + slack) return false;  // not unique
      }
    }
  }
  return true;
}

// One-sided version for the jump-with-crossing kind: the side limit at bp is
// the strict minimum of h' over that side's punctured neighborhood.
bool one_sided_min_at(const PiecewiseProfile& p, const FluxModel& m, double bp, Side side,
                      double min_value) {
  Interval iv = side_probe_interval(p, bp, side);
  double delta0 = (side == Side::Left) ? bp - iv.lo : iv.hi - bp;
  if (!(delta0 > 0.0)) return false;
  double slack = 1e-10 * (1.0 + std::abs(min_value));
  for (int halving = 0; halving < 3; ++halving) {
    double d = delta0 / (1 << halving);
    const int n = 48;
    for (int j = 1; j <= n; ++j) {
      double x = (side == Side::Left) ? bp - d * j / n : bp + d * j / n;
      double hp = char_speed(p, m, x, Side::Interior, 1);
      if (hp < min_value - slack) return false;
      if (j > 2 && hp <= min_value + slack) return false;
    }
  }
  return true;
}

// Interior strict local minima of h' with h' < 0 inside one smooth piece.
std::vector<double> scan_piece_minima(const PiecewiseProfile& p, const FluxModel& m,
                                      std::size_t piece) {
  std::vector<double> out;
  Interval iv = piece_interval(p, piece);
  double lo = std::max(iv.lo, p.domain_hint.lo);
  double hi = std::min(iv.hi, p.domain_hint.hi);
  if (!(lo < hi)) return out;
  double margin = (hi - lo) * 1e-9;
  lo += margin;
  hi -= margin;
  if (h_linear_on(p, m, lo, hi)) return out;

  const int n = kScanPoints;
  std::vector<double> xs(n + 1), hp(n + 1);
  double hp_scale = 0.0;
  for (int j = 0; j <= n; ++j) {
    xs[j] = lo + (hi - lo) * j / n;
    hp[j] = char_speed(p, m, xs[j], Side::Interior, 1);
    hp_scale = std::max(hp_scale, std::abs(hp[j]));
  }
  // Floor keeps roundoff in flat tails from minting spurious focusing points.
  const double neg_floor = -1e-12 * (1.0 + hp_scale);
  for (int j = 1; j < n; ++j) {
    if (!(hp[j] < hp[j - 1] && hp[j] < hp[j + 1] && hp[j] < neg_floor)) continue;
    // Golden-section narrowing, stopped well above the comparison-noise
    // floor of the flat minimum; the h'' = 0 polish below does the rest.
    double a = xs[j - 1], b = xs[j + 1];
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = char_speed(p, m, c1, Side::Interior, 1);
    double f2 = char_speed(p, m, c2, Side::Interior, 1);
    for (int it = 0; it < 48 && (b - a) > 1e-4 * (1.0 + std::abs(a)); ++it) {
      if (f1 < f2) { b = c2; c2 = c1; f2 = f1; c1 = b - gr * (b - a); f1 = char_speed(p, m, c1, Side::Interior, 1); }
      else { a = c1; c1 = c2; f1 = f2; c2 = a + gr * (b - a); f2 = char_speed(p, m, c2, Side::Interior, 1); }
    }
    // A strict interior minimum of h' has odd leading order, so h'' changes
    // sign across it; bisection + Newton on the exact h'' reaches 1e-12.
    double xa = a, xb = b;
    double ga = char_speed(p, m, xa, Side::Interior, 2);
    double gb = char_speed(p, m, xb, Side::Interior, 2);
    for (int grow = 0; grow < 8 && !(ga < 0.0 && gb > 0.0); ++grow) {
      double w = xb - xa;
      xa = std::max(xs[j - 1], xa - w);
      xb = std::min(xs[j + 1], xb + w);
      ga = char_speed(p, m, xa, Side::Interior, 2);
      gb = char_speed(p, m, xb, Side::Interior, 2);
    }
    double x = 0.5 * (xa + xb);
    if (ga < 0.0 && gb > 0.0) {
      bool exact_hit = false;
      for (int it = 0; it < 200 && (xb - xa) > kRefineTol * (1.0 + std::abs(xa)); ++it) {
        x = 0.5 * (xa + xb);
        double g = char_speed(p, m, x, Side::Interior, 2);
        double g3 = char_speed(p, m, x, Side::Interior, 3);
        if (g3 != 0.0) {
          double xn = x - g / g3;
          if (xn > xa && xn < xb) {
            double gn = char_speed(p, m, xn, Side::Interior, 2);
            if (gn == 0.0) { x = xn; exact_hit = true; break; }
            if (gn < 0.0) xa = xn; else xb = xn;
            continue;
          }
        }
        if (g < 0.0) xa = x; else xb = x;
      }
      if (!exact_hit) x = 0.5 * (xa + xb);
    }
    if (char_speed(p, m, x, Side::Interior, 1) < 0.0) out.push_back(x);
  }
  return out;
}

double seed_denominator_factor(int k, double A) {
  // (1 - A k) k!  -- equals (k+1)! at A = -1.
  return (1.0 - A * k) * factorial(k);
}

}  // namespace

std::string point_kind_name(PointKind kind) {
  switch (kind) {
    case PointKind::Shock1: return "shock1";
    case PointKind::Shock2: return "shock2";
    case PointKind::Shock3: return "shock3";
    case PointKind::Shock4: return "shock4";
    case PointKind::Rarefaction: return "rarefaction";
    case PointKind::StraightLine: return "straight_line";
    case PointKind::Inert: return "inert";
  }
  return "?";
}

std::string regime_name(Regime regime) {
  switch (regime) {
    case Regime::Kind1: return "kind1";
    case Regime::Kind2FromLeft: return "kind2_left";
    case Regime::Kind2FromRight: return "kind2_right";
    case Regime::Kind3: return "kind3";
  }
  return "?";
}

void validate_pair(const PiecewiseProfile& p, const FluxModel& m) {
  // Fluxes must provide an invertible speed across every jump's value range
  // and end pieces must not focus characteristics from infinity.
  std::size_t last = p.pieces.size() - 1;
  for (std::size_t piece : {std::size_t{0}, last}) {
    Interval iv = piece_interval(p, piece);
    double edge = (piece == 0) ? (p.breakpoints.empty() ? p.domain_hint.lo : iv.hi)
                               : (p.breakpoints.empty() ? p.domain_hint.hi : iv.lo);
    double dir = (piece == 0) ? -1.0 : 1.0;
    double w = std::max(1.0, p.domain_hint.width());
    double probe_lo = std::min(edge, edge + dir * w);
    double probe_hi = std::max(edge, edge + dir * w);
    if (p.breakpoints.empty() && last == 0) { probe_lo = p.domain_hint.lo; probe_hi = p.domain_hint.hi; }
    for (int j = 1; j <= 8; ++j) {
      double x = probe_lo + (probe_hi - probe_lo) * j / 9.0;
      if (!std::isfinite(char_speed(p, m, x, Side::Interior, 1)))
        throw Error(ErrorCode::ValidationError, "end piece has unbounded characteristic-speed slope");
    }
    if (h_linear_on(p, m, probe_lo, probe_hi)) {
      double k = char_speed(p, m, 0.5 * (probe_lo + probe_hi), Side::Interior, 1);
      if (k < -1e-12)
        throw Error(ErrorCode::ValidationError,
                    "unbounded end piece with linear decreasing speed focuses from infinity");
    }
  }
}

std::vector<CriticalPoint> classify_points(const PiecewiseProfile& p, const FluxModel& m) {
  validate_pair(p, m);
  std::vector<CriticalPoint> points;
  int next_id = 0;

  for (double bp : p.breakpoints) {
    CriticalPoint cp;
    cp.x = bp;
    cp.left = gather_side(p, m, bp, Side::Left);
    cp.right = gather_side(p, m, bp, Side::Right);
    cp.singular = !side_finite(cp.left) || !side_finite(cp.right);
    cp.k_left = cp.singular ? std::nullopt : first_nonvanishing(cp.left);
    cp.k_right = cp.singular ? std::nullopt : first_nonvanishing(cp.right);

    const double fl = cp.left.f, fr = cp.right.f;
    const double hl = cp.left.h[0], hr = cp.right.h[0];
    const bool f_jumps = std::abs(fl - fr) > eq_tol(fl, fr);

    if (f_jumps) {
      if (hl > hr + eq_tol(hl, hr)) {
        cp.kind = PointKind::Shock1;
      } else if (hr > hl + eq_tol(hl, hr)) {
        cp.registers_fan = true;
        // The speed map must invert across the fan's value range.
        double ulo = std::min(fl, fr), uhi = std::max(fl, fr);
        int sign_seen = 0;
        for (int j = 0; j <= 16; ++j) {
          double u = ulo + (uhi - ulo) * j / 16.0;
          double g2 = flux_derivative(m, u, 2);
          int s = (g2 > 0.0) - (g2 < 0.0);
          if (s == 0) continue;
          if (sign_seen == 0) sign_seen = s;
          else if (sign_seen != s)
            throw Error(ErrorCode::ValidationError,
                        "speed map not invertible across a rarefaction value range");
        }
        if (!cp.singular) {
          double hpl = cp.left.h[1], hpr = cp.right.h[1];
          if (hpl < -1e-12 && one_sided_min_at(p, m, bp, Side::Left, hpl)) cp.crosses_left = true;
          if (hpr < -1e-12 && one_sided_min_at(p, m, bp, Side::Right, hpr)) cp.crosses_right = true;
        }
        cp.kind = (cp.crosses_left || cp.crosses_right) ? PointKind::Shock4
                                                        : PointKind::Rarefaction;
      } else {
        cp.kind = PointKind::Inert;  // jump with equal speeds: outside the taxonomy
      }
    } else if (cp.singular) {
      // Side derivatives blow up (e.g. fractional powers). Shock-forming if
      // the speed slope is negative arbitrarily close to the point.
      double scale = std::max(1.0, std::abs(bp));
      double hp = std::min(char_speed(p, m, bp - 1e-6 * scale, Side::Interior, 1),
                           char_speed(p, m, bp + 1e-6 * scale, Side::Interior, 1));
      cp.kind = hp < 0.0 ? PointKind::Shock2 : PointKind::Inert;
    } else {
      const double hpl = cp.left.h[1], hpr = cp.right.h[1];
      const bool fp_jumps = std::abs(cp.left.fp - cp.right.fp) > eq_tol(cp.left.fp, cp.right.fp);
      Interval li = side_probe_interval(p, bp, Side::Left);
      Interval ri = side_probe_interval(p, bp, Side::Right);
      bool left_linear = h_linear_on(p, m, li.lo, li.hi);
      bool right_linear = h_linear_on(p, m, ri.lo, ri.hi);

      if (fp_jumps) {
        if (hpl >= -1e-12 && hpr >= -1e-12) {
          cp.kind = PointKind::Inert;
        } else if (std::abs(hpl - hpr) <= 1e-12 * (1.0 + std::abs(hpl))) {
          throw Error(ErrorCode::ValidationError,
                      "slope-break point with exactly tied side minima; classification undefined");
        } else {
          double mval = std::min(hpl, hpr);
          bool min_is_left = hpl < hpr;
          bool min_side_linear = min_is_left ? left_linear : right_linear;
          if (min_side_linear) {
            // Constant-slope plateau: the straight-line connection case.
            cp.kind = PointKind::StraightLine;
          } else if (unique_min_at(p, m, bp, mval)) {
            cp.kind = PointKind::Shock2;
          } else {
            cp.kind = PointKind::Inert;
          }
        }
      } else {
        double hp = 0.5 * (hpl + hpr);
        if (hp < -1e-12) {
          if (left_linear || right_linear) {
            cp.kind = PointKind::StraightLine;
          } else {
            bool left_strict = cp.k_left && ((cp.k_left.value() % 2 == 0)
                                                 ? cp.left.h[*cp.k_left] < 0.0
                                                 : cp.left.h[*cp.k_left] > 0.0);
            bool right_strict = cp.k_right && cp.right.h[*cp.k_right] > 0.0;
            if (left_strict && right_strict && unique_min_at(p, m, bp, hp))
              cp.kind = PointKind::Shock3;
            else
              cp.kind = PointKind::Inert;
          }
        } else {
          cp.kind = PointKind::Inert;
        }
      }
    }

    cp.id = next_id++;
    if (cp.kind == PointKind::Shock1 || cp.kind == PointKind::Shock2 ||
        cp.kind == PointKind::Shock3 || cp.kind == PointKind::Shock4)
      cp.break_times = break_times(cp);
    points.push_back(std::move(cp));
  }

  // Interior smooth focusing points.
  for (std::size_t piece = 0; piece < p.pieces.size(); ++piece) {
    for (double x : scan_piece_minima(p, m, piece)) {
      bool near_bp = false;
      for (double bp : p.breakpoints)
        if (std::abs(x - bp) <= 1e-7 * (1.0 + std::abs(bp))) near_bp = true;
      if (near_bp) continue;
      CriticalPoint cp;
      cp.x = x;
      cp.kind = PointKind::Shock3;
      cp.left = gather_side(p, m, x, Side::Interior);
      cp.right = cp.left;
      cp.k_left = first_nonvanishing(cp.left);
      cp.k_right = cp.k_left;
      cp.id = next_id++;
      cp.break_times = break_times(cp);
      points.push_back(std::move(cp));
    }
  }

  std::sort(points.begin(), points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.x < b.x; });
  return points;
}

std::vector<double> break_times(const CriticalPoint& point) {
  switch (point.kind) {
    case PointKind::Shock1: return {0.0};
    case PointKind::Shock2: {
      if (point.singular) return {0.0};
      std::vector<double> ts;
      for (double hp : {point.left.h[1], point.right.h[1]})
        if (hp < 0.0) ts.push_back(-1.0 / hp);
      return {*std::min_element(ts.begin(), ts.end())};
    }
    case PointKind::Shock3: {
      double hp = 0.5 * (point.left.h[1] + point.right.h[1]);
      return {-1.0 / hp};
    }
    case PointKind::Shock4: {
      std::vector<double> ts;
      if (point.crosses_left) ts.push_back(-1.0 / point.left.h[1]);
      if (point.crosses_right) ts.push_back(-1.0 / point.right.h[1]);
      std::sort(ts.begin(), ts.end());
      return ts;
    }
    default:
      throw Error(ErrorCode::InvalidKind,
                  "break_times: point kind " + point_kind_name(point.kind) + " has no break time");
  }
}

double negative_root(int k, double p, double A) {
  if (k < 2) throw Error(ErrorCode::ValidationError, "negative_root requires k >= 2");
  if (p == 0.0) throw Error(ErrorCode::ValidationError, "negative_root requires p != 0");
  if (!(A < 0.0)) throw Error(ErrorCode::ValidationError, "negative_root requires A < 0");

  std::vector<double> coef(static_cast<std::size_t>(k) + 2, 0.0);
  coef[k + 1] = 1.0;
  coef[k] = (1.0 - A * k) / (A * (k - 1));
  coef[1] = (A - k) / (A * (k - 1)) * p;
  coef[0] = p / A;
  auto H = [&](double s) {
    double v = 0.0;
    for (std::size_t i = coef.size(); i-- > 0;) v = v * s + coef[i];
    return v;
  };

  // Scan a geometric grid on (-S_MAX, 0) for the sign change.
  double prev_s = -1e-9, prev_v = H(prev_s);
  double a = 0.0, b = 0.0;
  bool found = false;
  for (double mag = 1e-9; mag <= kRootSMax; mag *= 1.04) {
    double s = -mag;
    double v = H(s);
    if (v == 0.0) { a = b = s; found = true; break; }
    if (prev_v * v < 0.0) { a = s; b = prev_s; found = true; break; }
    prev_s = s;
    prev_v = v;
  }
  if (!found)
    throw Error(ErrorCode::RootBracket,
                "negative_root: no sign change found on the negative axis", p);
  double fa = H(a);
  for (int it = 0; it < 200 && b - a > 1e-16 * (1.0 + std::abs(a)); ++it) {
    double mid = 0.5 * (a + b);
    double fm = H(mid);
    if (fm == 0.0) { a = b = mid; break; }
    if (fa * fm < 0.0) b = mid;
    else { a = mid; fa = fm; }
  }
  double s = 0.5 * (a + b);
  for (int it = 0; it < 8; ++it) {
    double v = H(s);
    if (v == 0.0) break;
    double d = 0.0;
    for (std::size_t i = coef.size(); i-- > 1;) d = d * s + coef[i] * static_cast<double>(i);
    if (d == 0.0) break;
    double sn = s - v / d;
    if (!(sn < 0.0)) break;
    if (std::abs(H(sn)) >= std::abs(v)) break;
    s = sn;
  }
  return s;
}

double intersection_time(const PiecewiseProfile& p, const FluxModel& m, double x_l, double x_r) {
  double hl = char_speed(p, m, x_l, Side::Left, 0);
  double hr = char_speed(p, m, x_r, Side::Right, 0);
  return -(x_l - x_r) / (hl - hr);
}

bool stability_check(const PiecewiseProfile& p, const FluxModel& m, double x_l, double x_r) {
  if (!(x_l < x_r)) throw Error(ErrorCode::ValidationError, "stability_check requires x_l < x_r");
  double hl = char_speed(p, m, x_l, Side::Left, 0);
  double hr = char_speed(p, m, x_r, Side::Right, 0);
  if (std::abs(hl - hr) <= 1e-15 * (1.0 + std::abs(hl) + std::abs(hr)))
    throw Error(ErrorCode::UndefinedSlope, "stability_check: equal speeds at the feet");
  double chord = (hl - hr) / (x_l - x_r);
  double hpl = char_speed(p, m, x_l, Side::Left, 1);
  double hpr = char_speed(p, m, x_r, Side::Right, 1);
  return hpl > chord && hpr > chord;
}

double default_delta(const PiecewiseProfile& p) {
  return kDeltaDefaultFrac * (max_delta(p) / kDeltaMaxFrac);
}

double max_delta(const PiecewiseProfile& p) {
  double gap = p.domain_hint.width();
  for (std::size_t i = 0; i + 1 < p.breakpoints.size(); ++i)
    gap = std::min(gap, p.breakpoints[i + 1] - p.breakpoints[i]);
  return kDeltaMaxFrac * gap;
}

namespace {

ShockSeed make_kind1_seed(const PiecewiseProfile& p, const FluxModel& m,
                          const CriticalPoint& point, double xl0, double xr0) {
  ShockSeed s;
  s.regime = Regime::Kind1;
  s.origin_id = point.id;
  s.xl0 = xl0;
  s.xr0 = xr0;
  s.t0 = intersection_time(p, m, xl0, xr0);
  return s;
}

// Largest delta in (0, delta] whose seed satisfies the stability condition.
// Returns 0 if none does.
double admissible_delta(const PiecewiseProfile& p, const FluxModel& m, double delta,
                        const std::function<ShockSeed(double)>& build) {
  auto ok = [&](double d) {
    try {
      ShockSeed s = build(d);
      if (!(s.xl0 < s.xr0)) return false;
      return stability_check(p, m, s.xl0, s.xr0) && s.t0 >= 0.0 && std::isfinite(s.t0);
    } catch (const Error&) {
      return false;
    }
  };
  double hi = delta, lo = 0.0;
  if (ok(hi)) return hi;
  // find some passing delta
  double d = delta;
  bool any = false;
  for (int i = 0; i < 40; ++i) {
    d *= 0.5;
    if (ok(d)) { any = true; break; }
  }
  if (!any) return 0.0;
  lo = d;
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    if (ok(mid)) lo = mid; else hi = mid;
  }
  return lo;
}

}  // namespace

std::vector<ShockSeed> seed_all(const PiecewiseProfile& p, const FluxModel& m,
                                const CriticalPoint& point, double delta, double A) {
  if (!(delta > 0.0) || delta > max_delta(p))
    throw Error(ErrorCode::SeedRejected, "seed delta outside (0, delta_max]", max_delta(p));

  const double x = point.x;
  std::vector<ShockSeed> seeds;

  if (point.singular) {
    auto build = [&](double d) {
      ShockSeed s = make_kind1_seed(p, m, point, x - d, x + d);
      s.t0 = 0.0;  // fallback initial point (0, x*-delta, x*+delta)
      return s;
    };
    ShockSeed s = build(delta);
    if (!stability_check(p, m, s.xl0, s.xr0)) {
      double adm = admissible_delta(p, m, delta, build);
      throw Error(ErrorCode::SeedRejected, "fallback seed violates the local stability condition",
                  adm);
    }
    seeds.push_back(s);
    return seeds;
  }

  switch (point.kind) {
    case PointKind::Shock1: {
      ShockSeed s;
      s.regime = Regime::Kind1;
      s.origin_id = point.id;
      s.t0 = 0.0;
      s.xl0 = x;
      s.xr0 = x;
      seeds.push_back(s);
      return seeds;
    }
    case PointKind::Shock2: {
      const double hpl = point.left.h[1], hpr = point.right.h[1];
      auto build = [&](double d) {
        if (hpr < hpl) {
          if (!point.k_right)
            throw Error(ErrorCode::ValidationError, "seed: right derivatives vanish to max order");
          int kr = *point.k_right;
          double coeff = (kr - 1) * point.right.h[kr] /
                         (seed_denominator_factor(kr, A) * (hpr - hpl));
          return make_kind1_seed(p, m, point, x + coeff * std::pow(d, kr), x + d);
        }
        if (!point.k_left)
          throw Error(ErrorCode::ValidationError, "seed: left derivatives vanish to max order");
        int kl = *point.k_left;
        double coeff = (kl - 1) * point.left.h[kl] /
                       (seed_denominator_factor(kl, A) * (hpl - hpr));
        return make_kind1_seed(p, m, point, x - d, x + coeff * std::pow(-d, kl));
      };
      ShockSeed s = build(delta);
      if (!(s.xl0 < s.xr0) || !stability_check(p, m, s.xl0, s.xr0)) {
        double adm = admissible_delta(p, m, delta, build);
        throw Error(ErrorCode::SeedRejected, "seed violates the local stability condition", adm);
      }
      seeds.push_back(s);
      return seeds;
    }
    case PointKind::Shock3: {
      if (!point.k_left || !point.k_right)
        throw Error(ErrorCode::ValidationError, "seed: derivatives vanish to max order at focus");
      const int kl = *point.k_left, kr = *point.k_right;
      auto build = [&](double d) {
        if (kl == kr) {
          double ratio = point.right.h[kr] / point.left.h[kl];
          double s_root = negative_root(kl, ratio, A);
          return make_kind1_seed(p, m, point, x + s_root * d, x + d);
        }
        if (kl < kr) {
          double inner = (1.0 - kr) * factorial(kl) * point.right.h[kr] /
                         (seed_denominator_factor(kr, A) * point.left.h[kl]);
          double mag = std::abs(std::pow(std::abs(inner), 1.0 / kl));
          double dxl = -mag * std::pow(d, static_cast<double>(kr) / kl);
          return make_kind1_seed(p, m, point, x + dxl, x + d);
        }
        double sign = (kl % 2 == 0) ? 1.0 : -1.0;
        double inner = sign * (1.0 - kl) * factorial(kr) * point.left.h[kl] /
                       (seed_denominator_factor(kl, A) * point.right.h[kr]);
        double dxr = std::pow(inner, 1.0 / kr) * std::pow(d, static_cast<double>(kl) / kr);
        return make_kind1_seed(p, m, point, x - d, x + dxr);
      };
      ShockSeed s = build(delta);
      if (!(s.xl0 < s.xr0) || !stability_check(p, m, s.xl0, s.xr0)) {
        double adm = admissible_delta(p, m, delta, build);
        throw Error(ErrorCode::SeedRejected, "seed violates the local stability condition", adm);
      }
      seeds.push_back(s);
      return seeds;
    }
    case PointKind::Shock4: {
      if (point.crosses_left) {
        int k = point.k_left.value_or(0);
        ShockSeed s;
        s.regime = Regime::Kind2FromLeft;
        s.origin_id = point.id;
        double dx = -delta;
        double corr = (k >= 2)
                          ? 2.0 * point.left.h[k] / (factorial(k - 1) * (k + 1)) * std::pow(dx, k - 1)
                          : 0.0;
        s.t0 = 1.0 / (-point.left.h[1] - corr);
        s.xl0 = x + dx;
        s.xr0 = x;  // fan center
        seeds.push_back(s);
      }
      if (point.crosses_right) {
        int k = point.k_right.value_or(0);
        ShockSeed s;
        s.regime = Regime::Kind2FromRight;
        s.origin_id = point.id;
        double dx = delta;
        double corr = (k >= 2)
                          ? 2.0 * point.right.h[k] / (factorial(k - 1) * (k + 1)) * std::pow(dx, k - 1)
                          : 0.0;
        s.t0 = 1.0 / (-point.right.h[1] - corr);
        s.xl0 = x;  // fan center
        s.xr0 = x + dx;
        seeds.push_back(s);
      }
      std::sort(seeds.begin(), seeds.end(),
                [](const ShockSeed& a, const ShockSeed& b) { return a.t0 < b.t0; });
      return seeds;
    }
    default:
      throw Error(ErrorCode::InvalidKind,
                  "seed_shock: point kind " + point_kind_name(point.kind) + " does not seed");
  }
}

ShockSeed seed_shock(const PiecewiseProfile& p, const FluxModel& m, const CriticalPoint& point,
                     double delta, double A) {
  auto seeds = seed_all(p, m, point, delta, A);
  return seeds.front();
}

std::vector<StraightSegment> find_straight_segments(const PiecewiseProfile& p,
                                                    const FluxModel& m,
                                                    const std::vector<CriticalPoint>& points) {
  std::vector<StraightSegment> segments;
  if (p.breakpoints.empty()) return segments;

  auto point_at = [&](double x) {
    for (const auto& cp : points)
      if (cp.x == x) return cp.id;
    return -1;
  };

  // Interior pieces only: end pieces cannot hold a finite focusing segment.
  std::size_t i = 1;
  while (i + 1 < p.pieces.size()) {
    Interval iv = piece_interval(p, i);
    if (!h_linear_on(p, m, iv.lo, iv.hi)) { ++i; continue; }
    double mid = 0.5 * (iv.lo + iv.hi);
    double k = char_speed(p, m, mid, Side::Interior, 1);
    if (!(k < -1e-12)) { ++i; continue; }
    double c = char_speed(p, m, mid, Side::Interior, 0) / k - mid;
    // Fuse adjacent pieces lying on the same line.
    std::size_t j = i;
    while (j + 2 < p.pieces.size()) {
      Interval nxt = piece_interval(p, j + 1);
      if (!h_linear_on(p, m, nxt.lo, nxt.hi)) break;
      double nmid = 0.5 * (nxt.lo + nxt.hi);
      double nk = char_speed(p, m, nmid, Side::Interior, 1);
      double nc = char_speed(p, m, nmid, Side::Interior, 0) / nk - nmid;
      if (std::abs(nk - k) > 1e-10 * (1.0 + std::abs(k)) ||
          std::abs(nc - c) > 1e-10 * (1.0 + std::abs(c)))
        break;
      // continuity of f across the seam is required to fuse
      double fl = eval_profile(p, nxt.lo, Side::Left, 0);
      double fr = eval_profile(p, nxt.lo, Side::Right, 0);
      if (std::abs(fl - fr) > eq_tol(fl, fr)) break;
      ++j;
    }
    StraightSegment seg;
    seg.a = iv.lo;
    seg.b = piece_interval(p, j).hi;
    seg.k = k;
    seg.c = c;
    seg.left_point = point_at(seg.a);
    seg.right_point = point_at(seg.b);
    segments.push_back(seg);
    i = j + 1;
  }
  return segments;
}

}  // namespace charsweep
