#include "charsweep/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <thread>

namespace charsweep {

namespace {

int reference_threads() {
  if (const char* env = std::getenv("CHARSWEEP_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Grid window: the domain hint widened by the characteristic excursion of
// the values living inside it, plus a small pad, capped at a few hint widths
// (fast far-field characteristics only ever exit). A capped edge is widened
// until the local characteristic points outward so the copy boundary cannot
// feed wrong values in.
Interval reference_window(const PiecewiseProfile& p, const FluxModel& m, double T) {
  double h_min = 0.0, h_max = 0.0;
  const int n = 2048;
  for (int i = 0; i <= n; ++i) {
    double x = p.domain_hint.lo + p.domain_hint.width() * i / n;
    bool on_bp = false;
    for (double bp : p.breakpoints) on_bp |= (x == bp);
    double h = char_speed(p, m, x, on_bp ? Side::Left : Side::Interior, 0);
    h_min = std::min(h_min, h);
    h_max = std::max(h_max, h);
  }
  for (double bp : p.breakpoints) {
    for (Side s : {Side::Left, Side::Right}) {
      double h = char_speed(p, m, bp, s, 0);
      h_min = std::min(h_min, h);
      h_max = std::max(h_max, h);
    }
  }
  double W = p.domain_hint.width();
  double pad = 0.05 * W;
  double lo = p.domain_hint.lo + std::min(0.0, h_min) * T - pad;
  double hi = p.domain_hint.hi + std::max(0.0, h_max) * T + pad;
  double lo_cap = std::max(lo, p.domain_hint.lo - 5.0 * W);
  double hi_cap = std::min(hi, p.domain_hint.hi + 5.0 * W);
  for (int i = 0; i < 64 && lo_cap > lo; ++i) {
    if (char_speed(p, m, lo_cap, Side::Interior, 0) <= 0.0) break;  // outflow
    lo_cap = std::max(lo, lo_cap - 0.5 * W);
  }
  for (int i = 0; i < 64 && hi_cap < hi; ++i) {
    if (char_speed(p, m, hi_cap, Side::Interior, 0) >= 0.0) break;
    hi_cap = std::min(hi, hi_cap + 0.5 * W);
  }
  return {lo_cap, hi_cap};
}

struct March {
  GridSolution grid;
  std::vector<double> flux;  // interface fluxes, size m+1
  double boundary_in = 0.0;  // accumulated boundary flux integral

  void init(const PiecewiseProfile& p, const FluxModel& m_, double T, int m) {
    (void)m_;
    Interval win = reference_window(p, m_, T);
    grid.x_min = win.lo;
    grid.x_max = win.hi;
    grid.m = m;
    grid.dx = win.width() / m;
    grid.u.resize(m);
    for (int i = 0; i < m; ++i) {
      double x = grid.center(i);
      bool on_bp = false;
      for (double bp : p.breakpoints) on_bp |= (x == bp);
      grid.u[i] = eval_profile(p, x, on_bp ? Side::Left : Side::Interior, 0);
    }
    flux.resize(m + 1);
  }

  // One local Lax-Friedrichs step of length dt (already CFL-limited).
  void step(const FluxModel& model, double dt, int nthreads) {
    const int m = grid.m;
    auto compute_flux = [&](int lo, int hi) {
      for (int i = lo; i < hi; ++i) {
        double ul = (i == 0) ? grid.u[0] : grid.u[i - 1];
        double ur = (i == m) ? grid.u[m - 1] : grid.u[i];
        double a = std::max(std::abs(flux_derivative(model, ul, 1)),
                            std::abs(flux_derivative(model, ur, 1)));
        flux[i] = 0.5 * (eval_flux(model, ul) + eval_flux(model, ur)) - 0.5 * a * (ur - ul);
      }
    };
    if (nthreads > 1 && m >= 4000) {
      std::vector<std::future<void>> jobs;
      int chunk = (m + 1 + nthreads - 1) / nthreads;
      for (int t = 0; t < nthreads; ++t) {
        int lo = t * chunk, hi = std::min(m + 1, lo + chunk);
        if (lo >= hi) break;
        jobs.push_back(std::async(std::launch::async, compute_flux, lo, hi));
      }
      for (auto& j : jobs) j.get();
    } else {
      compute_flux(0, m + 1);
    }
    double r = dt / grid.dx;
    for (int i = 0; i < m; ++i) grid.u[i] -= r * (flux[i + 1] - flux[i]);
    boundary_in += dt * (flux[0] - flux[m]);
  }

  double max_speed(const FluxModel& model) const {
    double a = 0.0;
    for (double v : grid.u) a = std::max(a, std::abs(flux_derivative(model, v, 1)));
    return a;
  }
};

}  // namespace

GridSolution reference_solve(const PiecewiseProfile& profile, const FluxModel& model, double T,
                             int m) {
  if (m < 100) throw Error(ErrorCode::ValidationError, "reference_solve requires m >= 100");
  if (!(T > 0.0)) throw Error(ErrorCode::ValidationError, "reference_solve requires T > 0");
  March march;
  march.init(profile, model, T, m);
  int nthreads = reference_threads();

  double mass0 = 0.0;
  for (double v : march.grid.u) mass0 += v;
  mass0 *= march.grid.dx;

  double t = 0.0;
  while (t < T) {
    double a = march.max_speed(model);
    double dt = (a > 0.0) ? kCfl * march.grid.dx / a : (T - t);
    dt = std::min(dt, T - t);
    march.step(model, dt, nthreads);
    march.grid.dt_used = dt;
    t += dt;
  }
  march.grid.time = T;

  double mass1 = 0.0;
  for (double v : march.grid.u) mass1 += v;
  mass1 *= march.grid.dx;
  march.grid.mass_drift = std::abs((mass1 - mass0) - march.boundary_in);
  return march.grid;
}

std::vector<std::vector<double>> reference_locus(const PiecewiseProfile& profile,
                                                 const FluxModel& model,
                                                 const std::vector<double>& times, int m) {
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty() || !(sorted.front() >= 0.0))
    throw Error(ErrorCode::ValidationError, "reference_locus requires non-negative times");
  March march;
  march.init(profile, model, sorted.back(), m);
  int nthreads = reference_threads();

  std::vector<std::vector<double>> out;
  double t = 0.0;
  for (double target : sorted) {
    while (t < target) {
      double a = march.max_speed(model);
      double dt = (a > 0.0) ? kCfl * march.grid.dx / a : (target - t);
      dt = std::min(dt, target - t);
      march.step(model, dt, nthreads);
      t += dt;
    }
    march.grid.time = target;
    out.push_back(locate_discontinuities(march.grid));
  }
  return out;
}

std::vector<double> locate_discontinuities(const GridSolution& grid) {
  const int m = grid.m;
  std::vector<double> jump(m - 1);
  for (int i = 0; i + 1 < m; ++i) jump[i] = grid.u[i + 1] - grid.u[i];

  // background variation: median |jump| over a window away from the spike
  auto neighbor_variation = [&](int i) {
    std::vector<double> mags;
    for (int j = std::max(0, i - 25); j < std::min(m - 1, i + 25); ++j) {
      if (std::abs(j - i) <= 6) continue;
      mags.push_back(std::abs(jump[j]));
    }
    if (mags.empty()) return 0.0;
    std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
    return mags[mags.size() / 2];
  };

  double umax = *std::max_element(grid.u.begin(), grid.u.end());
  double umin = *std::min_element(grid.u.begin(), grid.u.end());
  double floor_mag = 1e-3 * (umax - umin) + 1e-12;

  std::vector<char> flagged(m - 1, 0);
  for (int i = 0; i + 1 < m; ++i) {
    double mag = std::abs(jump[i]);
    if (mag < floor_mag) continue;
    if (mag > 3.0 * neighbor_variation(i) + floor_mag) flagged[i] = 1;
  }

  // cluster flagged interfaces (gap <= 6 cells, same sign); each cluster is
  // reported at its cell of maximum |u_{i+1} - u_i|
  std::vector<double> out;
  int i = 0;
  while (i < m - 1) {
    if (!flagged[i]) { ++i; continue; }
    int sign = jump[i] > 0 ? 1 : -1;
    int last = i;
    int j = i + 1;
    while (j < m - 1 && j - last <= 6) {
      if (flagged[j] && (jump[j] > 0 ? 1 : -1) == sign) last = j;
      ++j;
    }
    int peak = i;
    for (int k = i; k <= last; ++k)
      if (std::abs(jump[k]) > std::abs(jump[peak])) peak = k;
    out.push_back(grid.x_min + (peak + 1) * grid.dx);
    i = last + 1;
  }
  return out;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Integrate piece-aware: split at breakpoints so the integrand is smooth.
double integrate_pieces(const PiecewiseProfile& p, double a, double b,
                        const std::function<double(double, Side)>& f) {
  double sign = 1.0;
  if (a > b) { std::swap(a, b); sign = -1.0; }
  std::vector<double> cuts{a};
  for (double bp : p.breakpoints)
    if (bp > a && bp < b) cuts.push_back(bp);
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    auto g = [&](double x) {
      if (x == lo) return f(x, Side::Right);
      if (x == hi) return f(x, Side::Left);
      return f(x, Side::Interior);
    };
    total += integrate(g, lo, hi, kQuadTol);
  }
  return sign * total;
}

}  // namespace

double integrate_profile(const PiecewiseProfile& profile, double a, double b) {
  return integrate_pieces(profile, a, b,
                          [&](double x, Side s) { return eval_profile(profile, x, s, 0); });
}

double burgers_kind1_invariant(const PiecewiseProfile& profile, double x_l, double x_r) {
  double fl = eval_profile(profile, x_l, Side::Left, 0);
  double fr = eval_profile(profile, x_r, Side::Right, 0);
  return (x_r - x_l) * (fl + fr) - 2.0 * integrate_profile(profile, x_l, x_r);
}

double burgers_kind2_integral(const PiecewiseProfile& profile, double x_star, double x_l) {
  return integrate_pieces(profile, x_star, x_l, [&](double x, Side s) {
    return (x_star - x) * eval_profile(profile, x, s, 1);
  });
}

double total_variation(const std::vector<double>& u) {
  double tv = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) tv += std::abs(u[i + 1] - u[i]);
  return tv;
}

ErrorReport compare(const SolutionSlice& slice, const GridSolution& grid) {
  ErrorReport rep;
  if (slice.samples.size() < 2) {
    rep.unmatched_markers = static_cast<int>(slice.discontinuities.size());
    return rep;
  }

  // slice value at x by linear interpolation between samples
  auto slice_at = [&](double x) {
    auto it = std::lower_bound(slice.samples.begin(), slice.samples.end(), x,
                               [](const SlicePoint& s, double v) { return s.X < v; });
    if (it == slice.samples.begin()) return it->u;
    if (it == slice.samples.end()) return (it - 1)->u;
    const SlicePoint& b = *it;
    const SlicePoint& a = *(it - 1);
    double w = (x - a.X) / (b.X - a.X);
    return a.u + w * (b.u - a.u);
  };

  double lo = std::max(grid.x_min, slice.samples.front().X);
  double hi = std::min(grid.x_max, slice.samples.back().X);
  std::vector<double> ref_jumps = locate_discontinuities(grid);

  double l1 = 0.0;
  double linf = 0.0;
  for (int i = 0; i < grid.m; ++i) {
    double x = grid.center(i);
    if (x < lo || x > hi) continue;
    double diff = std::abs(slice_at(x) - grid.u[i]);
    l1 += diff * grid.dx;
    bool near_jump = false;
    for (double xj : ref_jumps) near_jump |= std::abs(x - xj) <= 10.0 * grid.dx;
    for (const auto& d : slice.discontinuities) near_jump |= std::abs(x - d.X) <= 10.0 * grid.dx;
    if (!near_jump) linf = std::max(linf, diff);
  }
  rep.l1_error = l1;
  rep.linf_off_shock = linf;

  for (const auto& d : slice.discontinuities) {
    double best = std::numeric_limits<double>::infinity();
    for (double xj : ref_jumps) best = std::min(best, std::abs(d.X - xj));
    if (std::isfinite(best)) rep.shock_location_errors.push_back(best);
    else ++rep.unmatched_markers;
  }
  return rep;
}

}  // namespace charsweep
