#ifndef CHARSWEEP_VALIDATE_HPP
#define CHARSWEEP_VALIDATE_HPP

#include <vector>

#include "charsweep/profile.hpp"
#include "charsweep/sweep.hpp"

namespace charsweep {

// First-order monotone finite-volume solution (local Lax-Friedrichs flux),
// the independent oracle for acceptance testing.
struct GridSolution {
  double x_min = 0.0, x_max = 0.0;
  int m = 0;
  std::vector<double> u;     // cell averages at time T
  double dx = 0.0;
  double dt_used = 0.0;      // last stable step taken
  double cfl = kCfl;
  double time = 0.0;
  double mass_drift = 0.0;   // |mass change - accumulated boundary flux|

  double center(int i) const { return x_min + (i + 0.5) * dx; }
};

struct ErrorReport {
  double l1_error = 0.0;
  double linf_off_shock = 0.0;
  std::vector<double> shock_location_errors;  // per slice discontinuity
  int unmatched_markers = 0;                  // slice markers with no reference jump
  double tracking_seconds = 0.0;
  double reference_seconds = 0.0;
};

GridSolution reference_solve(const PiecewiseProfile& profile, const FluxModel& model, double T,
                             int m);

// Discontinuity locations of the reference at a sequence of times
// (re-running the march once, snapshotting along the way).
std::vector<std::vector<double>> reference_locus(const PiecewiseProfile& profile,
                                                 const FluxModel& model,
                                                 const std::vector<double>& times, int m);

// Jump detector: cells where |u_{i+1}-u_i| exceeds 3x the neighboring
// variation, clustered, located at the jump-weighted interface centroid.
std::vector<double> locate_discontinuities(const GridSolution& grid);

// (x_r-x_l)(f(x_l)+f(x_r)) - 2 int_{x_l}^{x_r} f dx  -- constant along any
// two-foot stretch under the Burgers flux.
double burgers_kind1_invariant(const PiecewiseProfile& profile, double x_l, double x_r);

// int_{x_star}^{x_l} (x_star - x) f'(x) dx -- t * (2 I + C) = (x_l-x_star)^2
// along a fan-crossing stretch under the Burgers flux.
double burgers_kind2_integral(const PiecewiseProfile& profile, double x_star, double x_l);

// Piece-aware adaptive quadrature of the profile itself.
double integrate_profile(const PiecewiseProfile& profile, double a, double b);

ErrorReport compare(const SolutionSlice& slice, const GridSolution& grid);

// Total variation of the cell averages (TVD check).
double total_variation(const std::vector<double>& u);

}  // namespace charsweep

#endif  // CHARSWEEP_VALIDATE_HPP
