#ifndef CHARSWEEP_CLASSIFY_HPP
#define CHARSWEEP_CLASSIFY_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "charsweep/profile.hpp"

namespace charsweep {

enum class PointKind { Shock1, Shock2, Shock3, Shock4, Rarefaction, StraightLine, Inert };

std::string point_kind_name(PointKind kind);

// One-sided data at a critical point: f, f' and the characteristic-speed
// derivatives h^(k), k = 0..kMaxOrder, where h = G' o f.
struct SideData {
  double f = 0.0;
  double fp = 0.0;
  std::array<double, kMaxOrder + 1> h{};
};

struct CriticalPoint {
  int id = -1;
  double x = 0.0;
  PointKind kind = PointKind::Inert;
  SideData left, right;
  std::optional<int> k_left, k_right;  // smallest order >= 2 with h^(k) != 0
  std::vector<double> break_times;
  bool singular = false;        // side derivatives blow up; fallback seeding applies
  bool registers_fan = false;   // up-jump: a rarefaction fan is centered here
  bool crosses_left = false;    // Shock4: the left side satisfies the crossing condition
  bool crosses_right = false;
};

enum class Regime { Kind1, Kind2FromLeft, Kind2FromRight, Kind3 };

std::string regime_name(Regime regime);

// Asymptotically-correct initial point of a shock ODE. For the Kind2 regimes
// the fan-side coordinate holds the rarefaction center.
struct ShockSeed {
  double t0 = 0.0;
  double xl0 = 0.0;
  double xr0 = 0.0;
  Regime regime = Regime::Kind1;
  int origin_id = -1;
};

// Maximal interval where h(x) = k (x + c) with k < 0: all characteristics
// from it focus at the single point (-c, -1/k).
struct StraightSegment {
  double a = 0.0, b = 0.0;
  double k = 0.0, c = 0.0;
  int left_point = -1, right_point = -1;  // critical-point ids at the ends
};

// Rejects (profile, model) pairs the tracker cannot handle: unbounded end
// pieces whose characteristics focus from infinity.
void validate_pair(const PiecewiseProfile& profile, const FluxModel& model);

std::vector<CriticalPoint> classify_points(const PiecewiseProfile& profile,
                                           const FluxModel& model);

std::vector<StraightSegment> find_straight_segments(const PiecewiseProfile& profile,
                                                    const FluxModel& model,
                                                    const std::vector<CriticalPoint>& points);

std::vector<double> break_times(const CriticalPoint& point);

// Unique negative root of the seed-ratio polynomial
//   s^{k+1} + (1-Ak)/(A(k-1)) s^k + (A-k)/(A(k-1)) p s + p/A
// (A = -1 gives the initial-break form with coefficients (k+1)/(k-1)).
double negative_root(int k, double p, double A);

ShockSeed seed_shock(const PiecewiseProfile& profile, const FluxModel& model,
                     const CriticalPoint& point, double delta, double A);

// All seeds a point produces (a two-sided crossing point produces two).
std::vector<ShockSeed> seed_all(const PiecewiseProfile& profile, const FluxModel& model,
                                const CriticalPoint& point, double delta, double A);

bool stability_check(const PiecewiseProfile& profile, const FluxModel& model, double x_l,
                     double x_r);

// Characteristic intersection time of the feet pair.
double intersection_time(const PiecewiseProfile& profile, const FluxModel& model, double x_l,
                         double x_r);

double default_delta(const PiecewiseProfile& profile);
double max_delta(const PiecewiseProfile& profile);

}  // namespace charsweep

#endif  // CHARSWEEP_CLASSIFY_HPP
