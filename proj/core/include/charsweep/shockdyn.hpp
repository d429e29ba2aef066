#ifndef CHARSWEEP_SHOCKDYN_HPP
#define CHARSWEEP_SHOCKDYN_HPP

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "charsweep/classify.hpp"

namespace charsweep {

struct CurveSample {
  double t = 0.0;
  double xl = 0.0;  // fan center for fan-sided regimes
  double xr = 0.0;
  double xi = 0.0;
  Regime regime = Regime::Kind1;
};

enum class CurveStatus { Active, Merged, Finished };

// One tracked discontinuity. The feet (xl, xr) are initial-line coordinates;
// their profile values are the states on the two sides of the shock. Fan-side
// regimes carry the rarefaction center in the corresponding foot slot.
struct ShockCurve {
  int id = -1;
  Regime regime = Regime::Kind1;
  std::vector<CurveSample> samples;
  CurveStatus status = CurveStatus::Active;
  int merged_into = -1;
  int origin_point = -1;
  double t_start = 0.0;
  double delta = 0.0;  // seed displacement scale, used for the activation ramp
  bool fallback_seeded = false;  // initial point from the singular fallback

  const CurveSample& back() const { return samples.back(); }
};

struct Fan {
  int point_id = -1;
  double center = 0.0;
  double speed_lo = 0.0, speed_hi = 0.0;  // h(c-), h(c+)
  double value_lo = 0.0, value_hi = 0.0;  // profile side values, ordered
};

enum class EventType {
  CancelPoint,
  Merge,
  EnterRarefaction,
  ExitRarefaction,
  StraightLineActivate,
  SingularReseed,
};

std::string event_type_name(EventType type);

struct Event {
  double time = 0.0;
  EventType type = EventType::CancelPoint;
  std::vector<int> participants;  // curve/point ids, event-type specific
  double position = 0.0;          // where it happens (tie-break, reporting)
};

struct EvolveOptions {
  double dt = 1e-3;
  bool phased_step = false;
  double delta = 0.0;         // 0: use default_delta(profile)
  double seed_ratio_A = -1.0; // chord ratio at initial break points
};

struct PendingActivation {
  ShockSeed seed;
  bool active = true;
};

// Lifecycle of a straight segment: pending until it either focuses into a
// shock (activated) or a foreign foot invades it (touched).
struct SegmentState {
  int state = 0;  // 0 pending, 1 touched, 2 activated
  double when = std::numeric_limits<double>::infinity();
};

struct ShockGraph {
  std::vector<CriticalPoint> points;
  std::vector<Fan> fans;
  std::vector<StraightSegment> segments;
  std::vector<ShockCurve> curves;
  std::vector<Event> events;
  std::vector<int> cancelled_points;

  double time = 0.0;
  EvolveOptions options;
  std::vector<PendingActivation> pending;
  std::vector<SegmentState> segment_state;
  int next_curve_id = 0;

  const CriticalPoint* point_by_id(int id) const;
  const Fan* fan_at(double center) const;
  bool cancelled(int point_id) const;
};

// Rankine-Hugoniot speed of a jump between the states ul, ur.
double shock_speed(const FluxModel& model, double ul, double ur);

// Foot velocities of a two-foot shock curve.
std::pair<double, double> rhs_kind1(const PiecewiseProfile& profile, const FluxModel& model,
                                    double x_l, double x_r, double t);

// Foot velocity of a shock crossing a rarefaction fan; `side` is the side of
// the real foot (Side::Left when the fan lies to the right).
double rhs_kind2(const PiecewiseProfile& profile, const FluxModel& model, double x_foot,
                 double t, double fan_center, Side side);

// Position velocity of a shock between two rarefaction fans.
double rhs_kind3(const PiecewiseProfile& profile, const FluxModel& model, double x, double t,
                 double x1_star, double x2_star);

// Build the initial graph: classification, fans, straight segments, and the
// pending activation schedule with asymptotic seeds.
ShockGraph init_graph(const PiecewiseProfile& profile, const FluxModel& model,
                      const EvolveOptions& options);

// Advance the graph by at most dt: cut the step at the earliest localized
// event or pending activation, integrate every active curve, apply what is
// due. graph.time advances by the actual (possibly cut) step.
void advance(ShockGraph& graph, const PiecewiseProfile& profile, const FluxModel& model,
             double dt);

std::vector<Event> detect_events(const ShockGraph& graph, const PiecewiseProfile& profile,
                                 const FluxModel& model, double t, double dt);

void apply_event(ShockGraph& graph, const PiecewiseProfile& profile, const FluxModel& model,
                 const Event& event);

ShockGraph evolve(const PiecewiseProfile& profile, const FluxModel& model, double T,
                  const EvolveOptions& options);
ShockGraph evolve(const PiecewiseProfile& profile, const FluxModel& model, double T, double dt);

void write_curves_csv(const ShockGraph& graph, std::ostream& out);
void write_events_csv(const ShockGraph& graph, std::ostream& out);

}  // namespace charsweep

#endif  // CHARSWEEP_SHOCKDYN_HPP
