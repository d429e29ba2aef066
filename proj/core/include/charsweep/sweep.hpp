#ifndef CHARSWEEP_SWEEP_HPP
#define CHARSWEEP_SWEEP_HPP

#include <iosfwd>
#include <utility>
#include <vector>

#include "charsweep/shockdyn.hpp"

namespace charsweep {

enum class Provenance { Characteristic, Rarefaction, StraightLine };

std::string provenance_name(Provenance p);

struct SlicePoint {
  double X = 0.0;
  double u = 0.0;
  Provenance provenance = Provenance::Characteristic;
};

struct Discontinuity {
  double X = 0.0;
  double u_left = 0.0;
  double u_right = 0.0;
};

// Single-valued entropy solution at one time, swept from the initial line.
struct SolutionSlice {
  double time = 0.0;
  std::vector<SlicePoint> samples;        // X strictly increasing
  std::vector<Discontinuity> discontinuities;
};

// Fan value u = (G')^{-1}((X - center)/t) inside the cone of the fan
// centered at fan_center.
double rarefaction_value(const FluxModel& model, const PiecewiseProfile& profile,
                         double fan_center, double X, double t);

// Analytic solution inside an unfocused linear-speed segment.
double straight_line_value(const PiecewiseProfile& profile, const FluxModel& model,
                           const StraightSegment& segment, double X, double t);

// Diagnostic: the (possibly folded) parametric characteristic surface slice.
std::vector<std::pair<double, double>> multivalue_surface(const PiecewiseProfile& profile,
                                                          const FluxModel& model, double t,
                                                          const std::vector<double>& feet);

SolutionSlice sweep_solution(const PiecewiseProfile& profile, const FluxModel& model,
                             const ShockGraph& graph, double T, double dX);

void write_slice_csv(const SolutionSlice& slice, std::ostream& out);
void write_discontinuities_csv(const SolutionSlice& slice, std::ostream& out);

}  // namespace charsweep

#endif  // CHARSWEEP_SWEEP_HPP
