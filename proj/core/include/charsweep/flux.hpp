#ifndef CHARSWEEP_FLUX_HPP
#define CHARSWEEP_FLUX_HPP

#include <string>
#include <vector>

#include "charsweep/common.hpp"

namespace charsweep {

enum class FluxKind { Burgers, PowerQuartic, Polynomial };

// Flux G(u) with exact derivatives of any order up to kMaxOrder and a
// monotone inversion of the characteristic speed G'. All models are backed
// by an exact polynomial coefficient list, so differentiation and the
// divided-difference chord are closed-form.
struct FluxModel {
  FluxKind kind = FluxKind::Burgers;
  std::vector<double> coeffs;  // G(u) = sum coeffs[i] * u^i

  static FluxModel burgers();
  static FluxModel power_quartic();
  static FluxModel polynomial(std::vector<double> coeffs);

  std::string key() const;  // stable identity string, used for caching
};

double eval_flux(const FluxModel& model, double u);

// G^(order)(u), analytic. order must be in [1, kMaxOrder].
double flux_derivative(const FluxModel& model, double u, int order);

// (G(ur) - G(ul)) / (ur - ul) evaluated by exact polynomial divided
// difference; equals G'(u) in the ul == ur limit with no cancellation.
double flux_chord(const FluxModel& model, double ul, double ur);

// Solve G'(u) = c for u on a bracket where G' is strictly monotone.
double invert_speed(const FluxModel& model, double c, Interval bracket);

}  // namespace charsweep

#endif  // CHARSWEEP_FLUX_HPP
