#ifndef CHARSWEEP_PROFILE_HPP
#define CHARSWEEP_PROFILE_HPP

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "charsweep/expr.hpp"
#include "charsweep/flux.hpp"

namespace charsweep {

// Piecewise-smooth initial condition f(x): parsed expression pieces over the
// intervals cut by the breakpoints, with exact side-limit derivatives. This
// is the data source for the characteristic speed h(x) = G'(f(x)) and all of
// its side derivatives.
//
// Immutable after parsing; the derivative caches are internally synchronized
// so queries are thread-safe.
struct PiecewiseProfile {
  std::vector<double> breakpoints;  // strictly increasing
  std::vector<Expr> pieces;         // breakpoints.size() + 1 entries
  Interval domain_hint{-10.0, 10.0};

  struct Cache;
  std::shared_ptr<Cache> cache;  // shared between copies
};

PiecewiseProfile parse_profile(const std::string& text);
PiecewiseProfile parse_profile(const std::string& text, Interval domain_hint);

std::string serialize_profile(const PiecewiseProfile& profile);

// f^(order)(x) using the piece on the indicated side; side limits at
// breakpoints. order 0 gives f itself.
double eval_profile(const PiecewiseProfile& profile, double x, Side side, int order);

// h^(order)(x±) where h = G' о f, by symbolic differentiation of the
// composed expression (no finite differences).
double char_speed(const PiecewiseProfile& profile, const FluxModel& model, double x, Side side,
                  int order);

// Piece interval (±inf for the unbounded end pieces).
Interval piece_interval(const PiecewiseProfile& profile, std::size_t piece);

// Index of the piece used for evaluation at (x, side).
std::size_t piece_index(const PiecewiseProfile& profile, double x, Side side);

}  // namespace charsweep

#endif  // CHARSWEEP_PROFILE_HPP
