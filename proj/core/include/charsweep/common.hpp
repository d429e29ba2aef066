#ifndef CHARSWEEP_COMMON_HPP
#define CHARSWEEP_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace charsweep {

// Highest derivative order supported anywhere (flux, profile, side data).
inline constexpr int kMaxOrder = 8;

inline constexpr double kInvertTol = 1e-12;     // |G'(u) - c| at an accepted inversion
inline constexpr double kRootTol = 1e-12;       // |H(s)| at an accepted seed-ratio root
inline constexpr double kRootSMax = 1e6;        // bracket scan limit for the seed-ratio root
inline constexpr int kScanPoints = 2048;        // h' samples per smooth piece
inline constexpr double kRefineTol = 1e-12;     // x-tolerance for interior minimizer refinement
inline constexpr double kConsistencyTol = 1e-8; // two-sided xi agreement, scaled
inline constexpr double kSingularEps = 1e-10;   // |1 + h'(x) t| below this is singular
inline constexpr double kCfl = 0.45;            // reference solver CFL number
inline constexpr double kQuadTol = 1e-10;       // adaptive quadrature tolerance
inline constexpr double kDeltaMaxFrac = 1e-2;   // of the minimum breakpoint gap
inline constexpr double kDeltaDefaultFrac = 1e-3;

enum class ErrorCode {
  UnsupportedOrder,
  OutOfRange,
  InvalidBracket,
  DegenerateJump,
  SingularDenominator,
  AmbiguousSide,
  ParseError,
  ValidationError,
  SeedRejected,
  FocusedSegment,
  OutOfFan,
  ExitedFan,
  MissingGraph,
  InternalConsistency,
  UndefinedSlope,
  InvalidKind,
  RootBracket,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, double detail = std::nan(""))
      : std::runtime_error(std::move(message)), code_(code), detail_(detail) {}

  ErrorCode code() const { return code_; }
  // Optional payload, e.g. the offending foot coordinate or the largest
  // admissible delta reported by seed rejection.
  double detail() const { return detail_; }

 private:
  ErrorCode code_;
  double detail_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

enum class Side { Left, Right, Interior };

}  // namespace charsweep

#endif  // CHARSWEEP_COMMON_HPP
