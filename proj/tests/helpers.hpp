#ifndef CHARSWEEP_TEST_HELPERS_HPP
#define CHARSWEEP_TEST_HELPERS_HPP

#include <cmath>
#include <functional>
#include <random>

namespace testdata {

// Initial conditions used across the suites.
inline const char* kExample1 = "x < 0: x + 1.5 ; x >= 0: x^2 - 2*x";
inline const char* kExample2 = "x < 0: 1 - exp(x) ; x >= 0: x^2 - 2*x";
inline const char* kExample3 = "2*x/(1 + x^2)^2";
inline const char* kExample4 = "x < 0: -(x + 1)^2/2 ; x >= 0: x + 1";
inline const char* kExample5 = "exp((-x^4 + 5*x^2)/10)";
inline const char* kRiemannShock = "x < 0: 1 ; x >= 0: 0";
inline const char* kRiemannRarefaction = "x < 0: 0 ; x >= 0: 1";
inline const char* kGaussian = "exp(-x^2)";
inline const char* kHat = "x < -1: 1 ; -1 <= x < 1: -x ; x >= 1: -1";
inline const char* kRamp = "x < 0: 1 ; 0 <= x < 1: 1 - x ; x >= 1: 0";
inline const char* kZigzag = "x < -1: -2 ; -1 <= x < 1: -2*x ; x >= 1: 2";
inline const char* kFanCrossing = "x < 0: -x - x^2 ; x >= 0: x + 2";

// Central difference of g around x, step scaled to x.
inline double central_diff(const std::function<double(double)>& g, double x,
                           double h = 1e-4) {
  double step = h * std::max(1.0, std::abs(x));
  return (g(x + step) - g(x - step)) / (2.0 * step);
}

inline std::mt19937& rng() {
  static std::mt19937 gen(0x5eed1234u);
  return gen;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng());
}

}  // namespace testdata

#endif
