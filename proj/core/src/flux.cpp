#include "charsweep/flux.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace charsweep {

FluxModel FluxModel::burgers() { return {FluxKind::Burgers, {0.0, 0.0, 0.5}}; }

FluxModel FluxModel::power_quartic() {
  return {FluxKind::PowerQuartic, {0.0, 0.0, 0.0, 0.0, 1.0 / 12.0}};
}

FluxModel FluxModel::polynomial(std::vector<double> coeffs) {
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.empty()) coeffs.push_back(0.0);
  return {FluxKind::Polynomial, std::move(coeffs)};
}

std::string FluxModel::key() const {
  std::string k;
  switch (kind) {
    case FluxKind::Burgers: return "burgers";
    case FluxKind::PowerQuartic: return "quartic";
    case FluxKind::Polynomial: k = "poly"; break;
  }
  char buf[32];
  for (double c : coeffs) {
    auto res = std::to_chars(buf, buf + sizeof(buf), c);
    k.append(",");
    k.append(buf, res.ptr);
  }
  return k;
}

namespace {

double horner(const std::vector<double>& c, double u) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * u + *it;
  return v;
}

// Coefficients of the order-th derivative of the coefficient list.
std::vector<double> derive_coeffs(std::vector<double> c, int order) {
  for (int k = 0; k < order; ++k) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
    c = std::move(d);
  }
  return c;
}

}  // namespace

double eval_flux(const FluxModel& model, double u) { return horner(model.coeffs, u); }

double flux_derivative(const FluxModel& model, double u, int order) {
  if (order < 1 || order > kMaxOrder)
    throw Error(ErrorCode::UnsupportedOrder,
                "flux derivative order " + std::to_string(order) + " exceeds supported maximum " +
                    std::to_string(kMaxOrder));
  // hot path: differentiate the coefficient list in a stack buffer
  double buf[32];
  std::size_t n = model.coeffs.size();
  if (n > 32) return horner(derive_coeffs(model.coeffs, order), u);
  for (std::size_t i = 0; i < n; ++i) buf[i] = model.coeffs[i];
  for (int k = 0; k < order; ++k) {
    if (n <= 1) return 0.0;
    for (std::size_t i = 1; i < n; ++i) buf[i - 1] = buf[i] * static_cast<double>(i);
    --n;
  }
  double v = 0.0;
  for (std::size_t i = n; i-- > 0;) v = v * u + buf[i];
  return v;
}

double flux_chord(const FluxModel& model, double ul, double ur) {
  // sum_i c_i (ur^i - ul^i)/(ur - ul) = sum_i c_i sum_{j<i} ul^j ur^{i-1-j}
  double total = 0.0;
  const auto& c = model.coeffs;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i] == 0.0) continue;
    double term = 0.0;
    double ulp = 1.0;  // ul^j
    for (std::size_t j = 0; j < i; ++j) {
      term += ulp * std::pow(ur, static_cast<double>(i - 1 - j));
      ulp *= ul;
    }
    total += c[i] * term;
  }
  return total;
}

double invert_speed(const FluxModel& model, double c, Interval bracket) {
  if (!(bracket.lo < bracket.hi))
    throw Error(ErrorCode::InvalidBracket, "invert_speed: empty bracket");

  // Monotonicity probe: a strict sign change of G'' across the bracket means
  // G' is not invertible there. Isolated zeros of G'' are fine.
  const int probes = 33;
  int sign_seen = 0;
  for (int i = 0; i < probes; ++i) {
    double u = bracket.lo + bracket.width() * i / (probes - 1);
    double g2 = flux_derivative(model, u, 2);
    int s = (g2 > 0.0) - (g2 < 0.0);
    if (s == 0) continue;
    if (sign_seen == 0) sign_seen = s;
    else if (sign_seen != s)
      throw Error(ErrorCode::InvalidBracket, "invert_speed: G' not monotone on bracket");
  }

  double fa = flux_derivative(model, bracket.lo, 1) - c;
  double fb = flux_derivative(model, bracket.hi, 1) - c;
  if (fa == 0.0) return bracket.lo;
  if (fb == 0.0) return bracket.hi;
  if (fa * fb > 0.0)
    throw Error(ErrorCode::OutOfRange, "invert_speed: c outside G'(bracket)", c);

  // Bisection down to bracket width ~ ulp scale so the returned u itself is
  // accurate even where G'' vanishes, then a Newton polish on G'(u) - c.
  double a = bracket.lo, b = bracket.hi;
  for (int i = 0; i < 200 && (b - a) > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    double m = 0.5 * (a + b);
    double fm = flux_derivative(model, m, 1) - c;
    if (fm == 0.0) { a = b = m; break; }
    if (fa * fm < 0.0) { b = m; fb = fm; }
    else { a = m; fa = fm; }
  }
  double u = 0.5 * (a + b);
  for (int i = 0; i < 4; ++i) {
    double f = flux_derivative(model, u, 1) - c;
    if (std::abs(f) <= kInvertTol) break;
    double d = flux_derivative(model, u, 2);
    if (d == 0.0) break;
    double un = u - f / d;
    if (un < bracket.lo || un > bracket.hi) break;
    u = un;
  }
  return u;
}

}  // namespace charsweep
