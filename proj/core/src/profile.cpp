#include "charsweep/profile.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace charsweep {

struct PiecewiseProfile::Cache {
  std::mutex mu;
  // f_chain[piece][k] = f^(k) of that piece; entry 0 is f itself.
  std::vector<std::vector<Expr>> f_chain;
  // h_chain[model.key()][piece][k] = (G' o f)^(k) of that piece.
  std::map<std::string, std::vector<std::vector<Expr>>> h_chains;
};

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void parse_fail(const std::string& text, std::size_t offset, const std::string& what) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') { ++line; col = 1; }
    else ++col;
  }
  throw Error(ErrorCode::ParseError, "profile syntax error at line " + std::to_string(line) +
                                          ", column " + std::to_string(col) + ": " + what);
}

struct CondScanner {
  const std::string& s;
  std::size_t pos = 0;
  std::size_t base;  // offset of s within the full profile text
  const std::string& full;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool accept(const char* tok) {
    skip_ws();
    std::size_t n = std::char_traits<char>::length(tok);
    if (s.compare(pos, n, tok) == 0) { pos += n; return true; }
    return false;
  }
  double number() {
    skip_ws();
    std::size_t start = pos;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
    while (pos < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.')) ++pos;
    if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
      std::size_t e = pos + 1;
      if (e < s.size() && (s[e] == '+' || s[e] == '-')) ++e;
      if (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) {
        pos = e;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      }
    }
    double v;
    auto res = std::from_chars(s.data() + start, s.data() + pos, v);
    if (pos == start || res.ec != std::errc()) parse_fail(full, base + start, "expected a number");
    return v;
  }
};

// A condition is one of:  x < c   |   c <= x < d   |   x >= c
struct PieceCond {
  bool has_lo = false, has_hi = false;
  double lo = 0.0, hi = 0.0;
};

PieceCond parse_condition(const std::string& cond, std::size_t base, const std::string& full) {
  CondScanner sc{cond, 0, base, full};
  PieceCond out;
  sc.skip_ws();
  if (sc.accept("x")) {
    if (sc.accept("<")) {
      out.has_hi = true;
      out.hi = sc.number();
    } else if (sc.accept(">=")) {
      out.has_lo = true;
      out.lo = sc.number();
    } else {
      parse_fail(full, base + sc.pos, "expected '<' or '>=' after x");
    }
  } else {
    out.lo = sc.number();
    out.has_lo = true;
    if (!sc.accept("<=")) parse_fail(full, base + sc.pos, "expected '<='");
    if (!sc.accept("x")) parse_fail(full, base + sc.pos, "expected 'x'");
    if (!sc.accept("<")) parse_fail(full, base + sc.pos, "expected '<'");
    out.hi = sc.number();
    out.has_hi = true;
  }
  sc.skip_ws();
  if (sc.pos != cond.size()) parse_fail(full, base + sc.pos, "trailing input in condition");
  return out;
}

bool all_ws(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

void validate_pieces(const PiecewiseProfile& p) {
  // Side limits of f must exist (finite) at every breakpoint, and each piece
  // must evaluate finitely on sampled interior points of its interval.
  for (double bp : p.breakpoints) {
    double fl = eval_profile(p, bp, Side::Left, 0);
    double fr = eval_profile(p, bp, Side::Right, 0);
    if (!std::isfinite(fl) || !std::isfinite(fr))
      throw Error(ErrorCode::ValidationError,
                  "piece singular at closure point x = " + std::to_string(bp));
  }
  for (std::size_t i = 0; i < p.pieces.size(); ++i) {
    Interval iv = piece_interval(p, i);
    double lo = std::max(iv.lo, p.domain_hint.lo - 1.0);
    double hi = std::min(iv.hi, p.domain_hint.hi + 1.0);
    if (!(lo < hi)) continue;
    const int n = 257;
    for (int j = 1; j < n; ++j) {
      double x = lo + (hi - lo) * j / n;
      if (!std::isfinite(eval_expr(p.pieces[i], x)))
        throw Error(ErrorCode::ValidationError,
                    "piece " + std::to_string(i) + " singular near x = " + std::to_string(x));
    }
  }
}

}  // namespace

PiecewiseProfile parse_profile(const std::string& text, Interval domain_hint) {
  PiecewiseProfile p;
  p.domain_hint = domain_hint;
  p.cache = std::make_shared<PiecewiseProfile::Cache>();

  // Split on ';' (the expression grammar has no ';').
  std::vector<std::pair<std::string, std::size_t>> items;  // text, offset
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ';') {
      items.emplace_back(text.substr(start, i - start), start);
      start = i + 1;
    }
  }
  while (!items.empty() && all_ws(items.back().first)) items.pop_back();
  if (items.empty()) parse_fail(text, 0, "empty profile");

  // A single bare expression (no condition) covers the whole line.
  if (items.size() == 1 && items[0].first.find(':') == std::string::npos) {
    try {
      p.pieces.push_back(parse_expression(items[0].first));
    } catch (const Error& e) {
      parse_fail(text, items[0].second + static_cast<std::size_t>(std::isnan(e.detail()) ? 0 : e.detail()),
                 e.what());
    }
    validate_pieces(p);
    return p;
  }

  std::vector<PieceCond> conds;
  for (auto& [item, off] : items) {
    std::size_t colon = item.find(':');
    if (colon == std::string::npos) parse_fail(text, off, "expected '<cond>: <expr>'");
    conds.push_back(parse_condition(item.substr(0, colon), off, text));
    std::string body = item.substr(colon + 1);
    try {
      p.pieces.push_back(parse_expression(body));
    } catch (const Error& e) {
      std::size_t rel = std::isnan(e.detail()) ? 0 : static_cast<std::size_t>(e.detail());
      parse_fail(text, off + colon + 1 + rel, e.what());
    }
  }

  // Conditions must tile the real line left to right.
  const std::size_t n = conds.size();
  if (n < 2) parse_fail(text, 0, "conditioned profiles need at least two pieces");
  if (conds[0].has_lo || !conds[0].has_hi) parse_fail(text, items[0].second, "first condition must be 'x < c'");
  if (!conds[n - 1].has_lo || conds[n - 1].has_hi)
    parse_fail(text, items[n - 1].second, "last condition must be 'x >= c'");
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (!conds[i].has_lo || !conds[i].has_hi)
      parse_fail(text, items[i].second, "middle conditions must be 'c <= x < d'");
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double hi = conds[i].hi;
    double lo_next = conds[i + 1].lo;
    if (hi != lo_next)
      parse_fail(text, items[i + 1].second, "conditions do not tile: gap or overlap at boundary");
    p.breakpoints.push_back(hi);
  }
  for (std::size_t i = 0; i + 1 < p.breakpoints.size(); ++i)
    if (!(p.breakpoints[i] < p.breakpoints[i + 1]))
      parse_fail(text, 0, "breakpoints not strictly increasing");

  validate_pieces(p);
  return p;
}

PiecewiseProfile parse_profile(const std::string& text) {
  return parse_profile(text, Interval{-10.0, 10.0});
}

std::string serialize_profile(const PiecewiseProfile& p) {
  auto num = [](double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
  };
  if (p.breakpoints.empty()) return expr_to_string(p.pieces[0]);
  std::string out;
  for (std::size_t i = 0; i < p.pieces.size(); ++i) {
    if (i > 0) out += " ; ";
    if (i == 0) out += "x < " + num(p.breakpoints[0]);
    else if (i == p.pieces.size() - 1) out += "x >= " + num(p.breakpoints.back());
    else out += num(p.breakpoints[i - 1]) + " <= x < " + num(p.breakpoints[i]);
    out += ": " + expr_to_string(p.pieces[i]);
  }
  return out;
}

Interval piece_interval(const PiecewiseProfile& p, std::size_t piece) {
  Interval iv{-kInf, kInf};
  if (piece > 0) iv.lo = p.breakpoints[piece - 1];
  if (piece < p.breakpoints.size()) iv.hi = p.breakpoints[piece];
  return iv;
}

std::size_t piece_index(const PiecewiseProfile& p, double x, Side side) {
  auto it = std::lower_bound(p.breakpoints.begin(), p.breakpoints.end(), x);
  std::size_t i = static_cast<std::size_t>(it - p.breakpoints.begin());
  if (it != p.breakpoints.end() && *it == x) {
    switch (side) {
      case Side::Left: return i;
      case Side::Right: return i + 1;
      case Side::Interior:
        throw Error(ErrorCode::AmbiguousSide,
                    "interior evaluation requested at breakpoint x = " + std::to_string(x));
    }
  }
  return i;  // pieces[i] covers (breakpoints[i-1], breakpoints[i])
}

namespace {

const Expr& f_derivative(const PiecewiseProfile& p, std::size_t piece, int order) {
  auto& cache = *p.cache;
  std::lock_guard<std::mutex> lock(cache.mu);
  if (cache.f_chain.empty()) cache.f_chain.resize(p.pieces.size());
  auto& chain = cache.f_chain[piece];
  if (chain.empty()) chain.push_back(p.pieces[piece]);
  while (static_cast<int>(chain.size()) <= order) chain.push_back(differentiate(chain.back()));
  return chain[order];
}

const Expr& h_derivative(const PiecewiseProfile& p, const FluxModel& model, std::size_t piece,
                         int order) {
  auto& cache = *p.cache;
  std::lock_guard<std::mutex> lock(cache.mu);
  auto& chains = cache.h_chains[model.key()];
  if (chains.empty()) chains.resize(p.pieces.size());
  auto& chain = chains[piece];
  if (chain.empty()) {
    // G'(u) as an expression in u (Horner form), then u := f(x).
    Expr gp = make_const(0.0);
    for (std::size_t i = model.coeffs.size(); i-- > 1;) {
      Expr c = make_const(model.coeffs[i] * static_cast<double>(i));
      gp = make_add(make_mul(gp, make_var()), c);
    }
    chain.push_back(substitute(gp, p.pieces[piece]));
  }
  while (static_cast<int>(chain.size()) <= order) chain.push_back(differentiate(chain.back()));
  return chain[order];
}

}  // namespace

double eval_profile(const PiecewiseProfile& p, double x, Side side, int order) {
  if (order < 0 || order > kMaxOrder)
    throw Error(ErrorCode::UnsupportedOrder,
                "profile derivative order " + std::to_string(order) + " out of range");
  std::size_t i = piece_index(p, x, side);
  return eval_expr(f_derivative(p, i, order), x);
}

double char_speed(const PiecewiseProfile& p, const FluxModel& model, double x, Side side,
                  int order) {
  if (order < 0 || order > kMaxOrder)
    throw Error(ErrorCode::UnsupportedOrder,
                "characteristic-speed derivative order " + std::to_string(order) + " out of range");
  std::size_t i = piece_index(p, x, side);
  return eval_expr(h_derivative(p, model, i, order), x);
}

}  // namespace charsweep
