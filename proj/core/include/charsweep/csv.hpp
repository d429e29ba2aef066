#ifndef CHARSWEEP_CSV_HPP
#define CHARSWEEP_CSV_HPP

#include <charconv>
#include <cmath>
#include <string>

namespace charsweep {

// Shortest decimal representation that round-trips the double exactly,
// so regenerated CSVs are byte-identical.
inline std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace charsweep

#endif  // CHARSWEEP_CSV_HPP
