#ifndef CHARSWEEP_SCENARIO_HPP
#define CHARSWEEP_SCENARIO_HPP

#include <string>
#include <vector>

#include "charsweep/shockdyn.hpp"
#include "charsweep/sweep.hpp"
#include "charsweep/validate.hpp"

namespace charsweep {

// A complete run description: flat `key = value` text with the profile
// embedded under triple quotes.
struct Scenario {
  std::string name;
  FluxModel flux;
  std::string profile_text;
  Interval domain{-10.0, 10.0};
  double T = 1.0;
  double dt = 1e-3;
  double dX = 1e-2;
  int reference_m = 0;  // 0: skip the reference comparison
  bool phased_step = false;
  bool emit_multivalue = false;
  std::string out_dir = ".";
};

Scenario parse_scenario(const std::string& text);

// Resolve a bundled scenario name or read a scenario file from disk.
Scenario load_scenario(const std::string& name_or_path);

std::vector<std::string> list_scenarios();

// Bundled scenario source text; empty if the name is unknown.
std::string bundled_scenario_text(const std::string& name);

struct RunResult {
  int exit_code = 0;  // 0 ok, 2 parse/validation, 3 runtime abort
  std::string message;
};

// Classify, evolve, sweep, optionally compare against the reference, and
// write points.csv / curves.csv / events.csv / slice_T.csv /
// slice_T_discontinuities.csv / report.txt into the output directory.
RunResult run_scenario(const Scenario& scenario);

}  // namespace charsweep

#endif  // CHARSWEEP_SCENARIO_HPP
