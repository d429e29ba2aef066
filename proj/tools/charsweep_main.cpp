#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "charsweep/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"charsweep: front-tracking solver for 1D scalar conservation laws"};

  std::string scenario_arg;
  std::string out_dir = ".";
  int reference_m = -1;
  bool phased_step = false;
  bool emit_multivalue = false;
  bool list = false;
  double dt_override = 0.0, dx_override = 0.0, T_override = 0.0;

  app.add_option("--scenario", scenario_arg, "bundled scenario name or path to a .scn file");
  app.add_option("--out", out_dir, "output directory (default: current)");
  app.add_option("--with-reference", reference_m,
                 "run the finite-volume reference with this many cells");
  app.add_flag("--phased-step", phased_step, "phase the time grid onto the next activation");
  app.add_flag("--emit-multivalue", emit_multivalue, "also write the folded characteristic surface");
  app.add_option("--dt", dt_override, "override the tracking time step");
  app.add_option("--dx", dx_override, "override the sweep output spacing dX");
  app.add_option("--T", T_override, "override the solution time");
  app.add_flag("--list-scenarios", list, "print the bundled scenario names and exit");

  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& name : charsweep::list_scenarios()) std::printf("%s\n", name.c_str());
    return 0;
  }
  if (scenario_arg.empty()) {
    std::fprintf(stderr, "error: --scenario is required (or use --list-scenarios)\n");
    return 2;
  }

  charsweep::Scenario sc;
  try {
    sc = charsweep::load_scenario(scenario_arg);
  } catch (const charsweep::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  sc.out_dir = out_dir;
  if (reference_m >= 0) sc.reference_m = reference_m;
  if (phased_step) sc.phased_step = true;
  if (emit_multivalue) sc.emit_multivalue = true;
  if (dt_override > 0.0) sc.dt = dt_override;
  if (dx_override > 0.0) sc.dX = dx_override;
  if (T_override > 0.0) sc.T = T_override;

  auto result = charsweep::run_scenario(sc);
  if (result.exit_code != 0) std::fprintf(stderr, "error: %s\n", result.message.c_str());
  else std::printf("wrote %s\n", out_dir.c_str());
  return result.exit_code;
}
