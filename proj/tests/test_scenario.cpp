#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "charsweep/scenario.hpp"

using namespace charsweep;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("charsweep_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("bundled scenario list is deterministic and complete") {
  auto names = list_scenarios();
  REQUIRE(names.size() >= 7);
  CHECK(names[0] == "example1");
  CHECK(names[4] == "example5");
  auto has = [&](const char* n) {
    return std::find(names.begin(), names.end(), n) != names.end();
  };
  for (const char* n : {"example1", "example2", "example3", "example4", "example5",
                        "riemann_shock", "riemann_rarefaction", "hat", "zigzag"})
    CHECK(has(n));
  CHECK(names == list_scenarios());
}

TEST_CASE("every bundled scenario parses and matches its on-disk copy") {
  for (const auto& name : list_scenarios()) {
    auto sc = load_scenario(name);
    CHECK(sc.name == name);
    CHECK(sc.T > 0.0);
    CHECK(!sc.profile_text.empty());
#ifdef CHARSWEEP_SOURCE_DIR
    fs::path on_disk = fs::path(CHARSWEEP_SOURCE_DIR) / "scenarios" / (name + ".scn");
    REQUIRE(fs::exists(on_disk));
    CHECK(slurp(on_disk) == bundled_scenario_text(name));
#endif
  }
}

TEST_CASE("scenario text parsing") {
  auto sc = parse_scenario(
      "name = demo\n"
      "flux = poly\n"
      "coeffs = [0, 0, 0.5]\n"
      "profile = \"\"\"x < 0: 1 ; x >= 0: 0\"\"\"\n"
      "domain = [-1, 1]\n"
      "T = 2.5\n"
      "dt = 0.01\n"
      "dX = 0.05\n"
      "m = 400\n"
      "phased_step = true\n");
  CHECK(sc.name == "demo");
  CHECK(sc.flux.kind == FluxKind::Polynomial);
  CHECK(sc.T == 2.5);
  CHECK(sc.reference_m == 400);
  CHECK(sc.phased_step);

  CHECK_THROWS_AS(parse_scenario("T = 1\n"), Error);                       // no profile
  CHECK_THROWS_AS(parse_scenario("profile = \"\"\"x\"\"\"\nbogus = 1\n"), Error);
  CHECK_THROWS_AS(parse_scenario("flux = poly\nprofile = \"\"\"x\"\"\"\n"), Error);
}

TEST_CASE("run_scenario writes the full output set") {
  auto sc = load_scenario("riemann_shock");
  sc.T = 2.0;
  sc.reference_m = 400;
  fs::path out = fresh_dir("riemann");
  sc.out_dir = out.string();
  auto result = run_scenario(sc);
  REQUIRE(result.exit_code == 0);
  for (const char* f : {"points.csv", "curves.csv", "events.csv", "slice_T.csv",
                        "slice_T_discontinuities.csv", "report.txt"})
    CHECK(fs::exists(out / f));

  // xi(T) = T/2 on the last curve row
  std::string curves = slurp(out / "curves.csv");
  auto last_line = curves.substr(curves.find_last_of('\n', curves.size() - 2) + 1);
  CHECK(last_line.find(",1,") != std::string::npos);  // t, xl... xi printed as 1

  std::string points = slurp(out / "points.csv");
  CHECK(points.find("shock1") != std::string::npos);
  std::string report = slurp(out / "report.txt");
  CHECK(report.find("reference_m: 400") != std::string::npos);
  CHECK(report.find("l1_error:") != std::string::npos);
}

TEST_CASE("identical scenario runs give byte-identical csv output") {
  auto sc = load_scenario("example2");
  sc.T = 2.0;
  fs::path out_a = fresh_dir("det_a");
  fs::path out_b = fresh_dir("det_b");
  sc.out_dir = out_a.string();
  REQUIRE(run_scenario(sc).exit_code == 0);
  sc.out_dir = out_b.string();
  REQUIRE(run_scenario(sc).exit_code == 0);
  for (const char* f : {"points.csv", "curves.csv", "events.csv", "slice_T.csv",
                        "slice_T_discontinuities.csv"})
    CHECK(slurp(out_a / f) == slurp(out_b / f));
}

TEST_CASE("multivalue emission flag") {
  auto sc = load_scenario("gaussian");
  sc.T = 2.5;  // past the break time: the surface folds
  sc.emit_multivalue = true;
  fs::path out = fresh_dir("multi");
  sc.out_dir = out.string();
  REQUIRE(run_scenario(sc).exit_code == 0);
  std::string text = slurp(out / "multivalue_T.csv");
  CHECK(text.rfind("X,u", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') > 100);
}

TEST_CASE("phased-step flag keeps results close to the plain grid") {
  auto sc = load_scenario("example2");
  sc.T = 1.0;
  fs::path out_a = fresh_dir("phase_a");
  sc.out_dir = out_a.string();
  REQUIRE(run_scenario(sc).exit_code == 0);
  sc.phased_step = true;
  fs::path out_b = fresh_dir("phase_b");
  sc.out_dir = out_b.string();
  REQUIRE(run_scenario(sc).exit_code == 0);
  // both runs produce one curve ending at the same position within dt^4 slack
  auto tail = [&](const fs::path& p) {
    std::string s = slurp(p / "curves.csv");
    return s.substr(s.find_last_of('\n', s.size() - 2) + 1);
  };
  std::string ta = tail(out_a), tb = tail(out_b);
  double xa = std::stod(ta.substr(ta.find_last_of(',') + 1));
  double xb = std::stod(tb.substr(tb.find_last_of(',') + 1));
  CHECK(std::abs(xa - xb) <= 1e-8);
}

TEST_CASE("malformed input exits with status 2") {
  Scenario sc;
  sc.name = "broken";
  sc.flux = FluxModel::burgers();
  sc.profile_text = "x < 0: 1/x ; x >= 0: 0";  // singular at the seam
  sc.out_dir = fresh_dir("broken").string();
  auto result = run_scenario(sc);
  CHECK(result.exit_code == 2);
  CHECK(!result.message.empty());

  CHECK_THROWS_AS(load_scenario("no_such_scenario_name"), Error);
}
