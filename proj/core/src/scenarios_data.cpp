#include "charsweep/scenario.hpp"

namespace charsweep {

namespace {

struct Bundled {
  const char* name;
  const char* text;
};

// The five canonical runs plus the property-test profiles.
const Bundled kBundled[] = {
    {"example1", R"scn(name = example1
flux = burgers
profile = """x < 0: x + 1.5 ; x >= 0: x^2 - 2*x"""
domain = [-3, 3]
T = 10
dt = 0.001
dX = 0.01
)scn"},
    {"example2", R"scn(name = example2
flux = burgers
profile = """x < 0: 1 - exp(x) ; x >= 0: x^2 - 2*x"""
domain = [-3, 3]
T = 10
dt = 0.001
dX = 0.01
)scn"},
    {"example3", R"scn(name = example3
flux = burgers
profile = """2*x/(1 + x^2)^2"""
domain = [-4, 4]
T = 10
dt = 0.001
dX = 0.01
)scn"},
    {"example4", R"scn(name = example4
flux = quartic
profile = """x < 0: -(x + 1)^2/2 ; x >= 0: x + 1"""
domain = [-2, 2]
T = 10
dt = 0.001
dX = 0.01
)scn"},
    {"example5", R"scn(name = example5
flux = burgers
profile = """exp((-x^4 + 5*x^2)/10)"""
domain = [-5, 6]
T = 10
dt = 0.001
dX = 0.01
)scn"},
    {"riemann_shock", R"scn(name = riemann_shock
flux = burgers
profile = """x < 0: 1 ; x >= 0: 0"""
domain = [-2, 2]
T = 10
dt = 0.001
dX = 0.01
)scn"},
    {"riemann_rarefaction", R"scn(name = riemann_rarefaction
flux = burgers
profile = """x < 0: 0 ; x >= 0: 1"""
domain = [-2, 2]
T = 2
dt = 0.001
dX = 0.01
)scn"},
    {"gaussian", R"scn(name = gaussian
flux = burgers
profile = """exp(-x^2)"""
domain = [-3, 3]
T = 3
dt = 0.001
dX = 0.01
)scn"},
    {"hat", R"scn(name = hat
flux = burgers
profile = """x < -1: 1 ; -1 <= x < 1: -x ; x >= 1: -1"""
domain = [-3, 3]
T = 3
dt = 0.001
dX = 0.01
)scn"},
    {"ramp", R"scn(name = ramp
flux = burgers
profile = """x < 0: 1 ; 0 <= x < 1: 1 - x ; x >= 1: 0"""
domain = [-2, 3]
T = 3
dt = 0.001
dX = 0.01
)scn"},
    {"zigzag", R"scn(name = zigzag
flux = burgers
profile = """x < -1: -2 ; -1 <= x < 1: -2*x ; x >= 1: 2"""
domain = [-3, 3]
T = 4
dt = 0.001
dX = 0.01
)scn"},
    {"fan_crossing", R"scn(name = fan_crossing
flux = burgers
profile = """x < 0: -x - x^2 ; x >= 0: x + 2"""
domain = [-3, 3]
T = 4
dt = 0.001
dX = 0.01
)scn"},
};

}  // namespace

std::vector<std::string> list_scenarios() {
  std::vector<std::string> names;
  for (const auto& b : kBundled) names.emplace_back(b.name);
  return names;
}

std::string bundled_scenario_text(const std::string& name) {
  for (const auto& b : kBundled)
    if (name == b.name) return b.text;
  return {};
}

}  // namespace charsweep
