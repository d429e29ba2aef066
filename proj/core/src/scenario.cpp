#include "charsweep/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "charsweep/csv.hpp"

namespace charsweep {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorCode::ParseError, "scenario: " + what);
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double to_number(const std::string& s) {
  double v;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail("malformed number '" + s + "'");
  return v;
}

std::vector<double> to_number_list(std::string s) {
  s = trim(s);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') fail("expected [a, b, ...]");
  s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      std::string item = trim(s.substr(start, i - start));
      if (!item.empty()) out.push_back(to_number(item));
      start = i + 1;
    }
  }
  return out;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "on") return true;
  if (s == "false" || s == "0" || s == "off") return false;
  fail("expected a boolean, got '" + s + "'");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  std::string flux_name;
  std::vector<double> coeffs;
  bool have_profile = false;

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value' in line '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));

    if (key == "profile") {
      if (value.rfind("\"\"\"", 0) != 0) fail("profile must be enclosed in triple quotes");
      value = value.substr(3);
      std::string body;
      while (value.find("\"\"\"") == std::string::npos) {
        body += value;
        body += '\n';
        if (!std::getline(in, line)) fail("unterminated profile text");
        value = line;
      }
      body += value.substr(0, value.find("\"\"\""));
      sc.profile_text = trim(body);
      have_profile = true;
    } else if (key == "name") {
      sc.name = value;
    } else if (key == "flux") {
      flux_name = trim(value);
      if (!flux_name.empty() && flux_name.front() == '"' && flux_name.back() == '"')
        flux_name = flux_name.substr(1, flux_name.size() - 2);
    } else if (key == "coeffs") {
      coeffs = to_number_list(value);
    } else if (key == "domain") {
      auto v = to_number_list(value);
      if (v.size() != 2 || !(v[0] < v[1])) fail("domain must be [lo, hi] with lo < hi");
      sc.domain = {v[0], v[1]};
    } else if (key == "T") {
      sc.T = to_number(value);
    } else if (key == "dt") {
      sc.dt = to_number(value);
    } else if (key == "dX" || key == "dx") {
      sc.dX = to_number(value);
    } else if (key == "m") {
      sc.reference_m = static_cast<int>(to_number(value));
    } else if (key == "phased_step") {
      sc.phased_step = to_bool(value);
    } else if (key == "emit_multivalue") {
      sc.emit_multivalue = to_bool(value);
    } else {
      fail("unknown key '" + key + "'");
    }
  }

  if (!have_profile) fail("missing profile");
  if (flux_name == "burgers" || flux_name.empty()) sc.flux = FluxModel::burgers();
  else if (flux_name == "quartic") sc.flux = FluxModel::power_quartic();
  else if (flux_name == "poly") {
    if (coeffs.empty()) fail("poly flux requires coeffs = [c0, c1, ...]");
    sc.flux = FluxModel::polynomial(coeffs);
  } else {
    fail("unknown flux '" + flux_name + "'");
  }
  if (!(sc.T > 0.0) || !(sc.dt > 0.0) || !(sc.dX > 0.0)) fail("T, dt, dX must be positive");
  if (sc.reference_m != 0 && sc.reference_m < 100) fail("reference m must be >= 100");
  return sc;
}

Scenario load_scenario(const std::string& name_or_path) {
  std::string bundled = bundled_scenario_text(name_or_path);
  if (!bundled.empty()) return parse_scenario(bundled);
  std::ifstream in(name_or_path);
  if (!in) fail("no bundled scenario or readable file named '" + name_or_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Scenario sc = parse_scenario(ss.str());
  if (sc.name.empty()) sc.name = std::filesystem::path(name_or_path).stem().string();
  return sc;
}

namespace {

void write_points_csv(const ShockGraph& g, std::ostream& out) {
  out << "id,x_star,kind,f_left,f_right,h_left,h_right,hp_left,hp_right,k_left,k_right,"
         "break_times,flags\n";
  for (const auto& pt : g.points) {
    out << pt.id << ',' << csv_num(pt.x) << ',' << point_kind_name(pt.kind) << ','
        << csv_num(pt.left.f) << ',' << csv_num(pt.right.f) << ',' << csv_num(pt.left.h[0])
        << ',' << csv_num(pt.right.h[0]) << ',' << csv_num(pt.left.h[1]) << ','
        << csv_num(pt.right.h[1]) << ',';
    if (pt.k_left) out << *pt.k_left;
    out << ',';
    if (pt.k_right) out << *pt.k_right;
    out << ',';
    for (std::size_t i = 0; i < pt.break_times.size(); ++i) {
      if (i) out << ';';
      out << csv_num(pt.break_times[i]);
    }
    out << ',';
    bool first = true;
    auto flag = [&](bool on, const char* name) {
      if (!on) return;
      if (!first) out << ';';
      out << name;
      first = false;
    };
    flag(pt.singular, "singular");
    flag(pt.registers_fan, "fan");
    flag(pt.crosses_left, "crosses_left");
    flag(pt.crosses_right, "crosses_right");
    flag(g.cancelled(pt.id), "cancelled");
    out << '\n';
  }
}

struct Timings {
  double tracking = 0.0;
  double sweeping = 0.0;
  double reference = 0.0;
};

}  // namespace

RunResult run_scenario(const Scenario& sc) {
  namespace fs = std::filesystem;
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  try {
    fs::create_directories(sc.out_dir);
    PiecewiseProfile profile = parse_profile(sc.profile_text, sc.domain);

    EvolveOptions opt;
    opt.dt = sc.dt;
    opt.phased_step = sc.phased_step;

    Timings timing;
    auto t0 = clock::now();
    ShockGraph graph = evolve(profile, sc.flux, sc.T, opt);
    auto t1 = clock::now();
    SolutionSlice slice = sweep_solution(profile, sc.flux, graph, sc.T, sc.dX);
    auto t2 = clock::now();
    timing.tracking = seconds(t0, t1);
    timing.sweeping = seconds(t1, t2);

    ErrorReport report;
    bool have_reference = sc.reference_m >= 100;
    GridSolution grid;
    if (have_reference) {
      auto r0 = clock::now();
      grid = reference_solve(profile, sc.flux, sc.T, sc.reference_m);
      timing.reference = seconds(r0, clock::now());
      report = compare(slice, grid);
    }
    report.tracking_seconds = timing.tracking;
    report.reference_seconds = timing.reference;

    auto open = [&](const char* fname) {
      std::ofstream f(fs::path(sc.out_dir) / fname, std::ios::binary);
      if (!f) throw Error(ErrorCode::ValidationError,
                          std::string("cannot write output file ") + fname);
      return f;
    };

    {
      auto f = open("points.csv");
      write_points_csv(graph, f);
    }
    {
      auto f = open("curves.csv");
      write_curves_csv(graph, f);
    }
    {
      auto f = open("events.csv");
      write_events_csv(graph, f);
    }
    {
      auto f = open("slice_T.csv");
      write_slice_csv(slice, f);
    }
    {
      auto f = open("slice_T_discontinuities.csv");
      write_discontinuities_csv(slice, f);
    }
    if (sc.emit_multivalue) {
      std::vector<double> feet;
      double lo = profile.domain_hint.lo, hi = profile.domain_hint.hi;
      int n = std::min(200000, static_cast<int>((hi - lo) / sc.dX));
      for (int i = 0; i <= n; ++i) feet.push_back(lo + (hi - lo) * i / n);
      auto surface = multivalue_surface(profile, sc.flux, sc.T, feet);
      auto f = open("multivalue_T.csv");
      f << "X,u\n";
      for (const auto& [X, u] : surface) f << csv_num(X) << ',' << csv_num(u) << '\n';
    }
    {
      auto f = open("report.txt");
      f << "scenario: " << sc.name << "\n";
      f << "flux: " << sc.flux.key() << "\n";
      f << "T: " << csv_num(sc.T) << "  dt: " << csv_num(sc.dt) << "  dX: " << csv_num(sc.dX)
        << "\n";
      f << "critical points: " << graph.points.size() << "\n";
      for (const auto& pt : graph.points) {
        f << "  x* = " << csv_num(pt.x) << "  " << point_kind_name(pt.kind);
        if (!pt.break_times.empty()) {
          f << "  t_b =";
          for (double tb : pt.break_times) f << ' ' << csv_num(tb);
        }
        if (graph.cancelled(pt.id)) f << "  (cancelled)";
        f << "\n";
      }
      f << "curves: " << graph.curves.size() << "  events: " << graph.events.size() << "\n";
      f << "slice samples: " << slice.samples.size()
        << "  discontinuities: " << slice.discontinuities.size() << "\n";
      for (const auto& d : slice.discontinuities)
        f << "  jump at X = " << csv_num(d.X) << "  u: " << csv_num(d.u_left) << " -> "
          << csv_num(d.u_right) << "\n";
      f << "tracking_seconds: " << timing.tracking << "\n";
      f << "sweep_seconds: " << timing.sweeping << "\n";
      if (have_reference) {
        f << "reference_m: " << sc.reference_m << "\n";
        f << "reference_seconds: " << timing.reference << "\n";
        f << "l1_error: " << report.l1_error << "\n";
        f << "linf_off_shock: " << report.linf_off_shock << "\n";
        f << "shock_location_errors:";
        for (double e : report.shock_location_errors) f << ' ' << e;
        f << "\n";
        f << "unmatched_markers: " << report.unmatched_markers << "\n";
      }
    }
    return {0, "ok"};
  } catch (const Error& e) {
    int code = (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::ValidationError ||
                e.code() == ErrorCode::SeedRejected)
                   ? 2
                   : 3;
    return {code, e.what()};
  } catch (const std::exception& e) {
    return {3, e.what()};
  }
}

}  // namespace charsweep
