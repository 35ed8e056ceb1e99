#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "threewave/commands.hpp"
#include "threewave/config.hpp"
#include "threewave/evolution.hpp"
#include "threewave/io.hpp"
#include "threewave/resolution.hpp"
#include "threewave/scattering.hpp"
#include "threewave/soliton.hpp"

using namespace threewave;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

RunConfig base_config() {
  RunConfig c;
  c.a = {1, 0, -1};
  c.b = {-0.5, 1, -0.5};
  return c;
}

RunConfig random_field_config() {
  RunConfig c = base_config();
  c.x_min = -20;
  c.x_max = 20;
  c.dx = 0.02;
  c.z_max = 10;
  c.z_count = 401;
  c.random = RandomBumps{6, 0.5, 3, 0.6, 1.0};
  c.seed = 7;
  return c;
}

SolitonEnsemble one_pole(const WaveSystem& sys, PoleClass cls) {
  return make_ensemble(sys, {make_pole(sys, {0.5, 0.8}, {2, 1}, cls)});
}

double sup_diff(const FieldState& a, const FieldState& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.grid.count; ++k)
    m = std::max({m, std::abs(a.p12[k] - b.p12[k]), std::abs(a.p13[k] - b.p13[k]), std::abs(a.p23[k] - b.p23[k])});
  return m;
}

double max_modulus(const std::vector<cplx>& v) {
  double m = 0.0;
  for (cplx c : v) m = std::max(m, std::abs(c));
  return m;
}

Outcome unitarity() {
  RunConfig c = random_field_config();
  FieldState f = initial_field(c);
  ScatterResult r = scatter(f, config_system(c), config_spectral_grid(c));
  const auto& k = r.checks;
  bool ok = f.sup_norm() <= 0.5 + 1e-12 && k.detS_max_dev < 1e-8 && k.symmetry_max_dev < 1e-6 && k.closure_max_dev < 1e-6;
  return {ok, fmt("|detS-1| %.2e (<1e-8), symmetry %.2e (<1e-6), closure %.2e (<1e-6), sup|P| %.3f", k.detS_max_dev,
                  k.symmetry_max_dev, k.closure_max_dev, f.sup_norm())};
}

Outcome exact_solution() {
  RunConfig c = base_config();
  WaveSystem sys = config_system(c);
  SolitonEnsemble e = one_pole(sys, PoleClass::One);
  double r1 = testing::pde_residual(e, 0.5, 2e-2, -5.0, 5.0, 41);
  double r2 = testing::pde_residual(e, 0.5, 1e-2, -5.0, 5.0, 41);
  double order = std::log2(r1 / r2);
  UniformGrid g = UniformGrid::from_window(-40, 40, 0.02);
  EvolutionConfig ev;
  ev.dt = 1e-3;
  ev.t_end = 1.0;
  ev.snapshot_stride = 1000;
  double err = sup_diff(evolve(nsoliton_field(e, g, 0.0), sys, ev).snapshots.back(), nsoliton_field(e, g, 1.0));
  return {std::abs(order - 2.0) <= 0.2 && err < 1e-4,
          fmt("residual order %.3f (2 +- 0.2), evolve vs exact at t=1 %.2e (<1e-4)", order, err)};
}

Outcome round_trip() {
  RunConfig c = base_config();
  WaveSystem sys = config_system(c);
  SolitonEnsemble e = one_pole(sys, PoleClass::One);
  SpectralGrid zg = SpectralGrid::symmetric(10, 401);
  ScatterResult r = scatter(nsoliton_field(e, UniformGrid::from_window(-40, 40, 0.02), 0.0), sys, zg);
  if (r.data.poles.size() != 1) return {false, fmt("recovered %zu poles, expected 1", r.data.poles.size())};
  const DiscretePole& p = r.data.poles[0];
  double dz = std::abs(p.z - e.poles[0].z);
  double dc = std::abs(p.c - e.poles[0].c) / std::abs(e.poles[0].c);
  double refl = std::max({max_modulus(r.data.r1), max_modulus(r.data.r2), max_modulus(r.data.r3), max_modulus(r.data.r4)});
  return {dz < 1e-6 && dc < 1e-4 && refl < 1e-6 && p.cls == PoleClass::One,
          fmt("|dz| %.2e (<1e-6), |dc|/|c| %.2e (<1e-4), max|r_i| %.2e (<1e-6)", dz, dc, refl)};
}

Outcome isospectrality() {
  RunConfig c = random_field_config();
  WaveSystem sys = config_system(c);
  EvolutionConfig ev;
  ev.dt = 2e-3;
  ev.t_end = 5.0;
  ev.snapshot_stride = 500;
  Trajectory t = evolve(initial_field(c), sys, ev);
  auto rows = scattering_invariance_report(t, sys, config_spectral_grid(c));
  double dr = 0.0, ds = 0.0;
  for (const auto& r : rows) {
    for (double d : r.dev_r) dr = std::max(dr, d);
    ds = std::max(ds, r.dev_s12_phase);
  }
  return {dr < 1e-3 && ds < 1e-3 && rows.back().t == 5.0,
          fmt("max | |r_i(t)| - |r_i(0)| | %.2e (<1e-3), s12 phase-corrected drift %.2e (<1e-3), t up to %.1f", dr, ds,
              rows.back().t)};
}

// Intensity-weighted centre of the field.
double centre(const FieldState& f) {
  double w = 0.0, m = 0.0;
  for (std::size_t k = 0; k < f.grid.count; ++k) {
    double d = std::norm(f.p12[k]) + std::norm(f.p13[k]) + std::norm(f.p23[k]);
    w += d;
    m += d * f.grid.x(k);
  }
  return m / w;
}

Outcome velocity_law() {
  RunConfig c = base_config();
  WaveSystem sys = config_system(c);
  std::string detail;
  bool ok = true;
  for (PoleClass cls : {PoleClass::One, PoleClass::Two}) {
    double expect = cls == PoleClass::One ? -sys.n(0, 1) : -sys.n(1, 2);
    double lo = expect > 0 ? -20.0 : -20.0 + 20.0 * expect;
    UniformGrid g = UniformGrid::from_window(lo, lo + 40.0 + 20.0 * std::abs(expect), 0.02);
    EvolutionConfig ev;
    ev.dt = 2e-3;
    ev.t_end = 20.0;
    ev.snapshot_stride = 500;
    Trajectory t = evolve(nsoliton_field(one_pole(sys, cls), g, 0.0), sys, ev);
    double st = 0, sx = 0, stt = 0, stx = 0;
    double n = static_cast<double>(t.snapshots.size());
    for (const auto& s : t.snapshots) {
      double x = centre(s);
      st += s.t;
      sx += x;
      stt += s.t * s.t;
      stx += s.t * x;
    }
    double v = (n * stx - st * sx) / (n * stt - st * st);
    double rel = std::abs(v - expect) / std::abs(expect);
    ok = ok && rel < 0.01;
    detail += fmt("class %d v %.6f vs %.3f (rel %.1e); ", cls == PoleClass::One ? 1 : 2, v, expect, rel);
  }
  detail += "tolerance 1%";
  return {ok, detail};
}

Outcome separation() {
  RunConfig c = base_config();
  WaveSystem sys = config_system(c);
  SolitonEnsemble e = make_ensemble(sys, {make_pole(sys, {0.5, 0.8}, {2, 1}, PoleClass::One),
                                          make_pole(sys, {-0.3, 0.6}, {1, -0.5}, PoleClass::Two)});
  std::vector<double> times;
  for (int k = 0; k <= 80; ++k) times.push_back(0.25 * k);
  FitOptions o;
  o.t_min = 2.0;
  bool ok = true;
  std::string detail;
  for (ConeSpec cone : {make_cone(-1, 1, 1, 2), make_cone(-1, 1, -2, -1)}) {
    ConeFiltering f = cone_filter(e, cone);
    ConeErrorSeries s = separation_check(e, cone_constants(e, f), cone, times);
    DecayFit fit = fit_decay(s, DecayModel::Exponential, o);
    double bound = 0.5 * f.a_const * f.mu_I;
    bool good = f.retained.size() == 1 && fit.status == FitStatus::Fitted && std::abs(fit.rate) >= bound;
    ok = ok && good;
    detail += fmt("cone v[%g,%g]: rate %.3f, |rate| >= 0.5*a*mu = %.3f (a %.2f, mu %.3f, %zu samples); ", cone.v1,
                  cone.v2, fit.rate, bound, f.a_const, f.mu_I, fit.samples);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

RunConfig resolution_config() {
  RunConfig c = base_config();
  c.x_min = -80;
  c.x_max = 100;
  c.dx = 0.02;
  c.z_max = 10;
  c.z_count = 401;
  c.poles = {PoleSpec{1, {0.5, 1.2}, {2, 1}}};
  c.bumps = {BumpSpec{Channel::p23, {0.05, 0.0}, 10.0, 1.0}};
  c.dt = 1e-3;
  c.t_end = 40;
  c.snapshot_stride = 500;
  c.cones = {make_cone(-2, 3, 1.25, 1.75)};
  c.resolve_reference = "scatter";
  c.fit_t_min = 10;
  c.fit_t_max = 40;
  c.fit_floor = 1e-7;
  return c;
}

Outcome resolution(const fs::path& work) {
  RunConfig c = resolution_config();
  std::string out = (work / "resolve").string();
  int code = run_command("resolve", c, out);
  if (code != 0) return {false, "resolve exited with " + std::to_string(code)};
  json cone = read_json(out + "/rates.json")["cones"][0];
  const json& fit = cone["cone_error"];
  double worst = 0.0;
  std::istringstream in(read_text(out + "/cone_0.csv"));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    double t = std::stod(line.substr(0, line.find(',')));
    if (t >= 10.0 && t <= 40.0) worst = std::max(worst, std::stod(line.substr(line.find(',') + 1)));
  }
  std::string status = fit["status"];
  bool ok;
  std::string detail;
  if (status == "fitted") {
    double rate = fit["rate"];
    ok = rate >= -1.5 && rate <= -0.6;
    detail = fmt("power exponent %.3f in [-1.5,-0.6]? conf %.2e", rate, fit["confidence"].get<double>());
  } else {
    ok = worst < 1e-6;
    detail = fmt("floor status, max cone error on [10,40] %.2e (<1e-6)", worst);
  }
  detail += fmt("; bump sup %.2f, retained %d, dressed c %.6f%+.6fi", 0.05, cone["retained"].get<int>(),
                cone["poles"][0]["re_c"].get<double>(), cone["poles"][0]["im_c"].get<double>());
  return {ok && cone["retained"] == 1, detail};
}

Outcome determinism(const fs::path& work) {
  RunConfig c = base_config();
  c.x_min = -30;
  c.x_max = 40;
  c.z_count = 101;
  c.poles = {PoleSpec{1, {0.5, 0.8}, {2, 1}}};
  c.random = RandomBumps{3, 0.05, 5, 0.7, 1.5};
  c.dt = 2e-3;
  c.t_end = 1.0;
  c.snapshot_stride = 250;
  c.soliton_times = {0, 0.5, 1};
  c.cones = {make_cone(-2, 3, 1.25, 1.75), make_cone(-1, 1, -0.5, 0.5)};
  c.fit_t_min = 0;
  std::size_t files = 0, differ = 0;
  for (const char* cmd : {"scatter", "solitons", "evolve", "resolve", "check"}) {
    fs::path a = work / "det_a" / cmd, b = work / "det_b" / cmd;
    int ca = run_command(cmd, c, a.string());
    int cb = run_command(cmd, c, b.string());
    if (ca != 0 || cb != 0) return {false, fmt("%s exited with %d / %d", cmd, ca, cb)};
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      fs::path other = b / e.path().filename();
      if (!fs::exists(other) || read_text(e.path().string()) != read_text(other.string())) ++differ;
    }
  }
  return {files > 0 && differ == 0, fmt("%zu output files across 5 commands, %zu differ", files, differ)};
}

}  // namespace

int main() {
  fs::path work = fs::temp_directory_path() / "threewave_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 unitarity/symmetry", unitarity},
      {"2 exact solution", exact_solution},
      {"3 round-trip IST", round_trip},
      {"4 isospectrality", isospectrality},
      {"5 velocity law", velocity_law},
      {"6 cone separation", separation},
      {"7 soliton resolution", [&] { return resolution(work); }},
      {"8 determinism", [&] { return determinism(work); }},
  };
  const double budget[] = {120, 1e9, 1e9, 1e9, 1e9, 300, 1800, 1e9};

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const Error& e) {
      o = {false, std::string(to_string(e.kind())) + ": " + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget[k]) {
      o.pass = false;
      o.detail += fmt("; runtime budget %.0f s exceeded", budget[k]);
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  fs::remove_all(work);
  return failed == 0 ? 0 : 1;
}
