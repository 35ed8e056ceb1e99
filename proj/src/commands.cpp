#include "threewave/commands.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

#include "threewave/evolution.hpp"
#include "threewave/io.hpp"
#include "threewave/resolution.hpp"
#include "threewave/scattering.hpp"

namespace threewave {

namespace fs = std::filesystem;

namespace {

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::ConfigError, "cannot create output directory " + dir);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json fit_json(const DecayFit& f) {
  return {{"model", std::string(to_string(f.model))},
          {"status", std::string(to_string(f.status))},
          {"rate", f.status == FitStatus::Fitted ? json(f.rate) : json(nullptr)},
          {"confidence", f.status == FitStatus::Fitted ? json(f.confidence) : json(nullptr)},
          {"samples", f.samples}};
}

FitOptions fit_options(const RunConfig& cfg) {
  FitOptions o;
  o.t_min = cfg.fit_t_min;
  o.t_max = cfg.fit_t_max;
  o.floor = cfg.fit_floor;
  return o;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::OrderingViolated:
    case ErrorKind::TraceNonzero:
    case ErrorKind::BadIndex:
    case ErrorKind::NonUniformGrid:
      return kExitConfig;
    case ErrorKind::InvariantViolated:
      return kExitInvariant;
    default:
      return kExitNumerical;
  }
}

void cmd_scatter(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  WaveSystem sys = config_system(cfg);
  FieldState f = initial_field(cfg);
  ScatterResult res = scatter(f, sys, config_spectral_grid(cfg));
  write_json(join_path(out_dir, "scattering.json"), scattering_json(sys, res.data, res.checks));
  write_text(join_path(out_dir, "reflection.csv"), reflection_csv(res.data));
  double ct_dev = 0.0;
  for (const auto& p : res.data.poles) ct_dev = std::max(ct_dev, std::abs(p.c_tilde + std::conj(p.c)) / std::abs(p.c));
  json checks = {{"detS_max_dev", res.checks.detS_max_dev},
                 {"symmetry_max_dev", res.checks.symmetry_max_dev},
                 {"closure_max_dev", res.checks.closure_max_dev},
                 {"conjugate_constant_max_dev", ct_dev},
                 {"pole_count", res.data.poles.size()}};
  write_json(join_path(out_dir, "checks.json"), checks);
}

void cmd_solitons(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  SolitonEnsemble ens = cfg.soliton_source == "scattering"
                            ? ensemble_from_scattering_json(read_json(join_path(out_dir, "scattering.json")))
                            : config_ensemble(cfg);
  UniformGrid grid = config_grid(cfg);
  for (double t : cfg.soliton_times) {
    FieldState f;
    try {
      f = nsoliton_field(ens, grid, t);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " (soliton time " + format_time_tag(t) + ")");
    }
    write_field_csv(join_path(out_dir, "soliton_t" + format_time_tag(t) + ".csv"), f);
  }
}

namespace {

void write_trajectory(const Trajectory& traj, const std::string& out_dir) {
  std::string diag = "t,l2\n";
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto& s = traj.snapshots[k];
    write_field_csv(join_path(out_dir, "snapshot_t" + format_time_tag(s.t) + ".csv"), s);
    diag += format_double(s.t) + "," + format_double(traj.l2[k]) + "\n";
  }
  write_text(join_path(out_dir, "diagnostics.csv"), diag);
}

}  // namespace

void cmd_evolve(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  WaveSystem sys = config_system(cfg);
  FieldState f0 = initial_field(cfg);
  Trajectory traj;
  try {
    traj = evolve(f0, sys, config_evolution(cfg), &traj);
  } catch (const Error&) {
    write_trajectory(traj, out_dir);
    throw;
  }
  write_trajectory(traj, out_dir);
  auto rows = scattering_invariance_report(traj, sys, config_spectral_grid(cfg));
  std::string inv = "t,dev_r1,dev_r2,dev_r3,dev_r4,dev_S,dev_s12_phase\n";
  for (const auto& r : rows) {
    inv += format_double(r.t);
    for (double d : r.dev_r) inv += "," + format_double(d);
    inv += "," + format_double(r.dev_S) + "," + format_double(r.dev_s12_phase) + "\n";
  }
  write_text(join_path(out_dir, "invariance.csv"), inv);
}

void cmd_resolve(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  if (cfg.cones.empty()) fail(ErrorKind::ConfigError, "resolve needs at least one cone");
  WaveSystem sys = config_system(cfg);
  FieldState f0 = initial_field(cfg);
  Trajectory traj = evolve(f0, sys, config_evolution(cfg));

  SolitonEnsemble ref = config_ensemble(cfg);
  std::optional<ReflectionSamples> refl;
  if (cfg.resolve_reference == "scatter") {
    SpectralGrid zg = config_spectral_grid(cfg);
    ScatterResult sr = scatter(f0, sys, zg);
    ref = make_ensemble(sys, sr.data.poles);
    refl = ReflectionSamples{zg, sr.data.r1};
  }

  std::vector<double> times;
  for (const auto& s : traj.snapshots) times.push_back(s.t);
  json cones = json::array();
  for (std::size_t k = 0; k < cfg.cones.size(); ++k) {
    const ConeSpec& cone = cfg.cones[k];
    ConeFiltering filt = cone_filter(ref, cone);
    std::optional<double> xi;
    if (refl) xi = 0.5 * (cone.v1 + cone.v2);
    SolitonEnsemble reduced = cone_constants(ref, filt, refl, xi);
    ConeErrorSeries err = cone_error_series(traj, reduced, cone);
    ConeErrorSeries sep = separation_check(ref, reduced, cone, times, cfg.dx);
    write_text(join_path(out_dir, "cone_" + std::to_string(k) + ".csv"), series_csv(err));
    write_text(join_path(out_dir, "separation_" + std::to_string(k) + ".csv"), series_csv(sep));
    cones.push_back({{"index", k},
                     {"cone", {{"x1", cone.x1}, {"x2", cone.x2}, {"v1", cone.v1}, {"v2", cone.v2}}},
                     {"retained", filt.retained.size()},
                     {"mu_I", number_or_null(filt.mu_I)},
                     {"a", filt.a_const},
                     {"poles", poles_json(reduced.poles)},
                     {"cone_error", fit_json(fit_decay(err, DecayModel::Power, fit_options(cfg)))},
                     {"separation", fit_json(fit_decay(sep, DecayModel::Exponential, fit_options(cfg)))}});
  }
  write_json(join_path(out_dir, "rates.json"), json{{"cones", cones}});
}

bool cmd_check(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  WaveSystem sys = config_system(cfg);
  FieldState f0 = initial_field(cfg);
  json list = json::array();
  bool all = true;
  auto record = [&](const std::string& name, double value, double tol) {
    bool ok = value < tol;
    all = all && ok;
    list.push_back({{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", ok}});
  };

  ScatterResult sr = scatter(f0, sys, config_spectral_grid(cfg));
  record("detS_max_dev", sr.checks.detS_max_dev, 1e-8);
  record("symmetry_max_dev", sr.checks.symmetry_max_dev, 1e-6);
  record("closure_max_dev", sr.checks.closure_max_dev, 1e-6);
  double ct = 0.0;
  for (const auto& p : sr.data.poles) ct = std::max(ct, std::abs(p.c_tilde + std::conj(p.c)) / std::abs(p.c));
  record("conjugate_constant_max_dev", ct, 1e-4);

  SolitonEnsemble ens = config_ensemble(cfg);
  if (cfg.bumps.empty() && cfg.random.count == 0 && cfg.initial_kind == "analytic") {
    double count_dev = std::abs(static_cast<double>(sr.data.poles.size()) - static_cast<double>(ens.poles.size()));
    record("pole_count_dev", count_dev, 0.5);
    double z_err = 0.0, c_err = 0.0;
    for (const auto& p : ens.poles) {
      double best = 1e300;
      cplx c_best = 0.0;
      for (const auto& q : sr.data.poles)
        if (q.cls == p.cls && std::abs(q.z - p.z) < best) best = std::abs(q.z - p.z), c_best = q.c;
      z_err = std::max(z_err, best);
      c_err = std::max(c_err, std::abs(c_best - p.c) / std::abs(p.c));
    }
    record("pole_z_max_err", z_err, 1e-6);
    record("pole_c_max_rel_err", c_err, 1e-4);
  }

  double rh_res = 0.0, rh_sym = 0.0, skew = 0.0;
  const UniformGrid g = f0.grid;
  std::vector<cplx> probes{{0.3, 0.7}, {-1.1, 0.4}, {2.0, -0.9}, {-0.2, -1.7}, {0.0, 3.0}};
  for (int k = 0; k <= 10; ++k) {
    double x = g.x0 + (g.x_end() - g.x0) * k / 10.0;
    RHSolution sol = solve_reflectionless(ens, x, 0.0);
    rh_res = std::max(rh_res, sol.residual);
    rh_sym = std::max(rh_sym, rh_symmetry_defect(sol, probes));
    Mat3 P = reconstruct(sol, sys);
    skew = std::max(skew, (P + P.adjoint()).cwiseAbs().maxCoeff());
  }
  record("rh_residual_max", rh_res, 1e-8);
  record("rh_symmetry_max", rh_sym, 1e-6);
  record("skew_hermitian_max", skew, 1e-6);

  EvolutionConfig ev = config_evolution(cfg);
  ev.t_end = 100 * std::abs(cfg.dt);
  ev.snapshot_stride = 100;
  FieldState fwd = evolve(f0, sys, ev).snapshots.back();
  ev.t_end = -ev.t_end;
  FieldState back = evolve(fwd, sys, ev).snapshots.back();
  double rev = 0.0;
  for (std::size_t k = 0; k < g.count; ++k)
    rev = std::max({rev, std::abs(back.p12[k] - f0.p12[k]), std::abs(back.p13[k] - f0.p13[k]),
                    std::abs(back.p23[k] - f0.p23[k])});
  record("reversibility_max", rev, 1e-6);

  write_json(join_path(out_dir, "checks.json"), json{{"checks", list}, {"pass", all}});
  return all;
}

int run_command(const std::string& name, const RunConfig& cfg, const std::string& out_dir) {
  auto report = [&](const std::string& kind, const std::string& message, int code) {
    std::cerr << name << ": " << kind << ": " << message << "\n";
    try {
      ensure_dir(out_dir);
      write_json(join_path(out_dir, "error.json"),
                 json{{"command", name}, {"kind", kind}, {"message", message}, {"exit_code", code}});
    } catch (...) {
    }
    return code;
  };
  try {
    if (name == "scatter") {
      cmd_scatter(cfg, out_dir);
    } else if (name == "solitons") {
      cmd_solitons(cfg, out_dir);
    } else if (name == "evolve") {
      cmd_evolve(cfg, out_dir);
    } else if (name == "resolve") {
      cmd_resolve(cfg, out_dir);
    } else if (name == "check") {
      if (!cmd_check(cfg, out_dir)) return report("InvariantViolated", "see checks.json", kExitInvariant);
    } else {
      return report("ConfigError", "unknown command " + name, kExitConfig);
    }
  } catch (const Error& e) {
    return report(std::string(to_string(e.kind())), e.what(), exit_code_for(e.kind()));
  } catch (const std::exception& e) {
    return report("InvariantViolated", e.what(), kExitInvariant);
  }
  return kExitOk;
}

}  // namespace threewave
