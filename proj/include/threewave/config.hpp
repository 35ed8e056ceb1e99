#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "threewave/core.hpp"
#include "threewave/evolution.hpp"
#include "threewave/soliton.hpp"

namespace threewave {

struct PoleSpec {
  int cls = 1;
  cplx z;
  cplx c;
  bool operator==(const PoleSpec&) const = default;
};

struct BumpSpec {
  Channel channel = Channel::p12;
  cplx amplitude;
  double center = 0.0;
  double width = 1.0;
  bool operator==(const BumpSpec&) const = default;
};

// Gaussian bumps drawn from the seed and rescaled to the requested sup norm.
struct RandomBumps {
  std::size_t count = 0;
  double sup = 0.0;
  double spread = 0.0;
  double width_min = 1.0;
  double width_max = 1.0;
  bool operator==(const RandomBumps&) const = default;
};

struct RunConfig {
  std::array<double, 3> a{1.0, 0.0, -1.0};
  std::array<double, 3> b{-0.5, 1.0, -0.5};

  double x_min = -20.0, x_max = 20.0, dx = 0.02;
  double z_max = 10.0;
  std::size_t z_count = 401;

  std::string initial_kind = "analytic";
  std::vector<PoleSpec> poles;
  std::vector<BumpSpec> bumps;
  RandomBumps random;
  std::string initial_file;

  double dt = 1e-3;
  double t_end = 0.0;
  std::size_t snapshot_stride = 1000;
  bool dealias = false;

  std::vector<double> soliton_times;
  std::string soliton_source = "config";

  std::vector<ConeSpec> cones;
  std::string resolve_reference = "config";
  double fit_t_min = 5.0;
  double fit_t_max = 1e300;
  double fit_floor = 1e-9;

  std::string output_dir = "out";
  std::uint64_t seed = 1;
};

bool operator==(const RunConfig& l, const RunConfig& r);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string write_config(const RunConfig& cfg);

std::string format_double(double v);
std::string format_time_tag(double t);

WaveSystem config_system(const RunConfig& cfg);
UniformGrid config_grid(const RunConfig& cfg);
SpectralGrid config_spectral_grid(const RunConfig& cfg);
EvolutionConfig config_evolution(const RunConfig& cfg);
SolitonEnsemble config_ensemble(const RunConfig& cfg);
FieldState initial_field(const RunConfig& cfg);

}  // namespace threewave
