#pragma once

#include <optional>
#include <vector>

#include "threewave/core.hpp"

namespace threewave {

// Minus: normalized to I at x -> -inf. Plus: normalized at x -> +inf.
enum class Side { Minus, Plus };

struct JostOptions {
  double tail_eps = 1e-10;
  double step_tol = 1e-6;
  double blowup = 1e8;
  // Local Richardson extrapolation of each step pair.
  bool extrapolate = true;
};

struct JostSolution {
  Side side = Side::Plus;
  cplx z;
  UniformGrid grid;
  std::vector<Mat3> mu;
  double max_local_error = 0.0;
};

struct ColumnTrace {
  Vec3 end;
  std::size_t end_node = 0;
  double end_x = 0.0;
  double max_local_error = 0.0;
  std::vector<Vec3> samples;
};

class JostIntegrator {
 public:
  JostIntegrator(const FieldState& field, const WaveSystem& sys, JostOptions opt = {});

  const WaveSystem& system() const { return sys_; }
  const FieldState& field() const { return field_; }
  bool zero_potential() const { return lo_ > hi_; }

  // Column j of mu_side integrated from its normalizing end. With record set the
  // whole grid is traversed and every node stored; otherwise only the support.
  ColumnTrace column(cplx z, Side side, int j, bool record = false) const;

  // Entry (r, j) of the limiting matrix reached by column j: S for Plus, S^-1 for Minus.
  cplx limit_entry(cplx z, Side side, int j, int r) const;
  Vec3 limit_column(cplx z, Side side, int j) const;

  Mat3 scattering_matrix(double z) const;

 private:
  FieldState field_;
  WaveSystem sys_;
  JostOptions opt_;
  std::ptrdiff_t lo_ = 0, hi_ = -1;
};

JostSolution integrate_jost(const FieldState& field, const WaveSystem& sys, cplx z, Side side,
                            const JostOptions& opt = {});

struct ScatteringMatrix {
  double z = 0.0;
  Mat3 S;
  Mat3 SA;
};

Mat3 cofactor(const Mat3& m);

ScatteringMatrix scattering_matrix(const FieldState& field, const WaveSystem& sys, double z,
                                   const JostOptions& opt = {});

std::vector<ScatteringMatrix> scattering_sweep(const FieldState& field, const WaveSystem& sys,
                                               const SpectralGrid& grid, const JostOptions& opt = {});

ScatteringData reflection_coefficients(const std::vector<ScatteringMatrix>& samples, const SpectralGrid& grid);

struct ScatteringChecks {
  double detS_max_dev = 0.0;
  double symmetry_max_dev = 0.0;
  double closure_max_dev = 0.0;
};

ScatteringChecks scattering_checks(const std::vector<ScatteringMatrix>& samples, const ScatteringData& data);

enum class Minor { s11, s33A };

cplx analytic_minor(const FieldState& field, const WaveSystem& sys, cplx z, Minor which,
                    const JostOptions& opt = {});
cplx analytic_minor(const JostIntegrator& jost, cplx z, Minor which);

struct SearchBox {
  double re_min = -10.0, re_max = 10.0;
  double im_min = 1e-3, im_max = 3.0;
};

struct SpectrumOptions {
  double band = 1e-3;
  std::size_t boundary_samples = 512;
  double min_diameter = 1e-3;
  int newton_iterations = 40;
  double newton_tol = 1e-12;
  std::size_t cauchy_nodes = 64;
  double cauchy_radius = 1e-2;
};

struct LocatedZero {
  cplx z;
  PoleClass cls = PoleClass::One;
};

SearchBox default_search_box(const FieldState& field, const WaveSystem& sys, double re_extent);

std::vector<LocatedZero> locate_discrete_spectrum(const FieldState& field, const WaveSystem& sys,
                                                  const SearchBox& box, const SpectrumOptions& opt = {},
                                                  const JostOptions& jopt = {});
std::vector<LocatedZero> locate_discrete_spectrum(const JostIntegrator& jost, const SearchBox& box,
                                                  const SpectrumOptions& opt = {});

struct NormingConstants {
  cplx c;
  cplx c_tilde;
};

// Derivative of an analytic function by the trapezoid rule on a circle.
template <class F>
cplx cauchy_derivative(F&& f, cplx z0, double radius, std::size_t nodes);

NormingConstants norming_constants(const JostIntegrator& jost, const LocatedZero& pole,
                                   const std::vector<LocatedZero>& all, const SpectrumOptions& opt = {});
NormingConstants norming_constants(const FieldState& field, const WaveSystem& sys, const LocatedZero& pole,
                                   const std::vector<LocatedZero>& all, const SpectrumOptions& opt = {},
                                   const JostOptions& jopt = {});

// Full pipeline: real-axis sweep, zero search and norming constants.
struct ScatterResult {
  ScatteringData data;
  ScatteringChecks checks;
  std::vector<ScatteringMatrix> samples;
};

ScatterResult scatter(const FieldState& field, const WaveSystem& sys, const SpectralGrid& grid,
                      const std::optional<SearchBox>& box = std::nullopt, const SpectrumOptions& sopt = {},
                      const JostOptions& jopt = {});

template <class F>
cplx cauchy_derivative(F&& f, cplx z0, double radius, std::size_t nodes) {
  const double pi = 3.14159265358979323846;
  cplx acc = 0.0;
  for (std::size_t k = 0; k < nodes; ++k) {
    double th = 2.0 * pi * static_cast<double>(k) / static_cast<double>(nodes);
    cplx e = std::polar(1.0, th);
    acc += f(z0 + radius * e) / e;
  }
  return acc / (static_cast<double>(nodes) * radius);
}

}  // namespace threewave
