#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "threewave/core.hpp"

namespace threewave {

struct SolitonEnsemble {
  WaveSystem sys;
  std::vector<DiscretePole> poles;
  std::string provenance = "raw";
};

// Validates distinct poles in the upper half plane and fills velocities.
SolitonEnsemble make_ensemble(const WaveSystem& sys, std::vector<DiscretePole> poles);

struct ConeSpec {
  double x1 = 0.0, x2 = 0.0;
  double v1 = 0.0, v2 = 0.0;
};

ConeSpec make_cone(double x1, double x2, double v1, double v2);

struct ConeFiltering {
  std::vector<std::size_t> retained;
  // Indexed by class - 1.
  std::vector<std::size_t> delta_plus[2];
  std::vector<std::size_t> delta_minus[2];
  double mu_I = std::numeric_limits<double>::infinity();
  double a_const = 0.0;
};

struct XiPartition {
  bool case_two = false;
  std::vector<std::size_t> delta;
};

XiPartition partition_xi(const SolitonEnsemble& ensemble, double xi);

// Reflection data restricted to what the dressing needs.
struct ReflectionSamples {
  SpectralGrid grid;
  std::vector<cplx> r1;
};

cplx t_function(const WaveSystem& sys, double xi, const ReflectionSamples& refl,
                const std::vector<DiscretePole>& delta, cplx z);

// Coefficient of i/z in the large-z expansion of T.
double t_function_t1(const WaveSystem& sys, double xi, const ReflectionSamples& refl,
                     const std::vector<DiscretePole>& delta);

// Integral of log(1+|r1|^2)/(s-z) over the r1 grid, exact for piecewise quadratic data.
cplx log_reflection_integral(const ReflectionSamples& refl, cplx z);

std::vector<DiscretePole> modified_constants(const WaveSystem& sys, const std::vector<DiscretePole>& poles,
                                             const ReflectionSamples& refl, double xi);

ConeFiltering cone_filter(const SolitonEnsemble& ensemble, const ConeSpec& cone);

SolitonEnsemble cone_constants(const SolitonEnsemble& ensemble, const ConeFiltering& filtering,
                               const std::optional<ReflectionSamples>& refl = std::nullopt,
                               std::optional<double> xi = std::nullopt);

struct RHSolution {
  // Residue term k sits at pole[k] in column target[k] with vector residue.col(k).
  std::vector<cplx> pole;
  std::vector<int> target;
  Eigen::Matrix3Xcd residue;
  Mat3 M1 = Mat3::Zero();
  double condition = 1.0;
  double residual = 0.0;

  Mat3 evaluate(cplx z) const;
};

RHSolution solve_reflectionless(const SolitonEnsemble& ensemble, double x, double t);

// Off-diagonal entries of the reconstructed potential; the diagonal is zero.
Mat3 reconstruct(const RHSolution& solution, const WaveSystem& sys);

FieldState nsoliton_field(const SolitonEnsemble& ensemble, const UniformGrid& grid, double t);

// Largest |M(z) - conj(M^A(conj z))| over the given probe points.
double rh_symmetry_defect(const RHSolution& solution, const std::vector<cplx>& probes);

}  // namespace threewave
