#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace threewave {

using cplx = std::complex<double>;
using Mat3 = Eigen::Matrix3cd;
using Vec3 = Eigen::Vector3cd;

enum class ErrorKind {
  OrderingViolated,
  TraceNonzero,
  BadIndex,
  NonUniformGrid,
  InvalidArgument,
  ConfigError,
  TailTooFat,
  StepUnstable,
  UnitarityViolated,
  SpectralSingularity,
  ColumnBlowup,
  NonSimpleZero,
  CountMismatch,
  DerivativeVanishes,
  PoleTooClose,
  UnsupportedRegion,
  PoleHit,
  QuadratureNotConverged,
  PoleOnProductPole,
  SingularSystem,
  CFLViolated,
  BlowupDetected,
  WindowEscape,
  SliceEscapesWindow,
  InvariantViolated,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

// Short %g rendering for error messages.
std::string show(double v);

// Channels are stored in the upper triangle; lower entries follow from skew-Hermiticity.
enum class Channel { p12 = 0, p13 = 1, p23 = 2 };
constexpr std::array<std::array<int, 2>, 3> kChannelIndex{{{0, 1}, {0, 2}, {1, 2}}};

class WaveSystem {
 public:
  // Zero-based indices everywhere in code.
  double a(int i) const { return a_[i]; }
  double b(int i) const { return b_[i]; }
  const std::array<double, 3>& a() const { return a_; }
  const std::array<double, 3>& b() const { return b_; }
  double n(int i, int j) const { return n_[i][j]; }
  double max_speed() const;
  // Smallest gap between consecutive a's.
  double a_gap() const { return std::min(a_[0] - a_[1], a_[1] - a_[2]); }

  friend WaveSystem make_wave_system(const std::array<double, 3>& a, const std::array<double, 3>& b);

 private:
  WaveSystem() = default;
  std::array<double, 3> a_{};
  std::array<double, 3> b_{};
  std::array<std::array<double, 3>, 3> n_{};
};

WaveSystem make_wave_system(const std::array<double, 3>& a, const std::array<double, 3>& b);

double phase_theta(const WaveSystem& sys, int i, int j, double xi);

struct UniformGrid {
  double x0 = 0.0;
  double dx = 1.0;
  std::size_t count = 0;

  double x(std::size_t k) const { return x0 + dx * static_cast<double>(k); }
  double x_end() const { return x(count - 1); }
  double length() const { return dx * static_cast<double>(count); }

  static UniformGrid from_window(double x_min, double x_max, double dx);
  static UniformGrid from_samples(const std::vector<double>& xs);
};

struct FieldState {
  UniformGrid grid;
  double t = 0.0;
  std::vector<cplx> p12, p13, p23;

  FieldState() = default;
  FieldState(const UniformGrid& g, double time);

  std::vector<cplx>& channel(Channel c);
  const std::vector<cplx>& channel(Channel c) const;
  Mat3 P(std::size_t k) const;
  double sup_norm() const;
  void check() const;
};

Mat3 potential_matrix(cplx p12, cplx p13, cplx p23);

struct SpectralGrid {
  double z_min = 0.0;
  double dz = 1.0;
  std::size_t count = 0;

  double z(std::size_t k) const;
  static SpectralGrid symmetric(double z_max, std::size_t count);
};

enum class PoleClass { One = 1, Two = 2 };

struct DiscretePole {
  cplx z;
  cplx c;
  cplx c_tilde;
  PoleClass cls = PoleClass::One;
  double velocity = 0.0;
};

double pole_velocity(const WaveSystem& sys, PoleClass cls);
// Conjugate-side constant fixed by the symmetry of the Riemann-Hilbert problem.
cplx conjugate_constant(cplx c);
DiscretePole make_pole(const WaveSystem& sys, cplx z, cplx c, PoleClass cls);

struct ScatteringData {
  SpectralGrid grid;
  std::vector<cplx> r1, r2, r3, r4;
  std::vector<DiscretePole> poles;

  double closure_residual() const;
};

}  // namespace threewave
