#include "threewave/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace threewave {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OrderingViolated: return "OrderingViolated";
    case ErrorKind::TraceNonzero: return "TraceNonzero";
    case ErrorKind::BadIndex: return "BadIndex";
    case ErrorKind::NonUniformGrid: return "NonUniformGrid";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::TailTooFat: return "TailTooFat";
    case ErrorKind::StepUnstable: return "StepUnstable";
    case ErrorKind::UnitarityViolated: return "UnitarityViolated";
    case ErrorKind::SpectralSingularity: return "SpectralSingularity";
    case ErrorKind::ColumnBlowup: return "ColumnBlowup";
    case ErrorKind::NonSimpleZero: return "NonSimpleZero";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::DerivativeVanishes: return "DerivativeVanishes";
    case ErrorKind::PoleTooClose: return "PoleTooClose";
    case ErrorKind::UnsupportedRegion: return "UnsupportedRegion";
    case ErrorKind::PoleHit: return "PoleHit";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::PoleOnProductPole: return "PoleOnProductPole";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::CFLViolated: return "CFLViolated";
    case ErrorKind::BlowupDetected: return "BlowupDetected";
    case ErrorKind::WindowEscape: return "WindowEscape";
    case ErrorKind::SliceEscapesWindow: return "SliceEscapesWindow";
    case ErrorKind::InvariantViolated: return "InvariantViolated";
  }
  return "Unknown";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

std::string show(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

WaveSystem make_wave_system(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  if (!(a[0] > a[1] && a[1] > a[2])) fail(ErrorKind::OrderingViolated, "a must be strictly decreasing");
  if (std::abs(a[0] + a[1] + a[2]) > 1e-12 || std::abs(b[0] + b[1] + b[2]) > 1e-12)
    fail(ErrorKind::TraceNonzero, "A and B must be trace-free");
  WaveSystem sys;
  sys.a_ = a;
  sys.b_ = b;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      sys.n_[i][j] = i == j ? 0.0 : (b[i] - b[j]) / (a[i] - a[j]);
  if (!(sys.n_[1][2] > sys.n_[0][2] && sys.n_[0][2] > sys.n_[0][1]))
    fail(ErrorKind::OrderingViolated, "speeds must satisfy n23 > n13 > n12");
  return sys;
}

double WaveSystem::max_speed() const {
  return std::max({std::abs(n_[0][1]), std::abs(n_[0][2]), std::abs(n_[1][2])});
}

double phase_theta(const WaveSystem& sys, int i, int j, double xi) {
  if (i < 0 || i > 2 || j < 0 || j > 2 || i == j) fail(ErrorKind::BadIndex, "phase_theta needs i != j in {0,1,2}");
  return (sys.a(i) - sys.a(j)) * xi + (sys.b(i) - sys.b(j));
}

UniformGrid UniformGrid::from_window(double x_min, double x_max, double dx) {
  if (!(dx > 0.0) || !(x_max > x_min)) fail(ErrorKind::InvalidArgument, "grid window must satisfy x_min < x_max, dx > 0");
  auto n = static_cast<std::size_t>(std::llround((x_max - x_min) / dx));
  if (std::abs(x_min + dx * static_cast<double>(n) - x_max) > 1e-9 * std::max(1.0, std::abs(x_max)))
    fail(ErrorKind::NonUniformGrid, "window length is not a multiple of dx");
  // Periodic layout: the right endpoint is identified with the left one.
  return UniformGrid{x_min, dx, n};
}

UniformGrid UniformGrid::from_samples(const std::vector<double>& xs) {
  if (xs.size() < 2) fail(ErrorKind::NonUniformGrid, "need at least two samples");
  double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (std::abs(xs[k] - xs[k - 1] - dx) > 1e-9 * std::max(1.0, std::abs(dx)))
      fail(ErrorKind::NonUniformGrid, "samples are not uniformly spaced");
  return UniformGrid{xs.front(), dx, xs.size()};
}

FieldState::FieldState(const UniformGrid& g, double time)
    : grid(g), t(time), p12(g.count), p13(g.count), p23(g.count) {}

std::vector<cplx>& FieldState::channel(Channel c) {
  switch (c) {
    case Channel::p12: return p12;
    case Channel::p13: return p13;
    default: return p23;
  }
}

const std::vector<cplx>& FieldState::channel(Channel c) const {
  return const_cast<FieldState*>(this)->channel(c);
}

Mat3 potential_matrix(cplx p12, cplx p13, cplx p23) {
  Mat3 P = Mat3::Zero();
  P(0, 1) = p12;
  P(0, 2) = p13;
  P(1, 2) = p23;
  P(1, 0) = -std::conj(p12);
  P(2, 0) = -std::conj(p13);
  P(2, 1) = -std::conj(p23);
  return P;
}

Mat3 FieldState::P(std::size_t k) const { return potential_matrix(p12[k], p13[k], p23[k]); }

double FieldState::sup_norm() const {
  double m = 0.0;
  for (std::size_t k = 0; k < grid.count; ++k)
    m = std::max({m, std::abs(p12[k]), std::abs(p13[k]), std::abs(p23[k])});
  return m;
}

void FieldState::check() const {
  if (p12.size() != grid.count || p13.size() != grid.count || p23.size() != grid.count)
    fail(ErrorKind::InvalidArgument, "field arrays do not match the grid length");
}

double SpectralGrid::z(std::size_t k) const {
  // Mirror the upper half so the grid is exactly symmetric about zero.
  if (2 * k + 1 > count) return -z(count - 1 - k);
  return z_min + dz * static_cast<double>(k);
}

SpectralGrid SpectralGrid::symmetric(double z_max, std::size_t count) {
  if (count < 2 || !(z_max > 0.0)) fail(ErrorKind::InvalidArgument, "spectral grid needs z_max > 0 and count >= 2");
  return SpectralGrid{-z_max, 2.0 * z_max / static_cast<double>(count - 1), count};
}

double pole_velocity(const WaveSystem& sys, PoleClass cls) {
  return cls == PoleClass::One ? -sys.n(0, 1) : -sys.n(1, 2);
}

cplx conjugate_constant(cplx c) { return -std::conj(c); }

DiscretePole make_pole(const WaveSystem& sys, cplx z, cplx c, PoleClass cls) {
  if (!(z.imag() > 0.0)) fail(ErrorKind::InvalidArgument, "poles must lie in the upper half plane");
  if (c == cplx(0.0)) fail(ErrorKind::InvalidArgument, "norming constant must be nonzero");
  return DiscretePole{z, c, conjugate_constant(c), cls, pole_velocity(sys, cls)};
}

double ScatteringData::closure_residual() const {
  double m = 0.0;
  for (std::size_t k = 0; k < r1.size(); ++k)
    m = std::max(m, std::abs(r4[k] + r1[k] * std::conj(r3[k]) + std::conj(r2[k])));
  return m;
}

}  // namespace threewave
