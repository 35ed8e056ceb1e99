#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "threewave/parallel.hpp"
#include "threewave/scattering.hpp"

namespace threewave {

namespace {

constexpr double kSupportEps = 1e-14;
// Largest phase advance |z| (a1 - a3) h allowed in one Lawson step.
constexpr double kMaxPhaseStep = 0.1;
constexpr int kStencil = 8;

// Lagrange weights on nodes -3..4 for the point theta of a cell.
std::array<double, kStencil> lagrange_weights(double theta) {
  std::array<double, kStencil> w{};
  for (int j = 0; j < kStencil; ++j) {
    double num = 1.0, den = 1.0;
    for (int k = 0; k < kStencil; ++k) {
      if (k == j) continue;
      num *= theta - (k - 3);
      den *= static_cast<double>(j - k);
    }
    w[j] = num / den;
  }
  return w;
}

double vec_norm(const Vec3& u) { return u.cwiseAbs().maxCoeff(); }

}  // namespace

JostIntegrator::JostIntegrator(const FieldState& field, const WaveSystem& sys, JostOptions opt)
    : field_(field), sys_(sys), opt_(opt) {
  field_.check();
  const std::size_t n = field_.grid.count;
  if (n < kStencil) fail(ErrorKind::InvalidArgument, "grid too short for scattering");
  auto mag = [&](std::size_t k) {
    return std::max({std::abs(field_.p12[k]), std::abs(field_.p13[k]), std::abs(field_.p23[k])});
  };
  if (mag(0) > opt_.tail_eps || mag(n - 1) > opt_.tail_eps)
    fail(ErrorKind::TailTooFat, "field does not decay below " + show(opt_.tail_eps) + " at the grid ends");
  lo_ = 0;
  while (lo_ < static_cast<std::ptrdiff_t>(n) && mag(lo_) <= kSupportEps) ++lo_;
  hi_ = static_cast<std::ptrdiff_t>(n) - 1;
  while (hi_ >= 0 && mag(hi_) <= kSupportEps) --hi_;
}

ColumnTrace JostIntegrator::column(cplx z, Side side, int j, bool record) const {
  if (j < 0 || j > 2) fail(ErrorKind::BadIndex, "column index out of range");
  const auto n = static_cast<std::ptrdiff_t>(field_.grid.count);
  const double dx = field_.grid.dx;
  const int dir = side == Side::Plus ? -1 : 1;

  std::ptrdiff_t start, stop;
  if (record || zero_potential()) {
    start = side == Side::Plus ? n - 1 : 0;
    stop = side == Side::Plus ? 0 : n - 1;
  } else {
    std::ptrdiff_t a = std::max<std::ptrdiff_t>(lo_ - 1, 0);
    std::ptrdiff_t b = std::min<std::ptrdiff_t>(hi_ + 1, n - 1);
    start = side == Side::Plus ? b : a;
    stop = side == Side::Plus ? a : b;
  }

  // Substeps per cell so that the phase advance per step stays small.
  const double omega = std::abs(z) * (sys_.a(0) - sys_.a(2));
  const int m = std::max(1, static_cast<int>(std::ceil(omega * dx / kMaxPhaseStep - 1e-12)));
  const int per_cell = 2 * m;
  std::vector<std::array<double, kStencil>> weights(per_cell);
  for (int k = 1; k < per_cell; ++k) weights[k] = lagrange_weights(static_cast<double>(k) / per_cell);

  // Potential at quarter-resolution point g, measured in units of dx / (2m) from x0.
  auto sample = [&](std::ptrdiff_t g) {
    std::ptrdiff_t cell = g / per_cell;
    int k = static_cast<int>(g % per_cell);
    if (k == 0) return std::array<cplx, 3>{field_.p12[cell], field_.p13[cell], field_.p23[cell]};
    std::ptrdiff_t base = std::clamp<std::ptrdiff_t>(cell - 3, 0, n - kStencil);
    // Off-centre stencils near the ends use shifted nodes.
    std::array<double, kStencil> w = base == cell - 3 ? weights[k] : lagrange_weights(static_cast<double>(cell - base) - 3.0 + static_cast<double>(k) / per_cell);
    std::array<cplx, 3> v{0.0, 0.0, 0.0};
    for (int q = 0; q < kStencil; ++q) {
      v[0] += w[q] * field_.p12[base + q];
      v[1] += w[q] * field_.p13[base + q];
      v[2] += w[q] * field_.p23[base + q];
    }
    return v;
  };

  ColumnTrace tr;
  Vec3 u = Vec3::Zero();
  u(j) = 1.0;
  if (record) tr.samples.assign(field_.grid.count, Vec3::Zero());

  const double h = dir * dx / m;
  Vec3 d;
  for (int k = 0; k < 3; ++k) d(k) = cplx(0.0, 1.0) * z * (sys_.a(k) - sys_.a(j));
  Vec3 eh, ef, ef2;
  for (int k = 0; k < 3; ++k) {
    eh(k) = std::exp(d(k) * (0.5 * h));
    ef(k) = std::exp(d(k) * h);
    ef2(k) = std::exp(d(k) * (2.0 * h));
  }

  auto apply = [](const std::array<cplx, 3>& p, const Vec3& v) {
    return Vec3(p[0] * v(1) + p[1] * v(2), -std::conj(p[0]) * v(0) + p[2] * v(2),
                -std::conj(p[1]) * v(0) - std::conj(p[2]) * v(1));
  };
  // One Lawson-RK4 step with potential samples at the start, middle and end.
  auto lawson = [&](const Vec3& u0, const Vec3& e_half, const Vec3& e_full, double step, const std::array<cplx, 3>& p0,
                    const std::array<cplx, 3>& pm, const std::array<cplx, 3>& p1) {
    Vec3 k1 = apply(p0, u0);
    Vec3 k2 = apply(pm, e_half.cwiseProduct(u0 + 0.5 * step * k1));
    Vec3 k3 = apply(pm, e_half.cwiseProduct(u0) + 0.5 * step * k2);
    Vec3 k4 = apply(p1, e_full.cwiseProduct(u0) + step * e_half.cwiseProduct(k3));
    return Vec3(e_full.cwiseProduct(u0) +
                (step / 6.0) * (e_full.cwiseProduct(k1) + 2.0 * e_half.cwiseProduct(k2 + k3) + k4));
  };

  const std::ptrdiff_t steps = (stop - start) * dir * m;
  const std::ptrdiff_t g0 = start * per_cell;
  auto at = [&](std::ptrdiff_t s2) { return sample(g0 + dir * s2); };  // s2 counts half substeps

  if (record) tr.samples[start] = u;
  std::ptrdiff_t done = 0;
  std::array<cplx, 3> q0 = at(0);
  while (done < steps) {
    if (steps - done >= 2) {
      auto q1 = at(2 * done + 1), q2 = at(2 * done + 2), q3 = at(2 * done + 3), q4 = at(2 * done + 4);
      Vec3 u1 = lawson(u, eh, ef, h, q0, q1, q2);
      if (record && (done + 1) % m == 0) tr.samples[start + dir * ((done + 1) / m)] = u1;
      Vec3 u2 = lawson(u1, eh, ef, h, q2, q3, q4);
      Vec3 uc = lawson(u, ef, ef2, 2.0 * h, q0, q2, q4);
      Vec3 diff = (u2 - uc) / 15.0;
      double err = vec_norm(diff) / std::max(1.0, vec_norm(u2));
      tr.max_local_error = std::max(tr.max_local_error, err);
      if (err > opt_.step_tol)
        fail(ErrorKind::StepUnstable, "local error " + show(err) + " near x = " +
                                          show(field_.grid.x(start) + dir * done * std::abs(h)) +
                                          " for z = (" + show(z.real()) + "," + show(z.imag()) +
                                          ")");
      u = opt_.extrapolate ? Vec3(u2 + diff) : u2;
      q0 = q4;
      done += 2;
    } else {
      auto q1 = at(2 * done + 1), q2 = at(2 * done + 2);
      u = lawson(u, eh, ef, h, q0, q1, q2);
      q0 = q2;
      done += 1;
    }
    if (record && done % m == 0) tr.samples[start + dir * (done / m)] = u;
    if (!(vec_norm(u) < opt_.blowup))
      fail(ErrorKind::ColumnBlowup, "column norm exceeded bound near x = " +
                                        show(field_.grid.x(start) + dir * done * std::abs(h)));
  }
  tr.end = u;
  tr.end_node = static_cast<std::size_t>(stop);
  tr.end_x = field_.grid.x(tr.end_node);
  return tr;
}

Vec3 JostIntegrator::limit_column(cplx z, Side side, int j) const {
  ColumnTrace tr = column(z, side, j);
  Vec3 out;
  for (int r = 0; r < 3; ++r)
    out(r) = tr.end(r) * std::exp(-cplx(0.0, 1.0) * z * (sys_.a(r) - sys_.a(j)) * tr.end_x);
  return out;
}

cplx JostIntegrator::limit_entry(cplx z, Side side, int j, int r) const { return limit_column(z, side, j)(r); }

Mat3 JostIntegrator::scattering_matrix(double z) const {
  Mat3 S;
  for (int j = 0; j < 3; ++j) S.col(j) = limit_column(z, Side::Plus, j);
  return S;
}

JostSolution integrate_jost(const FieldState& field, const WaveSystem& sys, cplx z, Side side,
                            const JostOptions& opt) {
  if (z.imag() != 0.0)
    fail(ErrorKind::InvalidArgument, "full-matrix Jost integration is only stable for real z; use analytic columns");
  JostIntegrator jost(field, sys, opt);
  JostSolution sol;
  sol.side = side;
  sol.z = z;
  sol.grid = field.grid;
  sol.mu.assign(field.grid.count, Mat3::Zero());
  for (int j = 0; j < 3; ++j) {
    ColumnTrace tr = jost.column(z, side, j, true);
    sol.max_local_error = std::max(sol.max_local_error, tr.max_local_error);
    for (std::size_t k = 0; k < field.grid.count; ++k) sol.mu[k].col(j) = tr.samples[k];
  }
  return sol;
}

Mat3 cofactor(const Mat3& m) {
  Mat3 c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      int r0 = (i + 1) % 3, r1 = (i + 2) % 3, c0 = (j + 1) % 3, c1 = (j + 2) % 3;
      // Cyclic ordering absorbs the checkerboard sign.
      c(i, j) = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
    }
  return c;
}

namespace {

ScatteringMatrix checked_matrix(const JostIntegrator& jost, double z) {
  ScatteringMatrix sm;
  sm.z = z;
  sm.S = jost.scattering_matrix(z);
  sm.SA = cofactor(sm.S);
  double dev = std::abs(sm.S.determinant() - 1.0);
  if (dev > 1e-6)
    fail(ErrorKind::UnitarityViolated, "|det S - 1| = " + show(dev) + " at z = " + show(z));
  return sm;
}

}  // namespace

ScatteringMatrix scattering_matrix(const FieldState& field, const WaveSystem& sys, double z, const JostOptions& opt) {
  JostIntegrator jost(field, sys, opt);
  return checked_matrix(jost, z);
}

std::vector<ScatteringMatrix> scattering_sweep(const FieldState& field, const WaveSystem& sys,
                                               const SpectralGrid& grid, const JostOptions& opt) {
  JostIntegrator jost(field, sys, opt);
  std::vector<ScatteringMatrix> out(grid.count);
  parallel_for(grid.count, [&](std::size_t k) { out[k] = checked_matrix(jost, grid.z(k)); });
  return out;
}

ScatteringData reflection_coefficients(const std::vector<ScatteringMatrix>& samples, const SpectralGrid& grid) {
  ScatteringData data;
  data.grid = grid;
  const std::size_t n = samples.size();
  data.r1.resize(n);
  data.r2.resize(n);
  data.r3.resize(n);
  data.r4.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Mat3& S = samples[k].S;
    if (std::abs(S(0, 0)) < 1e-8 || std::abs(S(2, 2)) < 1e-8)
      fail(ErrorKind::SpectralSingularity, "s11 or s33 vanishes at z = " + show(samples[k].z));
    data.r1[k] = S(0, 1) / S(0, 0);
    data.r2[k] = S(2, 0) / S(2, 2);
    data.r3[k] = S(2, 1) / S(2, 2);
    data.r4[k] = S(0, 2) / S(0, 0);
  }
  return data;
}

ScatteringChecks scattering_checks(const std::vector<ScatteringMatrix>& samples, const ScatteringData& data) {
  ScatteringChecks c;
  for (const auto& s : samples) {
    c.detS_max_dev = std::max(c.detS_max_dev, std::abs(s.S.determinant() - 1.0));
    c.symmetry_max_dev = std::max(c.symmetry_max_dev, (s.S - s.SA.conjugate()).cwiseAbs().maxCoeff());
  }
  c.closure_max_dev = data.closure_residual();
  return c;
}

cplx analytic_minor(const JostIntegrator& jost, cplx z, Minor which) {
  if (which == Minor::s11) return jost.limit_entry(z, Side::Plus, 0, 0);
  return jost.limit_entry(z, Side::Minus, 2, 2);
}

cplx analytic_minor(const FieldState& field, const WaveSystem& sys, cplx z, Minor which, const JostOptions& opt) {
  if (z.imag() < 0.0) fail(ErrorKind::InvalidArgument, "analytic minors live in the upper half plane");
  JostIntegrator jost(field, sys, opt);
  return analytic_minor(jost, z, which);
}

}  // namespace threewave
