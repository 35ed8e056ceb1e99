#include "threewave/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "threewave/parallel.hpp"
#include "threewave/scattering.hpp"

namespace threewave {

namespace {

const cplx I1(0.0, 1.0);

int class_index(PoleClass c) { return c == PoleClass::One ? 0 : 1; }

// Phase multiplying z in the exponent of the residue coefficient.
double residue_phase(const WaveSystem& sys, PoleClass cls, double x, double t) {
  int i = cls == PoleClass::One ? 0 : 1;
  return (sys.a(i) - sys.a(i + 1)) * x + (sys.b(i) - sys.b(i + 1)) * t;
}

// Scalar Blaschke factor (z - w)/(z - conj w).
cplx blaschke(cplx z, cplx w) { return (z - w) / (z - std::conj(w)); }

// Product integration of f(s)/(s-z): f is interpolated by quadratics on pairs of
// cells and integrated exactly against the kernel; a leftover cell is linear.
cplx product_integral(const SpectralGrid& g, const std::vector<double>& f, cplx z, std::size_t stride) {
  cplx acc = 0.0;
  const std::size_t n = g.count;
  std::size_t k = 0;
  while (k + 2 * stride < n) {
    std::size_t k1 = k + stride, k2 = k + 2 * stride;
    double s0 = g.z(k), s1 = g.z(k1), s2 = g.z(k2);
    double h = 0.5 * (s2 - s0);
    double a1 = (f[k2] - f[k]) / (2.0 * h);
    double a2 = (f[k2] - 2.0 * f[k1] + f[k]) / (2.0 * h * h);
    cplx d = z - s1;
    cplx A = f[k1] + a1 * d + a2 * d * d;
    cplx B = a1 + 2.0 * a2 * d;
    cplx u0 = s0 - z, u2 = s2 - z;
    acc += A * std::log(u2 / u0) + B * (s2 - s0) + 0.5 * a2 * (u2 * u2 - u0 * u0);
    k = k2;
  }
  if (k + stride < n) {
    std::size_t k1 = k + stride;
    double s0 = g.z(k), s1 = g.z(k1);
    double m = (f[k1] - f[k]) / (s1 - s0);
    cplx alpha = f[k] + m * (z - s0);
    acc += alpha * std::log((s1 - z) / (s0 - z)) + m * (s1 - s0);
  }
  return acc;
}

std::vector<double> log_weights(const ReflectionSamples& refl) {
  std::vector<double> f(refl.r1.size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::log1p(std::norm(refl.r1[k]));
  return f;
}

}  // namespace

SolitonEnsemble make_ensemble(const WaveSystem& sys, std::vector<DiscretePole> poles) {
  for (auto& p : poles) {
    if (!(p.z.imag() > 0.0)) fail(ErrorKind::InvalidArgument, "ensemble poles must have Im z > 0");
    if (p.c == cplx(0.0)) fail(ErrorKind::InvalidArgument, "norming constants must be nonzero");
    p.velocity = pole_velocity(sys, p.cls);
  }
  for (std::size_t i = 0; i < poles.size(); ++i)
    for (std::size_t j = i + 1; j < poles.size(); ++j)
      if (std::abs(poles[i].z - poles[j].z) == 0.0) fail(ErrorKind::InvalidArgument, "duplicate pole in ensemble");
  return SolitonEnsemble{sys, std::move(poles), "raw"};
}

ConeSpec make_cone(double x1, double x2, double v1, double v2) {
  if (!(x1 <= x2) || !(v1 <= v2)) fail(ErrorKind::InvalidArgument, "cone needs x1 <= x2 and v1 <= v2");
  return ConeSpec{x1, x2, v1, v2};
}

XiPartition partition_xi(const SolitonEnsemble& ensemble, double xi) {
  const WaveSystem& sys = ensemble.sys;
  if (xi <= -sys.n(0, 2)) fail(ErrorKind::UnsupportedRegion, "xi <= -n13 is outside the supported regions");
  XiPartition part;
  // The boundary ray xi = -n12 belongs to the second case.
  part.case_two = xi <= -sys.n(0, 1);
  if (part.case_two)
    for (std::size_t k = 0; k < ensemble.poles.size(); ++k)
      if (ensemble.poles[k].cls == PoleClass::One) part.delta.push_back(k);
  return part;
}

cplx log_reflection_integral(const ReflectionSamples& refl, cplx z) {
  return product_integral(refl.grid, log_weights(refl), z, 1);
}

cplx t_function(const WaveSystem& sys, double xi, const ReflectionSamples& refl,
                const std::vector<DiscretePole>& delta, cplx z) {
  if (xi > -sys.n(0, 1)) return 1.0;
  if (xi <= -sys.n(0, 2)) fail(ErrorKind::UnsupportedRegion, "xi <= -n13 is outside the supported regions");
  if (z.imag() == 0.0) fail(ErrorKind::InvalidArgument, "T is evaluated off the real axis");
  cplx T = 1.0;
  for (const auto& p : delta) {
    if (std::abs(z - std::conj(p.z)) < 1e-8) fail(ErrorKind::PoleHit, "z hits a conjugate pole of T");
    T *= blaschke(z, p.z);
  }
  // nu = -log(1+|r1|^2)/(2 pi)
  cplx integral = -log_reflection_integral(refl, z) / (2.0 * std::numbers::pi);
  return T * std::exp(I1 * integral);
}

double t_function_t1(const WaveSystem& sys, double xi, const ReflectionSamples& refl,
                     const std::vector<DiscretePole>& delta) {
  if (xi > -sys.n(0, 1)) return 0.0;
  double im_sum = 0.0;
  for (const auto& p : delta) im_sum += p.z.imag();
  std::vector<double> f = log_weights(refl);
  double nu_int = 0.0;
  for (std::size_t k = 0; k + 1 < f.size(); ++k) nu_int += 0.5 * (f[k] + f[k + 1]) * (refl.grid.z(k + 1) - refl.grid.z(k));
  nu_int *= -1.0 / (2.0 * std::numbers::pi);
  return -2.0 * im_sum - nu_int;
}

std::vector<DiscretePole> modified_constants(const WaveSystem& sys, const std::vector<DiscretePole>& poles,
                                             const ReflectionSamples& refl, double xi) {
  if (xi <= -sys.n(0, 2)) fail(ErrorKind::UnsupportedRegion, "xi <= -n13 is outside the supported regions");
  std::vector<DiscretePole> out = poles;
  if (xi > -sys.n(0, 1)) return out;
  std::vector<double> f = log_weights(refl);
  const bool can_halve = refl.grid.count >= 5 && (refl.grid.count - 1) % 4 == 0;
  for (auto& p : out) {
    cplx full = product_integral(refl.grid, f, p.z, 1);
    if (can_halve) {
      cplx half = product_integral(refl.grid, f, p.z, 2);
      if (std::abs(full - half) / std::numbers::pi > 1e-8)
        fail(ErrorKind::QuadratureNotConverged, "dressing integral moved by " +
                                                    show(std::abs(full - half) / std::numbers::pi) +
                                                    " under grid halving");
    }
    p.c *= std::exp(I1 * full / std::numbers::pi);
    p.c_tilde = conjugate_constant(p.c);
  }
  return out;
}

ConeFiltering cone_filter(const SolitonEnsemble& ensemble, const ConeSpec& cone) {
  ConeFiltering f;
  f.a_const = ensemble.sys.a_gap();
  for (std::size_t k = 0; k < ensemble.poles.size(); ++k) {
    const auto& p = ensemble.poles[k];
    const int c = class_index(p.cls);
    if (p.velocity > cone.v1 && p.velocity < cone.v2) {
      f.retained.push_back(k);
      continue;
    }
    if (p.velocity <= cone.v1)
      f.delta_plus[c].push_back(k);
    else
      f.delta_minus[c].push_back(k);
    double gap = std::min(std::abs(cone.v1 - p.velocity), std::abs(cone.v2 - p.velocity));
    f.mu_I = std::min(f.mu_I, p.z.imag() * gap);
  }
  return f;
}

SolitonEnsemble cone_constants(const SolitonEnsemble& ensemble, const ConeFiltering& filtering,
                               const std::optional<ReflectionSamples>& refl, std::optional<double> xi) {
  std::vector<DiscretePole> kept;
  for (std::size_t k : filtering.retained) {
    DiscretePole p = ensemble.poles[k];
    // B1, B2: products of Blaschke factors over the discarded poles ahead of the cone.
    cplx B[2] = {1.0, 1.0};
    for (int c = 0; c < 2; ++c)
      for (std::size_t m : filtering.delta_minus[c]) {
        cplx w = ensemble.poles[m].z;
        if (std::abs(p.z - w) < 1e-12 || std::abs(p.z - std::conj(w)) < 1e-12)
          fail(ErrorKind::PoleOnProductPole, "retained pole coincides with a product pole");
        B[c] *= blaschke(p.z, w);
      }
    // Right-multiplying M by diag(1/B1, B1 B2, 1/B2) rescales the (1,2) and (2,3) residues.
    if (p.cls == PoleClass::One)
      p.c *= B[0] * B[0] * B[1];
    else
      p.c /= B[0] * B[1] * B[1];
    p.c_tilde = conjugate_constant(p.c);
    kept.push_back(p);
  }
  if (refl && xi) kept = modified_constants(ensemble.sys, kept, *refl, *xi);
  SolitonEnsemble out = make_ensemble(ensemble.sys, kept);
  out.provenance = "cone-modified";
  return out;
}

Mat3 RHSolution::evaluate(cplx z) const {
  Mat3 M = Mat3::Identity();
  for (std::size_t k = 0; k < pole.size(); ++k) M.col(target[k]) += residue.col(k) / (z - pole[k]);
  return M;
}

RHSolution solve_reflectionless(const SolitonEnsemble& ensemble, double x, double t) {
  RHSolution sol;
  const std::size_t N = ensemble.poles.size();
  sol.residue.resize(3, 2 * N);
  if (N == 0) return sol;

  // Two residue terms per pole: at z_n (index 2n) and at conj(z_n) (index 2n+1).
  std::vector<int> source(2 * N);
  std::vector<cplx> log_gamma(2 * N);
  sol.pole.resize(2 * N);
  sol.target.resize(2 * N);
  for (std::size_t n = 0; n < N; ++n) {
    const auto& p = ensemble.poles[n];
    const double phi = residue_phase(ensemble.sys, p.cls, x, t);
    const int lo = p.cls == PoleClass::One ? 0 : 1;
    sol.pole[2 * n] = p.z;
    sol.target[2 * n] = lo + 1;
    source[2 * n] = lo;
    log_gamma[2 * n] = std::log(p.c) + I1 * p.z * phi;
    sol.pole[2 * n + 1] = std::conj(p.z);
    sol.target[2 * n + 1] = lo;
    source[2 * n + 1] = lo + 1;
    log_gamma[2 * n + 1] = std::log(p.c_tilde) - I1 * std::conj(p.z) * phi;
  }

  // Row k: v_k - g_k sum_{l: target_l = source_k} v_l/(w_k - w_l) = g_k e_{source_k},
  // divided through by g_k whenever |g_k| > 1.
  const std::size_t m = 2 * N;
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(m, m);
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(m, 3);
  for (std::size_t k = 0; k < m; ++k) {
    const bool flip = log_gamma[k].real() > 0.0;
    const cplx g = flip ? std::exp(-log_gamma[k]) : std::exp(log_gamma[k]);
    K(k, k) = flip ? g : 1.0;
    for (std::size_t l = 0; l < m; ++l) {
      if (sol.target[l] != source[k]) continue;
      cplx w = 1.0 / (sol.pole[k] - sol.pole[l]);
      K(k, l) -= flip ? w : g * w;
    }
    G(k, source[k]) = flip ? 1.0 : g;
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(K);
  const auto& sv = svd.singularValues();
  sol.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(sol.condition <= 1e12))
    fail(ErrorKind::SingularSystem, "collocation matrix condition " + show(sol.condition));

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(K);
  Eigen::MatrixXcd V = lu.solve(G);
  const double scale = K.cwiseAbs().maxCoeff() * std::max(1.0, V.cwiseAbs().maxCoeff()) + G.cwiseAbs().maxCoeff();
  sol.residual = (K * V - G).cwiseAbs().maxCoeff() / scale;
  if (!(sol.residual < 1e-8))
    fail(ErrorKind::SingularSystem, "residue conditions violated after solve: " + show(sol.residual));

  for (std::size_t k = 0; k < m; ++k) {
    sol.residue.col(k) = V.row(k).transpose();
    sol.M1.col(sol.target[k]) += sol.residue.col(k);
  }
  return sol;
}

Mat3 reconstruct(const RHSolution& solution, const WaveSystem& sys) {
  Mat3 P = Mat3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) P(i, j) = -I1 * (sys.a(i) - sys.a(j)) * solution.M1(i, j);
  return P;
}

FieldState nsoliton_field(const SolitonEnsemble& ensemble, const UniformGrid& grid, double t) {
  FieldState f(grid, t);
  parallel_for(grid.count, [&](std::size_t k) {
    const double x = grid.x(k);
    try {
      Mat3 P = reconstruct(solve_reflectionless(ensemble, x, t), ensemble.sys);
      f.p12[k] = P(0, 1);
      f.p13[k] = P(0, 2);
      f.p23[k] = P(1, 2);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " at x = " + show(x) + ", t = " + show(t));
    }
  });
  return f;
}

double rh_symmetry_defect(const RHSolution& solution, const std::vector<cplx>& probes) {
  double m = 0.0;
  for (cplx z : probes) {
    Mat3 lhs = solution.evaluate(z);
    Mat3 rhs = cofactor(solution.evaluate(std::conj(z))).conjugate();
    m = std::max(m, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace threewave
