#include "threewave/evolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

#include "threewave/parallel.hpp"
#include "threewave/scattering.hpp"

namespace threewave {

struct SplitStepper::Plans {
  std::size_t n = 0;
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<double> k;

  explicit Plans(std::size_t count) : n(count) {
    buf = fftw_alloc_complex(n);
    // Estimate-mode plans are reproducible from run to run.
    fwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Plans() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(buf);
  }
};

SplitStepper::SplitStepper(const UniformGrid& grid, const WaveSystem& sys, bool dealias)
    : plans_(std::make_unique<Plans>(grid.count)), grid_(grid), sys_(sys), dealias_(dealias) {
  const std::size_t n = grid.count;
  const double L = grid.length();
  plans_->k.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    auto s = static_cast<double>(m);
    if (m >= (n + 1) / 2) s -= static_cast<double>(n);
    plans_->k[m] = 2.0 * std::numbers::pi * s / L;
  }
}

SplitStepper::~SplitStepper() = default;

void SplitStepper::advect(FieldState& f, double tau) {
  const std::size_t n = grid_.count;
  const double kmax = plans_->k.empty() ? 0.0 : std::numbers::pi / grid_.dx;
  auto* buf = reinterpret_cast<cplx*>(plans_->buf);
  for (int c = 0; c < 3; ++c) {
    auto& v = f.channel(static_cast<Channel>(c));
    const double speed = sys_.n(kChannelIndex[c][0], kChannelIndex[c][1]);
    std::memcpy(static_cast<void*>(buf), v.data(), n * sizeof(cplx));
    fftw_execute(plans_->fwd);
    const double norm = 1.0 / static_cast<double>(n);
    for (std::size_t m = 0; m < n; ++m) {
      const double k = plans_->k[m];
      if (dealias_ && std::abs(k) > (2.0 / 3.0) * kmax) {
        buf[m] = 0.0;
        continue;
      }
      buf[m] *= std::polar(norm, k * speed * tau);
    }
    fftw_execute(plans_->bwd);
    std::memcpy(static_cast<void*>(v.data()), buf, n * sizeof(cplx));
  }
}

void SplitStepper::nonlinear(FieldState& f, double dt) const {
  // Third-index coefficients of -(n_kj - n_ik) p_ik p_kj for each stored channel.
  const double c12 = -(sys_.n(2, 1) - sys_.n(0, 2));
  const double c13 = -(sys_.n(1, 2) - sys_.n(0, 1));
  const double c23 = -(sys_.n(0, 2) - sys_.n(1, 0));
  auto rhs = [&](cplx a, cplx b, cplx c, cplx& da, cplx& db, cplx& dc) {
    da = c12 * b * (-std::conj(c));
    db = c13 * a * c;
    dc = c23 * (-std::conj(a)) * b;
  };
  const std::size_t n = grid_.count;
  for (std::size_t i = 0; i < n; ++i) {
    cplx a = f.p12[i], b = f.p13[i], c = f.p23[i];
    cplx a1, b1, c1, a2, b2, c2, a3, b3, c3, a4, b4, c4;
    rhs(a, b, c, a1, b1, c1);
    rhs(a + 0.5 * dt * a1, b + 0.5 * dt * b1, c + 0.5 * dt * c1, a2, b2, c2);
    rhs(a + 0.5 * dt * a2, b + 0.5 * dt * b2, c + 0.5 * dt * c2, a3, b3, c3);
    rhs(a + dt * a3, b + dt * b3, c + dt * c3, a4, b4, c4);
    f.p12[i] = a + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    f.p13[i] = b + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    f.p23[i] = c + (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
  }
}

void validate(const EvolutionConfig& cfg, const UniformGrid& grid, const WaveSystem& sys) {
  if (cfg.dt == 0.0 || !std::isfinite(cfg.dt)) fail(ErrorKind::InvalidArgument, "dt must be nonzero");
  if (cfg.snapshot_stride == 0) fail(ErrorKind::InvalidArgument, "snapshot stride must be positive");
  const double speed = sys.max_speed();
  if (speed > 0.0 && std::abs(cfg.dt) > grid.dx / speed * (1.0 + 1e-12))
    fail(ErrorKind::CFLViolated, "dt exceeds dx / max|n| = " + show(grid.dx / speed));
}

double l2_gauge(const FieldState& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.grid.count; ++k) s += std::norm(f.p12[k]) + std::norm(f.p13[k]) + std::norm(f.p23[k]);
  return s * f.grid.dx;
}

namespace {

void check_blowup(const FieldState& f, double limit) {
  double s = f.sup_norm();
  if (!(s <= limit)) fail(ErrorKind::BlowupDetected, "sup|p| = " + show(s) + " at t = " + show(f.t));
}

}  // namespace

FieldState step(const FieldState& field, const WaveSystem& sys, double dt, bool dealias) {
  field.check();
  EvolutionConfig cfg;
  cfg.dt = dt;
  validate(cfg, field.grid, sys);
  SplitStepper st(field.grid, sys, dealias);
  FieldState f = field;
  st.advect(f, 0.5 * dt);
  st.nonlinear(f, dt);
  st.advect(f, 0.5 * dt);
  f.t = field.t + dt;
  check_blowup(f, cfg.blowup);
  return f;
}

Trajectory evolve(const FieldState& field0, const WaveSystem& sys, const EvolutionConfig& cfg, Trajectory* partial) {
  field0.check();
  Trajectory traj;
  traj.snapshots.push_back(field0);
  traj.l2.push_back(l2_gauge(field0));
  if (cfg.t_end == 0.0) return traj;
  validate(cfg, field0.grid, sys);
  const auto steps = static_cast<long long>(std::llround(std::abs(cfg.t_end) / std::abs(cfg.dt)));
  const double dt = std::copysign(std::abs(cfg.dt), cfg.t_end);
  SplitStepper st(field0.grid, sys, cfg.dealias);
  FieldState f = field0;
  try {
    // Adjacent half-step advections are fused between snapshots.
    st.advect(f, 0.5 * dt);
    for (long long s = 1; s <= steps; ++s) {
      st.nonlinear(f, dt);
      f.t = field0.t + static_cast<double>(s) * dt;
      const bool snap = s == steps || s % static_cast<long long>(cfg.snapshot_stride) == 0;
      if (snap) {
        st.advect(f, 0.5 * dt);
        check_blowup(f, cfg.blowup);
        traj.snapshots.push_back(f);
        traj.l2.push_back(l2_gauge(f));
        if (s < steps) st.advect(f, 0.5 * dt);
      } else {
        st.advect(f, dt);
        if (s % 64 == 0) check_blowup(f, cfg.blowup);
      }
    }
  } catch (const Error& e) {
    if (partial) *partial = traj;
    throw Error(e.kind(), std::string(e.what()) + " (evolution stopped near t = " + show(f.t) + ")");
  }
  return traj;
}

std::vector<InvarianceRow> scattering_invariance_report(const Trajectory& trajectory, const WaveSystem& sys,
                                                        const SpectralGrid& zgrid) {
  std::vector<InvarianceRow> rows;
  if (trajectory.snapshots.empty()) return rows;
  std::vector<std::vector<ScatteringMatrix>> sweeps;
  std::vector<ScatteringData> data;
  for (const auto& snap : trajectory.snapshots) {
    try {
      sweeps.push_back(scattering_sweep(snap, sys, zgrid));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::TailTooFat)
        fail(ErrorKind::WindowEscape, "field reaches the window edge at t = " + show(snap.t));
      throw;
    }
    data.push_back(reflection_coefficients(sweeps.back(), zgrid));
  }
  const double t0 = trajectory.snapshots.front().t;
  for (std::size_t s = 0; s < sweeps.size(); ++s) {
    InvarianceRow row;
    row.t = trajectory.snapshots[s].t;
    const double dt = row.t - t0;
    const std::vector<cplx>* r0[4] = {&data[0].r1, &data[0].r2, &data[0].r3, &data[0].r4};
    const std::vector<cplx>* rt[4] = {&data[s].r1, &data[s].r2, &data[s].r3, &data[s].r4};
    for (std::size_t k = 0; k < zgrid.count; ++k) {
      for (int i = 0; i < 4; ++i)
        row.dev_r[i] = std::max(row.dev_r[i], std::abs(std::abs((*rt[i])[k]) - std::abs((*r0[i])[k])));
      const double z = zgrid.z(k);
      const Mat3& S0 = sweeps[0][k].S;
      const Mat3& St = sweeps[s][k].S;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          cplx expected = S0(i, j) * std::exp(cplx(0.0, z * (sys.b(i) - sys.b(j)) * dt));
          row.dev_S = std::max(row.dev_S, std::abs(St(i, j) - expected));
        }
      cplx phase = std::exp(cplx(0.0, -z * (sys.b(0) - sys.b(1)) * dt));
      row.dev_s12_phase = std::max(row.dev_s12_phase, std::abs(St(0, 1) * phase - S0(0, 1)));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace threewave
