#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "threewave/core.hpp"

namespace threewave {

struct EvolutionConfig {
  double dt = 1e-3;
  double t_end = 0.0;
  bool dealias = false;
  std::size_t snapshot_stride = 1;
  double blowup = 1e6;
};

void validate(const EvolutionConfig& cfg, const UniformGrid& grid, const WaveSystem& sys);

struct Trajectory {
  std::vector<FieldState> snapshots;
  // Sum of the squared L2 norms of the three channels at each snapshot.
  std::vector<double> l2;
};

double l2_gauge(const FieldState& f);

// Periodic split-step integrator; owns the FFT plans for one grid size.
class SplitStepper {
 public:
  SplitStepper(const UniformGrid& grid, const WaveSystem& sys, bool dealias);
  ~SplitStepper();
  SplitStepper(const SplitStepper&) = delete;
  SplitStepper& operator=(const SplitStepper&) = delete;

  // Exact transport p(x) <- p(x + n tau) of every channel.
  void advect(FieldState& f, double tau);
  void nonlinear(FieldState& f, double dt) const;

 private:
  struct Plans;
  std::unique_ptr<Plans> plans_;
  UniformGrid grid_;
  WaveSystem sys_;
  bool dealias_;
};

FieldState step(const FieldState& field, const WaveSystem& sys, double dt, bool dealias = false);

// On failure the snapshots produced so far are left in *partial before the error propagates.
Trajectory evolve(const FieldState& field0, const WaveSystem& sys, const EvolutionConfig& cfg,
                  Trajectory* partial = nullptr);

struct InvarianceRow {
  double t = 0.0;
  double dev_r[4] = {0.0, 0.0, 0.0, 0.0};
  double dev_S = 0.0;
  double dev_s12_phase = 0.0;
};

std::vector<InvarianceRow> scattering_invariance_report(const Trajectory& trajectory, const WaveSystem& sys,
                                                        const SpectralGrid& zgrid);

}  // namespace threewave
