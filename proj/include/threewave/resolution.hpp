#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "threewave/core.hpp"
#include "threewave/evolution.hpp"
#include "threewave/soliton.hpp"

namespace threewave {

std::pair<double, double> cone_slice(const ConeSpec& cone, double t);

struct ConeErrorSeries {
  ConeSpec cone;
  std::vector<double> times;
  std::vector<double> errors;
};

// Sup over the cone slice of |p - p_ref| summed over channels; grid values
// inside the slice plus linear interpolation at both endpoints.
double slice_error(const FieldState& numeric, const FieldState& reference, std::pair<double, double> slice);

ConeErrorSeries cone_error_series(const Trajectory& trajectory, const SolitonEnsemble& reduced, const ConeSpec& cone);

ConeErrorSeries separation_check(const SolitonEnsemble& full, const SolitonEnsemble& reduced, const ConeSpec& cone,
                                 const std::vector<double>& times, double dx = 0.02);

enum class DecayModel { Power, Exponential };
enum class FitStatus { Fitted, BelowFloor };

std::string_view to_string(DecayModel m);
std::string_view to_string(FitStatus s);

struct FitOptions {
  double t_min = 5.0;
  double t_max = 1e300;
  double floor = 1e-9;
  std::size_t min_samples = 6;
};

struct DecayFit {
  DecayModel model = DecayModel::Power;
  FitStatus status = FitStatus::BelowFloor;
  double rate = 0.0;
  double confidence = 0.0;
  std::size_t samples = 0;
};

// Running maximum taken from the right.
std::vector<double> envelope(const std::vector<double>& errors);

DecayFit fit_decay(const ConeErrorSeries& series, DecayModel model, const FitOptions& opt = {});

}  // namespace threewave
