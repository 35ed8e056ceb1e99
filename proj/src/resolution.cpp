#include "threewave/resolution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "threewave/parallel.hpp"

namespace threewave {

std::pair<double, double> cone_slice(const ConeSpec& cone, double t) {
  return {cone.x1 + cone.v1 * t, cone.x2 + cone.v2 * t};
}

namespace {

double channel_gap(const FieldState& a, const FieldState& b, std::size_t k) {
  return std::abs(a.p12[k] - b.p12[k]) + std::abs(a.p13[k] - b.p13[k]) + std::abs(a.p23[k] - b.p23[k]);
}

double gap_at(const FieldState& a, const FieldState& b, double x) {
  const UniformGrid& g = a.grid;
  double s = (x - g.x0) / g.dx;
  auto k = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0, static_cast<double>(g.count - 2)));
  double w = s - static_cast<double>(k);
  auto lerp = [&](const std::vector<cplx>& u, const std::vector<cplx>& v) {
    return (1.0 - w) * (u[k] - v[k]) + w * (u[k + 1] - v[k + 1]);
  };
  return std::abs(lerp(a.p12, b.p12)) + std::abs(lerp(a.p13, b.p13)) + std::abs(lerp(a.p23, b.p23));
}

}  // namespace

double slice_error(const FieldState& numeric, const FieldState& reference, std::pair<double, double> slice) {
  const UniformGrid& g = numeric.grid;
  if (slice.first < g.x0 || slice.second > g.x_end())
    fail(ErrorKind::SliceEscapesWindow, "cone slice [" + show(slice.first) + ", " +
                                            show(slice.second) + "] leaves the grid window");
  double m = std::max(gap_at(numeric, reference, slice.first), gap_at(numeric, reference, slice.second));
  for (std::size_t k = 0; k < g.count; ++k) {
    double x = g.x(k);
    if (x > slice.first && x < slice.second) m = std::max(m, channel_gap(numeric, reference, k));
  }
  return m;
}

namespace {

// Reference field restricted to the grid points needed for one slice.
FieldState slice_reference(const SolitonEnsemble& ens, const UniformGrid& g, double t, std::pair<double, double> slice) {
  double lo = std::floor((slice.first - g.x0) / g.dx);
  double hi = std::ceil((slice.second - g.x0) / g.dx);
  auto k0 = static_cast<std::size_t>(std::max(0.0, lo));
  auto k1 = std::min(static_cast<std::size_t>(std::max(0.0, hi)), g.count - 1);
  if (k1 <= k0) k1 = std::min(k0 + 1, g.count - 1), k0 = k1 - 1;
  UniformGrid sub{g.x(k0), g.dx, k1 - k0 + 1};
  return nsoliton_field(ens, sub, t);
}

FieldState restrict_field(const FieldState& f, const UniformGrid& sub) {
  FieldState out(sub, f.t);
  auto k0 = static_cast<std::size_t>(std::llround((sub.x0 - f.grid.x0) / f.grid.dx));
  for (std::size_t k = 0; k < sub.count; ++k) {
    out.p12[k] = f.p12[k0 + k];
    out.p13[k] = f.p13[k0 + k];
    out.p23[k] = f.p23[k0 + k];
  }
  return out;
}

}  // namespace

ConeErrorSeries cone_error_series(const Trajectory& trajectory, const SolitonEnsemble& reduced, const ConeSpec& cone) {
  ConeErrorSeries s;
  s.cone = cone;
  for (const auto& snap : trajectory.snapshots) {
    auto slice = cone_slice(cone, snap.t);
    const UniformGrid& g = snap.grid;
    if (slice.first < g.x0 || slice.second > g.x_end())
      fail(ErrorKind::SliceEscapesWindow, "cone slice leaves the grid window at t = " + show(snap.t));
    FieldState ref = slice_reference(reduced, g, snap.t, slice);
    s.times.push_back(snap.t);
    s.errors.push_back(slice_error(restrict_field(snap, ref.grid), ref, slice));
  }
  return s;
}

ConeErrorSeries separation_check(const SolitonEnsemble& full, const SolitonEnsemble& reduced, const ConeSpec& cone,
                                 const std::vector<double>& times, double dx) {
  ConeErrorSeries s;
  s.cone = cone;
  s.times = times;
  s.errors.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    auto slice = cone_slice(cone, times[i]);
    double width = slice.second - slice.first;
    auto n = static_cast<std::size_t>(std::ceil(width / dx)) + 1;
    UniformGrid g{slice.first, n > 1 ? width / static_cast<double>(n - 1) : dx, std::max<std::size_t>(n, 2)};
    FieldState a = nsoliton_field(full, g, times[i]);
    FieldState b = nsoliton_field(reduced, g, times[i]);
    double m = 0.0;
    for (std::size_t k = 0; k < g.count; ++k) m = std::max(m, channel_gap(a, b, k));
    s.errors[i] = m;
  }
  return s;
}

std::string_view to_string(DecayModel m) { return m == DecayModel::Power ? "power" : "exponential"; }
std::string_view to_string(FitStatus s) { return s == FitStatus::Fitted ? "fitted" : "floor"; }

std::vector<double> envelope(const std::vector<double>& errors) {
  std::vector<double> env(errors.size());
  double run = 0.0;
  for (std::size_t k = errors.size(); k-- > 0;) {
    run = std::max(run, errors[k]);
    env[k] = run;
  }
  return env;
}

DecayFit fit_decay(const ConeErrorSeries& series, DecayModel model, const FitOptions& opt) {
  DecayFit fit;
  fit.model = model;
  std::vector<double> env = envelope(series.errors);
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    double t = series.times[k];
    if (t < opt.t_min || t > opt.t_max) continue;
    if (!(env[k] > 10.0 * opt.floor)) continue;
    xs.push_back(model == DecayModel::Power ? std::log(t) : t);
    ys.push_back(std::log(env[k]));
  }
  fit.samples = xs.size();
  if (xs.size() < opt.min_samples) return fit;
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) mx += xs[k], my += ys[k];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (sxx <= 0.0) return fit;
  fit.rate = sxy / sxx;
  double icpt = my - fit.rate * mx;
  double rss = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    double r = ys[k] - (icpt + fit.rate * xs[k]);
    rss += r * r;
  }
  fit.confidence = std::sqrt(rss / std::max(1.0, n - 2.0));
  fit.status = FitStatus::Fitted;
  return fit;
}

}  // namespace threewave
