#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "threewave/parallel.hpp"
#include "threewave/scattering.hpp"

namespace threewave {

namespace {

using Fn = std::function<cplx(cplx)>;

double diameter(const SearchBox& b) { return std::hypot(b.re_max - b.re_min, b.im_max - b.im_min); }

cplx perimeter_point(const SearchBox& b, double s) {
  // Counterclockwise from the lower-left corner, s in [0, 1).
  const double w = b.re_max - b.re_min, h = b.im_max - b.im_min;
  double d = s * 2.0 * (w + h);
  if (d < w) return {b.re_min + d, b.im_min};
  d -= w;
  if (d < h) return {b.re_max, b.im_min + d};
  d -= h;
  if (d < w) return {b.re_max - d, b.im_max};
  d -= w;
  return {b.re_min, b.im_max - d};
}

double arg_step(cplx from, cplx to) { return std::arg(to / from); }

double refine_segment(const Fn& f, const SearchBox& b, double s0, double s1, cplx f0, cplx f1, int depth) {
  double step = arg_step(f0, f1);
  if (std::abs(step) < std::numbers::pi / 3.0 || depth > 24) return step;
  double sm = 0.5 * (s0 + s1);
  cplx fm = f(perimeter_point(b, sm));
  return refine_segment(f, b, s0, sm, f0, fm, depth + 1) + refine_segment(f, b, sm, s1, fm, f1, depth + 1);
}

int winding_count(const Fn& f, const SearchBox& b, std::size_t samples) {
  std::vector<cplx> vals(samples);
  parallel_for(samples, [&](std::size_t k) {
    vals[k] = f(perimeter_point(b, static_cast<double>(k) / static_cast<double>(samples)));
  });
  for (const cplx& v : vals)
    if (std::abs(v) < 1e-14) fail(ErrorKind::NonSimpleZero, "zero on the search box boundary");
  std::vector<double> steps(samples);
  parallel_for(samples, [&](std::size_t k) {
    double s0 = static_cast<double>(k) / static_cast<double>(samples);
    double s1 = static_cast<double>(k + 1) / static_cast<double>(samples);
    steps[k] = refine_segment(f, b, s0, s1, vals[k], vals[(k + 1) % samples], 0);
  });
  double total = 0.0;
  for (double s : steps) total += s;
  double w = total / (2.0 * std::numbers::pi);
  long r = std::lround(w);
  if (std::abs(w - static_cast<double>(r)) > 0.2)
    fail(ErrorKind::CountMismatch, "non-integer winding number " + show(w));
  return static_cast<int>(r);
}

bool inside(const SearchBox& b, cplx z, double margin) {
  return z.real() >= b.re_min - margin && z.real() <= b.re_max + margin && z.imag() >= b.im_min - margin &&
         z.imag() <= b.im_max + margin;
}

std::optional<cplx> newton(const Fn& f, cplx z, const SearchBox& box, const SpectrumOptions& opt) {
  for (int it = 0; it < opt.newton_iterations; ++it) {
    if (z.imag() <= 0.5 * opt.band) return std::nullopt;
    double r = std::min(opt.cauchy_radius, 0.25 * z.imag());
    cplx fz = f(z);
    cplx df = cauchy_derivative(f, z, r, opt.cauchy_nodes);
    if (std::abs(df) < 1e-300) return std::nullopt;
    cplx dz = fz / df;
    z -= dz;
    if (!inside(box, z, 0.5 * diameter(box))) return std::nullopt;
    if (std::abs(dz) < opt.newton_tol * std::max(1.0, std::abs(z))) return z;
  }
  return std::nullopt;
}

void bisect(const Fn& f, const SearchBox& box, int count, const SpectrumOptions& opt, std::vector<cplx>& out) {
  if (count <= 0) return;
  if (count == 1) {
    cplx centre(0.5 * (box.re_min + box.re_max), 0.5 * (box.im_min + box.im_max));
    if (auto z = newton(f, centre, box, opt); z && inside(box, *z, 1e-12)) {
      out.push_back(*z);
      return;
    }
  }
  if (diameter(box) <= opt.min_diameter)
    fail(ErrorKind::NonSimpleZero, "sub-box at the resolution floor still holds winding " + show(count));
  // Slightly off-centre splits keep symmetric zeros off the new edges.
  const double fr = 0.5 + 0.0137;
  double rm = box.re_min + fr * (box.re_max - box.re_min);
  double im = box.im_min + fr * (box.im_max - box.im_min);
  SearchBox kids[4] = {{box.re_min, rm, box.im_min, im},
                       {rm, box.re_max, box.im_min, im},
                       {box.re_min, rm, im, box.im_max},
                       {rm, box.re_max, im, box.im_max}};
  int counts[4];
  int sum = 0;
  for (int k = 0; k < 4; ++k) {
    counts[k] = winding_count(f, kids[k], opt.boundary_samples);
    sum += counts[k];
  }
  if (sum != count)
    fail(ErrorKind::CountMismatch, "sub-box windings " + show(sum) + " != parent " + show(count));
  for (int k = 0; k < 4; ++k) bisect(f, kids[k], counts[k], opt, out);
}

std::vector<cplx> zeros_in_box(const Fn& f, const SearchBox& box, const SpectrumOptions& opt) {
  int total = winding_count(f, box, opt.boundary_samples);
  if (total < 0) fail(ErrorKind::CountMismatch, "negative winding count");
  std::vector<cplx> out;
  bisect(f, box, total, opt, out);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j)
      if (std::abs(out[i] - out[j]) < 1e-8) fail(ErrorKind::CountMismatch, "refined roots coincide");
  if (static_cast<int>(out.size()) != total) fail(ErrorKind::CountMismatch, "root count disagrees with winding");
  return out;
}

}  // namespace

SearchBox default_search_box(const FieldState& field, const WaveSystem& sys, double re_extent) {
  SearchBox b;
  b.re_min = -re_extent;
  b.re_max = re_extent;
  b.im_min = SpectrumOptions{}.band;
  b.im_max = 2.0 * field.sup_norm() / sys.a_gap() + 0.5;
  return b;
}

std::vector<LocatedZero> locate_discrete_spectrum(const JostIntegrator& jost, const SearchBox& box,
                                                  const SpectrumOptions& opt) {
  if (!(box.im_min >= opt.band) || !(box.im_max > box.im_min) || !(box.re_max > box.re_min))
    fail(ErrorKind::InvalidArgument, "search box must lie inside the upper half plane above the band");
  std::vector<LocatedZero> out;
  if (jost.zero_potential()) return out;
  for (Minor which : {Minor::s11, Minor::s33A}) {
    Fn f = [&jost, which](cplx z) { return analytic_minor(jost, z, which); };
    for (cplx z : zeros_in_box(f, box, opt))
      out.push_back({z, which == Minor::s11 ? PoleClass::One : PoleClass::Two});
  }
  std::sort(out.begin(), out.end(), [](const LocatedZero& l, const LocatedZero& r) {
    if (l.cls != r.cls) return l.cls < r.cls;
    if (l.z.real() != r.z.real()) return l.z.real() < r.z.real();
    return l.z.imag() < r.z.imag();
  });
  return out;
}

std::vector<LocatedZero> locate_discrete_spectrum(const FieldState& field, const WaveSystem& sys,
                                                  const SearchBox& box, const SpectrumOptions& opt,
                                                  const JostOptions& jopt) {
  JostIntegrator jost(field, sys, jopt);
  return locate_discrete_spectrum(jost, box, opt);
}

NormingConstants norming_constants(const JostIntegrator& jost, const LocatedZero& pole,
                                   const std::vector<LocatedZero>& all, const SpectrumOptions& opt) {
  const cplx z = pole.z, zb = std::conj(pole.z);
  double r = std::min(opt.cauchy_radius, 0.5 * z.imag());
  for (const auto& other : all) {
    double d = std::abs(other.z - z);
    if (d == 0.0) continue;
    r = std::min(r, 0.5 * d);
  }
  if (r < 1e-8) fail(ErrorKind::PoleTooClose, "differentiation circle would enclose a neighbouring pole");
  for (const auto& other : all)
    if (other.z != z && std::abs(other.z - z) <= r)
      fail(ErrorKind::PoleTooClose, "differentiation circle encloses another pole");

  auto entry = [&jost](Side side, int j, int row) {
    return [&jost, side, j, row](cplx w) { return jost.limit_entry(w, side, j, row); };
  };
  auto derivative = [&](auto f, cplx at) {
    cplx d = cauchy_derivative(f, at, r, opt.cauchy_nodes);
    if (std::abs(d) < 1e-10) fail(ErrorKind::DerivativeVanishes, "scattering coefficient derivative vanishes at the pole");
    return d;
  };

  NormingConstants nc;
  if (pole.cls == PoleClass::One) {
    cplx ds11 = derivative(entry(Side::Plus, 0, 0), z);
    cplx sA33 = jost.limit_entry(z, Side::Minus, 2, 2);
    cplx s21 = jost.limit_entry(z, Side::Plus, 0, 1);
    nc.c = sA33 / (ds11 * s21);
    cplx dsA11 = derivative(entry(Side::Minus, 0, 0), zb);
    nc.c_tilde = jost.limit_entry(zb, Side::Minus, 0, 1) / dsA11;
  } else {
    cplx dsA33 = derivative(entry(Side::Minus, 2, 2), z);
    nc.c = jost.limit_entry(z, Side::Minus, 2, 1) / dsA33;
    cplx ds33 = derivative(entry(Side::Plus, 2, 2), zb);
    cplx sA11 = jost.limit_entry(zb, Side::Minus, 0, 0);
    cplx s23 = jost.limit_entry(zb, Side::Plus, 2, 1);
    nc.c_tilde = sA11 / (ds33 * s23);
  }
  return nc;
}

NormingConstants norming_constants(const FieldState& field, const WaveSystem& sys, const LocatedZero& pole,
                                   const std::vector<LocatedZero>& all, const SpectrumOptions& opt,
                                   const JostOptions& jopt) {
  JostIntegrator jost(field, sys, jopt);
  return norming_constants(jost, pole, all, opt);
}

ScatterResult scatter(const FieldState& field, const WaveSystem& sys, const SpectralGrid& grid,
                      const std::optional<SearchBox>& box, const SpectrumOptions& sopt, const JostOptions& jopt) {
  JostIntegrator jost(field, sys, jopt);
  ScatterResult res;
  res.samples.resize(grid.count);
  parallel_for(grid.count, [&](std::size_t k) {
    double z = grid.z(k);
    ScatteringMatrix& sm = res.samples[k];
    sm.z = z;
    sm.S = jost.scattering_matrix(z);
    sm.SA = cofactor(sm.S);
  });
  for (const auto& sm : res.samples) {
    double dev = std::abs(sm.S.determinant() - 1.0);
    if (dev > 1e-6)
      fail(ErrorKind::UnitarityViolated, "|det S - 1| = " + show(dev) + " at z = " + show(sm.z));
  }
  res.data = reflection_coefficients(res.samples, grid);
  res.checks = scattering_checks(res.samples, res.data);

  SearchBox b = box ? *box : default_search_box(field, sys, std::abs(grid.z_min));
  auto zeros = locate_discrete_spectrum(jost, b, sopt);
  for (const auto& zr : zeros) {
    NormingConstants nc = norming_constants(jost, zr, zeros, sopt);
    DiscretePole p = make_pole(sys, zr.z, nc.c, zr.cls);
    p.c_tilde = nc.c_tilde;
    res.data.poles.push_back(p);
  }
  return res;
}

}  // namespace threewave
