#include "threewave/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "threewave/io.hpp"

namespace threewave {

namespace {

[[noreturn]] void config_error(const std::string& what) { fail(ErrorKind::ConfigError, what); }

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& key, const std::string& tok) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size()) config_error(key + ": expected a number, got '" + tok + "'");
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& tok) {
  std::uint64_t v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    config_error(key + ": expected a non-negative integer, got '" + tok + "'");
  return v;
}

std::vector<double> doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& t : tokens(value)) out.push_back(to_double(key, t));
  return out;
}

std::vector<double> fixed_doubles(const std::string& key, const std::string& value, std::size_t n) {
  auto v = doubles(key, value);
  if (v.size() != n) config_error(key + ": expected " + std::to_string(n) + " numbers");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  config_error(key + ": expected true or false");
}

Channel to_channel(const std::string& key, const std::string& tok) {
  if (tok == "p12") return Channel::p12;
  if (tok == "p13") return Channel::p13;
  if (tok == "p23") return Channel::p23;
  config_error(key + ": unknown channel '" + tok + "'");
}

std::string channel_name(Channel c) {
  switch (c) {
    case Channel::p12: return "p12";
    case Channel::p13: return "p13";
    default: return "p23";
  }
}

template <class T, class F>
std::vector<T> entries(const std::string& value, F&& parse_one) {
  std::vector<T> out;
  if (trim(value).empty()) return out;
  for (const auto& item : split(value, ';')) out.push_back(parse_one(item));
  return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_time_tag(double t) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), t);
  return std::string(buf, res.ptr);
}

bool operator==(const RunConfig& l, const RunConfig& r) {
  if (l.cones.size() != r.cones.size()) return false;
  for (std::size_t k = 0; k < l.cones.size(); ++k) {
    const auto &a = l.cones[k], &b = r.cones[k];
    if (a.x1 != b.x1 || a.x2 != b.x2 || a.v1 != b.v1 || a.v2 != b.v2) return false;
  }
  return l.a == r.a && l.b == r.b && l.x_min == r.x_min && l.x_max == r.x_max && l.dx == r.dx &&
         l.z_max == r.z_max && l.z_count == r.z_count && l.initial_kind == r.initial_kind && l.poles == r.poles &&
         l.bumps == r.bumps && l.random == r.random && l.initial_file == r.initial_file && l.dt == r.dt &&
         l.t_end == r.t_end && l.snapshot_stride == r.snapshot_stride && l.dealias == r.dealias &&
         l.soliton_times == r.soliton_times && l.soliton_source == r.soliton_source &&
         l.resolve_reference == r.resolve_reference && l.fit_t_min == r.fit_t_min && l.fit_t_max == r.fit_t_max &&
         l.fit_floor == r.fit_floor && l.output_dir == r.output_dir && l.seed == r.seed;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::map<std::string, int> seen;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) config_error("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (seen[key]++) config_error("duplicate key " + key);

    if (key == "system.a") {
      auto v = fixed_doubles(key, value, 3);
      cfg.a = {v[0], v[1], v[2]};
    } else if (key == "system.b") {
      auto v = fixed_doubles(key, value, 3);
      cfg.b = {v[0], v[1], v[2]};
    } else if (key == "grid.x_min") {
      cfg.x_min = to_double(key, value);
    } else if (key == "grid.x_max") {
      cfg.x_max = to_double(key, value);
    } else if (key == "grid.dx") {
      cfg.dx = to_double(key, value);
    } else if (key == "spectral.z_max") {
      cfg.z_max = to_double(key, value);
    } else if (key == "spectral.count") {
      cfg.z_count = to_uint(key, value);
    } else if (key == "initial.kind") {
      if (value != "analytic" && value != "file") config_error("initial.kind must be analytic or file");
      cfg.initial_kind = value;
    } else if (key == "initial.poles") {
      cfg.poles = entries<PoleSpec>(value, [&](const std::string& item) {
        auto v = fixed_doubles(key, item, 5);
        if (v[0] != 1.0 && v[0] != 2.0) config_error(key + ": class must be 1 or 2");
        return PoleSpec{static_cast<int>(v[0]), {v[1], v[2]}, {v[3], v[4]}};
      });
    } else if (key == "initial.bumps") {
      cfg.bumps = entries<BumpSpec>(value, [&](const std::string& item) {
        auto t = tokens(item);
        if (t.size() != 5) config_error(key + ": expected channel re_amp im_amp center width");
        return BumpSpec{to_channel(key, t[0]), {to_double(key, t[1]), to_double(key, t[2])}, to_double(key, t[3]),
                        to_double(key, t[4])};
      });
    } else if (key == "initial.random") {
      auto t = tokens(value);
      if (!t.empty()) {
        if (t.size() != 5) config_error(key + ": expected count sup spread width_min width_max");
        cfg.random = RandomBumps{to_uint(key, t[0]), to_double(key, t[1]), to_double(key, t[2]),
                                 to_double(key, t[3]), to_double(key, t[4])};
      }
    } else if (key == "initial.file") {
      cfg.initial_file = value;
    } else if (key == "evolution.dt") {
      cfg.dt = to_double(key, value);
    } else if (key == "evolution.t_end") {
      cfg.t_end = to_double(key, value);
    } else if (key == "evolution.snapshot_stride") {
      cfg.snapshot_stride = to_uint(key, value);
    } else if (key == "evolution.dealias") {
      cfg.dealias = to_bool(key, value);
    } else if (key == "solitons.times") {
      cfg.soliton_times = doubles(key, value);
    } else if (key == "solitons.source") {
      if (value != "config" && value != "scattering") config_error("solitons.source must be config or scattering");
      cfg.soliton_source = value;
    } else if (key == "cones") {
      cfg.cones = entries<ConeSpec>(value, [&](const std::string& item) {
        auto v = fixed_doubles(key, item, 4);
        if (!(v[0] <= v[1]) || !(v[2] <= v[3])) config_error("cones: need x1 <= x2 and v1 <= v2");
        return ConeSpec{v[0], v[1], v[2], v[3]};
      });
    } else if (key == "resolve.reference") {
      if (value != "config" && value != "scatter") config_error("resolve.reference must be config or scatter");
      cfg.resolve_reference = value;
    } else if (key == "resolve.t_min") {
      cfg.fit_t_min = to_double(key, value);
    } else if (key == "resolve.t_max") {
      cfg.fit_t_max = to_double(key, value);
    } else if (key == "resolve.floor") {
      cfg.fit_floor = to_double(key, value);
    } else if (key == "output.dir") {
      cfg.output_dir = value;
    } else if (key == "seed") {
      cfg.seed = to_uint(key, value);
    } else {
      config_error("unknown key " + key);
    }
  }
  if (cfg.z_count < 2) config_error("spectral.count must be at least 2");
  if (cfg.snapshot_stride == 0) config_error("evolution.snapshot_stride must be positive");
  if (cfg.initial_kind == "file" && cfg.initial_file.empty()) config_error("initial.kind = file needs initial.file");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string write_config(const RunConfig& cfg) {
  auto list = [](const std::vector<double>& v) {
    std::vector<std::string> s;
    for (double d : v) s.push_back(format_double(d));
    return join(s, " ");
  };
  std::vector<std::string> poles, bumps, cones;
  for (const auto& p : cfg.poles)
    poles.push_back(std::to_string(p.cls) + " " + list({p.z.real(), p.z.imag(), p.c.real(), p.c.imag()}));
  for (const auto& b : cfg.bumps)
    bumps.push_back(channel_name(b.channel) + " " + list({b.amplitude.real(), b.amplitude.imag(), b.center, b.width}));
  for (const auto& c : cfg.cones) cones.push_back(list({c.x1, c.x2, c.v1, c.v2}));
  std::string random;
  if (cfg.random.count > 0)
    random = std::to_string(cfg.random.count) + " " +
             list({cfg.random.sup, cfg.random.spread, cfg.random.width_min, cfg.random.width_max});

  std::ostringstream out;
  auto kv = [&](const std::string& k, const std::string& v) { out << k << " = " << v << "\n"; };
  kv("system.a", list({cfg.a[0], cfg.a[1], cfg.a[2]}));
  kv("system.b", list({cfg.b[0], cfg.b[1], cfg.b[2]}));
  kv("grid.x_min", format_double(cfg.x_min));
  kv("grid.x_max", format_double(cfg.x_max));
  kv("grid.dx", format_double(cfg.dx));
  kv("spectral.z_max", format_double(cfg.z_max));
  kv("spectral.count", std::to_string(cfg.z_count));
  kv("initial.kind", cfg.initial_kind);
  kv("initial.poles", join(poles, "; "));
  kv("initial.bumps", join(bumps, "; "));
  kv("initial.random", random);
  kv("initial.file", cfg.initial_file);
  kv("evolution.dt", format_double(cfg.dt));
  kv("evolution.t_end", format_double(cfg.t_end));
  kv("evolution.snapshot_stride", std::to_string(cfg.snapshot_stride));
  kv("evolution.dealias", cfg.dealias ? "true" : "false");
  kv("solitons.times", list(cfg.soliton_times));
  kv("solitons.source", cfg.soliton_source);
  kv("cones", join(cones, "; "));
  kv("resolve.reference", cfg.resolve_reference);
  kv("resolve.t_min", format_double(cfg.fit_t_min));
  kv("resolve.t_max", format_double(cfg.fit_t_max));
  kv("resolve.floor", format_double(cfg.fit_floor));
  kv("output.dir", cfg.output_dir);
  kv("seed", std::to_string(cfg.seed));
  return out.str();
}

WaveSystem config_system(const RunConfig& cfg) {
  try {
    return make_wave_system(cfg.a, cfg.b);
  } catch (const Error& e) {
    config_error(std::string("invalid wave system: ") + e.what());
  }
}

UniformGrid config_grid(const RunConfig& cfg) {
  try {
    return UniformGrid::from_window(cfg.x_min, cfg.x_max, cfg.dx);
  } catch (const Error& e) {
    config_error(std::string("invalid grid: ") + e.what());
  }
}

SpectralGrid config_spectral_grid(const RunConfig& cfg) {
  try {
    return SpectralGrid::symmetric(cfg.z_max, cfg.z_count);
  } catch (const Error& e) {
    config_error(std::string("invalid spectral grid: ") + e.what());
  }
}

EvolutionConfig config_evolution(const RunConfig& cfg) {
  EvolutionConfig ev;
  ev.dt = cfg.dt;
  ev.t_end = cfg.t_end;
  ev.snapshot_stride = cfg.snapshot_stride;
  ev.dealias = cfg.dealias;
  return ev;
}

SolitonEnsemble config_ensemble(const RunConfig& cfg) {
  WaveSystem sys = config_system(cfg);
  std::vector<DiscretePole> poles;
  for (const auto& p : cfg.poles) {
    if (p.z.imag() < 1e-3)
      fail(ErrorKind::SpectralSingularity, "configured pole lies within the excluded band around the real axis");
    poles.push_back(make_pole(sys, p.z, p.c, p.cls == 1 ? PoleClass::One : PoleClass::Two));
  }
  return make_ensemble(sys, std::move(poles));
}

FieldState initial_field(const RunConfig& cfg) {
  if (cfg.initial_kind == "file") return read_field_csv(cfg.initial_file);
  UniformGrid grid = config_grid(cfg);
  SolitonEnsemble ens = config_ensemble(cfg);
  FieldState f = nsoliton_field(ens, grid, 0.0);
  auto gauss = [](double x, double c, double w) { return std::exp(-0.5 * (x - c) * (x - c) / (w * w)); };
  for (const auto& b : cfg.bumps) {
    auto& v = f.channel(b.channel);
    for (std::size_t k = 0; k < grid.count; ++k) v[k] += b.amplitude * gauss(grid.x(k), b.center, b.width);
  }
  if (cfg.random.count > 0) {
    std::mt19937_64 rng(cfg.seed);
    auto u = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    FieldState extra(grid, 0.0);
    for (std::size_t i = 0; i < cfg.random.count; ++i) {
      auto ch = static_cast<Channel>(rng() % 3);
      double phase = 2.0 * std::numbers::pi * u();
      double mag = 0.5 + 0.5 * u();
      double center = cfg.random.spread * (2.0 * u() - 1.0);
      double width = cfg.random.width_min + (cfg.random.width_max - cfg.random.width_min) * u();
      auto& v = extra.channel(ch);
      for (std::size_t k = 0; k < grid.count; ++k) v[k] += std::polar(mag, phase) * gauss(grid.x(k), center, width);
    }
    double s = extra.sup_norm();
    double scale = s > 0.0 ? cfg.random.sup / s : 0.0;
    for (std::size_t k = 0; k < grid.count; ++k) {
      f.p12[k] += scale * extra.p12[k];
      f.p13[k] += scale * extra.p13[k];
      f.p23[k] += scale * extra.p23[k];
    }
  }
  return f;
}

}  // namespace threewave
