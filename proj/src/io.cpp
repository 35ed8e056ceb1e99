#include "threewave/io.hpp"

#include <fstream>
#include <sstream>

#include "threewave/config.hpp"

namespace threewave {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::ConfigError, "cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::ConfigError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string field_csv(const FieldState& f) {
  std::string s = "x,re_p12,im_p12,re_p13,im_p13,re_p23,im_p23\n";
  for (std::size_t k = 0; k < f.grid.count; ++k) {
    s += format_double(f.grid.x(k));
    for (const auto* v : {&f.p12, &f.p13, &f.p23}) {
      s += "," + format_double((*v)[k].real());
      s += "," + format_double((*v)[k].imag());
    }
    s += "\n";
  }
  return s;
}

void write_field_csv(const std::string& path, const FieldState& f) { write_text(path, field_csv(f)); }

FieldState read_field_csv(const std::string& path, double t) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,re_p12", 0) != 0) fail(ErrorKind::ConfigError, path + ": bad header");
  std::vector<double> xs;
  std::vector<double> cols[6];
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double vals[7];
    for (int c = 0; c < 7; ++c) {
      if (!std::getline(row, cell, ',')) fail(ErrorKind::ConfigError, path + ": short row");
      vals[c] = std::strtod(cell.c_str(), nullptr);
    }
    xs.push_back(vals[0]);
    for (int c = 0; c < 6; ++c) cols[c].push_back(vals[c + 1]);
  }
  UniformGrid g = UniformGrid::from_samples(xs);
  FieldState f(g, t);
  for (std::size_t k = 0; k < g.count; ++k) {
    f.p12[k] = {cols[0][k], cols[1][k]};
    f.p13[k] = {cols[2][k], cols[3][k]};
    f.p23[k] = {cols[4][k], cols[5][k]};
  }
  return f;
}

std::string reflection_csv(const ScatteringData& d) {
  std::string s = "z,re_r1,im_r1,re_r2,im_r2,re_r3,im_r3,re_r4,im_r4\n";
  for (std::size_t k = 0; k < d.grid.count; ++k) {
    s += format_double(d.grid.z(k));
    for (const auto* v : {&d.r1, &d.r2, &d.r3, &d.r4}) {
      s += "," + format_double((*v)[k].real());
      s += "," + format_double((*v)[k].imag());
    }
    s += "\n";
  }
  return s;
}

std::string series_csv(const ConeErrorSeries& s) {
  std::string out = "t,error\n";
  for (std::size_t k = 0; k < s.times.size(); ++k) out += format_double(s.times[k]) + "," + format_double(s.errors[k]) + "\n";
  return out;
}

json poles_json(const std::vector<DiscretePole>& poles) {
  json arr = json::array();
  for (const auto& p : poles)
    arr.push_back({{"re_z", p.z.real()},
                   {"im_z", p.z.imag()},
                   {"re_c", p.c.real()},
                   {"im_c", p.c.imag()},
                   {"re_ct", p.c_tilde.real()},
                   {"im_ct", p.c_tilde.imag()},
                   {"class", static_cast<int>(p.cls)}});
  return arr;
}

json scattering_json(const WaveSystem& sys, const ScatteringData& data, const ScatteringChecks& checks) {
  json j;
  j["system"] = {{"a", {sys.a(0), sys.a(1), sys.a(2)}}, {"b", {sys.b(0), sys.b(1), sys.b(2)}}};
  j["poles"] = poles_json(data.poles);
  j["checks"] = {{"detS_max_dev", checks.detS_max_dev},
                 {"symmetry_max_dev", checks.symmetry_max_dev},
                 {"closure_max_dev", checks.closure_max_dev}};
  return j;
}

SolitonEnsemble ensemble_from_scattering_json(const json& j) {
  try {
    auto a = j.at("system").at("a").get<std::vector<double>>();
    auto b = j.at("system").at("b").get<std::vector<double>>();
    if (a.size() != 3 || b.size() != 3) fail(ErrorKind::ConfigError, "scattering.json: system needs three entries");
    WaveSystem sys = make_wave_system({a[0], a[1], a[2]}, {b[0], b[1], b[2]});
    std::vector<DiscretePole> poles;
    for (const auto& p : j.at("poles")) {
      DiscretePole d;
      d.z = {p.at("re_z").get<double>(), p.at("im_z").get<double>()};
      d.c = {p.at("re_c").get<double>(), p.at("im_c").get<double>()};
      d.c_tilde = {p.at("re_ct").get<double>(), p.at("im_ct").get<double>()};
      d.cls = p.at("class").get<int>() == 1 ? PoleClass::One : PoleClass::Two;
      poles.push_back(d);
    }
    return make_ensemble(sys, std::move(poles));
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, std::string("scattering.json: ") + e.what());
  }
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, path + ": " + e.what());
  }
}

}  // namespace threewave
