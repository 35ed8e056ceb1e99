#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "threewave/commands.hpp"
#include "threewave/config.hpp"
#include "threewave/io.hpp"
#include "threewave/parallel.hpp"

using namespace threewave;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::InvariantViolated;
}

class Workdir : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("threewave_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  std::string dir(const std::string& name) const { return (root_ / name).string(); }
  std::string file(const std::string& d, const std::string& name) const { return (root_ / d / name).string(); }

  fs::path root_;
};

RunConfig soliton_config() {
  RunConfig c;
  c.x_min = -30;
  c.x_max = 30;
  c.dx = 0.02;
  c.z_count = 101;
  c.poles = {PoleSpec{1, {0.5, 0.8}, {2, 1}}};
  return c;
}

std::vector<std::vector<double>> csv_rows(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> r;
    std::istringstream cells(line);
    for (std::string c; std::getline(cells, c, ',');) r.push_back(std::stod(c));
    rows.push_back(r);
  }
  return rows;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST(Config, RoundTripsLosslessly) {
  RunConfig c;
  c.a = {1.25, 0.1, -1.35};
  c.b = {-0.7, 1.0 / 3.0, 0.3666666666666667};
  c.x_min = -33.3;
  c.dx = 0.1 / 3.0;
  c.poles = {PoleSpec{1, {0.5, 0.8}, {2, 1}}, PoleSpec{2, {-0.1, 1e-2}, {-3e-7, 0.125}}};
  c.bumps = {BumpSpec{Channel::p23, {0.05, -0.01}, 10, 1}};
  c.random = RandomBumps{4, 0.5, 8, 0.7, 2.2};
  c.dealias = true;
  c.soliton_times = {0, 0.1, 2.5e-3};
  c.soliton_source = "scattering";
  c.cones = {make_cone(-2, 3, 1.25, 1.75), make_cone(0, 0, -1, 1)};
  c.resolve_reference = "scatter";
  c.fit_t_max = 40;
  c.output_dir = "runs/a b";
  c.seed = 18446744073709551615ull;
  std::string text = write_config(c);
  RunConfig back = parse_config(text);
  EXPECT_TRUE(back == c);
  EXPECT_EQ(write_config(back), text);
  EXPECT_TRUE(parse_config(write_config(RunConfig{})) == RunConfig{});
}

TEST(Config, CommentsAndDefaults) {
  RunConfig c = parse_config("# run\n\n  grid.dx = 0.05   # coarse\nevolution.t_end=2\n");
  EXPECT_EQ(c.dx, 0.05);
  EXPECT_EQ(c.t_end, 2.0);
  EXPECT_EQ(c.z_count, 401u);
}

TEST(Config, RejectsMalformedInput) {
  for (const char* text : {"grid.dx = 0.1\ngrid.dx = 0.2\n", "grid.spacing = 0.1\n", "grid.dx = abc\n",
                           "system.a = 1 0\n", "initial.poles = 3 0 1 1 0\n", "initial.bumps = p14 1 0 0 1\n",
                           "cones = 1 -1 0 1\n", "spectral.count = -4\n", "evolution.snapshot_stride = 0\n",
                           "initial.kind = file\n", "just words\n"})
    EXPECT_EQ(kind_of([&] { parse_config(text); }), ErrorKind::ConfigError) << text;
}

TEST_F(Workdir, FieldCsvRoundTripIsBitIdentical) {
  RunConfig c = soliton_config();
  c.random = RandomBumps{5, 0.3, 10, 0.5, 2};
  FieldState f = initial_field(c);
  std::string path = dir("f.csv");
  write_field_csv(path, f);
  FieldState g = read_field_csv(path);
  EXPECT_EQ(g.grid.count, f.grid.count);
  EXPECT_EQ(g.p12, f.p12);
  EXPECT_EQ(g.p13, f.p13);
  EXPECT_EQ(g.p23, f.p23);
  EXPECT_EQ(first_line(read_text(path)), "x,re_p12,im_p12,re_p13,im_p13,re_p23,im_p23");

  RunConfig fc;
  fc.initial_kind = "file";
  fc.initial_file = path;
  EXPECT_EQ(initial_field(fc).p13, f.p13);
}

TEST_F(Workdir, RandomBumpsHonourSupAndSeed) {
  RunConfig c;
  c.random = RandomBumps{6, 0.5, 10, 0.5, 2};
  FieldState a = initial_field(c);
  EXPECT_NEAR(a.sup_norm(), 0.5, 1e-15);
  EXPECT_EQ(initial_field(c).p12, a.p12);
  c.seed = 2;
  EXPECT_NE(initial_field(c).p12, a.p12);
}

TEST_F(Workdir, ScatterZeroData) {
  RunConfig c;
  c.z_count = 41;
  ASSERT_EQ(run_command("scatter", c, dir("out")), 0);
  std::string refl = read_text(file("out", "reflection.csv"));
  EXPECT_EQ(first_line(refl), "z,re_r1,im_r1,re_r2,im_r2,re_r3,im_r3,re_r4,im_r4");
  auto rows = csv_rows(refl);
  ASSERT_EQ(rows.size(), 41u);
  for (const auto& r : rows)
    for (std::size_t k = 1; k < r.size(); ++k) EXPECT_EQ(r[k], 0.0);
  json j = read_json(file("out", "scattering.json"));
  EXPECT_TRUE(j["poles"].empty());
}

TEST_F(Workdir, ScatterOneSolitonSchema) {
  ASSERT_EQ(run_command("scatter", soliton_config(), dir("out")), 0);
  json j = read_json(file("out", "scattering.json"));
  EXPECT_EQ(j["system"]["a"].size(), 3u);
  EXPECT_EQ(j["system"]["b"].size(), 3u);
  ASSERT_EQ(j["poles"].size(), 1u);
  const json& p = j["poles"][0];
  for (const char* key : {"re_z", "im_z", "re_c", "im_c", "re_ct", "im_ct", "class"}) EXPECT_TRUE(p.contains(key)) << key;
  EXPECT_EQ(p["class"], 1);
  EXPECT_NEAR(p["im_z"].get<double>(), 0.8, 1e-6);
  for (const char* key : {"detS_max_dev", "symmetry_max_dev", "closure_max_dev"})
    EXPECT_TRUE(j["checks"].contains(key)) << key;
  json checks = read_json(file("out", "checks.json"));
  EXPECT_LT(checks["closure_max_dev"].get<double>(), 1e-6);
  EXPECT_EQ(checks["pole_count"], 1);
}

TEST_F(Workdir, GuardsBecomeExitCodesAndErrorRecords) {
  RunConfig c = soliton_config();
  c.poles[0].z = {0.5, 5e-4};
  EXPECT_EQ(run_command("scatter", c, dir("sing")), kExitNumerical);
  json e = read_json(file("sing", "error.json"));
  EXPECT_EQ(e["kind"], "SpectralSingularity");
  EXPECT_EQ(e["command"], "scatter");
  EXPECT_EQ(e["exit_code"], 3);

  RunConfig bad;
  bad.b = {0, 0, 0};
  EXPECT_EQ(run_command("evolve", bad, dir("bad")), kExitConfig);
  EXPECT_EQ(read_json(file("bad", "error.json"))["kind"], "ConfigError");

  EXPECT_EQ(run_command("resolve", RunConfig{}, dir("nocone")), kExitConfig);
  EXPECT_EQ(run_command("frobnicate", RunConfig{}, dir("cmd")), kExitConfig);
  EXPECT_EQ(exit_code_for(ErrorKind::InvariantViolated), kExitInvariant);
}

TEST_F(Workdir, SolitonsEmptyEnsembleIsZero) {
  RunConfig c;
  c.soliton_times = {0, 1.5};
  ASSERT_EQ(run_command("solitons", c, dir("out")), 0);
  for (const char* name : {"soliton_t0.csv", "soliton_t1.5.csv"})
    for (const auto& r : csv_rows(read_text(file("out", name))))
      for (std::size_t k = 1; k < r.size(); ++k) EXPECT_EQ(r[k], 0.0);
}

TEST_F(Workdir, SolitonsShiftRigidly) {
  RunConfig c = soliton_config();
  c.soliton_times = {0, 1};
  ASSERT_EQ(run_command("solitons", c, dir("out")), 0);
  auto a = csv_rows(read_text(file("out", "soliton_t0.csv")));
  auto b = csv_rows(read_text(file("out", "soliton_t1.csv")));
  // Class-1 velocity -n12 = 1.5, i.e. 75 cells.
  double m = 0.0;
  for (std::size_t k = 0; k + 75 < a.size(); ++k)
    for (std::size_t col = 1; col < 7; ++col) m = std::max(m, std::abs(b[k + 75][col] - a[k][col]));
  EXPECT_LT(m, 1e-10);
}

TEST_F(Workdir, SolitonsFromScatteringFile) {
  RunConfig c = soliton_config();
  c.soliton_times = {2};
  ASSERT_EQ(run_command("solitons", c, dir("cfg")), 0);
  ASSERT_EQ(run_command("scatter", c, dir("sc")), 0);
  c.soliton_source = "scattering";
  ASSERT_EQ(run_command("solitons", c, dir("sc")), 0);
  auto a = csv_rows(read_text(file("cfg", "soliton_t2.csv")));
  auto b = csv_rows(read_text(file("sc", "soliton_t2.csv")));
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t col = 1; col < 7; ++col) m = std::max(m, std::abs(b[k][col] - a[k][col]));
  EXPECT_LT(m, 1e-4);
  EXPECT_EQ(run_command("solitons", c, dir("missing")), kExitConfig);
}

TEST_F(Workdir, EvolveZeroDuration) {
  RunConfig c = soliton_config();
  ASSERT_EQ(run_command("evolve", c, dir("out")), 0);
  std::size_t snaps = 0;
  for (const auto& e : fs::directory_iterator(dir("out")))
    if (e.path().filename().string().rfind("snapshot_t", 0) == 0) ++snaps;
  EXPECT_EQ(snaps, 1u);
  EXPECT_EQ(csv_rows(read_text(file("out", "diagnostics.csv"))).size(), 1u);
  EXPECT_EQ(first_line(read_text(file("out", "invariance.csv"))), "t,dev_r1,dev_r2,dev_r3,dev_r4,dev_S,dev_s12_phase");
}

TEST_F(Workdir, EvolveMatchesSolitonsCommand) {
  RunConfig c = soliton_config();
  c.x_min = -40;
  c.x_max = 40;
  c.t_end = 1;
  c.soliton_times = {1};
  c.z_count = 41;
  ASSERT_EQ(run_command("evolve", c, dir("out")), 0);
  ASSERT_EQ(run_command("solitons", c, dir("out")), 0);
  auto a = csv_rows(read_text(file("out", "snapshot_t1.csv")));
  auto b = csv_rows(read_text(file("out", "soliton_t1.csv")));
  ASSERT_EQ(a.size(), b.size());
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t col = 1; col < 7; ++col) m = std::max(m, std::abs(b[k][col] - a[k][col]));
  EXPECT_LT(m, 1e-4);
  for (const auto& r : csv_rows(read_text(file("out", "invariance.csv"))))
    for (std::size_t col = 1; col < 5; ++col) EXPECT_LT(r[col], 1e-3);
}

TEST_F(Workdir, ResolveReportsFloorInsideCone) {
  RunConfig c = soliton_config();
  c.x_min = -30;
  c.x_max = 40;
  c.t_end = 6;
  c.dt = 2e-3;
  c.snapshot_stride = 250;
  c.cones = {make_cone(-2, 3, 1.25, 1.75)};
  c.fit_t_min = 0;
  ASSERT_EQ(run_command("resolve", c, dir("out")), 0);
  json r = read_json(file("out", "rates.json"));
  ASSERT_EQ(r["cones"].size(), 1u);
  const json& k = r["cones"][0];
  EXPECT_EQ(k["retained"], 1);
  EXPECT_EQ(k["cone_error"]["status"], "floor");
  EXPECT_TRUE(k["cone_error"]["rate"].is_null());
  EXPECT_EQ(k["cone_error"]["model"], "power");
  EXPECT_EQ(k["separation"]["model"], "exponential");
  EXPECT_TRUE(k["mu_I"].is_null());
  EXPECT_EQ(csv_rows(read_text(file("out", "cone_0.csv"))).size(), 13u);
  EXPECT_EQ(first_line(read_text(file("out", "separation_0.csv"))), "t,error");
}

TEST_F(Workdir, ResolveExcludedPoleRate) {
  RunConfig c;
  c.x_min = -20;
  c.x_max = 40;
  c.z_count = 41;
  c.poles = {PoleSpec{1, {0, 1}, {1, 0}}};
  c.t_end = 10;
  c.dt = 2e-3;
  c.snapshot_stride = 500;
  c.cones = {make_cone(-1, 1, -0.5, 0.5)};
  c.fit_t_min = 3;
  ASSERT_EQ(run_command("resolve", c, dir("out")), 0);
  json k = read_json(file("out", "rates.json"))["cones"][0];
  EXPECT_EQ(k["retained"], 0);
  ASSERT_EQ(k["separation"]["status"], "fitted");
  EXPECT_LE(k["separation"]["rate"].get<double>(), -0.5 * k["a"].get<double>() * k["mu_I"].get<double>());
}

TEST_F(Workdir, CheckPassesOnSolitonData) {
  RunConfig c = soliton_config();
  EXPECT_EQ(run_command("check", c, dir("out")), 0);
  json j = read_json(file("out", "checks.json"));
  EXPECT_TRUE(j["pass"].get<bool>());
  std::vector<std::string> names;
  for (const auto& e : j["checks"]) names.push_back(e["name"]);
  for (const char* n : {"detS_max_dev", "closure_max_dev", "pole_z_max_err", "pole_c_max_rel_err", "rh_residual_max",
                        "skew_hermitian_max", "reversibility_max"})
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
}

TEST_F(Workdir, CommandsAreByteDeterministic) {
  RunConfig c = soliton_config();
  c.random = RandomBumps{3, 0.1, 5, 0.7, 1.5};
  c.x_min = -40;
  c.x_max = 40;
  c.t_end = 0.2;
  c.snapshot_stride = 100;
  c.z_count = 41;
  c.soliton_times = {0.5};
  for (const char* cmd : {"scatter", "solitons", "evolve"}) {
    set_thread_count(4);
    ASSERT_EQ(run_command(cmd, c, dir("a")), 0) << cmd;
    set_thread_count(1);
    ASSERT_EQ(run_command(cmd, c, dir("b")), 0) << cmd;
  }
  set_thread_count(0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir("a"))) {
    ++files;
    EXPECT_EQ(read_text(e.path().string()), read_text(file("b", e.path().filename().string())))
        << e.path().filename();
  }
  EXPECT_GE(files, 8u);
}
