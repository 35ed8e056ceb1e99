#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "threewave/commands.hpp"
#include "threewave/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Three-wave inverse scattering toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--threads", threads, "worker threads, 0 = all cores");

  const char* names[] = {"scatter", "solitons", "evolve", "resolve", "check"};
  const char* help[] = {"scattering data, reflection coefficients and residual checks",
                        "N-soliton snapshots at solitons.times",
                        "direct PDE evolution with invariance report",
                        "cone errors, separation series and fitted rates",
                        "full invariant suite"};
  for (int k = 0; k < 5; ++k) app.add_subcommand(names[k], help[k]);

  CLI11_PARSE(app, argc, argv);

  threewave::set_thread_count(threads);
  threewave::RunConfig cfg;
  try {
    cfg = threewave::load_config(config_path);
  } catch (const threewave::Error& e) {
    std::cerr << "config: " << e.what() << "\n";
    return threewave::kExitConfig;
  }
  if (out_dir.empty()) out_dir = cfg.output_dir;
  std::string name = app.get_subcommands().front()->get_name();
  return threewave::run_command(name, cfg, out_dir);
}
