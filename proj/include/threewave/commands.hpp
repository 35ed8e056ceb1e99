#pragma once

#include <string>

#include "threewave/config.hpp"

namespace threewave {

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitInvariant = 4 };

int exit_code_for(ErrorKind kind);

void cmd_scatter(const RunConfig& cfg, const std::string& out_dir);
void cmd_solitons(const RunConfig& cfg, const std::string& out_dir);
void cmd_evolve(const RunConfig& cfg, const std::string& out_dir);
void cmd_resolve(const RunConfig& cfg, const std::string& out_dir);
// Returns false when a measured invariant exceeds its tolerance.
bool cmd_check(const RunConfig& cfg, const std::string& out_dir);

// Runs one subcommand, writing error.json on failure; returns the process exit code.
int run_command(const std::string& name, const RunConfig& cfg, const std::string& out_dir);

}  // namespace threewave
