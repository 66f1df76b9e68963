#pragma once

// Subcommand dispatch with run manifests, structured errors and exit codes.

#include <iosfwd>
#include <string>
#include <vector>

#include "bdf/config.hpp"

namespace bdf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonConvergence = 3;
inline constexpr int kExitInvariant = 4;

/// free-vacuum, vacuum, ground-state, hvz-scan, report, weak-coupling, nonrel-limit,
/// decompose, selftest.
const std::vector<std::string>& subcommands();

/// Runs one subcommand, writing artifacts plus manifest.json (and error.json on failure)
/// into cfg.output_dir. Returns the process exit code.
int run_subcommand(const std::string& name, const RunConfig& cfg, const std::vector<std::string>& argv,
                   std::ostream& out, std::ostream& err);

}  // namespace bdf
