#pragma once

// Run configuration: a strict YAML schema, flag overrides and the run manifest.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bdf/core.hpp"
#include "bdf/energy.hpp"
#include "bdf/lattice.hpp"
#include "bdf/scf.hpp"

namespace bdf {

struct LatticeBlock {
  double box_length = 8.0;
  double cutoff = 2.0;
  /// When set, the cutoff is lambda0 * c.
  std::optional<double> lambda0;
  int spinor_dim = 4;
  std::size_t max_total_dim = MomentumLattice::kDefaultMaxTotalDim;

  double resolved_cutoff(double c) const { return lambda0 ? *lambda0 * c : cutoff; }
};

struct ModelBlock {
  double alpha = 0.3;
  double c = 1.0;
  ZeroModeRule zero_mode = ZeroModeRule::Madelung;
  std::vector<Nucleus> nuclei{Nucleus{}};
};

struct TaskBlock {
  double charge = 0.0;
  double q_min = -2.0;
  double q_max = 3.0;
  double q_step = 0.5;
  /// Electron number for binding, weak coupling, non-relativistic and scaling runs.
  int electrons = 1;
  std::vector<double> alphas{0.2, 0.1, 0.05};
  std::vector<double> c_values{5.0, 10.0, 20.0};
  double scaling_c = 2.0;
  std::string input;
  int radial_points = 12;
  int jobs = 1;
};

struct RunConfig {
  LatticeBlock lattice;
  ModelBlock model;
  ScfConfig solver;
  TaskBlock task;
  std::uint64_t seed = 12345;
  std::string output_dir = "bdflab-out";

  void validate() const;
  ExternalDensity nuclei() const { return ExternalDensity(model.nuclei); }
};

/// Parses YAML text. Unknown keys and out-of-range values throw ConfigError.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig parse_config_file(const std::filesystem::path& path);

/// Fully resolved configuration as JSON (the manifest echo).
nlohmann::json to_json(const RunConfig& cfg);

std::string zero_mode_name(ZeroModeRule rule);
ZeroModeRule parse_zero_mode(const std::string& name);

/// Versions of the toolchain and libraries the binary was built with.
nlohmann::json build_versions();

}  // namespace bdf
