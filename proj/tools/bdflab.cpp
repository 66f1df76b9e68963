// bdflab: command-line entry point for every BDF workflow.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bdf/config.hpp"
#include "bdf/runner.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<double> charge, q_min, q_max, q_step, lambda0, alpha, c;
  std::optional<int> electrons, jobs;
  std::vector<double> alphas, c_values;
  std::string input, output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_total_dim;
  bool full = false;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "YAML run configuration")->check(CLI::ExistingFile);
  sub->add_option("--output-dir", o.output_dir, "Run directory (overrides BDFLAB_OUTPUT_DIR and the file)");
  sub->add_option("--seed", o.seed, "Seed for randomized checks");
  sub->add_option("--jobs", o.jobs, "Worker thread cap");
  sub->add_option("--max-total-dim", o.max_total_dim, "Lattice dimension cap");
  sub->add_option("--alpha", o.alpha, "Coupling constant");
  sub->add_option("--c", o.c, "Speed of light");
}

bdf::RunConfig resolve(const Overrides& o) {
  bdf::RunConfig cfg = o.config.empty() ? bdf::RunConfig{} : bdf::parse_config_file(o.config);
  if (const char* env = std::getenv("BDFLAB_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
  if (o.seed) cfg.seed = *o.seed;
  if (o.jobs) cfg.task.jobs = *o.jobs;
  if (o.max_total_dim) cfg.lattice.max_total_dim = *o.max_total_dim;
  if (o.alpha) cfg.model.alpha = *o.alpha;
  if (o.c) cfg.model.c = *o.c;
  if (o.charge) cfg.task.charge = *o.charge;
  if (o.q_min) cfg.task.q_min = *o.q_min;
  if (o.q_max) cfg.task.q_max = *o.q_max;
  if (o.q_step) cfg.task.q_step = *o.q_step;
  if (o.electrons) cfg.task.electrons = *o.electrons;
  if (o.lambda0) cfg.lattice.lambda0 = *o.lambda0;
  if (!o.alphas.empty()) cfg.task.alphas = o.alphas;
  if (!o.c_values.empty()) cfg.task.c_values = o.c_values;
  if (!o.input.empty()) cfg.task.input = o.input;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bdflab: Bogoliubov-Dirac-Fock mean-field QED solver"};
  app.require_subcommand(1);
  Overrides o;

  auto* free_vacuum = app.add_subcommand("free-vacuum", "Solve the free vacuum symbol (radial and lattice)");
  auto* vacuum = app.add_subcommand("vacuum", "Global minimizer with the nucleus present");
  auto* ground = app.add_subcommand("ground-state", "Charge-constrained minimizer");
  auto* hvz = app.add_subcommand("hvz-scan", "Energy curve E(q) with binding diagnostics");
  auto* report = app.add_subcommand("report", "Binding-margin table from a previous hvz-scan");
  auto* weak = app.add_subcommand("weak-coupling", "Convergence to the linear model as alpha -> 0");
  auto* nonrel = app.add_subcommand("nonrel-limit", "Convergence to Hartree-Fock as c -> infinity");
  auto* decompose = app.add_subcommand("decompose", "Pair decomposition of a stored projector state");
  auto* selftest = app.add_subcommand("selftest", "Run the acceptance criteria");

  for (auto* s : {free_vacuum, vacuum, ground, hvz, report, weak, nonrel, decompose, selftest}) add_common(s, o);
  for (auto* s : {vacuum, ground})
    s->add_option("--resume", o.input, "Start from a stored state (checkpoint.bin or state.bin)")
        ->check(CLI::ExistingFile);
  ground->add_option("--charge", o.charge, "Total charge q");
  hvz->add_option("--q-min", o.q_min, "Lowest charge");
  hvz->add_option("--q-max", o.q_max, "Highest charge");
  hvz->add_option("--q-step", o.q_step, "Charge step");
  for (auto* s : {hvz, weak, nonrel}) s->add_option("--electrons", o.electrons, "Electron number N");
  weak->add_option("--alphas", o.alphas, "Couplings to scan")->delimiter(',');
  nonrel->add_option("--c-values", o.c_values, "Speeds of light to scan")->delimiter(',');
  nonrel->add_option("--lambda0", o.lambda0, "Cutoff in units of c");
  decompose->add_option("--input", o.input, "State file")->check(CLI::ExistingFile);
  selftest->add_flag("--full", o.full, "Full problem sizes instead of the quick profile");

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  const std::vector<std::string> args(argv, argv + argc);
  bdf::RunConfig cfg;
  try {
    cfg = resolve(o);
  } catch (const bdf::ConfigError& e) {
    std::cerr << "bdflab " << name << ": config_error: " << e.what() << "\n";
    return bdf::kExitConfig;
  }
  return bdf::run_subcommand(name, cfg, args, std::cout, std::cerr);
}
