#include "bdf/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Core>
#include <yaml-cpp/yaml.h>

#include "bdf/linalg.hpp"

namespace bdf {

namespace {

using Keys = std::set<std::string>;

void check_keys(const YAML::Node& node, const Keys& allowed, const std::string& where) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      std::ostringstream os;
      os << "unknown key '" << key << "' in " << where << " (allowed:";
      for (const auto& k : allowed) os << ' ' << k;
      os << ')';
      throw ConfigError(os.str());
    }
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for " + where + "." + key);
  }
}

Nucleus parse_nucleus(const YAML::Node& n, const std::string& where) {
  check_keys(n, {"charge", "width", "center"}, where);
  Nucleus nuc;
  read(n, "charge", nuc.charge, where);
  read(n, "width", nuc.width, where);
  if (n["center"]) {
    std::vector<double> c;
    read(n, "center", c, where);
    if (c.size() != 3) throw ConfigError(where + ".center needs three coordinates");
    nuc.center = RVec3(c[0], c[1], c[2]);
  }
  return nuc;
}

}  // namespace

std::string zero_mode_name(ZeroModeRule rule) {
  return rule == ZeroModeRule::Madelung ? "madelung" : "neutral";
}

ZeroModeRule parse_zero_mode(const std::string& name) {
  if (name == "madelung") return ZeroModeRule::Madelung;
  if (name == "neutral") return ZeroModeRule::Neutral;
  throw ConfigError("zero_mode must be 'madelung' or 'neutral', got '" + name + "'");
}

void RunConfig::validate() const {
  if (!(lattice.box_length > 0.0)) throw ConfigError("lattice.box_length must be positive");
  if (!(lattice.cutoff > 0.0)) throw ConfigError("lattice.cutoff must be positive");
  if (lattice.lambda0 && !(*lattice.lambda0 > 0.0)) throw ConfigError("lattice.lambda0 must be positive");
  if (lattice.spinor_dim != 4 && lattice.spinor_dim != 2) throw ConfigError("lattice.spinor_dim must be 2 or 4");
  if (lattice.max_total_dim == 0) throw ConfigError("lattice.max_total_dim must be positive");
  check_alpha(model.alpha);
  if (!(model.c > 0.0)) throw ConfigError("model.c must be positive");
  for (const auto& n : model.nuclei)
    if (!(n.width > 0.0)) throw ConfigError("nucleus width must be positive");
  for (double a : task.alphas) check_alpha(a);
  for (double c : task.c_values)
    if (!(c > 0.0)) throw ConfigError("task.c_values must be positive");
  if (!(task.q_step > 0.0)) throw ConfigError("task.q_step must be positive");
  if (task.q_min > task.q_max) throw ConfigError("task.q_min exceeds task.q_max");
  if (!(task.scaling_c > 0.0)) throw ConfigError("task.scaling_c must be positive");
  if (task.radial_points < 2) throw ConfigError("task.radial_points must be at least 2");
  if (task.jobs < 1) throw ConfigError("task.jobs must be at least 1");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  solver.validate();
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  RunConfig cfg;
  if (root.IsNull()) {
    cfg.validate();
    return cfg;
  }
  check_keys(root, {"lattice", "model", "solver", "task", "seed", "output_dir"}, origin);

  if (const auto l = root["lattice"]) {
    const std::string w = "lattice";
    check_keys(l, {"box_length", "cutoff", "lambda0", "spinor_dim", "max_total_dim"}, w);
    read(l, "box_length", cfg.lattice.box_length, w);
    read(l, "cutoff", cfg.lattice.cutoff, w);
    if (l["lambda0"]) {
      double v = 0.0;
      read(l, "lambda0", v, w);
      cfg.lattice.lambda0 = v;
    }
    read(l, "spinor_dim", cfg.lattice.spinor_dim, w);
    read(l, "max_total_dim", cfg.lattice.max_total_dim, w);
  }
  if (const auto m = root["model"]) {
    const std::string w = "model";
    check_keys(m, {"alpha", "c", "zero_mode", "nuclei"}, w);
    read(m, "alpha", cfg.model.alpha, w);
    read(m, "c", cfg.model.c, w);
    if (m["zero_mode"]) {
      std::string z;
      read(m, "zero_mode", z, w);
      cfg.model.zero_mode = parse_zero_mode(z);
    }
    if (const auto ns = m["nuclei"]) {
      if (!ns.IsSequence()) throw ConfigError("model.nuclei must be a list");
      cfg.model.nuclei.clear();
      for (std::size_t i = 0; i < ns.size(); ++i)
        cfg.model.nuclei.push_back(parse_nucleus(ns[i], "model.nuclei[" + std::to_string(i) + "]"));
    }
  }
  if (const auto s = root["solver"]) {
    const std::string w = "solver";
    check_keys(s, {"tol_residual", "tol_charge", "max_iter", "damping", "theta", "level_shift",
                   "charge_cap", "degeneracy_tol", "recompute_every", "purify_rounds",
                   "checkpoint_every"},
               w);
    auto& c = cfg.solver;
    read(s, "tol_residual", c.tol_residual, w);
    read(s, "tol_charge", c.tol_charge, w);
    read(s, "max_iter", c.max_iter, w);
    if (s["damping"]) {
      std::string d;
      read(s, "damping", d, w);
      if (d == "optimal") c.damping = Damping::OptimalStep;
      else if (d == "fixed") c.damping = Damping::Fixed;
      else throw ConfigError("solver.damping must be 'optimal' or 'fixed'");
    }
    read(s, "theta", c.theta, w);
    read(s, "level_shift", c.level_shift, w);
    read(s, "charge_cap", c.charge_cap, w);
    read(s, "degeneracy_tol", c.degeneracy_tol, w);
    read(s, "recompute_every", c.recompute_every, w);
    read(s, "purify_rounds", c.purify_rounds, w);
    read(s, "checkpoint_every", c.checkpoint_every, w);
  }
  if (const auto t = root["task"]) {
    const std::string w = "task";
    check_keys(t, {"charge", "q_min", "q_max", "q_step", "electrons", "alphas", "c_values", "scaling_c",
                   "input", "radial_points", "jobs"},
               w);
    auto& k = cfg.task;
    read(t, "charge", k.charge, w);
    read(t, "q_min", k.q_min, w);
    read(t, "q_max", k.q_max, w);
    read(t, "q_step", k.q_step, w);
    read(t, "electrons", k.electrons, w);
    read(t, "alphas", k.alphas, w);
    read(t, "c_values", k.c_values, w);
    read(t, "scaling_c", k.scaling_c, w);
    read(t, "input", k.input, w);
    read(t, "radial_points", k.radial_points, w);
    read(t, "jobs", k.jobs, w);
  }
  if (root["seed"]) read(root, "seed", cfg.seed, origin);
  if (root["output_dir"]) read(root, "output_dir", cfg.output_dir, origin);
  cfg.validate();
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json nuclei = nlohmann::json::array();
  for (const auto& n : cfg.model.nuclei)
    nuclei.push_back({{"charge", n.charge},
                      {"width", n.width},
                      {"center", {n.center.x(), n.center.y(), n.center.z()}}});
  nlohmann::json lattice = {{"box_length", cfg.lattice.box_length},
                            {"cutoff", cfg.lattice.cutoff},
                            {"spinor_dim", cfg.lattice.spinor_dim},
                            {"max_total_dim", cfg.lattice.max_total_dim}};
  if (cfg.lattice.lambda0) lattice["lambda0"] = *cfg.lattice.lambda0;
  const auto& s = cfg.solver;
  return {{"lattice", lattice},
          {"model",
           {{"alpha", cfg.model.alpha},
            {"c", cfg.model.c},
            {"zero_mode", zero_mode_name(cfg.model.zero_mode)},
            {"nuclei", nuclei}}},
          {"solver",
           {{"tol_residual", s.tol_residual},
            {"tol_charge", s.tol_charge},
            {"max_iter", s.max_iter},
            {"damping", s.damping == Damping::OptimalStep ? "optimal" : "fixed"},
            {"theta", s.theta},
            {"level_shift", s.level_shift},
            {"charge_cap", s.charge_cap},
            {"degeneracy_tol", s.degeneracy_tol},
            {"recompute_every", s.recompute_every},
            {"purify_rounds", s.purify_rounds},
            {"checkpoint_every", s.checkpoint_every}}},
          {"task",
           {{"charge", cfg.task.charge},
            {"q_min", cfg.task.q_min},
            {"q_max", cfg.task.q_max},
            {"q_step", cfg.task.q_step},
            {"electrons", cfg.task.electrons},
            {"alphas", cfg.task.alphas},
            {"c_values", cfg.task.c_values},
            {"scaling_c", cfg.task.scaling_c},
            {"input", cfg.task.input},
            {"radial_points", cfg.task.radial_points},
            {"jobs", cfg.task.jobs}}},
          {"seed", cfg.seed},
          {"output_dir", cfg.output_dir}};
}

nlohmann::json build_versions() {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  std::ostringstream json_v;
  json_v << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.'
         << NLOHMANN_JSON_VERSION_PATCH;
  return {{"bdflab", "1.0.0"},
          {"compiler", __VERSION__},
          {"cxx_standard", __cplusplus},
          {"eigen", eigen.str()},
          {"nlohmann_json", json_v.str()},
          {"eigensolver", eigensolver_backend()}};
}

}  // namespace bdf
