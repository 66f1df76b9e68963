#include "bdf/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "bdf/acceptance.hpp"
#include "bdf/free_vacuum.hpp"
#include "bdf/hvz.hpp"
#include "bdf/io.hpp"
#include "bdf/limits.hpp"
#include "bdf/scf.hpp"
#include "bdf/state_structure.hpp"

namespace bdf {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct Context {
  const RunConfig& cfg;
  fs::path dir;
  std::ostream& out;

  double c() const { return cfg.model.c; }
  std::shared_ptr<const MomentumLattice> lattice(int spinor_dim = 0) const {
    return std::make_shared<const MomentumLattice>(cfg.lattice.box_length, cfg.lattice.resolved_cutoff(c()),
                                                   spinor_dim ? spinor_dim : cfg.lattice.spinor_dim,
                                                   cfg.lattice.max_total_dim);
  }
  FreeVacuum vacuum(std::shared_ptr<const MomentumLattice> lat) const {
    if (lat->spinor_dim() != 4) throw ConfigError("BDF runs need lattice.spinor_dim = 4");
    return solve_vacuum_lattice(lat, cfg.model.alpha, c(), {}, cfg.model.zero_mode);
  }
  void write_csv(const std::string& name, const std::string& text) const { write_text(dir / name, text); }
};

void save_state(const Context& ctx, const std::string& name, const MomentumLattice& lat, const Mat& Q) {
  StateFile s;
  s.box_length = lat.box_length();
  s.cutoff = lat.cutoff();
  s.spinor_dim = lat.spinor_dim();
  s.Q = Q;
  write_state(ctx.dir / name, s);
}

std::optional<Mat> resume_state(const Context& ctx, const MomentumLattice& lat) {
  if (ctx.cfg.task.input.empty()) return std::nullopt;
  const StateFile s = read_state(ctx.cfg.task.input);
  if (s.spinor_dim != lat.spinor_dim() || s.Q.rows() != Index(lat.total_dim()) ||
      std::abs(s.box_length - lat.box_length()) > 1e-12 || std::abs(s.cutoff - lat.cutoff()) > 1e-12)
    throw ConfigError("resume state " + ctx.cfg.task.input + " was written for a different lattice");
  return s.Q;
}

void require_converged(const ScfReport& r) {
  if (!r.converged) {
    std::ostringstream os;
    os << "SCF did not converge in " << r.iterations << " iterations (residual " << r.residual << ")";
    throw NonConvergence(os.str());
  }
}

ScfConfig with_checkpoints(const Context& ctx, const std::shared_ptr<const MomentumLattice>& lat) {
  ScfConfig sc = ctx.cfg.solver;
  if (sc.checkpoint_every > 0) {
    const Context* c = &ctx;
    sc.checkpoint = [c, lat](const Mat& Q, const ScfReport& r) {
      save_state(*c, "checkpoint.bin", *lat, Q);
      write_json(c->dir / "checkpoint.json", {{"iteration", r.iterations}, {"energy", r.energy}, {"residual", r.residual}});
    };
  }
  return sc;
}

json cmd_free_vacuum(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double cutoff = cfg.lattice.resolved_cutoff(ctx.c());
  const RadialGrid grid = make_radial_grid(cutoff, ctx.c(), cfg.task.radial_points);
  const VacuumSymbol sym = solve_symbol_radial(cfg.model.alpha, cutoff, ctx.c(), grid);
  std::ostringstream csv;
  write_symbol_csv(csv, sym);
  ctx.write_csv("symbol.csv", csv.str());
  json j = {{"radial",
             {{"g0_zero", sym.g0_at(0.0)},
              {"first_order", ctx.c() * ctx.c() * (1.0 + cfg.model.alpha / kPi * std::asinh(cutoff / ctx.c()))},
              {"threshold", to_json(threshold(sym))},
              {"iterations", sym.iterations},
              {"nodes", sym.grid.size()}}}};
  if (ctx.c() == 1.0) j["radial"]["chain_violations"] = count_chain_violations(sym);

  const auto lat = ctx.lattice(4);
  const FreeVacuum vac = ctx.vacuum(lat);
  std::ostringstream lcsv;
  lcsv << std::setprecision(17) << "kx,ky,kz,p,g0,g1\n";
  for (std::size_t i = 0; i < lat->size(); ++i) {
    const RVec3 k = lat->momentum(i);
    lcsv << k.x() << ',' << k.y() << ',' << k.z() << ',' << k.norm() << ',' << vac.g0(i) << ',' << vac.g1(i) << '\n';
  }
  ctx.write_csv("lattice_symbol.csv", lcsv.str());
  j["lattice"] = {{"modes", lat->size()},
                  {"g0_zero", vac.g0_zero()},
                  {"threshold", to_json(vac.threshold())},
                  {"iterations", vac.iterations}};
  ctx.out << "g0(0) radial " << sym.g0_at(0.0) << ", lattice " << vac.g0_zero() << " on " << lat->size()
          << " modes; threshold " << vac.threshold().value << "\n";
  return j;
}

json scf_summary(const Context& ctx, const Model& model, const ScfResult& r, const FreeVacuum& vac) {
  json j = to_json(r.report, true);
  j["mass_gap"] = model.mass_gap;
  j["g0_zero"] = vac.g0_zero();
  j["modes"] = model.lattice->size();
  std::ostringstream dcsv;
  write_density_csv(dcsv, density(r.Q, model.lattice));
  ctx.write_csv("density.csv", dcsv.str());
  save_state(ctx, "state.bin", *model.lattice, r.Q);
  return j;
}

json cmd_vacuum(const Context& ctx) {
  const auto lat = ctx.lattice();
  const FreeVacuum vac = ctx.vacuum(lat);
  const Model model = bdf_model(vac, ctx.cfg.nuclei());
  const auto init = resume_state(ctx, *lat);
  const ScfResult r = minimize_global(model, with_checkpoints(ctx, lat), init ? &*init : nullptr);
  json j = scf_summary(ctx, model, r, vac);
  write_json(ctx.dir / "scf_report.json", j);
  ctx.out << "vacuum: E=" << std::setprecision(12) << r.report.energy << " charge=" << r.report.charge
          << " residual=" << r.report.residual << " iterations=" << r.report.iterations << "\n";
  require_converged(r.report);
  return j;
}

json cmd_ground_state(const Context& ctx) {
  const auto lat = ctx.lattice();
  const FreeVacuum vac = ctx.vacuum(lat);
  const Model model = bdf_model(vac, ctx.cfg.nuclei());
  ScfConfig sc = with_checkpoints(ctx, lat);
  sc.target_charge = ctx.cfg.task.charge;
  const auto init = resume_state(ctx, *lat);
  const ScfResult r = minimize_charge(model, sc, init ? &*init : nullptr);
  json j = scf_summary(ctx, model, r, vac);
  require_converged(r.report);
  const SolutionDecomposition d = decompose_solution(model, r.Q, r.report);
  j["orbital_energies"] = std::vector<double>(d.orbital_energies.begin(), d.orbital_energies.end());
  j["vacuum_charge"] = d.vacuum_charge;
  j["charged_vacuum"] = d.charged_vacuum;
  j["orbital_residual"] = d.max_residual;
  write_json(ctx.dir / "scf_report.json", j);
  ctx.out << "ground state q=" << sc.target_charge << ": E=" << std::setprecision(12) << r.report.energy
          << " mu=" << r.report.mu << " in [-m, m]=" << (r.report.mu_in_gap ? "yes" : "no")
          << " residual=" << r.report.residual << " iterations=" << r.report.iterations << "\n";
  return j;
}

json cmd_hvz_scan(const Context& ctx) {
  const auto& t = ctx.cfg.task;
  const auto lat = ctx.lattice();
  const FreeVacuum vac = ctx.vacuum(lat);
  const Model model = bdf_model(vac, ctx.cfg.nuclei());
  const Model free_model = bdf_model(vac, ExternalDensity{});
  std::vector<double> grid;
  const int steps = int(std::floor((t.q_max - t.q_min) / t.q_step + 1e-9));
  for (int i = 0; i <= steps; ++i) grid.push_back(t.q_min + i * t.q_step);
  const HvzAnalysis a = analyze_hvz(model, free_model, t.electrons, grid, ctx.cfg.solver, vac.g0_zero());
  std::ostringstream c1, c2;
  write_curve_csv(c1, a.curve);
  write_curve_csv(c2, a.free_curve);
  ctx.write_csv("curve.csv", c1.str());
  ctx.write_csv("free_curve.csv", c2.str());
  json j = {{"alpha", model.alpha},
            {"nu_charge", model.nuclei.total_charge()},
            {"mass_gap", model.mass_gap},
            {"g0_zero", vac.g0_zero()},
            {"nu_self", model.nu_self},
            {"bounds", to_json(a.bounds)},
            {"shape", to_json(a.shape)},
            {"pair_suppression", to_json(a.pair)},
            {"binding", to_json(a.binding)}};
  write_json(ctx.dir / "hvz_report.json", j);
  ctx.out << "hvz-scan: " << a.curve.points.size() << " points, bounds " << (a.bounds.all_ok ? "ok" : "VIOLATED")
          << ", concave " << (a.shape.concave ? "yes" : "no") << ", Lipschitz " << (a.shape.lipschitz ? "yes" : "no")
          << ", subadditive " << (a.binding.subadditive ? "yes" : "no") << ", bound " << (a.binding.bound ? "yes" : "no")
          << "\n";
  return j;
}

json cmd_report(const Context& ctx) {
  const fs::path src = ctx.dir / "hvz_report.json";
  if (!fs::exists(src)) throw ConfigError("no hvz_report.json in " + ctx.dir.string() + "; run hvz-scan first");
  const json h = read_json(src);
  std::ostringstream os;
  const auto& b = h.at("binding");
  os << "Binding margins E(N-K) + E0(K) - E(N), N=" << b.at("N").get<int>() << ", E(N)=" << std::setprecision(12)
     << b.at("energy").get<double>() << "\n";
  os << std::setw(4) << "K" << std::setw(20) << "E(N-K)" << std::setw(20) << "E0(K)" << std::setw(16) << "margin"
     << std::setw(14) << "tolerance" << "  verdict\n";
  for (const auto& r : b.at("rows")) {
    os << std::setw(4) << r.at("K").get<int>() << std::setw(20) << std::setprecision(12) << r.at("e_rest").get<double>()
       << std::setw(20) << r.at("e_free").get<double>() << std::setw(16) << std::setprecision(6)
       << r.at("margin").get<double>() << std::setw(14) << std::setprecision(3) << r.at("tolerance").get<double>()
       << "  " << (r.at("strict").get<bool>() ? "bound" : (r.at("subadditive").get<bool>() ? "marginal" : "VIOLATED"))
       << "\n";
  }
  const auto& p = h.at("pair_suppression");
  os << "pair suppression " << (p.at("holds").get<bool>() ? "holds" : "fails") << " (lhs " << p.at("lhs").get<double>()
     << ", rhs " << p.at("rhs").get<double>() << ")\n";
  write_text(ctx.dir / "binding_table.txt", os.str());
  ctx.out << os.str();
  return {{"source", src.string()}, {"rows", b.at("rows").size()}};
}

json cmd_weak_coupling(const Context& ctx) {
  const auto lat = ctx.lattice();
  if (ctx.c() != 1.0) throw ConfigError("weak-coupling runs use c = 1");
  const WeakCouplingTable t = weak_coupling_scan(lat, ctx.cfg.nuclei(), ctx.cfg.task.electrons, ctx.cfg.task.alphas,
                                                 ctx.cfg.solver, ctx.cfg.model.zero_mode, ctx.cfg.task.jobs);
  std::ostringstream csv;
  write_weak_coupling_csv(csv, t);
  ctx.write_csv("weak_coupling.csv", csv.str());
  const json j = to_json(t);
  write_json(ctx.dir / "weak_coupling.json", j);
  ctx.out << "weak coupling: I(" << t.N << ")=" << std::setprecision(10) << t.limit << ", intercept " << t.intercept
          << ", monotone " << (t.monotone ? "yes" : "no") << "\n";
  for (const auto& r : t.rows)
    if (!r.error.empty()) throw NonConvergence("alpha=" + std::to_string(r.alpha) + ": " + r.error);
  return j;
}

json cmd_nonrel(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double lambda0 = cfg.lattice.lambda0 ? *cfg.lattice.lambda0 : cfg.lattice.cutoff / ctx.c();
  const NonrelTable t = nonrel_scan(cfg.nuclei(), cfg.task.electrons, cfg.task.c_values, cfg.lattice.box_length,
                                    lambda0, cfg.solver, cfg.model.zero_mode, cfg.task.jobs);
  std::ostringstream csv;
  write_nonrel_csv(csv, t);
  ctx.write_csv("nonrel.csv", csv.str());
  const ScalingCheck s = scaling_identity_check(cfg.nuclei(), cfg.task.electrons, cfg.task.scaling_c,
                                                cfg.lattice.box_length, lambda0, cfg.solver, cfg.model.zero_mode);
  json j = to_json(t);
  j["lambda0"] = lambda0;
  j["scaling"] = to_json(s);
  write_json(ctx.dir / "nonrel.json", j);
  ctx.out << "non-relativistic: gap decreasing " << (t.gap_decreasing ? "yes" : "no") << ", weight exponent "
          << t.weight_exponent << ", scaling residual " << s.relative << "*|E|\n";
  for (const auto& r : t.rows)
    if (!r.error.empty()) throw NonConvergence("c=" + std::to_string(r.c) + ": " + r.error);
  return j;
}

json cmd_decompose(const Context& ctx) {
  if (ctx.cfg.task.input.empty()) throw ConfigError("decompose needs --input <state.bin>");
  const StateFile s = read_state(ctx.cfg.task.input);
  auto lat = std::make_shared<const MomentumLattice>(s.box_length, s.cutoff, s.spinor_dim, ctx.cfg.lattice.max_total_dim);
  if (lat->total_dim() != s.Q.rows()) throw ConfigError("state dimension does not match its lattice");
  const FreeVacuum vac = ctx.vacuum(lat);
  const Mat Pi = vac.projector_minus();
  const Mat P = s.Q + Pi;
  const double idempotency = (P * P - P).norm();
  const int fractional = count_fractional(s.Q, Pi);
  json j = {{"dim", s.Q.rows()},
            {"p_trace", p_trace(s.Q, Pi)},
            {"idempotency_error", idempotency},
            {"fractional_levels", fractional}};
  if (fractional > 0 || idempotency > 1e-8) {
    write_json(ctx.dir / "decomposition.json", j);
    throw InvariantViolation("state is not a projector state (" + std::to_string(fractional) +
                             " fractional levels); decomposition needs Q + P0- to be a projector");
  }
  const ProjectorDecomposition d = decompose_projector_pair(P, Pi);
  j["N"] = d.N();
  j["M"] = d.M();
  j["lambda"] = std::vector<double>(d.lambda.begin(), d.lambda.end());
  j["amplitude"] = bogoliubov_amplitude(d);
  j["reconstruction_error"] = (reconstruct_projector(d, P.rows()) - P).norm();
  write_json(ctx.dir / "decomposition.json", j);
  ctx.out << "decompose: N=" << d.N() << " M=" << d.M() << " pairs=" << d.lambda.size()
          << " amplitude=" << bogoliubov_amplitude(d) << "\n";
  return j;
}

int self_test(const Context& ctx, bool full, json& summary) {
  CheckProfile p;
  p.quick = !full;
  p.seed = ctx.cfg.seed;
  p.jobs = ctx.cfg.task.jobs;
  json rows = json::array();
  bool ok = true;
  run_criteria(p, {}, [&](const CriterionResult& r) {
    ctx.out << format_line(r) << "\n" << std::flush;
    ok = ok && r.pass;
    rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"notes", r.notes},
                    {"seconds", r.seconds}});
  });
  summary = {{"profile", full ? "full" : "quick"}, {"pass", ok}, {"criteria", rows}};
  write_json(ctx.dir / "selftest.json", summary);
  return ok ? kExitOk : kExitInvariant;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"free-vacuum",   "vacuum",       "ground-state", "hvz-scan", "report",
                                              "weak-coupling", "nonrel-limit", "decompose",    "selftest"};
  return names;
}

int run_subcommand(const std::string& name, const RunConfig& cfg, const std::vector<std::string>& argv,
                   std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  const fs::path dir = cfg.output_dir;
  int code = kExitOk;
  json summary;
  std::string kind, message;
  try {
    fs::create_directories(dir);
    cfg.validate();
    const Context ctx{cfg, dir, out};
    if (name == "free-vacuum") summary = cmd_free_vacuum(ctx);
    else if (name == "vacuum") summary = cmd_vacuum(ctx);
    else if (name == "ground-state") summary = cmd_ground_state(ctx);
    else if (name == "hvz-scan") summary = cmd_hvz_scan(ctx);
    else if (name == "report") summary = cmd_report(ctx);
    else if (name == "weak-coupling") summary = cmd_weak_coupling(ctx);
    else if (name == "nonrel-limit") summary = cmd_nonrel(ctx);
    else if (name == "decompose") summary = cmd_decompose(ctx);
    else if (name == "selftest") code = self_test(ctx, std::find(argv.begin(), argv.end(), "--full") != argv.end(), summary);
    else throw ConfigError("unknown subcommand '" + name + "'");
  } catch (const ConfigError& e) {
    code = kExitConfig, kind = "config_error", message = e.what();
  } catch (const NonConvergence& e) {
    code = kExitNonConvergence, kind = "non_convergence", message = e.what();
  } catch (const InvariantViolation& e) {
    code = kExitInvariant, kind = "invariant_violation", message = e.what();
  } catch (const std::exception& e) {
    code = kExitFailure, kind = "error", message = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    fs::create_directories(dir);
    if (!kind.empty()) {
      write_json(dir / "error.json", {{"kind", kind}, {"message", message}, {"exit_code", code}, {"command", name}});
      err << "bdflab " << name << ": " << kind << ": " << message << "\n";
    }
    write_json(dir / "manifest.json", {{"command", name},
                                       {"argv", argv},
                                       {"config", to_json(cfg)},
                                       {"versions", build_versions()},
                                       {"seed", cfg.seed},
                                       {"started_utc", started},
                                       {"finished_utc", utc_now()},
                                       {"wall_seconds", wall},
                                       {"exit_code", code}});
  } catch (const std::exception& e) {
    err << "bdflab: cannot write run metadata: " << e.what() << "\n";
    if (code == kExitOk) code = kExitConfig;
  }
  return code;
}

}  // namespace bdf
