#include "bdf/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "bdf/free_vacuum.hpp"
#include "bdf/hvz.hpp"
#include "bdf/limits.hpp"
#include "bdf/scf.hpp"
#include "bdf/state_structure.hpp"

namespace bdf {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double v, int digits = 3) {
  std::ostringstream os;
  os << std::setprecision(digits) << std::scientific << v;
  return os.str();
}

std::string fix(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << std::fixed << v;
  return os.str();
}

ExternalDensity gaussian(double Z, double width = 1.0, RVec3 center = RVec3::Zero()) {
  return ExternalDensity({Nucleus{center, width, Z}});
}

std::shared_ptr<const MomentumLattice> lattice(double L, double cutoff, int spinor_dim = 4) {
  return std::make_shared<const MomentumLattice>(L, cutoff, spinor_dim);
}

CriterionResult start(int id, std::string name) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

}  // namespace

CriterionResult check_free_vacuum_expansion(const CheckProfile& p) {
  CriterionResult r = start(1, "free-vacuum expansion");
  const auto t0 = Clock::now();
  const double cutoff = 10.0;
  const std::vector<double> alphas{0.005, 0.01, 0.02};
  const RadialGrid grid = make_radial_grid(cutoff, 1.0, p.quick ? 8 : 12);
  std::vector<double> err;
  for (double a : alphas) {
    const VacuumSymbol s = solve_symbol_radial(a, cutoff, 1.0, grid);
    err.push_back(std::abs(s.g0_at(0.0) - (1.0 + a / kPi * std::asinh(cutoff))));
  }
  const double C = std::max(err[0] / (alphas[0] * alphas[0]), err[1] / (alphas[1] * alphas[1]));
  const double bound = 1.5 * C * alphas[2] * alphas[2];
  const double secs = since(t0);
  r.pass = err[2] <= bound && secs < 30.0;
  r.detail = "C=" + fix(C, 5) + " err(0.02)=" + sci(err[2]) + " (bound 1.5*C*a^2=" + sci(bound) +
             "), runtime " + fix(secs, 2) + " s (limit 30 s)";
  for (std::size_t i = 0; i < alphas.size(); ++i)
    r.notes.push_back("alpha=" + fix(alphas[i], 3) + " |g0(0)-1-(a/pi)asinh(L)|=" + sci(err[i]) +
                      " ratio/a^2=" + fix(err[i] / (alphas[i] * alphas[i]), 5));
  return r;
}

CriterionResult check_symbol_chain(const CheckProfile& p) {
  CriterionResult r = start(2, "symbol chain inequality");
  const RadialGrid grid = make_radial_grid(10.0, 1.0, p.quick ? 8 : 12);
  int total = 0;
  std::ostringstream os;
  for (double a : {0.1, 0.5, 1.0}) {
    const VacuumSymbol s = solve_symbol_radial(a, 10.0, 1.0, grid);
    const int v = count_chain_violations(s);
    total += v;
    os << " a=" << a << ":" << v << "/" << s.grid.size();
  }
  r.pass = total == 0;
  r.detail = "violations" + os.str() + " (required 0)";
  return r;
}

CriterionResult check_radial_vs_lattice(const CheckProfile& p) {
  CriterionResult r = start(3, "radial-vs-lattice oracle");
  const double alpha = 0.1;
  auto lat = p.quick ? lattice(2.0 * kPi, 1.5) : lattice(6.0, 3.0);
  const double cutoff = lat->cutoff();
  const VacuumSymbol sym = solve_symbol_radial(alpha, cutoff, 1.0, make_radial_grid(cutoff));
  auto worst = [&](ZeroModeRule rule) {
    const FreeVacuum v = solve_vacuum_lattice(lat, alpha, 1.0, {}, rule);
    double w = 0.0;
    for (std::size_t i = 0; i < lat->size(); ++i) {
      const double k = lat->momentum(i).norm();
      w = std::max(w, std::abs(v.g0(i) / sym.g0_at(k) - 1.0));
      if (k > 0.0) w = std::max(w, std::abs(v.g1(i) / sym.g1_at(k) - 1.0));
    }
    return w;
  };
  const double wm = worst(ZeroModeRule::Madelung);
  const double wn = worst(ZeroModeRule::Neutral);
  r.pass = wm < 0.02;
  r.detail = std::to_string(lat->size()) + " modes, max relative error " + sci(wm) + " (limit 2e-02)";
  r.notes.push_back("same lattice with the exchange zero mode dropped: " + sci(wn));
  return r;
}

CriterionResult check_energy_positivity(const CheckProfile& p) {
  CriterionResult r = start(4, "energy positivity");
  Rng rng(p.seed);
  auto lat = p.quick ? lattice(2.0 * kPi, 1.2) : lattice(2.0 * kPi, 1.5);
  const int samples = p.quick ? 100 : 1000;
  struct Setting {
    double alpha;
    ExternalDensity nu;
  };
  const std::vector<Setting> settings{{0.1, gaussian(1.0)},
                                      {0.5, gaussian(2.0, 0.7, RVec3(0.3, -0.2, 0.1))},
                                      {1.0, gaussian(3.0, 1.2)}};
  double worst = std::numeric_limits<double>::infinity();
  int evaluated = 0;
  for (const auto& s : settings) {
    const FreeVacuum vac = solve_vacuum_lattice(lat, s.alpha, 1.0, {}, ZeroModeRule::Madelung);
    const Model m = bdf_model(vac, s.nu);
    const StateSampler sampler(m.reference);
    double w = std::numeric_limits<double>::infinity();
    for (int t = 0; t < samples; ++t) {
      RandomStateOptions o;
      o.rotation_scale = 0.25 * (t % 5);
      o.moved_up = t % 4;
      o.moved_down = (t / 4) % 3;
      o.fractional = t % 6;
      const Mat Q = sampler(rng, o);
      w = std::min(w, bdf_energy(m, Q) + 0.5 * s.alpha * m.nu_self);
      ++evaluated;
    }
    r.notes.push_back("alpha=" + fix(s.alpha, 2) + " Z=" + fix(s.nu.total_charge(), 1) +
                      " min(E+alpha/2 D(nu,nu))=" + sci(w));
    worst = std::min(worst, w);
  }
  r.pass = worst >= -1e-10;
  r.detail = std::to_string(evaluated) + " states, min " + sci(worst) + " (limit -1e-10)";
  return r;
}

CriterionResult check_scf_correctness(const CheckProfile& p) {
  CriterionResult r = start(5, "SCF correctness");
  auto lat = p.quick ? lattice(6.0, 2.0) : lattice(8.0, 2.0);
  const double alpha = 0.3;
  const FreeVacuum vac = solve_vacuum_lattice(lat, alpha, 1.0, {}, ZeroModeRule::Madelung);
  const Model m = bdf_model(vac, gaussian(1.0));
  ScfConfig cfg;
  EnergyCurve curve;
  bool ok = true;
  double worst_res = 0.0;
  std::ostringstream os;
  for (double q : {0.0, 1.0, 2.0}) {
    cfg.target_charge = q;
    const ScfResult s = minimize_charge(m, cfg);
    const ScfReport& rep = s.report;
    const bool aufbau = rep.gap >= -1e-10;
    const bool mu_ok = rep.mu >= -m.mass_gap && rep.mu <= m.mass_gap;
    const bool pt = rep.converged && rep.residual < 1e-8 && aufbau && mu_ok && rep.fractional_levels == 0;
    ok = ok && pt;
    worst_res = std::max(worst_res, rep.residual);
    os << " q=" << q << ":" << (pt ? "ok" : "FAIL");
    r.notes.push_back("q=" + fix(q, 0) + " E=" + fix(rep.energy, 8) + " residual=" + sci(rep.residual) +
                      " commutator=" + sci(rep.commutator) + " gap=" + sci(rep.gap) + " mu=" + fix(rep.mu, 6) +
                      " in [-" + fix(m.mass_gap, 6) + ", " + fix(m.mass_gap, 6) +
                      "] fractional=" + std::to_string(rep.fractional_levels) +
                      " iterations=" + std::to_string(rep.iterations));
    CurvePoint pt_rec;
    pt_rec.q = q;
    pt_rec.energy = rep.energy;
    pt_rec.mu = rep.mu;
    pt_rec.residual = rep.residual;
    pt_rec.converged = rep.converged;
    curve.points.push_back(pt_rec);
  }
  const BoundsReport b = check_bounds(curve, m.mass_gap, vac.g0_zero(), alpha, m.nu_self);
  for (const auto& row : b.rows)
    r.notes.push_back("q=" + fix(row.q, 0) + " sandwich " + fix(row.lower, 6) + " <= " + fix(row.energy, 6) +
                      " <= " + fix(row.upper, 6));
  r.pass = ok && b.all_ok;
  r.detail = std::to_string(lat->size()) + " modes," + os.str() + ", max residual " + sci(worst_res) +
             " (limit 1e-08), sandwich " + (b.all_ok ? "holds" : "FAILS");
  return r;
}

CriterionResult check_hvz_scaffolding(const CheckProfile& p) {
  CriterionResult r = start(6, "HVZ scaffolding");
  auto lat = p.quick ? lattice(2.0 * kPi, 1.5) : lattice(6.0, 2.0);
  const double alpha = 0.3;
  const FreeVacuum vac = solve_vacuum_lattice(lat, alpha, 1.0, {}, ZeroModeRule::Madelung);
  const Model m = bdf_model(vac, gaussian(1.0));
  const Model m0 = bdf_model(vac, ExternalDensity{});
  std::vector<double> grid;
  const double step = p.quick ? 0.5 : 0.25;
  for (double q = -2.0; q <= 3.0 + 1e-9; q += step) grid.push_back(q);
  ScfConfig cfg;
  const HvzAnalysis a = analyze_hvz(m, m0, 1, grid, cfg, vac.g0_zero());
  int failed = 0;
  for (const auto& pt : a.curve.points)
    if (!pt.error.empty() || !pt.converged) ++failed;
  for (const auto& pt : a.free_curve.points)
    if (!pt.error.empty() || !pt.converged) ++failed;
  const BindingRow* k1 = nullptr;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& row : a.binding.rows) {
    if (row.K == 1) k1 = &row;
    worst_margin = std::min(worst_margin, row.margin + row.tolerance);
    r.notes.push_back("K=" + std::to_string(row.K) + " margin E(N-K)+E0(K)-E(N)=" + sci(row.margin) +
                      " tolerance " + sci(row.tolerance) + (row.strict ? " strict" : " not strict"));
  }
  r.notes.push_back("pair suppression: lhs=" + fix(a.pair.lhs, 6) + " rhs=" + fix(a.pair.rhs, 6) +
                    (a.pair.holds ? " holds, window K=1..N" : " fails, default window"));
  r.notes.push_back("concavity: " + std::to_string(a.shape.triples_checked) +
                    " triples, max slope increase " + sci(a.shape.max_concavity_violation));
  EnergyCurve inner = a.curve;
  std::erase_if(inner.points, [](const CurvePoint& pt) { return std::abs(pt.q) > 2.0 + 1e-9; });
  r.notes.push_back("Lipschitz ratio over |q| <= 2 only: " +
                    fix(check_concavity_and_lipschitz(inner, vac.g0_zero()).max_lipschitz_ratio, 5) +
                    " (informational)");
  r.pass = failed == 0 && a.binding.subadditive && a.shape.concave && a.shape.lipschitz;
  std::ostringstream os;
  os << a.curve.points.size() << "+" << a.free_curve.points.size() << " points on " << lat->size()
     << " modes, subadditive=" << (a.binding.subadditive ? "yes" : "NO")
     << " concave=" << (a.shape.concave ? "yes" : "NO") << " Lipschitz max " << fix(a.shape.max_lipschitz_ratio, 5)
     << (a.shape.lipschitz ? " <= " : " > ") << "g0(0)=" << fix(a.shape.lipschitz_constant, 5);
  if (k1) os << ", binding(N=1,K=1) margin " << sci(k1->margin) << " +/- " << sci(k1->tolerance);
  if (failed) os << ", " << failed << " solver failures";
  r.detail = os.str();
  return r;
}

CriterionResult check_weak_coupling(const CheckProfile& p) {
  CriterionResult r = start(7, "weak coupling");
  auto lat = p.quick ? lattice(6.0, 2.0) : lattice(8.0, 2.0);
  ScfConfig cfg;
  const WeakCouplingTable t =
      weak_coupling_scan(lat, gaussian(0.8), 1, {0.2, 0.1, 0.05}, cfg, ZeroModeRule::Madelung, p.jobs);
  double overlap = 0.0, min_gap = std::numeric_limits<double>::infinity();
  bool errors = false;
  for (const auto& row : t.rows) {
    if (std::abs(row.alpha - 0.05) < 1e-12) overlap = row.overlap;
    min_gap = std::min(min_gap, row.gap);
    errors = errors || !row.error.empty() || !row.converged;
    r.notes.push_back("alpha=" + fix(row.alpha, 2) + " E=" + fix(row.energy, 8) + " gap=" + sci(row.gap) +
                      " overlap=" + fix(row.overlap, 8) + " vacuum distance=" + sci(row.vacuum_distance) +
                      (row.error.empty() ? "" : " error: " + row.error));
  }
  r.notes.push_back("q0=" + std::to_string(t.linear.q0) + " lambda1+=" +
                    (t.linear.positive_gap.size() ? fix(t.linear.positive_gap[0], 8) : std::string("none")) +
                    " I(1) padded=" + fix(t.limit_padded, 8));
  r.pass = !errors && t.monotone && t.extrapolates && overlap >= 0.99;
  r.detail = std::to_string(lat->size()) + " modes, I(1)=" + fix(t.limit, 8) + " gaps monotone=" +
             (t.monotone ? "yes" : "NO") + ", intercept " + fix(t.intercept, 8) + " off by " +
             sci(std::abs(t.intercept - t.limit)) + " (limit 2*min gap=" + sci(2.0 * min_gap) +
             "), overlap(0.05)=" + fix(overlap, 6) + " (limit 0.99)";
  return r;
}

CriterionResult check_nonrelativistic(const CheckProfile& p) {
  CriterionResult r = start(8, "non-relativistic limit");
  const double L = 2.0 * kPi;
  const double lambda0 = 0.2;
  const std::vector<double> cs = p.quick ? std::vector<double>{5.0, 10.0} : std::vector<double>{5.0, 10.0, 20.0};
  ScfConfig cfg;
  cfg.tol_residual = 1e-8;
  const ExternalDensity nu = gaussian(1.0);
  const NonrelTable t = nonrel_scan(nu, 1, cs, L, lambda0, cfg, ZeroModeRule::Madelung, p.jobs);
  bool errors = false, thresholds = true;
  for (const auto& row : t.rows) {
    errors = errors || !row.error.empty() || !row.converged;
    thresholds = thresholds && row.threshold_at_zero;
    r.notes.push_back("c=" + fix(row.c, 0) + " modes=" + std::to_string(row.modes) +
                      " E-g0(0)=" + fix(row.shifted, 8) + " E_HF=" + fix(row.hf_energy, 8) +
                      " gap=" + sci(row.gap) + " lower weight=" + sci(row.lower_weight) +
                      " threshold=g0(0): " + (row.threshold_at_zero ? "yes" : "no") +
                      (row.error.empty() ? "" : " error: " + row.error));
  }
  ScfConfig sc;
  const ScalingCheck s = scaling_identity_check(nu, 1, 2.0, L, 1.0, sc, ZeroModeRule::Madelung);
  r.notes.push_back("scaling pair (L=2pi, cutoff 2, c=2) vs (L=4pi, cutoff 1, c=1, alpha=1/2): E=" +
                    fix(s.energy_left, 10) + " vs 4*" + fix(s.energy_right, 10) + ", operator residual " +
                    sci(s.operator_residual));
  const bool scaling = s.residual < 1e-8 * std::abs(s.energy_left);
  r.pass = !errors && t.gap_decreasing && t.weight_exponent >= 1.5 && scaling;
  r.detail = "gap decreasing=" + std::string(t.gap_decreasing ? "yes" : "NO") + ", weight exponent " +
             fix(t.weight_exponent, 3) + " (limit 1.5), scaling residual " + sci(s.relative) + "*|E| (limit 1e-08*|E|)";
  return r;
}

CriterionResult check_projector_structure(const CheckProfile& p) {
  CriterionResult r = start(9, "projector pair structure");
  Rng rng(p.seed + 9);
  const int pairs = p.quick ? 100 : 500;
  double recon = 0.0, integrality = 0.0;
  for (int t = 0; t < pairs; ++t) {
    const Index n = 4 + Index(rng() % 61);
    const Index rank = 1 + Index(rng() % (n - 1));
    const Mat Pi = random_projector(n, rank, rng);
    Mat P;
    if (t % 3 == 0) {
      const Index r2 = std::clamp<Index>(rank + Index(rng() % 5) - 2, 1, n - 1);
      P = random_projector(n, r2, rng);
    } else {
      RandomStateOptions o;
      o.rotation_scale = 0.2 + 0.4 * (t % 4);
      o.moved_up = std::min<int>(t % 3, int(n - rank));
      o.moved_down = std::min<int>((t / 3) % 2, int(rank));
      o.fractional = 0;
      P = random_state(Pi, rng, o) + Pi;
    }
    const ProjectorDecomposition d = decompose_projector_pair(P, Pi);
    recon = std::max({recon, (reconstruct_projector(d, n) - P).norm(),
                      (reconstruct_complement(d, n) - (Mat::Identity(n, n) - P)).norm(),
                      (projector_from_pairing(d, Pi) - P).norm()});
    const double tr = p_trace(P - Pi, Pi);
    integrality = std::max({integrality, std::abs(tr - std::round(tr)), std::abs(tr - double(d.N() - d.M()))});
  }
  const int fock_cases = p.quick ? 10 : 40;
  double amp = 0.0, state = 0.0;
  for (int t = 0; t < fock_cases; ++t) {
    const Index n = 2 + Index(rng() % 5);
    const Index rank = 1 + Index(rng() % (n - 1));
    const Mat Pi = random_projector(n, rank, rng);
    RandomStateOptions o;
    o.fractional = 0;
    o.rotation_scale = 1.0;
    o.moved_up = (t % 2) && rank < n ? 1 : 0;
    const Mat P = random_state(Pi, rng, o) + Pi;
    const ProjectorDecomposition d = decompose_projector_pair(P, Pi);
    const fock::State omega = fock::bogoliubov_state(d, range_basis(Pi));
    const fock::State slater_p = fock::slater(range_basis(P));
    const fock::State slater_pi = fock::slater(range_basis(Pi));
    state = std::max({state, std::abs(std::abs(slater_p.dot(omega)) - 1.0), std::abs(omega.norm() - 1.0)});
    const double brute = std::abs(slater_pi.dot(slater_p));
    const double k = (d.N() == 0 && d.M() == 0) ? bogoliubov_amplitude(d) : 0.0;
    amp = std::max(amp, std::abs(brute - k));
  }
  r.pass = recon < 1e-10 && integrality < 1e-10 && amp < 1e-10 && state < 1e-10;
  r.detail = std::to_string(pairs) + " pairs: reconstruction " + sci(recon) + ", integrality " +
             sci(integrality) + "; " + std::to_string(fock_cases) + " Fock cases: amplitude " +
             sci(amp) + ", state " + sci(state) + " (limit 1e-10 each)";
  return r;
}

CriterionResult check_lieb_purification(const CheckProfile& p) {
  CriterionResult r = start(10, "Lieb purification");
  Rng rng(p.seed + 10);
  auto lat = lattice(2.0 * kPi, p.quick ? 1.2 : 1.5);
  const FreeVacuum vac = solve_vacuum_lattice(lat, 0.5, 1.0, {}, ZeroModeRule::Madelung);
  const Model m = bdf_model(vac, gaussian(1.0));
  const StateSampler sampler(m.reference);
  const int states = p.quick ? 40 : 200;
  int not_extremal = 0;
  double charge = 0.0, rise = -std::numeric_limits<double>::infinity();
  int transfers = 0;
  for (int t = 0; t < states; ++t) {
    RandomStateOptions o;
    o.rotation_scale = 0.3 * (t % 4);
    o.moved_up = t % 3;
    o.moved_down = (t / 3) % 2;
    o.fractional = 2 + t % 5;
    const Mat Q = sampler(rng, o);
    const PurifyResult out = lieb_purify(m, Q);
    transfers += out.transfers;
    const double q_in = Q.trace().real(), q_out = out.Q.trace().real();
    const bool integral = std::abs(q_in - std::round(q_in)) < 1e-8;
    if (out.fractional_out > (integral ? 0 : 1)) ++not_extremal;
    charge = std::max(charge, std::abs(q_out - q_in));
    rise = std::max(rise, out.energy_out - out.energy_in);
  }
  r.pass = not_extremal == 0 && charge < 1e-10 && rise <= 1e-12;
  r.detail = std::to_string(states) + " states (" + std::to_string(transfers) + " transfers): non-extremal " +
             std::to_string(not_extremal) + ", max |charge change| " + sci(charge) +
             " (limit 1e-10), max energy change " + sci(rise) + " (limit 1e-12)";
  return r;
}

std::vector<std::function<CriterionResult(const CheckProfile&)>> all_criteria() {
  return {check_free_vacuum_expansion, check_symbol_chain,    check_radial_vs_lattice, check_energy_positivity,
          check_scf_correctness,       check_hvz_scaffolding, check_weak_coupling,     check_nonrelativistic,
          check_projector_structure,   check_lieb_purification};
}

std::vector<CriterionResult> run_criteria(const CheckProfile& p, const std::vector<int>& ids,
                                          const std::function<void(const CriterionResult&)>& on_done) {
  const auto all = all_criteria();
  std::vector<CriterionResult> out;
  for (int id = 1; id <= int(all.size()); ++id) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), id) == ids.end()) continue;
    const auto t0 = Clock::now();
    CriterionResult r;
    try {
      r = all[id - 1](p);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = since(t0);
    if (on_done) on_done(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << "criterion " << std::setw(2) << r.id << " [" << r.name << "] " << (r.pass ? "PASS" : "FAIL") << "  "
     << r.detail << "  (" << std::fixed << std::setprecision(1) << r.seconds << " s)";
  return os.str();
}

}  // namespace bdf
