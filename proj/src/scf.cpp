#include "bdf/scf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bdf/linalg.hpp"

#include "bdf/state_structure.hpp"

namespace bdf {

void ScfConfig::validate() const {
  if (!(tol_residual > 0.0) || !(tol_charge > 0.0)) throw ConfigError("solver tolerances must be positive");
  if (max_iter <= 0) throw ConfigError("max_iter must be positive");
  if (damping == Damping::Fixed && !(theta > 0.0 && theta <= 1.0))
    throw ConfigError("fixed damping theta must lie in (0, 1]");
  if (level_shift < 0.0) throw ConfigError("level_shift must be non-negative");
  if (!std::isfinite(target_charge) || std::abs(target_charge) > charge_cap)
    throw ConfigError("target charge outside the configured cap");
}

namespace {

Aufbau fill_from(const Mat& H, RVec occ_init, const HermitianEigensolver& es) {
  Aufbau a;
  a.eigenvalues = es.eigenvalues();
  a.eigenvectors = es.eigenvectors();
  a.occupation = std::move(occ_init);
  const Mat& V = a.eigenvectors;
  a.gamma = V * a.occupation.cast<cplx>().asDiagonal() * V.adjoint();
  a.gamma = hermitian_part(a.gamma);
  const Index n = H.rows();
  a.homo = -std::numeric_limits<double>::infinity();
  a.lumo = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    if (a.occupation[i] > 0.0) a.homo = std::max(a.homo, a.eigenvalues[i]);
    if (a.occupation[i] < 1.0) a.lumo = std::min(a.lumo, a.eigenvalues[i]);
  }
  return a;
}

double trace_product(const Mat& A, const Mat& B) { return A.cwiseProduct(B.transpose()).sum().real(); }

// Distance from G to the set of Aufbau fills of H. Inside a degenerate Fermi level any
// occupation with the right trace is a fill, so only the trace is compared there.
Mat admissible_delta(const Aufbau& a, const Mat& G) {
  Mat Delta = a.gamma - G;
  const Index k = a.fermi_end - a.fermi_begin;
  if (k > 1) {
    const auto W = a.eigenvectors.middleCols(a.fermi_begin, k);
    Mat B = W.adjoint() * Delta * W;
    B.diagonal().array() -= B.trace() / double(k);
    Delta -= W * B * W.adjoint();
  }
  return hermitian_part(Delta);
}

double commutator_norm(const Mat& G, const Mat& D) {
  const Mat C = G * D - D * G;
  return operator_norm(cplx(0.0, 1.0) * C);
}

}  // namespace

Aufbau aufbau_fill(const Mat& H, double filled, double degeneracy_tol) {
  const Index n = H.rows();
  if (filled < -1e-12 || filled > double(n) + 1e-12)
    throw ConfigError("requested charge exceeds the capacity of the lattice");
  HermitianEigensolver es(hermitian_part(H));
  const RVec& ev = es.eigenvalues();
  filled = std::clamp(filled, 0.0, double(n));
  Index nf = Index(std::floor(filled + 1e-12));
  double w = filled - double(nf);
  if (w < 1e-12) w = 0.0;
  RVec occ = RVec::Zero(n);
  occ.head(nf).setOnes();
  if (w > 0.0) occ[nf] = w;

  const Index f = w > 0.0 ? nf : nf - 1;
  std::vector<double> fermi;
  Index fb = 0, fe = 0;
  if (f >= 0 && f < n) {
    const double ef = ev[f], tol = degeneracy_tol * std::max(1.0, std::abs(ef));
    Index a = f, b = f + 1;
    while (a > 0 && std::abs(ev[a - 1] - ef) <= tol) --a;
    while (b < n && std::abs(ev[b] - ef) <= tol) ++b;
    const double weight = occ.segment(a, b - a).sum();
    if (b - a > 1) occ.segment(a, b - a).setConstant(weight / double(b - a));
    for (Index i = a; i < b; ++i) fermi.push_back(ev[i]);
    fb = a;
    fe = b;
  }
  Aufbau out = fill_from(H, occ, es);
  out.delta = w;
  out.fermi_set = std::move(fermi);
  out.fermi_begin = fb;
  out.fermi_end = fe;
  return out;
}

Aufbau negative_fill(const Mat& H) {
  HermitianEigensolver es(hermitian_part(H));
  RVec occ = (es.eigenvalues().array() < 0.0).cast<double>();
  return fill_from(H, occ, es);
}

namespace {

struct Engine {
  const Model& model;
  const ScfConfig& cfg;
  bool global;

  double filled() const { return cfg.target_charge + double(model.reference_rank); }

  Aufbau fill(const Mat& H) const {
    return global ? negative_fill(H) : aufbau_fill(H, filled(), cfg.degeneracy_tol);
  }

  // One optimal damping run from Q. Returns the number of iterations used.
  int descend(Mat& Q, ScfReport& rep, int budget, bool force_first) const {
    const Index n = model.dim();
    const Mat I = Mat::Identity(n, n);
    Mat D = mean_field_operator(model, Q);
    double E = bdf_energy(model, Q);
    double shift = cfg.level_shift;
    std::vector<double> res_hist;
    int it = 0;
    for (; it < budget; ++it) {
      Mat H = D;
      if (shift > 0.0) H += shift * (I - (Q + model.reference));
      const Aufbau a = fill(H);
      const Mat Delta = (a.gamma - model.reference) - Q;
      const double res = admissible_delta(a, Q + model.reference).norm();
      const int global_it = int(rep.trace.size());
      rep.trace.push_back({global_it, E, res, 0.0});
      if (res < cfg.tol_residual) {
        rep.converged = true;
        break;
      }
      res_hist.push_back(res);

      Mat G = Mat::Zero(n, n);
      double c = 0.0;
      if (model.alpha != 0.0) {
        G = model.alpha * (direct_potential(density(Delta, model.lattice)) -
                           exchange_operator(Delta, model.kernel, *model.lattice));
        G = hermitian_part(G);
        c = trace_product(G, Delta);
      }
      const double s = trace_product(D, Delta);
      double t;
      // Below this scale s and c are rounding noise and the step cannot change E.
      const bool noise = std::abs(s) + std::abs(c) < 1e-12 * std::max(1.0, std::abs(E));
      if ((force_first && it == 0) || noise) {
        t = 1.0;
      } else if (cfg.damping == Damping::Fixed) {
        t = cfg.theta;
      } else if (c > 0.0) {
        t = std::clamp(-s / c, 0.0, 1.0);
      } else {
        t = (s + 0.5 * c < 0.0) ? 1.0 : 0.0;
      }
      rep.trace.back().step = t;
      Q += t * Delta;
      D += t * G;
      E += t * s + 0.5 * c * t * t;

      if ((it + 1) % cfg.recompute_every == 0) {
        Q = hermitian_part(Q);
        D = mean_field_operator(model, Q);
        E = bdf_energy(model, Q);
      }
      // Stagnation: residual not halved over the last 60 steps, or a zero step.
      const std::size_t k = res_hist.size();
      if ((k > 60 && res_hist[k - 1] > 0.5 * res_hist[k - 61] && (k % 60 == 0)) ||
          (t == 0.0 && !(force_first && it == 0))) {
        shift = shift > 0.0 ? 2.0 * shift : 0.1;
      }
      if (cfg.checkpoint && cfg.checkpoint_every > 0 && (global_it + 1) % cfg.checkpoint_every == 0) {
        rep.energy = E;
        rep.residual = res;
        rep.iterations = global_it + 1;
        cfg.checkpoint(Q, rep);
      }
    }
    rep.level_shift = std::max(rep.level_shift, shift);
    return it;
  }

  void finalize(Mat& Q, ScfReport& rep) const {
    if (rep.converged) {
      const Mat G0 = Q + model.reference;
      Q = G0 + admissible_delta(fill(mean_field_operator(model, Q)), G0) - model.reference;
    }
    Q = hermitian_part(Q);
    const Mat D = mean_field_operator(model, Q);
    const Aufbau a = fill(D);
    const Mat G = Q + model.reference;
    rep.energy = bdf_energy(model, Q);
    rep.eigenvalues = a.eigenvalues;
    rep.residual = operator_norm(admissible_delta(a, G));
    rep.commutator = commutator_norm(G, D);
    rep.charge = Q.trace().real();
    rep.target_charge = global ? rep.charge : cfg.target_charge;
    rep.delta = a.delta;
    rep.fermi_set = a.fermi_set;
    rep.fractional_levels = count_fractional(Q, model.reference, 1e-8);
    rep.gap = a.lumo - a.homo;
    rep.gap_closed = rep.gap < 10.0 * cfg.tol_residual && rep.fractional_levels == 0;

    const double m = model.mass_gap;
    if (global) {
      rep.mu = 0.0;
      rep.mu_in_gap = a.homo <= 0.0 && a.lumo > 0.0;
    } else if (rep.fractional_levels > 0 || a.delta > 0.0) {
      rep.mu = a.fermi_set.empty() ? a.homo : a.fermi_set.front();
      rep.mu_in_gap = std::abs(rep.mu) <= m;
    } else {
      // Any mu in [homo, lumo) gives the same projector; take the one closest to homo
      // inside [-m, m].
      double mu = std::max(a.homo, -m);
      rep.mu_in_gap = mu < a.lumo && mu <= m;
      rep.mu = rep.mu_in_gap ? mu : a.homo;
    }
  }

  ScfResult run(const Mat* initial) const {
    cfg.validate();
    if (!global && (filled() < -1e-12 || filled() > double(model.dim()) + 1e-12))
      throw ConfigError("requested charge exceeds the capacity of the lattice");
    ScfResult r;
    r.Q = initial ? *initial : Mat::Zero(model.dim(), model.dim());
    if (r.Q.rows() != model.dim() || r.Q.cols() != model.dim())
      throw std::invalid_argument("initial state dimension does not match the model");
    bool force = !global && std::abs(r.Q.trace().real() - cfg.target_charge) > cfg.tol_charge;
    int used = 0;
    for (int round = 0;; ++round) {
      r.report.converged = false;
      used += descend(r.Q, r.report, cfg.max_iter - used, force);
      force = false;
      finalize(r.Q, r.report);
      const bool integral = std::abs(r.report.target_charge - std::round(r.report.target_charge)) < 1e-12;
      const int allowed = integral ? 0 : 1;
      if (!r.report.converged || r.report.fractional_levels <= allowed || round >= cfg.purify_rounds ||
          used >= cfg.max_iter)
        break;
      const PurifyResult p = lieb_purify(model, r.Q);
      if (p.transfers == 0) break;
      r.Q = p.Q;
      ++r.report.purifications;
    }
    r.report.iterations = int(r.report.trace.size());
    return r;
  }
};

}  // namespace

ScfResult minimize_global(const Model& model, const ScfConfig& cfg, const Mat* initial) {
  return Engine{model, cfg, true}.run(initial);
}

ScfResult minimize_charge(const Model& model, const ScfConfig& cfg, const Mat* initial) {
  return Engine{model, cfg, false}.run(initial);
}

SolutionDecomposition decompose_solution(const Model& model, const Mat& Q, const ScfReport& report) {
  const Mat D = mean_field_operator(model, Q);
  HermitianEigensolver es(D);
  const RVec& ev = es.eigenvalues();
  const Mat& V = es.eigenvectors();
  const Index n = D.rows();
  SolutionDecomposition d;
  d.vacuum_projector = Mat::Zero(n, n);
  std::vector<Index> window;
  const double top = report.mu + 1e-9 * std::max(1.0, std::abs(report.mu));
  for (Index i = 0; i < n; ++i) {
    if (ev[i] <= 0.0) d.vacuum_projector += V.col(i) * V.col(i).adjoint();
    else if (ev[i] <= top) window.push_back(i);
  }
  // Occupied directions of the electron density inside the window; a degenerate top
  // level is resolved by the state, not by the mean-field spectrum.
  const Mat W = V(Eigen::all, window);
  const Mat electrons = hermitian_part(Q + model.reference - d.vacuum_projector);
  HermitianEigensolver occ(hermitian_part(Mat(W.adjoint() * electrons * W)));
  std::vector<Index> orb;
  for (Index k = occ.eigenvalues().size() - 1; k >= 0; --k)
    if (occ.eigenvalues()[k] > 0.5) orb.push_back(k);
  d.orbitals = Mat(n, Index(orb.size()));
  d.orbital_energies = RVec(Index(orb.size()));
  for (std::size_t k = 0; k < orb.size(); ++k) {
    const Vec phi = W * occ.eigenvectors().col(orb[k]);
    const double e = (phi.adjoint() * D * phi)(0, 0).real();
    d.orbitals.col(Index(k)) = phi;
    d.orbital_energies[Index(k)] = e;
    d.max_residual = std::max(d.max_residual, (D * phi - e * phi).norm());
  }
  d.orthonormality_error =
      (d.orbitals.adjoint() * d.orbitals - Mat::Identity(d.orbitals.cols(), d.orbitals.cols())).norm();
  d.vacuum_charge = (d.vacuum_projector - model.reference).trace().real();
  d.charged_vacuum = std::abs(d.vacuum_charge) > 0.5;
  if (!d.charged_vacuum) {
    const double expected = report.target_charge;
    const bool integral = std::abs(expected - std::round(expected)) < 1e-9;
    if (integral && expected >= 0.0 && std::abs(double(orb.size()) - expected) > 1e-6) {
      std::ostringstream os;
      os << "neutral vacuum but " << orb.size() << " orbitals for charge " << expected;
      throw InvariantViolation(os.str());
    }
  }
  return d;
}

}  // namespace bdf
