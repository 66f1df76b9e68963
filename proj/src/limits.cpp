#include "bdf/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bdf/linalg.hpp"
#include "bdf/parallel.hpp"
#include "bdf/state_structure.hpp"

namespace bdf {

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line needs two points");
  const double n = double(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

LinearModelResult linear_model(const FreeVacuum& free_vacuum, const ExternalDensity& nubar,
                               double gap_tol, int homotopy_steps) {
  const auto lat = free_vacuum.lattice_ptr();
  const Mat D0 = free_vacuum.dirac();
  const Mat P0 = free_vacuum.projector_minus();
  const Mat V = direct_potential(nubar.on_lattice(lat));
  LinearModelResult r;
  r.gap_edge = free_vacuum.threshold().value;

  r.min_homotopy_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= homotopy_steps; ++k) {
    const double t = double(k) / homotopy_steps;
    HermitianEigensolver es(hermitian_part(D0 - t * V), Eigen::EigenvaluesOnly);
    const double g = es.eigenvalues().cwiseAbs().minCoeff();
    r.min_homotopy_gap = std::min(r.min_homotopy_gap, g);
    if (g < gap_tol) {
      std::ostringstream os;
      os << "D0 - t V has an eigenvalue within " << gap_tol << " of 0 at t=" << t
         << ": the Furry vacuum charge is not defined";
      throw InvariantViolation(os.str());
    }
  }

  HermitianEigensolver es(hermitian_part(D0 - V));
  r.eigenvalues = es.eigenvalues();
  r.eigenvectors = es.eigenvectors();
  const Index n = r.eigenvalues.size();
  r.negative_count = (r.eigenvalues.array() < 0.0).count();
  const Index rank = Index(std::llround(P0.trace().real()));
  r.q0 = int(r.negative_count - rank);

  std::vector<double> pos, neg;
  const double edge = r.gap_edge * (1.0 - 1e-12);
  for (Index i = 0; i < n; ++i) {
    const double e = r.eigenvalues[i];
    if (e > 0.0 && e < edge) pos.push_back(e);
    if (e < 0.0 && e > -edge) neg.push_back(e);
  }
  std::reverse(neg.begin(), neg.end());
  r.positive_gap = Eigen::Map<RVec>(pos.data(), Index(pos.size()));
  r.negative_gap = Eigen::Map<RVec>(neg.data(), Index(neg.size()));

  r.sea_energy = r.eigenvalues.head(r.negative_count).sum() -
                 ((D0 - V) * P0).trace().real();
  return r;
}

double LinearModelResult::energy(int N, bool padded) const {
  const int k = N - q0;
  double s = sea_energy;
  const Index n = eigenvalues.size();
  if (k > 0) {
    for (int i = 0; i < k; ++i) {
      if (padded) {
        s += i < positive_gap.size() ? positive_gap[i] : gap_edge;
      } else {
        const Index j = negative_count + i;
        if (j >= n) throw ConfigError("charge exceeds the lattice capacity");
        s += eigenvalues[j];
      }
    }
  } else {
    for (int i = 0; i < -k; ++i) {
      if (padded) {
        s += i < negative_gap.size() ? -negative_gap[i] : gap_edge;
      } else {
        const Index j = negative_count - 1 - i;
        if (j < 0) throw ConfigError("charge exceeds the lattice capacity");
        s += -eigenvalues[j];
      }
    }
  }
  return s;
}

Mat LinearModelResult::level_projector(int N, double degeneracy_tol) const {
  const int k = N - q0;
  const Index n = eigenvalues.size();
  Index a, b;
  if (k > 0) {
    a = negative_count;
    b = std::min(n, negative_count + k);
    const double e = eigenvalues[b - 1];
    while (b < n && std::abs(eigenvalues[b] - e) <= degeneracy_tol * std::max(1.0, std::abs(e))) ++b;
  } else if (k < 0) {
    b = negative_count;
    a = std::max<Index>(0, negative_count + k);
    const double e = eigenvalues[a];
    while (a > 0 && std::abs(eigenvalues[a - 1] - e) <= degeneracy_tol * std::max(1.0, std::abs(e))) --a;
  } else {
    return Mat::Zero(n, n);
  }
  const Mat block = eigenvectors.middleCols(a, b - a);
  return block * block.adjoint();
}

WeakCouplingTable weak_coupling_scan(std::shared_ptr<const MomentumLattice> lattice,
                                     const ExternalDensity& nubar, int N,
                                     const std::vector<double>& alphas, const ScfConfig& cfg,
                                     ZeroModeRule rule, int jobs) {
  WeakCouplingTable tab;
  tab.N = N;
  const FreeVacuum free = solve_vacuum_lattice(lattice, 0.0, 1.0, {}, rule);
  tab.linear = linear_model(free, nubar);
  tab.limit = tab.linear.energy(N, false);
  tab.limit_padded = tab.linear.energy(N, true);
  const Mat Plin = tab.linear.level_projector(N);
  const Index nneg = tab.linear.negative_count;
  const Mat& U = tab.linear.eigenvectors;
  const Mat Qlin_vac = U.leftCols(nneg) * U.leftCols(nneg).adjoint() - free.projector_minus();

  std::vector<double> a = alphas;
  std::sort(a.begin(), a.end(), std::greater<>());
  tab.rows.resize(a.size());
  parallel_for(a.size(), jobs, [&](std::size_t i) {
    WeakCouplingRow& row = tab.rows[i];
    row.alpha = a[i];
    try {
      if (!(row.alpha > 0.0)) throw ConfigError("weak coupling scan needs alpha > 0");
      const FreeVacuum vac = solve_vacuum_lattice(lattice, row.alpha, 1.0, {}, rule);
      const Model model = bdf_model(vac, nubar.scaled(1.0 / row.alpha));
      ScfConfig c = cfg;
      c.target_charge = N;
      const ScfResult r = minimize_charge(model, c);
      row.energy = r.report.energy;
      row.converged = r.report.converged;
      row.gap = std::abs(row.energy - tab.limit);
      const SolutionDecomposition d = decompose_solution(model, r.Q, r.report);
      if (N != 0)
        row.overlap = (d.orbitals.adjoint() * Plin * d.orbitals).trace().real() / std::abs(N);
      row.vacuum_distance = ((d.vacuum_projector - vac.projector_minus()) - Qlin_vac).norm();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  std::vector<double> x, y;
  tab.monotone = true;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tab.rows.size(); ++i) {
    const auto& r = tab.rows[i];
    if (!r.error.empty() || !r.converged) {
      tab.monotone = false;
      continue;
    }
    if (i > 0 && !(r.gap < tab.rows[i - 1].gap)) tab.monotone = false;
    x.push_back(r.alpha);
    y.push_back(r.energy);
    min_gap = std::min(min_gap, r.gap);
  }
  if (x.size() >= 2) {
    const auto [slope, icpt] = fit_line(x, y);
    tab.slope = slope;
    tab.intercept = icpt;
    tab.extrapolates = std::abs(icpt - tab.limit) <= 2.0 * min_gap;
  }
  return tab;
}

HartreeFockResult hartree_fock_solve(std::shared_ptr<const MomentumLattice> lattice2,
                                     const ExternalDensity& nu, int N, const ScfConfig& cfg,
                                     ZeroModeRule rule) {
  if (N < 0) throw ConfigError("Hartree-Fock needs N >= 0 electrons");
  const Model model = hartree_fock_model(lattice2, nu, 1.0, rule);
  ScfConfig c = cfg;
  c.target_charge = N;
  const ScfResult r = minimize_charge(model, c);
  HartreeFockResult hf;
  hf.energy = r.report.energy;
  hf.residual = r.report.residual;
  hf.converged = r.report.converged;
  hf.Q = r.Q;
  hf.orbitals = range_basis(r.Q);
  const Mat D = mean_field_operator(model, r.Q);
  hf.orbital_energies = RVec(hf.orbitals.cols());
  for (Index k = 0; k < hf.orbitals.cols(); ++k)
    hf.orbital_energies[k] = (hf.orbitals.col(k).adjoint() * D * hf.orbitals.col(k))(0, 0).real();
  std::sort(hf.orbital_energies.begin(), hf.orbital_energies.end());
  hf.gram_error = (hf.orbitals.adjoint() * hf.orbitals -
                   Mat::Identity(hf.orbitals.cols(), hf.orbitals.cols())).norm();
  return hf;
}

NonrelTable nonrel_scan(const ExternalDensity& nu, int N, const std::vector<double>& c_values,
                        double box_length, double lambda0, const ScfConfig& cfg, ZeroModeRule rule,
                        int jobs) {
  NonrelTable tab;
  std::vector<double> cs = c_values;
  std::sort(cs.begin(), cs.end());
  tab.rows.resize(cs.size());
  parallel_for(cs.size(), jobs, [&](std::size_t i) {
    NonrelRow& row = tab.rows[i];
    const double c = cs[i];
    row.c = c;
    try {
      auto lat = std::make_shared<const MomentumLattice>(box_length, c * lambda0, 4);
      row.modes = lat->size();
      const FreeVacuum vac = solve_vacuum_lattice(lat, 1.0, c, {}, rule);
      const Model model = bdf_model(vac, nu);
      ScfConfig sc = cfg;
      sc.target_charge = N;
      const ScfResult r = minimize_charge(model, sc);
      row.energy = r.report.energy;
      row.converged = r.report.converged;
      row.g0_zero = vac.g0_zero();
      row.shifted = row.energy - N * row.g0_zero;
      const Threshold th = vac.threshold();
      row.threshold = th.value;
      row.threshold_at_zero = th.attained_at_zero;

      const SolutionDecomposition d = decompose_solution(model, r.Q, r.report);
      double w = 0.0;
      for (Index k = 0; k < d.orbitals.cols(); ++k)
        for (Index p = 0; p < Index(lat->size()); ++p)
          w += std::norm(d.orbitals(4 * p + 2, k)) + std::norm(d.orbitals(4 * p + 3, k));
      row.lower_weight = d.orbitals.cols() > 0 ? w / double(d.orbitals.cols()) : 0.0;

      auto lat2 = std::make_shared<const MomentumLattice>(box_length, c * lambda0, 2);
      const HartreeFockResult hf = hartree_fock_solve(lat2, nu, N, cfg, rule);
      row.hf_energy = hf.energy;
      row.gap = std::abs(row.shifted - row.hf_energy);
      row.converged = row.converged && hf.converged;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  tab.gap_decreasing = true;
  std::vector<double> lx, ly, ix, iy;
  for (std::size_t i = 0; i < tab.rows.size(); ++i) {
    const auto& r = tab.rows[i];
    if (!r.error.empty() || !r.converged) {
      tab.gap_decreasing = false;
      continue;
    }
    if (i > 0 && !(r.gap < tab.rows[i - 1].gap)) tab.gap_decreasing = false;
    if (r.lower_weight > 0.0) {
      lx.push_back(std::log(r.c));
      ly.push_back(std::log(r.lower_weight));
    }
    ix.push_back(1.0 / r.c);
    iy.push_back(r.shifted);
  }
  if (lx.size() >= 2) tab.weight_exponent = -fit_line(lx, ly).first;
  if (ix.size() >= 2) tab.fitted_limit = fit_line(ix, iy).second;
  return tab;
}

ScalingCheck scaling_identity_check(const ExternalDensity& nu, int N, double c, double box_length,
                                    double lambda0, const ScfConfig& cfg, ZeroModeRule rule) {
  if (!(c > 0.0)) throw ConfigError("scaling factor must be positive");
  auto left = std::make_shared<const MomentumLattice>(box_length, c * lambda0, 4);
  auto right = std::make_shared<const MomentumLattice>(c * box_length, lambda0, 4);
  if (!left->same_modes(*right)) throw ConfigError("paired lattices do not share their modes");

  const FreeVacuum va = solve_vacuum_lattice(left, 1.0, c, {}, rule);
  const FreeVacuum vb = solve_vacuum_lattice(right, 1.0 / c, 1.0, {}, rule);
  const Model ma = bdf_model(va, nu);
  const Model mb = bdf_model(vb, nu.dilated(c));
  ScfConfig sc = cfg;
  sc.target_charge = N;
  ScalingCheck s;
  s.energy_left = minimize_charge(ma, sc).report.energy;
  s.energy_right = minimize_charge(mb, sc).report.energy;
  s.residual = std::abs(s.energy_left - c * c * s.energy_right);
  s.relative = s.residual / std::max(std::abs(s.energy_left), 1e-300);
  s.operator_residual = (ma.h0 - c * c * mb.h0).norm() / ma.h0.norm();
  return s;
}

}  // namespace bdf
