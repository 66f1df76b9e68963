#pragma once

// Asymptotic regimes: the linear (Furry) model and the weak coupling limit, a
// Hartree-Fock reference on 2-spinors and the non-relativistic limit, and the
// exact scaling between boxes of size L and cL.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bdf/core.hpp"
#include "bdf/energy.hpp"
#include "bdf/free_vacuum.hpp"
#include "bdf/scf.hpp"

namespace bdf {

struct LinearModelResult {
  /// Spectrum of D0 - V[nu] on the lattice, ascending, with eigenvectors.
  RVec eigenvalues;
  Mat eigenvectors;
  /// Eigenvalues inside the gap: lambda+ in (0, m) ascending, lambda- in (-m, 0) descending.
  RVec positive_gap;
  RVec negative_gap;
  /// Gap edge m of D0.
  double gap_edge = 1.0;
  /// Furry vacuum charge tr(chi_(-inf,0)(D0 - V) - P0-).
  int q0 = 0;
  Index negative_count = 0;
  /// Smallest |eigenvalue| met along D0 - t V, t in {0, 0.1, ..., 1}.
  double min_homotopy_gap = 0.0;
  /// sum of negative eigenvalues - tr((D0 - V) P0-).
  double sea_energy = 0.0;

  /// I(N). padded: missing gap eigenvalues count as the gap edge. Otherwise the lattice
  /// eigenvalues themselves are used (the exact linear minimum on the lattice).
  double energy(int N, bool padded) const;
  /// Projector onto the eigenspaces of the |N - q0| levels filled or emptied by I(N),
  /// completed to whole degenerate clusters.
  Mat level_projector(int N, double degeneracy_tol = 1e-8) const;
};

/// Diagonalize D0 - V[nubar] for the free (uncoupled) vacuum. Throws InvariantViolation when
/// an eigenvalue comes within gap_tol of 0 along the homotopy.
LinearModelResult linear_model(const FreeVacuum& free_vacuum, const ExternalDensity& nubar,
                               double gap_tol = 1e-9, int homotopy_steps = 10);

struct WeakCouplingRow {
  double alpha = 0.0;
  double energy = 0.0;
  double gap = 0.0;
  double overlap = 0.0;
  double vacuum_distance = 0.0;
  bool converged = false;
  std::string error;
};
struct WeakCouplingTable {
  LinearModelResult linear;
  int N = 1;
  double limit = 0.0;
  double limit_padded = 0.0;
  std::vector<WeakCouplingRow> rows;
  /// Least squares E(alpha) = intercept + slope alpha.
  double intercept = 0.0;
  double slope = 0.0;
  bool monotone = false;
  bool extrapolates = false;
};
WeakCouplingTable weak_coupling_scan(std::shared_ptr<const MomentumLattice> lattice,
                                     const ExternalDensity& nubar, int N,
                                     const std::vector<double>& alphas, const ScfConfig& cfg,
                                     ZeroModeRule rule = ZeroModeRule::Madelung, int jobs = 1);

struct HartreeFockResult {
  double energy = 0.0;
  Mat orbitals;
  RVec orbital_energies;
  double gram_error = 0.0;
  double residual = 0.0;
  bool converged = false;
  Mat Q;
};
/// Hartree-Fock on a 2-spinor lattice with kinetic symbol |p|^2/2, through the same
/// optimal-damping engine.
HartreeFockResult hartree_fock_solve(std::shared_ptr<const MomentumLattice> lattice2,
                                     const ExternalDensity& nu, int N, const ScfConfig& cfg,
                                     ZeroModeRule rule = ZeroModeRule::Madelung);

struct NonrelRow {
  double c = 1.0;
  std::size_t modes = 0;
  double g0_zero = 0.0;
  double energy = 0.0;
  /// E_c(N) - N g0(0).
  double shifted = 0.0;
  double hf_energy = 0.0;
  double gap = 0.0;
  /// Mean squared norm of the lower 2-spinor components of the orbitals.
  double lower_weight = 0.0;
  double threshold = 0.0;
  bool threshold_at_zero = false;
  bool converged = false;
  std::string error;
};
struct NonrelTable {
  std::vector<NonrelRow> rows;
  bool gap_decreasing = false;
  /// lower_weight ~ c^(-exponent), least squares in log-log.
  double weight_exponent = 0.0;
  /// Least squares E_c - N g0(0) = limit + b / c.
  double fitted_limit = 0.0;
};
/// Box L, cutoff c Lambda0, alpha = 1 and speed of light c for every c; the Hartree-Fock
/// reference uses the same modes with 2-spinors.
NonrelTable nonrel_scan(const ExternalDensity& nu, int N, const std::vector<double>& c_values,
                        double box_length, double lambda0, const ScfConfig& cfg,
                        ZeroModeRule rule = ZeroModeRule::Madelung, int jobs = 1);

struct ScalingCheck {
  double energy_left = 0.0;   // box L, cutoff c Lambda0, alpha 1, speed c
  double energy_right = 0.0;  // box cL, cutoff Lambda0, alpha 1/c, speed 1, dilated nu
  double residual = 0.0;      // |E_left - c^2 E_right|
  double relative = 0.0;
  double operator_residual = 0.0;  // ||D0_left - c^2 D0_right|| / ||D0_left||
};
ScalingCheck scaling_identity_check(const ExternalDensity& nu, int N, double c, double box_length,
                                    double lambda0, const ScfConfig& cfg,
                                    ZeroModeRule rule = ZeroModeRule::Madelung);

/// Slope of the least squares line through (x_i, y_i) and its intercept.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bdf
