#pragma once

// Self-consistent minimization of a mean-field Model over the convex set
// 0 <= Q + reference <= 1, globally or at fixed charge tr(Q) = q, by the optimal
// damping algorithm: Aufbau filling of D_Q, then the exact line minimum of the
// quadratic energy along the segment.

#include <functional>
#include <vector>

#include "bdf/core.hpp"
#include "bdf/energy.hpp"

namespace bdf {

enum class Damping { OptimalStep, Fixed };

struct ScfReport;

struct ScfConfig {
  double target_charge = 0.0;
  double tol_residual = 1e-10;
  double tol_charge = 1e-10;
  int max_iter = 400;
  Damping damping = Damping::OptimalStep;
  double theta = 1.0;
  double level_shift = 0.0;
  /// Largest |q| accepted.
  double charge_cap = 50.0;
  /// Eigenvalues closer than this share the Fermi level.
  double degeneracy_tol = 1e-8;
  /// Exact rebuild of D_Q and the energy every this many steps.
  int recompute_every = 25;
  /// Purify fractional Fermi levels and resume, at most this many times.
  int purify_rounds = 4;
  int checkpoint_every = 0;
  std::function<void(const Mat&, const ScfReport&)> checkpoint;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double energy = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

struct ScfReport {
  double energy = 0.0;
  double mu = 0.0;
  bool mu_in_gap = true;
  RVec eigenvalues;
  /// ||Gamma - aufbau(D_Q)||_op.
  double residual = 0.0;
  /// ||[Gamma, D_Q]||_op.
  double commutator = 0.0;
  double charge = 0.0;
  double target_charge = 0.0;
  /// Weight delta of the partly filled last level, in [0, 1).
  double delta = 0.0;
  int fractional_levels = 0;
  /// Eigenvalues sharing the Fermi level.
  std::vector<double> fermi_set;
  /// Lowest empty minus highest filled eigenvalue.
  double gap = 0.0;
  int iterations = 0;
  int purifications = 0;
  double level_shift = 0.0;
  bool converged = false;
  bool gap_closed = false;
  std::vector<IterationRecord> trace;
};

struct ScfResult {
  Mat Q;
  ScfReport report;
};

/// Minimum over the whole convex set: fill every negative eigenvalue of D_Q.
ScfResult minimize_global(const Model& model, const ScfConfig& cfg, const Mat* initial = nullptr);
/// Minimum under tr(Q) = cfg.target_charge. A start with a different charge is
/// replaced by the Aufbau state of its mean-field operator.
ScfResult minimize_charge(const Model& model, const ScfConfig& cfg, const Mat* initial = nullptr);

struct SolutionDecomposition {
  /// chi_(-inf, 0](D_Q).
  Mat vacuum_projector;
  /// Orbitals with eigenvalues in (0, mu], as columns.
  Mat orbitals;
  RVec orbital_energies;
  double vacuum_charge = 0.0;
  bool charged_vacuum = false;
  double max_residual = 0.0;
  double orthonormality_error = 0.0;
};

/// Split a converged state into polarized vacuum and real electrons. When the vacuum is
/// neutral the number of orbitals must equal the charge (InvariantViolation otherwise).
SolutionDecomposition decompose_solution(const Model& model, const Mat& Q, const ScfReport& report);

/// (Q + reference) relative to the Aufbau occupation of H for a total number of filled levels.
struct Aufbau {
  Mat gamma;
  RVec eigenvalues;
  Mat eigenvectors;
  RVec occupation;
  double delta = 0.0;
  std::vector<double> fermi_set;
  /// Eigenvector columns [fermi_begin, fermi_end) span the Fermi level.
  Index fermi_begin = 0;
  Index fermi_end = 0;
  double homo = 0.0;
  double lumo = 0.0;
};
Aufbau aufbau_fill(const Mat& H, double filled, double degeneracy_tol);
Aufbau negative_fill(const Mat& H);

}  // namespace bdf
