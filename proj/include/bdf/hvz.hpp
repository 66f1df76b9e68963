#pragma once

// Energy curves q -> E(q) and the inequality checks around them: the linear
// sandwich, concavity between integers, Lipschitz continuity, binding margins
// and the pair-suppression criterion.

#include <string>
#include <vector>

#include "bdf/core.hpp"
#include "bdf/energy.hpp"
#include "bdf/scf.hpp"

namespace bdf {

struct CurvePoint {
  double q = 0.0;
  double energy = 0.0;
  double mu = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Solver failure message; empty when the run finished.
  std::string error;
};

struct EnergyCurve {
  std::vector<CurvePoint> points;  // sorted by q
  double alpha = 0.0;
  double nu_charge = 0.0;

  const CurvePoint* find(double q, double tol = 1e-9) const;
};

/// One minimize_charge run per q. Runs are chained from q = 0 outwards, each starting
/// from its neighbour's state; failures are kept as flagged points.
EnergyCurve scan_energies(const Model& model, std::vector<double> q_list, const ScfConfig& cfg);

/// Energy tolerance attached to a computed point.
double point_tolerance(const CurvePoint& p);

struct BoundRow {
  double q = 0.0;
  double energy = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool lower_ok = false;
  bool upper_ok = false;
};
struct BoundsReport {
  std::vector<BoundRow> rows;
  bool all_ok = true;
};
/// (1 - alpha pi/4) m |q| - alpha/2 D(nu, nu) <= E(q) <= g0(0) |q|.
BoundsReport check_bounds(const EnergyCurve& curve, double m, double g0_zero, double alpha,
                          double nu_self);

struct ShapeReport {
  /// Largest increase of the divided-difference slope inside an integer interval.
  double max_concavity_violation = 0.0;
  bool concave = true;
  int triples_checked = 0;
  /// Largest |E(q) - E(q')| / |q - q'|.
  double max_lipschitz_ratio = 0.0;
  double lipschitz_constant = 0.0;
  bool lipschitz = true;
};
ShapeReport check_concavity_and_lipschitz(const EnergyCurve& curve, double lipschitz_constant);

struct BindingRow {
  int K = 0;
  double e_rest = 0.0;  // E^nu(N - K)
  double e_free = 0.0;  // E^0(K)
  double margin = 0.0;  // E^nu(N - K) + E^0(K) - E^nu(N)
  double tolerance = 0.0;
  bool strict = false;
  bool subadditive = false;
};
struct BindingReport {
  int N = 0;
  double energy = 0.0;
  std::vector<BindingRow> rows;
  bool bound = true;
  bool subadditive = true;
};
/// Margins E^nu(N - K) + E^0(K) - E^nu(N) for every K in the window (K = 0 skipped).
BindingReport check_binding(const EnergyCurve& curve, const EnergyCurve& free_curve, int N,
                            const std::vector<int>& window);

struct PairSuppression {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool holds = false;
  /// K values that the binding check must cover.
  std::vector<int> window;
};
/// (g0(0) - m) N + alpha (m (N + 2) pi/4 + D(nu, nu)/2) < 2 m.
PairSuppression check_pair_suppression(double g0_zero, double m, double alpha, double nu_self, int N);

/// [-2, N + 2] without 0.
std::vector<int> default_binding_window(int N);

struct HvzAnalysis {
  EnergyCurve curve;
  EnergyCurve free_curve;
  BoundsReport bounds;
  ShapeReport shape;
  PairSuppression pair;
  BindingReport binding;
};
/// Scans E^nu on q_grid (plus every N - K the binding window needs) and E^0 on the window,
/// then runs every check. The Lipschitz constant is g0(0).
HvzAnalysis analyze_hvz(const Model& model, const Model& free_model, int N, std::vector<double> q_grid,
                        const ScfConfig& cfg, double g0_zero);

}  // namespace bdf
