#pragma once

// Self-consistent free vacuum: the dressed translation-invariant Dirac operator
// D0(p) = g1(|p|) alpha.omega_p + g0(|p|) beta and its negative spectral projector.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "bdf/core.hpp"
#include "bdf/lattice.hpp"

namespace bdf {

/// Composite Gauss-Legendre grid on [0, cutoff]. Quadrature nodes carry weights;
/// the two endpoints 0 and cutoff are evaluation-only (weight 0).
struct RadialGrid {
  RVec nodes;
  RVec weights;
};

/// Geometric panels from 1e-3 * scale up to scale, then uniform panels of width
/// `scale` up to the cutoff; `points` Gauss-Legendre nodes per panel.
RadialGrid make_radial_grid(double cutoff, double scale = 1.0, int points = 12);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, RVec& x, RVec& w);

/// Monotone piecewise cubic Hermite interpolant (Fritsch-Carlson).
class Pchip {
 public:
  Pchip() = default;
  Pchip(RVec x, RVec y);
  double operator()(double t) const;
  bool empty() const { return x_.size() == 0; }

 private:
  RVec x_, y_, d_;
};

struct VacuumSymbol {
  double alpha = 0.0;
  double cutoff = 0.0;
  double c = 1.0;
  RVec grid;
  RVec g0;
  RVec g1;
  int iterations = 0;
  std::vector<double> residuals;

  double g0_at(double p) const;
  double g1_at(double p) const;
  double energy_at(double p) const;
  /// sqrt(g0^2 + g1^2) on the grid.
  RVec energy() const;
  /// Rebuild the interpolants after grid, g0 or g1 change.
  void build_interpolants();

 private:
  Pchip i0_, i1_;
};

struct FixedPointOptions {
  double tol = 1e-12;
  int max_iter = 500;
  double mixing = 1.0;
};

/// Radial Nystrom solution of the angularly averaged vacuum equations
///   g0(p) = c^2 + (alpha / 2 pi p) int_0^cutoff q f0(q) L(p, q) dq
///   g1(p) = c p + (alpha / 2 pi) int_0^cutoff f1(q) [(p^2 + q^2) / (2 p^2) L(p, q) - q / p] dq
/// with f = g / sqrt(g0^2 + g1^2) and L(p, q) = log((p + q) / |p - q|).
VacuumSymbol solve_symbol_radial(double alpha, double cutoff, double c, const RadialGrid& grid,
                                 double tol = 1e-12, int max_iter = 500, double mixing = 1.0);

/// Throws InvariantViolation when x <= g1(x) <= x g0(x) fails at some node (c = 1 units).
void check_chain_inequality(const VacuumSymbol& symbol, double rel_tol = 1e-12);
/// Number of nodes violating the chain inequality.
int count_chain_violations(const VacuumSymbol& symbol, double rel_tol = 1e-12);

struct Threshold {
  double value = 1.0;
  double argmin = 0.0;
  bool attained_at_zero = true;
};
Threshold threshold(const VacuumSymbol& symbol);

void write_symbol_csv(std::ostream& os, const VacuumSymbol& symbol);

/// Per-mode dressed Dirac operator and its negative spectral projector on a lattice.
class FreeVacuum {
 public:
  FreeVacuum(std::shared_ptr<const MomentumLattice> lattice, std::vector<Mat4> dirac, double alpha,
             double c, ZeroModeRule rule = ZeroModeRule::Neutral);

  const MomentumLattice& lattice() const { return *lattice_; }
  std::shared_ptr<const MomentumLattice> lattice_ptr() const { return lattice_; }
  double alpha() const { return alpha_; }
  double c() const { return c_; }
  /// Exchange zero-mode rule the vacuum is self-consistent with.
  ZeroModeRule rule() const { return rule_; }

  const std::vector<Mat4>& dirac_blocks() const { return dirac_; }
  const std::vector<Mat4>& projector_blocks() const { return pminus_; }
  /// Dense total_dim x total_dim matrices.
  Mat dirac() const;
  Mat projector_minus() const;
  Mat projector_plus() const;

  /// g0 = tr(beta D)/4 and g1 = tr(alpha.omega D)/4 per mode.
  double g0(std::size_t mode) const;
  double g1(std::size_t mode) const;
  /// Smallest |eigenvalue| of D0 over modes, with its mode.
  Threshold threshold() const;
  /// g0 at the zero mode.
  double g0_zero() const;

  int iterations = 0;
  std::vector<double> residuals;

 private:
  std::shared_ptr<const MomentumLattice> lattice_;
  std::vector<Mat4> dirac_;
  std::vector<Mat4> pminus_;
  double alpha_;
  double c_;
  ZeroModeRule rule_;
};

/// Negative spectral projector of a Hermitian 4x4 matrix; throws when an
/// eigenvalue lies within gap_tol of 0.
Mat4 negative_projector(const Mat4& m, double gap_tol = 1e-12);

/// Lattice fixed point P <- chi_(-inf,0)(D(p)), D(p) = c alpha.p + c^2 beta
/// - alpha (1/L^3) sum_q W(p - q) (P(q) - 1/2).
FreeVacuum solve_vacuum_lattice(std::shared_ptr<const MomentumLattice> lattice, double alpha,
                                double c, const FixedPointOptions& opts = {},
                                ZeroModeRule rule = ZeroModeRule::Neutral);

/// Lattice vacuum whose blocks are the radial symbol evaluated at each mode.
FreeVacuum vacuum_from_symbol(std::shared_ptr<const MomentumLattice> lattice,
                              const VacuumSymbol& symbol,
                              ZeroModeRule rule = ZeroModeRule::Neutral);

}  // namespace bdf
