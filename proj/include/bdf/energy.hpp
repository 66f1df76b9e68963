#pragma once

// BDF states, charge densities and the renormalized energy functional.
// Everything lives in momentum space on a MomentumLattice.

#include <limits>
#include <memory>
#include <vector>

#include "bdf/core.hpp"
#include "bdf/free_vacuum.hpp"
#include "bdf/lattice.hpp"

namespace bdf {

inline constexpr double kAdmissibilityTol = 1e-9;

/// Fourier coefficients rho(k) on the lattice difference vectors, in the order of
/// MomentumLattice::shifts(). rho(x) = sum_k rho(k) e^{ikx}.
struct ChargeDensity {
  std::shared_ptr<const MomentumLattice> lattice;
  std::vector<cplx> coeff;

  ChargeDensity() = default;
  explicit ChargeDensity(std::shared_ptr<const MomentumLattice> lat)
      : lattice(std::move(lat)), coeff(lattice->shifts().size(), cplx(0.0)) {}

  ChargeDensity& operator+=(const ChargeDensity& o);
  ChargeDensity& operator*=(double s);
  /// Coefficient for difference vector d (0 when not realized).
  cplx at(const IVec3& d) const;
  /// L^2 norm over the box: sqrt(L^3 sum |rho(k)|^2).
  double l2_norm() const;
};
ChargeDensity operator+(ChargeDensity a, const ChargeDensity& b);
ChargeDensity operator-(ChargeDensity a, const ChargeDensity& b);
ChargeDensity operator*(double s, ChargeDensity a);

struct Nucleus {
  RVec3 center = RVec3::Zero();
  double width = 1.0;
  double charge = 1.0;
};

/// Gaussian nuclear density nu(x) = sum_j Z_j (2 pi s_j^2)^{-3/2} exp(-|x - R_j|^2 / 2 s_j^2),
/// periodized over the box.
class ExternalDensity {
 public:
  ExternalDensity() = default;
  explicit ExternalDensity(std::vector<Nucleus> nuclei);

  const std::vector<Nucleus>& nuclei() const { return nuclei_; }
  double total_charge() const;
  bool empty() const { return nuclei_.empty(); }
  /// nu(k) = sum_j (Z_j / L^3) exp(-s_j^2 |k|^2 / 2) exp(-i k.R_j).
  cplx fourier(const RVec3& k, double volume) const;
  ChargeDensity on_lattice(std::shared_ptr<const MomentumLattice> lattice) const;
  /// D(nu, nu) summed over every nonzero k of the box, not only lattice differences.
  double self_energy(double box_length) const;

  ExternalDensity scaled(double s) const;
  /// Widths and centers multiplied by x (the scaling map between paired boxes).
  ExternalDensity dilated(double x) const;

 private:
  std::vector<Nucleus> nuclei_;
};

/// rho(k) = (1/L^3) sum_p tr Q(p + k, p).
ChargeDensity density(const Mat& Q, std::shared_ptr<const MomentumLattice> lattice);

/// D(f, g) = 4 pi L^3 sum_{k != 0} conj(f(k)) g(k) / |k|^2.
cplx coulomb_pairing(const ChargeDensity& f, const ChargeDensity& g);

/// Multiplication operator by the Coulomb potential of rho: V(p, q) = W(p - q) rho(p - q),
/// so that tr(V[rho] Q) = D(rho, rho_Q).
Mat direct_potential(const ChargeDensity& rho);

/// tr(P+ Q P+) + tr(P- Q P-).
double p_trace(const Mat& Q, const Mat& pminus);

/// Re tr(Q K[Q]): the discrete double integral of |Q(x,y)|^2 W(x - y).
double exchange_term(const Mat& Q, const CoulombKernel& kernel, const MomentumLattice& lattice);

/// Generic mean-field model E(Q) = tr(h0 Q) - alpha D(rho_Q, nu) + alpha/2 (D(rho_Q, rho_Q) - X(Q))
/// over states Q = Gamma - reference with 0 <= Gamma <= 1. The zero-mode rule applies to the
/// exchange term X only; the direct terms always use the neutralizing background.
struct Model {
  std::shared_ptr<const MomentumLattice> lattice;
  Mat h0;
  Mat reference;
  double alpha = 0.0;
  CoulombKernel kernel;
  ExternalDensity nuclei;
  ChargeDensity nu;
  Mat v_nu;
  double nu_self = 0.0;
  /// Rank of the reference projector (number of filled sea levels).
  Index reference_rank = 0;
  /// Threshold m(alpha) of the free operator; bounds the chemical potential.
  double mass_gap = std::numeric_limits<double>::infinity();

  Model(std::shared_ptr<const MomentumLattice> lat, Mat h0, Mat reference, double alpha,
        const ExternalDensity& ext, ZeroModeRule rule = ZeroModeRule::Neutral);

  Index dim() const { return h0.rows(); }
};

/// BDF model: h0 = D0 (dressed), reference = P0-, coupling and exchange zero mode
/// taken from the vacuum.
Model bdf_model(const FreeVacuum& vacuum, const ExternalDensity& nu);
/// Same, with an explicit coupling (the vacuum is not re-solved).
Model bdf_model(const FreeVacuum& vacuum, const ExternalDensity& nu, double alpha);
/// Non-relativistic Hartree-Fock model on a 2-spinor lattice: h0 = |p|^2 / 2, reference 0.
Model hartree_fock_model(std::shared_ptr<const MomentumLattice> lattice2, const ExternalDensity& nu,
                         double alpha = 1.0, ZeroModeRule rule = ZeroModeRule::Madelung);

struct EnergyParts {
  double kinetic = 0.0;   // tr(h0 Q)
  double external = 0.0;  // -alpha D(rho_Q, nu)
  double direct = 0.0;    // alpha/2 D(rho_Q, rho_Q)
  double exchange = 0.0;  // -alpha/2 X(Q)
  double total() const { return kinetic + external + direct + exchange; }
};

EnergyParts energy_parts(const Model& m, const Mat& Q);
double bdf_energy(const Model& m, const Mat& Q);
/// D_Q = h0 + alpha (V[rho_Q] - V[nu]) - alpha K[Q].
Mat mean_field_operator(const Model& m, const Mat& Q);
/// Second variation alpha (D(rho_d, rho_d) - X(d)): E(Q + t d) = E(Q) + t tr(D_Q d) + t^2/2 curvature.
double curvature(const Model& m, const Mat& d);

/// Checked state: Hermitian Q with spectrum of Q + reference inside [0, 1].
class BdfState {
 public:
  BdfState(const Model& model, Mat Q, double tol = kAdmissibilityTol);

  const Mat& matrix() const { return Q_; }
  const ChargeDensity& density() const { return rho_; }
  double p_trace() const { return p_trace_; }

 private:
  Mat Q_;
  ChargeDensity rho_;
  double p_trace_;
};

/// Spectrum of Q + reference lies in [-tol, 1 + tol] and Q is Hermitian.
bool is_admissible(const Mat& Q, const Mat& reference, double tol = kAdmissibilityTol);
/// Clamp the spectrum of Q + reference to [0, 1].
Mat project_admissible(const Mat& Q, const Mat& reference);
Mat hermitian_part(const Mat& m);

/// Blocks of Q relative to the splitting P+ / P-.
struct BlockNorms {
  double pp_trace_norm = 0.0;
  double mm_trace_norm = 0.0;
  double pm_hs_norm = 0.0;
  double mp_hs_norm = 0.0;
  double sum() const { return pp_trace_norm + mm_trace_norm + pm_hs_norm + mp_hs_norm; }
};
BlockNorms block_norms(const Mat& Q, const Mat& pminus);

/// X(Q) / ((pi/2) tr(|p| Q^2)); Kato's inequality suggests <= 1 in the continuum.
double kato_ratio(const Mat& Q, const CoulombKernel& kernel, const MomentumLattice& lattice);

/// tr_{C^4}(P-(p) P+(q)) for two modes of a vacuum.
double vacuum_overlap(const FreeVacuum& vac, std::size_t p, std::size_t q);

double trace_norm(const Mat& hermitian);
double operator_norm(const Mat& hermitian);

}  // namespace bdf
