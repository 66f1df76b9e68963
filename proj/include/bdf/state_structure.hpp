#pragma once

// Structure of projector pairs (P, Pi) and of the variational set, Bogoliubov
// amplitudes, and Lieb's purification of fractional occupations.

#include <random>
#include <vector>

#include "bdf/core.hpp"
#include "bdf/energy.hpp"

namespace bdf {

using Rng = std::mt19937_64;

/// Columns are orthonormal vectors.
///   f: ran P  intersect ran(1 - Pi)       (N vectors)
///   g: ker P  intersect ran Pi            (M vectors)
///   (u_i, v_i, lambda_i): ran Pi, ran(1 - Pi), lambda_i > 0 (paired Bogoliubov data)
///   u_fixed: remaining ran Pi vectors, kept by P (lambda = 0)
///   v_free:  remaining ran(1 - Pi) vectors, removed by P (lambda = 0)
/// P = sum |f><f| + sum |u + lambda v><u + lambda v| / (1 + lambda^2) + sum |u_fixed><u_fixed|.
struct ProjectorDecomposition {
  Mat f, g, u, v, u_fixed, v_free;
  RVec lambda;

  Index N() const { return f.cols(); }
  Index M() const { return g.cols(); }
};

ProjectorDecomposition decompose_projector_pair(const Mat& P, const Mat& Pi,
                                                double rank_tol = 1e-10);
Mat reconstruct_projector(const ProjectorDecomposition& d, Index dim);
/// 1 - P = sum |g><g| + sum |v - lambda u><v - lambda u| / (1 + lambda^2) + sum |v_free><v_free|.
Mat reconstruct_complement(const ProjectorDecomposition& d, Index dim);
/// Pi + sum |f><f| - sum |g><g| + Q(A) with A = sum lambda |v><u|,
/// Q(A) = AA*/(1+AA*) - A*A/(1+A*A) + A/(1+A*A) + (1+A*A)^{-1} A*.
Mat projector_from_pairing(const ProjectorDecomposition& d, const Mat& Pi);

/// k = prod (1 + lambda_i^2)^{-1/2}.
double bogoliubov_amplitude(const ProjectorDecomposition& d);

/// Q = U_D (Pi + gamma) U_{-D} - Pi with U_D = exp(D - D*). D must map ran Pi into ran(1 - Pi)
/// and vanish on ran(1 - Pi); gamma commutes with Pi with -Pi <= gamma-- <= 0 <= gamma++ <= 1 - Pi.
Mat parametrize_state(const Mat& D, const Mat& gamma, const Mat& Pi, double tol = 1e-9);

/// exp(X) for anti-Hermitian X.
Mat unitary_exp(const Mat& X);

/// Random orthogonal projector of the given rank.
Mat random_projector(Index dim, Index rank, Rng& rng);
Mat random_unitary(Index dim, Rng& rng);
Mat random_gaussian(Index rows, Index cols, Rng& rng);

struct RandomStateOptions {
  double rotation_scale = 0.3;  // size of D entries
  int moved_up = 0;             // electrons added by gamma++ (full occupations)
  int moved_down = 0;           // holes added by gamma--
  int fractional = 3;           // extra fractional occupations on each side
};
/// Random admissible states U_D (Pi + gamma) U_{-D} - Pi with Gaussian D and randomly
/// rotated occupations; the bases of ran Pi and ran(1 - Pi) are computed once.
class StateSampler {
 public:
  explicit StateSampler(const Mat& Pi);
  Mat operator()(Rng& rng, const RandomStateOptions& opts = {}) const;
  const Mat& reference() const { return pi_; }

 private:
  Mat pi_, bm_, bp_;
};
Mat random_state(const Mat& Pi, Rng& rng, const RandomStateOptions& opts = {});

/// Orthonormal basis (columns) of the eigenspace of a Hermitian projector-like matrix with
/// eigenvalues near 1.
Mat range_basis(const Mat& hermitian, double tol = 1e-8);

struct PurifyResult {
  Mat Q;
  int transfers = 0;
  double energy_in = 0.0;
  double energy_out = 0.0;
  int fractional_out = 0;
};

/// Number of eigenvalues of Q + reference strictly inside (tol, 1 - tol).
int count_fractional(const Mat& Q, const Mat& reference, double tol = 1e-8);

/// Move weight between pairs of fractional levels of Gamma = Q + reference along the
/// cheaper direction until at most one fractional level remains. Charge is preserved and the
/// energy does not increase when the pair curvature is non-positive.
PurifyResult lieb_purify(const Model& model, const Mat& Q, double tol = 1e-8);

/// Fock-space sanity checks for small dimensions (dim <= 8) via Jordan-Wigner.
namespace fock {

/// Dense vector on the 2^dim occupation basis (bit i = mode i occupied).
using State = Vec;

State vacuum(Index dim);
/// c*(phi) applied to a state.
State create(const Vec& phi, const State& s);
/// c(phi) applied to a state.
State annihilate(const Vec& phi, const State& s);
/// Slater determinant of the columns of an orthonormal basis.
State slater(const Mat& basis);

/// k prod_n c*(f_n) prod_m c(g_m) prod_i (1 + lambda_i c*(v_i) c(u_i)) |Pi>.
State bogoliubov_state(const ProjectorDecomposition& d, const Mat& pi_basis);

}  // namespace fock

}  // namespace bdf
