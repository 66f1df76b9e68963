#pragma once

// Discretized one-particle space: plane waves of the periodic box [-L/2, L/2)^3
// with momenta inside the closed ball |k| <= cutoff, tensored with C^4 (or C^2
// for the non-relativistic reference). Basis index = mode * spinor_dim + spin.

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "bdf/core.hpp"

namespace bdf {

using IVec3 = Eigen::Vector3i;
using RVec3 = Eigen::Vector3d;

class MomentumLattice {
 public:
  static constexpr std::size_t kDefaultMaxTotalDim = 2500;

  MomentumLattice(double box_length, double cutoff, int spinor_dim,
                  std::size_t max_total_dim = kDefaultMaxTotalDim);

  double box_length() const { return box_length_; }
  double cutoff() const { return cutoff_; }
  double volume() const { return box_length_ * box_length_ * box_length_; }
  double spacing() const;
  int spinor_dim() const { return spinor_dim_; }
  std::size_t size() const { return modes_.size(); }
  Index total_dim() const { return static_cast<Index>(modes_.size()) * spinor_dim_; }
  /// Largest |z_i| over all modes k = (2pi/L) z.
  int max_index() const { return max_index_; }

  const IVec3& index(std::size_t mode) const { return modes_[mode]; }
  RVec3 momentum(std::size_t mode) const;
  RVec3 momentum_of(const IVec3& z) const;
  std::optional<std::size_t> find(const IVec3& z) const;
  /// Ordinal of -k for mode k.
  std::size_t negated(std::size_t mode) const { return negated_[mode]; }
  const std::vector<IVec3>& modes() const { return modes_; }

  /// Pairs (a, a + d) for every difference vector d realized on the lattice,
  /// d = 0 first, then lexicographic.
  struct Shift {
    IVec3 d;
    std::vector<Index> src;
    std::vector<Index> dst;
  };
  const std::vector<Shift>& shifts() const { return shifts_; }
  /// Position of d in shifts(), if realized.
  std::optional<std::size_t> shift_index(const IVec3& d) const;

  /// Same modes, different spinor dimension (2-spinor reference lattices).
  MomentumLattice with_spinor_dim(int spinor_dim) const;

  bool same_modes(const MomentumLattice& other) const;

 private:
  double box_length_;
  double cutoff_;
  int spinor_dim_;
  std::size_t max_total_dim_;
  int max_index_ = 0;
  std::vector<IVec3> modes_;
  std::vector<int> lookup_;  // dense cube of side 2*max_index+1, -1 when absent
  std::vector<std::size_t> negated_;
  std::vector<Shift> shifts_;
  std::vector<int> shift_lookup_;  // dense cube of side 4*max_index+1

  long cube_offset(const IVec3& z) const;
};

/// Dirac matrices in the standard representation: beta = diag(I, -I),
/// alpha_k off-diagonal Pauli blocks.
template <typename Real = double>
struct DiracAlgebra {
  using Matrix = Eigen::Matrix<std::complex<Real>, 4, 4>;
  std::array<Matrix, 3> alpha;
  Matrix beta;

  static DiracAlgebra standard() {
    using C = std::complex<Real>;
    const C i(0, 1);
    Eigen::Matrix<C, 2, 2> s1, s2, s3;
    s1 << 0, 1, 1, 0;
    s2 << 0, -i, i, 0;
    s3 << 1, 0, 0, -1;
    DiracAlgebra a;
    const std::array<Eigen::Matrix<C, 2, 2>, 3> sig{s1, s2, s3};
    for (int k = 0; k < 3; ++k) {
      a.alpha[k].setZero();
      a.alpha[k].template topRightCorner<2, 2>() = sig[k];
      a.alpha[k].template bottomLeftCorner<2, 2>() = sig[k];
    }
    a.beta.setZero();
    a.beta.template topLeftCorner<2, 2>().setIdentity();
    a.beta.template bottomRightCorner<2, 2>() = -Eigen::Matrix<C, 2, 2>::Identity();
    return a;
  }
};

/// c alpha.p + c^2 beta.
template <typename Real>
Eigen::Matrix<std::complex<Real>, 4, 4> free_dirac_symbol(const Eigen::Matrix<Real, 3, 1>& p,
                                                          Real c) {
  static const auto alg = DiracAlgebra<Real>::standard();
  Eigen::Matrix<std::complex<Real>, 4, 4> m = (c * c) * alg.beta;
  for (int k = 0; k < 3; ++k) m += (c * p[k]) * alg.alpha[k];
  return m;
}

/// alpha . omega with omega a unit vector (zero for p = 0).
Mat4 alpha_dot(const RVec3& v);

enum class ZeroModeRule {
  Neutral,   ///< W(0) = 0: neutralizing background
  Madelung,  ///< W(0)/L^3 = Madelung constant of the cubic box
};

/// Periodized Coulomb kernel W(k) = 4 pi / |k|^2 on the difference vectors of a lattice.
class CoulombKernel {
 public:
  explicit CoulombKernel(const MomentumLattice& lattice, ZeroModeRule rule = ZeroModeRule::Neutral);

  /// W(k) for k = (2pi/L) d.
  double operator()(const IVec3& d) const;
  /// W(k) / L^3, the weight multiplying lattice sums.
  double weight(const IVec3& d) const { return (*this)(d) / volume_; }
  double zero_mode_value() const { return zero_mode_; }
  ZeroModeRule rule() const { return rule_; }

 private:
  double box_length_;
  double volume_;
  double zero_mode_;
  ZeroModeRule rule_;
};

/// Madelung constant xi(L) > 0 of the simple cubic box, xi * L = 2.837297...
/// computed by Ewald summation.
double madelung_constant(double box_length);

/// Block-diagonal exchange of a translation-invariant field:
/// T(p) = (1/L^3) sum_{q on lattice} W(p - q) A(q).
std::vector<Mat> convolve_kernel(const std::vector<Mat>& field, const CoulombKernel& kernel,
                                 const MomentumLattice& lattice);

/// Exchange operator of a general operator Q: K(p, q) = (1/L^3) sum_k W(k) Q(p - k, q - k),
/// the momentum representation of Q(x, y) W(x - y) projected back onto the lattice.
Mat exchange_operator(const Mat& Q, const CoulombKernel& kernel, const MomentumLattice& lattice);

Mat block_diagonal(const std::vector<Mat>& blocks);
Mat block_diagonal(const std::vector<Mat4>& blocks);
std::vector<Mat> diagonal_blocks(const Mat& m, const MomentumLattice& lattice);

}  // namespace bdf
