#pragma once

// Dense Hermitian eigensolver used for every matrix larger than a spinor block.
// Divide and conquer LAPACK when available, Eigen otherwise; the interface mirrors
// Eigen::SelfAdjointEigenSolver.

#include <Eigen/Core>

#include "bdf/core.hpp"

namespace bdf {

class HermitianEigensolver {
 public:
  explicit HermitianEigensolver(const Mat& hermitian,
                                int options = Eigen::ComputeEigenvectors);

  /// Ascending.
  const RVec& eigenvalues() const { return values_; }
  /// Orthonormal columns matching eigenvalues().
  const Mat& eigenvectors() const { return vectors_; }

 private:
  RVec values_;
  Mat vectors_;
};

/// Name of the backend compiled in ("lapack" or "eigen").
const char* eigensolver_backend();

}  // namespace bdf
