#include "bdf/linalg.hpp"

#include <string>

#include <Eigen/Eigenvalues>

#ifdef BDF_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace bdf {

namespace {
constexpr Index kLapackMinDim = 24;
}

HermitianEigensolver::HermitianEigensolver(const Mat& h, int options) {
  const bool vectors = (options & Eigen::ComputeEigenvectors) != 0;
  const Index n = h.rows();
  if (h.cols() != n) throw std::invalid_argument("eigensolver needs a square matrix");
#ifdef BDF_HAVE_LAPACKE
  if (n >= kLapackMinDim) {
    vectors_ = h;
    values_.resize(n);
    const lapack_int info =
        LAPACKE_zheevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', lapack_int(n),
                       reinterpret_cast<lapack_complex_double*>(vectors_.data()), lapack_int(n),
                       values_.data());
    if (info != 0) throw NonConvergence("zheevd failed with info=" + std::to_string(info));
    if (!vectors) vectors_.resize(0, 0);
    return;
  }
#endif
  Eigen::SelfAdjointEigenSolver<Mat> es(
      h, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NonConvergence("Hermitian eigensolver failed");
  values_ = es.eigenvalues();
  if (vectors) vectors_ = es.eigenvectors();
}

const char* eigensolver_backend() {
#ifdef BDF_HAVE_LAPACKE
  return "lapack";
#else
  return "eigen";
#endif
}

}  // namespace bdf
