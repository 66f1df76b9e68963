#include "bdf/state_structure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "bdf/linalg.hpp"

namespace bdf {

namespace {

Mat columns(const Mat& m, const std::vector<Index>& idx) {
  Mat out(m.rows(), Index(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(Index(k)) = m.col(idx[k]);
  return out;
}

Mat outer(const Mat& cols) { return cols * cols.adjoint(); }

}  // namespace

Mat range_basis(const Mat& h, double) {
  HermitianEigensolver es(hermitian_part(h));
  std::vector<Index> keep;
  for (Index i = 0; i < h.rows(); ++i)
    if (es.eigenvalues()[i] > 0.5) keep.push_back(i);
  return columns(es.eigenvectors(), keep);
}

ProjectorDecomposition decompose_projector_pair(const Mat& P, const Mat& Pi, double rank_tol) {
  const Index n = P.rows();
  if (P.cols() != n || Pi.rows() != n || Pi.cols() != n)
    throw std::invalid_argument("projector pair dimension mismatch");
  const Mat I = Mat::Identity(n, n);
  const double edge = 100.0 * rank_tol;

  HermitianEigensolver es(hermitian_part(P - Pi));
  std::vector<Index> up, down;
  for (Index i = 0; i < n; ++i) {
    if (es.eigenvalues()[i] > 1.0 - edge) up.push_back(i);
    if (es.eigenvalues()[i] < -1.0 + edge) down.push_back(i);
  }
  ProjectorDecomposition d;
  d.f = columns(es.eigenvectors(), up);
  d.g = columns(es.eigenvectors(), down);

  const Mat Bm = range_basis(Pi - outer(d.g));
  const Mat Bp = range_basis(I - Pi - outer(d.f));
  const Index dm = Bm.cols(), dp = Bp.cols();
  if (dm == 0 || dp == 0) {
    d.u = Mat(n, 0);
    d.v = Mat(n, 0);
    d.lambda = RVec(0);
    d.u_fixed = Bm;
    d.v_free = Bp;
    return d;
  }
  // Graph of A over ran Pi minus E_{-1}: A = [(1 - Pi) P Pi] [Pi P Pi]^{-1}.
  const Mat C = hermitian_part(Bm.adjoint() * P * Bm);
  const Mat B = Bp.adjoint() * P * Bm;
  const Mat A = C.llt().solve(B.adjoint()).adjoint();
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVec& sv = svd.singularValues();
  Index paired = 0;
  while (paired < sv.size() && sv[paired] > 1e-12) ++paired;
  d.lambda = sv.head(paired);
  d.u = Bm * svd.matrixV().leftCols(paired);
  d.v = Bp * svd.matrixU().leftCols(paired);
  d.u_fixed = Bm * svd.matrixV().rightCols(dm - paired);
  d.v_free = Bp * svd.matrixU().rightCols(dp - paired);
  return d;
}

Mat reconstruct_projector(const ProjectorDecomposition& d, Index dim) {
  Mat P = Mat::Zero(dim, dim);
  P += outer(d.f) + outer(d.u_fixed);
  for (Index i = 0; i < d.lambda.size(); ++i) {
    const Vec w = d.u.col(i) + d.lambda[i] * d.v.col(i);
    P += w * w.adjoint() / (1.0 + d.lambda[i] * d.lambda[i]);
  }
  return P;
}

Mat reconstruct_complement(const ProjectorDecomposition& d, Index dim) {
  Mat R = Mat::Zero(dim, dim);
  R += outer(d.g) + outer(d.v_free);
  for (Index i = 0; i < d.lambda.size(); ++i) {
    const Vec w = d.v.col(i) - d.lambda[i] * d.u.col(i);
    R += w * w.adjoint() / (1.0 + d.lambda[i] * d.lambda[i]);
  }
  return R;
}

Mat projector_from_pairing(const ProjectorDecomposition& d, const Mat& Pi) {
  // Each term of Q(A) is diagonal in the singular system of A = sum lambda |v><u|.
  const RVec l2 = d.lambda.array().square();
  const Vec diag_sq = (l2.array() / (1.0 + l2.array())).cast<cplx>();
  const Vec diag_off = (d.lambda.array() / (1.0 + l2.array())).cast<cplx>();
  const Mat vu = d.v * diag_off.asDiagonal() * d.u.adjoint();
  const Mat QA = d.v * diag_sq.asDiagonal() * d.v.adjoint() -
                 d.u * diag_sq.asDiagonal() * d.u.adjoint() + vu + vu.adjoint();
  return Pi + outer(d.f) - outer(d.g) + QA;
}

double bogoliubov_amplitude(const ProjectorDecomposition& d) {
  double k = 1.0;
  for (Index i = 0; i < d.lambda.size(); ++i) k /= std::sqrt(1.0 + d.lambda[i] * d.lambda[i]);
  return k;
}

Mat unitary_exp(const Mat& X) {
  const cplx i(0.0, 1.0);
  HermitianEigensolver es(hermitian_part(i * X));
  const Vec phase = (-i * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

Mat parametrize_state(const Mat& D, const Mat& gamma, const Mat& Pi, double tol) {
  const Index n = Pi.rows();
  if (D.rows() != n || gamma.rows() != n) throw ConfigError("parametrize_state: dimension mismatch");
  const Mat I = Mat::Identity(n, n);
  const Mat Pp = I - Pi;
  const double dn = std::max(1.0, D.norm());
  if ((D - Pp * D * Pi).norm() > tol * dn)
    throw ConfigError("D must map ran(Pi) into ran(1 - Pi) and vanish on ran(1 - Pi)");
  if ((gamma - gamma.adjoint()).norm() > tol || (gamma * Pi - Pi * gamma).norm() > tol)
    throw ConfigError("gamma must be self-adjoint and commute with Pi");
  {
    HermitianEigensolver em(hermitian_part(Pi * gamma * Pi), Eigen::EigenvaluesOnly);
    HermitianEigensolver ep(hermitian_part(Pp * gamma * Pp), Eigen::EigenvaluesOnly);
    if (em.eigenvalues().minCoeff() < -1 - tol || em.eigenvalues().maxCoeff() > tol ||
        ep.eigenvalues().minCoeff() < -tol || ep.eigenvalues().maxCoeff() > 1 + tol)
      throw ConfigError("gamma violates -Pi <= gamma-- <= 0 <= gamma++ <= 1 - Pi");
  }
  const Mat U = unitary_exp(D - D.adjoint());
  return hermitian_part(U * (Pi + gamma) * U.adjoint() - Pi);
}

Mat random_gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = cplx(nd(rng), nd(rng)) / std::sqrt(2.0);
  return m;
}

Mat random_unitary(Index dim, Rng& rng) {
  Eigen::HouseholderQR<Mat> qr(random_gaussian(dim, dim, rng));
  Mat Q = qr.householderQ();
  const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < dim; ++k) {
    const cplx r = R(k, k);
    if (std::abs(r) > 0) Q.col(k) *= r / std::abs(r);
  }
  return Q;
}

Mat random_projector(Index dim, Index rank, Rng& rng) {
  const Mat U = random_unitary(dim, rng);
  return outer(U.leftCols(rank));
}

StateSampler::StateSampler(const Mat& Pi)
    : pi_(Pi), bm_(range_basis(Pi)), bp_(range_basis(Mat::Identity(Pi.rows(), Pi.cols()) - Pi)) {}

Mat StateSampler::operator()(Rng& rng, const RandomStateOptions& opts) const {
  const Index n = pi_.rows(), dm = bm_.cols(), dp = bp_.cols();
  std::uniform_real_distribution<double> ud(0.0, 1.0);

  Mat D = Mat::Zero(n, n);
  if (dm > 0 && dp > 0)
    D = bp_ * random_gaussian(dp, dm, rng) * bm_.adjoint() *
        (opts.rotation_scale / std::sqrt(double(std::max(dp, dm))));

  Mat gamma = Mat::Zero(n, n);
  if (dp > 0) {
    const Mat Up = bp_ * random_unitary(dp, rng);
    for (Index k = 0; k < dp; ++k) {
      double occ = 0.0;
      if (k < opts.moved_up) occ = 1.0;
      else if (k < opts.moved_up + opts.fractional) occ = ud(rng);
      if (occ != 0.0) gamma += occ * Up.col(k) * Up.col(k).adjoint();
    }
  }
  if (dm > 0) {
    const Mat Um = bm_ * random_unitary(dm, rng);
    for (Index k = 0; k < dm; ++k) {
      double occ = 0.0;
      if (k < opts.moved_down) occ = -1.0;
      else if (k < opts.moved_down + opts.fractional) occ = -ud(rng);
      if (occ != 0.0) gamma += occ * Um.col(k) * Um.col(k).adjoint();
    }
  }
  const Mat U = unitary_exp(D - D.adjoint());
  return hermitian_part(U * (pi_ + gamma) * U.adjoint() - pi_);
}

Mat random_state(const Mat& Pi, Rng& rng, const RandomStateOptions& opts) {
  return StateSampler(Pi)(rng, opts);
}

int count_fractional(const Mat& Q, const Mat& reference, double tol) {
  HermitianEigensolver es(hermitian_part(Q + reference), Eigen::EigenvaluesOnly);
  int k = 0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double g = es.eigenvalues()[i];
    if (g > tol && g < 1.0 - tol) ++k;
  }
  return k;
}

PurifyResult lieb_purify(const Model& model, const Mat& Q0, double tol) {
  PurifyResult r;
  r.Q = Q0;
  r.energy_in = bdf_energy(model, Q0);
  double E = r.energy_in;
  const double slack = 1e-12 * std::max(1.0, std::abs(E));
  for (int guard = 0; guard < 4 * int(Q0.rows()); ++guard) {
    HermitianEigensolver es(hermitian_part(r.Q + model.reference));
    std::vector<Index> frac;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double g = es.eigenvalues()[i];
      if (g > tol && g < 1.0 - tol) frac.push_back(i);
    }
    if (frac.size() <= 1) break;
    const Mat Dq = mean_field_operator(model, r.Q);

    // Try pairs in order of occupation; take the first one that lowers the energy.
    bool moved = false;
    const std::size_t cap = std::min<std::size_t>(frac.size(), 8);
    double best_gain = 0.0, best_t = 0.0;
    Mat best_delta;
    for (std::size_t a = 0; a < cap && !moved; ++a)
      for (std::size_t b = a + 1; b < cap; ++b) {
        const Vec x1 = es.eigenvectors().col(frac[a]), x2 = es.eigenvectors().col(frac[b]);
        const double g1 = es.eigenvalues()[frac[a]], g2 = es.eigenvalues()[frac[b]];
        const Mat delta = x2 * x2.adjoint() - x1 * x1.adjoint();
        const double s = (x2.adjoint() * Dq * x2)(0, 0).real() - (x1.adjoint() * Dq * x1)(0, 0).real();
        const double c = curvature(model, delta);
        const double lo = std::max(-g2, g1 - 1.0), hi = std::min(1.0 - g2, g1);
        const double elo = s * lo + 0.5 * c * lo * lo, ehi = s * hi + 0.5 * c * hi * hi;
        const double t = elo <= ehi ? lo : hi, gain = std::min(elo, ehi);
        if (gain <= slack && (best_delta.size() == 0 || gain < best_gain)) {
          best_gain = gain;
          best_t = t;
          best_delta = delta;
          if (c <= 0.0) {
            moved = true;
            break;
          }
        }
      }
    if (best_delta.size() == 0) break;
    r.Q = hermitian_part(r.Q + best_t * best_delta);
    E = bdf_energy(model, r.Q);
    ++r.transfers;
  }
  r.energy_out = E;
  r.fractional_out = count_fractional(r.Q, model.reference, tol);
  return r;
}

namespace fock {

State vacuum(Index dim) {
  State s = State::Zero(Index(1) << dim);
  s[0] = 1.0;
  return s;
}

State create(const Vec& phi, const State& s) {
  const Index n = phi.size();
  State out = State::Zero(s.size());
  for (Index b = 0; b < s.size(); ++b) {
    if (s[b] == cplx(0.0)) continue;
    for (Index i = 0; i < n; ++i) {
      if ((b >> i) & 1) continue;
      const int below = std::popcount(std::uint64_t(b) & ((std::uint64_t(1) << i) - 1));
      out[b | (Index(1) << i)] += (below % 2 ? -1.0 : 1.0) * phi[i] * s[b];
    }
  }
  return out;
}

State annihilate(const Vec& phi, const State& s) {
  const Index n = phi.size();
  State out = State::Zero(s.size());
  for (Index b = 0; b < s.size(); ++b) {
    if (s[b] == cplx(0.0)) continue;
    for (Index i = 0; i < n; ++i) {
      if (!((b >> i) & 1)) continue;
      const int below = std::popcount(std::uint64_t(b) & ((std::uint64_t(1) << i) - 1));
      out[b ^ (Index(1) << i)] += (below % 2 ? -1.0 : 1.0) * std::conj(phi[i]) * s[b];
    }
  }
  return out;
}

State slater(const Mat& basis) {
  State s = vacuum(basis.rows());
  for (Index k = 0; k < basis.cols(); ++k) s = create(basis.col(k), s);
  return s;
}

State bogoliubov_state(const ProjectorDecomposition& d, const Mat& pi_basis) {
  State s = slater(pi_basis);
  for (Index i = 0; i < d.lambda.size(); ++i)
    s += d.lambda[i] * create(d.v.col(i), annihilate(d.u.col(i), s));
  for (Index m = 0; m < d.g.cols(); ++m) s = annihilate(d.g.col(m), s);
  for (Index k = 0; k < d.f.cols(); ++k) s = create(d.f.col(k), s);
  return bogoliubov_amplitude(d) * s;
}

}  // namespace fock

}  // namespace bdf
