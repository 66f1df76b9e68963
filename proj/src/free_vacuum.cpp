#include "bdf/free_vacuum.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace bdf {

void gauss_legendre(int n, RVec& x, RVec& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

namespace {

void append_panel(double a, double b, const RVec& gx, const RVec& gw, std::vector<double>& nodes,
                  std::vector<double>& weights) {
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  for (Index k = 0; k < gx.size(); ++k) {
    nodes.push_back(m + h * gx[k]);
    weights.push_back(h * gw[k]);
  }
}

}  // namespace

RadialGrid make_radial_grid(double cutoff, double scale, int points) {
  if (!(cutoff > 0.0) || !(scale > 0.0) || points < 2)
    throw ConfigError("radial grid needs cutoff > 0, scale > 0 and at least 2 points per panel");
  RVec gx, gw;
  gauss_legendre(points, gx, gw);
  std::vector<double> br{0.0};
  const double top = std::min(scale, cutoff);
  for (double b = 1e-3 * top; b < top * (1 - 1e-12); b *= 2.0) br.push_back(b);
  br.push_back(top);
  if (cutoff > top) {
    const int n = std::max(1, int(std::ceil((cutoff - top) / scale - 1e-9)));
    for (int k = 1; k <= n; ++k) br.push_back(top + (cutoff - top) * k / n);
  }
  std::vector<double> nodes{0.0}, weights{0.0};
  for (std::size_t i = 0; i + 1 < br.size(); ++i)
    append_panel(br[i], br[i + 1], gx, gw, nodes, weights);
  nodes.push_back(cutoff);
  weights.push_back(0.0);
  RadialGrid g;
  g.nodes = Eigen::Map<RVec>(nodes.data(), Index(nodes.size()));
  g.weights = Eigen::Map<RVec>(weights.data(), Index(weights.size()));
  return g;
}

Pchip::Pchip(RVec x, RVec y) : x_(std::move(x)), y_(std::move(y)) {
  const Index n = x_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("Pchip needs at least two points");
  RVec h = x_.tail(n - 1) - x_.head(n - 1);
  RVec del = (y_.tail(n - 1) - y_.head(n - 1)).cwiseQuotient(h);
  d_ = RVec::Zero(n);
  if (n == 2) {
    d_.setConstant(del[0]);
    return;
  }
  for (Index k = 1; k < n - 1; ++k) {
    if (del[k - 1] * del[k] <= 0.0) continue;
    const double w1 = 2 * h[k] + h[k - 1], w2 = h[k] + 2 * h[k - 1];
    d_[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0) return 0.0;
    if (d0 * d1 <= 0 && std::abs(d) > std::abs(3 * d0)) return 3 * d0;
    return d;
  };
  d_[0] = end_slope(h[0], h[1], del[0], del[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
}

double Pchip::operator()(double t) const {
  const Index n = x_.size();
  if (t <= x_[0]) return y_[0] + d_[0] * (t - x_[0]);
  if (t >= x_[n - 1]) return y_[n - 1] + d_[n - 1] * (t - x_[n - 1]);
  const Index k = Index(std::upper_bound(x_.data(), x_.data() + n, t) - x_.data()) - 1;
  const double h = x_[k + 1] - x_[k], s = (t - x_[k]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1];
}

void VacuumSymbol::build_interpolants() {
  i0_ = Pchip(grid, g0);
  i1_ = Pchip(grid, g1);
}

double VacuumSymbol::g0_at(double p) const { return i0_(p); }
double VacuumSymbol::g1_at(double p) const { return i1_(p); }
double VacuumSymbol::energy_at(double p) const { return std::hypot(g0_at(p), g1_at(p)); }
RVec VacuumSymbol::energy() const { return (g0.array().square() + g1.array().square()).sqrt(); }

namespace {

// sum_{n>=1} 4n/(4n^2-1) r^(2n-1)
double k1_series(double r) {
  double sum = 0.0, pw = r;
  const double r2 = r * r;
  for (int n = 1; n <= 12; ++n) {
    sum += 4.0 * n / (4.0 * n * n - 1.0) * pw;
    pw *= r2;
  }
  return sum;
}

// (alpha-free) beta-channel kernel: q L(p,q) / (2 pi p)
double kernel0(double p, double q) {
  if (q <= 0.0) return 0.0;
  if (p <= 0.0) return 1.0 / kPi;
  if (q < p) {
    const double s = q / p;
    return s * std::atanh(s) / kPi;
  }
  const double r = p / q;
  return r < 1e-8 ? 1.0 / kPi : std::atanh(r) / (kPi * r);
}

// alpha.omega-channel kernel: [(p^2+q^2)/(2p^2) L(p,q) - q/p] / (2 pi)
double kernel1(double p, double q) {
  if (q <= 0.0 || p <= 0.0) return 0.0;
  if (q < p) {
    const double s = q / p;
    const double v = s < 0.1 ? s * s * k1_series(s) : (1 + s * s) * std::atanh(s) - s;
    return v / (2 * kPi);
  }
  const double r = p / q;
  const double v = r < 0.1 ? k1_series(r) : ((1 + r * r) * std::atanh(r) - r) / (r * r);
  return v / (2 * kPi);
}

template <typename K>
double graded_integral(K kern, double p, double cutoff, const RVec& gx, const RVec& gw) {
  constexpr int kDepth = 34;
  double total = 0.0;
  auto panel = [&](double a, double b) {
    const double h = 0.5 * (b - a), m = 0.5 * (a + b);
    double s = 0.0;
    for (Index k = 0; k < gx.size(); ++k) s += gw[k] * kern(p, m + h * gx[k]);
    total += h * s;
  };
  if (p <= 0.0) {
    for (int j = 0; j < kDepth; ++j) panel(cutoff * std::ldexp(1.0, -j - 1), cutoff * std::ldexp(1.0, -j));
    return total;
  }
  for (int j = 0; j < kDepth; ++j)
    panel(p * (1 - std::ldexp(1.0, -j)), p * (1 - std::ldexp(1.0, -j - 1)));
  if (cutoff > p)
    for (int j = 0; j < kDepth; ++j)
      panel(p + (cutoff - p) * std::ldexp(1.0, -j - 1), p + (cutoff - p) * std::ldexp(1.0, -j));
  return total;
}

// Nystrom operator with singularity subtraction: (A f)_i = sum_j W_ij (f_j - f_i) + T_i f_i.
Eigen::MatrixXd nystrom(double (*kern)(double, double), const RadialGrid& g, double cutoff) {
  const Index n = g.nodes.size();
  RVec gx, gw;
  gauss_legendre(16, gx, gw);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double p = g.nodes[i];
    double rowsum = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (g.weights[j] == 0.0 || g.nodes[j] == p) continue;
      A(i, j) = g.weights[j] * kern(p, g.nodes[j]);
      rowsum += A(i, j);
    }
    A(i, i) += graded_integral(kern, p, cutoff, gx, gw) - rowsum;
  }
  return A;
}

}  // namespace

VacuumSymbol solve_symbol_radial(double alpha, double cutoff, double c, const RadialGrid& grid,
                                 double tol, int max_iter, double mixing) {
  check_alpha(alpha);
  if (!(cutoff > 0.0)) throw ConfigError("cutoff must be positive");
  if (!(c > 0.0)) throw ConfigError("speed of light must be positive");
  if (!(mixing > 0.0 && mixing <= 1.0)) throw ConfigError("mixing must lie in (0, 1]");
  const Index n = grid.nodes.size();
  if (n < 3 || grid.nodes[0] != 0.0 || std::abs(grid.nodes[n - 1] - cutoff) > 1e-12 * cutoff)
    throw ConfigError("radial grid must span [0, cutoff]");

  VacuumSymbol sym;
  sym.alpha = alpha;
  sym.cutoff = cutoff;
  sym.c = c;
  sym.grid = grid.nodes;
  sym.g0 = RVec::Constant(n, c * c);
  sym.g1 = c * grid.nodes;

  if (alpha > 0.0) {
    const Eigen::MatrixXd A0 = nystrom(kernel0, grid, cutoff);
    Eigen::MatrixXd A1 = nystrom(kernel1, grid, cutoff);
    A1.row(0).setZero();
    bool converged = false;
    for (int it = 1; it <= max_iter; ++it) {
      const RVec E = sym.energy();
      const RVec f0 = sym.g0.cwiseQuotient(E), f1 = sym.g1.cwiseQuotient(E);
      RVec n0 = RVec::Constant(n, c * c) + alpha * (A0 * f0);
      RVec n1 = c * grid.nodes + alpha * (A1 * f1);
      const double res = std::max((n0 - sym.g0).cwiseAbs().maxCoeff(),
                                  (n1 - sym.g1).cwiseAbs().maxCoeff());
      sym.g0 += mixing * (n0 - sym.g0);
      sym.g1 += mixing * (n1 - sym.g1);
      sym.residuals.push_back(res);
      sym.iterations = it;
      if (!std::isfinite(res)) break;
      if (res < tol * c * c) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream os;
      os << "radial vacuum iteration did not converge (alpha=" << alpha << ", cutoff=" << cutoff
         << ", last residual " << (sym.residuals.empty() ? 0.0 : sym.residuals.back()) << ")";
      throw NonConvergence(os.str());
    }
    const auto& r = sym.residuals;
    if (r.size() > 10)
      for (std::size_t k = r.size() - 10; k + 1 < r.size(); ++k)
        if (r[k + 1] > r[k]) {
          std::cerr << "warning: radial vacuum residual not monotone over final iterations\n";
          break;
        }
  } else {
    sym.iterations = 1;
    sym.residuals.push_back(0.0);
  }
  sym.build_interpolants();
  if (c == 1.0) check_chain_inequality(sym);
  return sym;
}

int count_chain_violations(const VacuumSymbol& s, double rel_tol) {
  int bad = 0;
  for (Index i = 0; i < s.grid.size(); ++i) {
    const double x = s.grid[i];
    const double slack = rel_tol * std::max(1.0, x * s.g0[i]);
    if (s.g1[i] < x - slack || s.g1[i] > x * s.g0[i] + slack) ++bad;
  }
  return bad;
}

void check_chain_inequality(const VacuumSymbol& s, double rel_tol) {
  const int bad = count_chain_violations(s, rel_tol);
  if (bad > 0)
    throw InvariantViolation("vacuum symbol violates x <= g1(x) <= x g0(x) at " +
                             std::to_string(bad) + " nodes");
}

Threshold threshold(const VacuumSymbol& s) {
  const RVec E = s.energy();
  Index k;
  Threshold t;
  t.value = E.minCoeff(&k);
  t.argmin = s.grid[k];
  t.attained_at_zero = E[0] <= t.value * (1 + 1e-9);
  return t;
}

void write_symbol_csv(std::ostream& os, const VacuumSymbol& s) {
  const RVec E = s.energy();
  os << "p,g0,g1,E\n" << std::setprecision(17);
  for (Index i = 0; i < s.grid.size(); ++i)
    os << s.grid[i] << ',' << s.g0[i] << ',' << s.g1[i] << ',' << E[i] << '\n';
}

Mat4 negative_projector(const Mat4& m, double gap_tol) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(m);
  const auto& ev = es.eigenvalues();
  Mat4 P = Mat4::Zero();
  for (int k = 0; k < 4; ++k) {
    if (std::abs(ev[k]) < gap_tol) {
      std::ostringstream os;
      os << "spectral gap closed: eigenvalue " << ev[k] << " within " << gap_tol << " of 0";
      throw InvariantViolation(os.str());
    }
    if (ev[k] < 0) P += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
  }
  return P;
}

FreeVacuum::FreeVacuum(std::shared_ptr<const MomentumLattice> lattice, std::vector<Mat4> dirac,
                       double alpha, double c, ZeroModeRule rule)
    : lattice_(std::move(lattice)), dirac_(std::move(dirac)), alpha_(alpha), c_(c), rule_(rule) {
  if (lattice_->spinor_dim() != 4) throw ConfigError("free vacuum needs a 4-spinor lattice");
  if (dirac_.size() != lattice_->size()) throw std::invalid_argument("one block per mode required");
  pminus_.reserve(dirac_.size());
  for (const auto& d : dirac_) pminus_.push_back(negative_projector(d));
}

Mat FreeVacuum::dirac() const { return block_diagonal(dirac_); }
Mat FreeVacuum::projector_minus() const { return block_diagonal(pminus_); }
Mat FreeVacuum::projector_plus() const {
  return Mat::Identity(lattice_->total_dim(), lattice_->total_dim()) - projector_minus();
}

double FreeVacuum::g0(std::size_t mode) const {
  static const auto alg = DiracAlgebra<double>::standard();
  return (alg.beta * dirac_[mode]).trace().real() / 4.0;
}

double FreeVacuum::g1(std::size_t mode) const {
  const RVec3 p = lattice_->momentum(mode);
  const double n = p.norm();
  if (n == 0.0) return 0.0;
  return (alpha_dot(p / n) * dirac_[mode]).trace().real() / 4.0;
}

Threshold FreeVacuum::threshold() const {
  Threshold t;
  t.value = std::numeric_limits<double>::infinity();
  double at_zero = t.value;
  for (std::size_t i = 0; i < dirac_.size(); ++i) {
    Eigen::SelfAdjointEigenSolver<Mat4> es(dirac_[i], Eigen::EigenvaluesOnly);
    const double v = es.eigenvalues().cwiseAbs().minCoeff();
    if (v < t.value) {
      t.value = v;
      t.argmin = lattice_->momentum(i).norm();
    }
    if (lattice_->index(i).isZero()) at_zero = v;
  }
  t.attained_at_zero = at_zero <= t.value * (1 + 1e-14);
  return t;
}

double FreeVacuum::g0_zero() const {
  const auto z = lattice_->find(IVec3::Zero());
  return g0(*z);
}

FreeVacuum solve_vacuum_lattice(std::shared_ptr<const MomentumLattice> lattice, double alpha,
                                double c, const FixedPointOptions& opts, ZeroModeRule rule) {
  check_alpha(alpha);
  if (!(c > 0.0)) throw ConfigError("speed of light must be positive");
  if (lattice->spinor_dim() != 4) throw ConfigError("vacuum lattice needs spinor_dim 4");
  const std::size_t M = lattice->size();
  const CoulombKernel kernel(*lattice, rule);
  std::vector<Mat4> bare(M);
  for (std::size_t i = 0; i < M; ++i) bare[i] = free_dirac_symbol<double>(lattice->momentum(i), c);

  std::vector<Mat4> P(M), D = bare;
  for (std::size_t i = 0; i < M; ++i) P[i] = negative_projector(bare[i]);

  // W(p - q) depends only on z_p - z_q; cache the weight matrix once.
  Eigen::MatrixXd w(M, M);
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < M; ++j) w(i, j) = kernel.weight(lattice->index(i) - lattice->index(j));

  std::vector<double> residuals;
  int iterations = 0;
  if (alpha > 0.0) {
    bool converged = false;
    const double gap_tol = 1e-12 * c * c;
    for (int it = 1; it <= opts.max_iter; ++it) {
      std::vector<Mat4> Pn(M);
      double res = 0.0;
      for (std::size_t i = 0; i < M; ++i) {
        Mat4 x = Mat4::Zero();
        for (std::size_t j = 0; j < M; ++j)
          if (w(i, j) != 0.0) x += w(i, j) * (P[j] - 0.5 * Mat4::Identity());
        D[i] = bare[i] - alpha * x;
        Mat4 target = negative_projector(D[i], gap_tol);
        Pn[i] = P[i] + opts.mixing * (target - P[i]);
        Eigen::SelfAdjointEigenSolver<Mat4> es(target - P[i], Eigen::EigenvaluesOnly);
        res = std::max(res, es.eigenvalues().cwiseAbs().maxCoeff());
      }
      P.swap(Pn);
      residuals.push_back(res);
      iterations = it;
      if (res < opts.tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream os;
      os << "lattice vacuum iteration did not converge (alpha=" << alpha << ", last residual "
         << residuals.back() << ")";
      throw NonConvergence(os.str());
    }
    if (opts.mixing < 1.0)
      for (std::size_t i = 0; i < M; ++i) {
        Mat4 x = Mat4::Zero();
        for (std::size_t j = 0; j < M; ++j) x += w(i, j) * (P[j] - 0.5 * Mat4::Identity());
        D[i] = bare[i] - alpha * x;
      }
  }
  FreeVacuum vac(lattice, D, alpha, c, rule);
  vac.iterations = iterations;
  vac.residuals = residuals;
  return vac;
}

FreeVacuum vacuum_from_symbol(std::shared_ptr<const MomentumLattice> lattice,
                              const VacuumSymbol& symbol, ZeroModeRule rule) {
  static const auto alg = DiracAlgebra<double>::standard();
  std::vector<Mat4> D(lattice->size());
  for (std::size_t i = 0; i < lattice->size(); ++i) {
    const RVec3 p = lattice->momentum(i);
    const double n = p.norm();
    if (n > symbol.cutoff * (1 + 1e-9))
      throw ConfigError("lattice mode outside the radial symbol's cutoff");
    D[i] = symbol.g0_at(n) * alg.beta;
    if (n > 0.0) D[i] += symbol.g1_at(n) * alpha_dot(p / n);
  }
  return FreeVacuum(lattice, D, symbol.alpha, symbol.c, rule);
}

}  // namespace bdf
