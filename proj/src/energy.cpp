#include "bdf/energy.hpp"

#include <cmath>
#include <sstream>

#include "bdf/linalg.hpp"

namespace bdf {

ChargeDensity& ChargeDensity::operator+=(const ChargeDensity& o) {
  if (coeff.size() != o.coeff.size()) throw std::invalid_argument("density lattice mismatch");
  for (std::size_t i = 0; i < coeff.size(); ++i) coeff[i] += o.coeff[i];
  return *this;
}

ChargeDensity& ChargeDensity::operator*=(double s) {
  for (auto& c : coeff) c *= s;
  return *this;
}

ChargeDensity operator+(ChargeDensity a, const ChargeDensity& b) { return a += b; }
ChargeDensity operator-(ChargeDensity a, const ChargeDensity& b) {
  ChargeDensity nb = b;
  nb *= -1.0;
  return a += nb;
}
ChargeDensity operator*(double s, ChargeDensity a) { return a *= s; }

cplx ChargeDensity::at(const IVec3& d) const {
  const auto i = lattice->shift_index(d);
  return i ? coeff[*i] : cplx(0.0);
}

double ChargeDensity::l2_norm() const {
  double s = 0.0;
  for (const auto& c : coeff) s += std::norm(c);
  return std::sqrt(lattice->volume() * s);
}

ExternalDensity::ExternalDensity(std::vector<Nucleus> nuclei) : nuclei_(std::move(nuclei)) {
  for (const auto& n : nuclei_)
    if (!(n.width > 0.0) || !std::isfinite(n.charge) || !n.center.allFinite())
      throw ConfigError("nucleus needs a positive width and finite charge and center");
}

double ExternalDensity::total_charge() const {
  double z = 0.0;
  for (const auto& n : nuclei_) z += n.charge;
  return z;
}

cplx ExternalDensity::fourier(const RVec3& k, double volume) const {
  cplx v(0.0);
  for (const auto& n : nuclei_)
    v += (n.charge / volume) * std::exp(-0.5 * n.width * n.width * k.squaredNorm()) *
         std::polar(1.0, -k.dot(n.center));
  return v;
}

ChargeDensity ExternalDensity::on_lattice(std::shared_ptr<const MomentumLattice> lattice) const {
  ChargeDensity rho(lattice);
  const auto& sh = lattice->shifts();
  for (std::size_t i = 0; i < sh.size(); ++i)
    rho.coeff[i] = fourier(lattice->momentum_of(sh[i].d), lattice->volume());
  return rho;
}

double ExternalDensity::self_energy(double box_length) const {
  if (nuclei_.empty()) return 0.0;
  double smin = nuclei_.front().width;
  for (const auto& n : nuclei_) smin = std::min(smin, n.width);
  const double g = 2.0 * kPi / box_length, vol = box_length * box_length * box_length;
  const int zmax = int(std::ceil(7.0 / (smin * g)));
  if (zmax > 150) throw ConfigError("nucleus too narrow for the box: Fourier sum would not converge");
  double s = 0.0;
  for (int x = -zmax; x <= zmax; ++x)
    for (int y = -zmax; y <= zmax; ++y)
      for (int z = -zmax; z <= zmax; ++z) {
        if (x == 0 && y == 0 && z == 0) continue;
        const RVec3 k = g * RVec3(x, y, z);
        s += 4.0 * kPi / k.squaredNorm() * std::norm(fourier(k, vol));
      }
  return vol * s;
}

ExternalDensity ExternalDensity::scaled(double s) const {
  auto n = nuclei_;
  for (auto& x : n) x.charge *= s;
  return ExternalDensity(n);
}

ExternalDensity ExternalDensity::dilated(double x) const {
  auto n = nuclei_;
  for (auto& v : n) {
    v.width *= x;
    v.center *= x;
  }
  return ExternalDensity(n);
}

ChargeDensity density(const Mat& Q, std::shared_ptr<const MomentumLattice> lattice) {
  const int s = lattice->spinor_dim();
  if (Q.rows() != lattice->total_dim()) throw std::invalid_argument("density: dimension mismatch");
  ChargeDensity rho(lattice);
  const double inv = 1.0 / lattice->volume();
  const auto& sh = lattice->shifts();
  for (std::size_t i = 0; i < sh.size(); ++i) {
    cplx acc(0.0);
    for (std::size_t a = 0; a < sh[i].src.size(); ++a) {
      const Index r = sh[i].dst[a] * s, c = sh[i].src[a] * s;
      for (int k = 0; k < s; ++k) acc += Q(r + k, c + k);
    }
    rho.coeff[i] = inv * acc;
  }
  return rho;
}

cplx coulomb_pairing(const ChargeDensity& f, const ChargeDensity& g) {
  if (f.coeff.size() != g.coeff.size()) throw std::invalid_argument("pairing lattice mismatch");
  const auto& lat = *f.lattice;
  const CoulombKernel W(lat);
  cplx s(0.0);
  const auto& sh = lat.shifts();
  for (std::size_t i = 1; i < sh.size(); ++i) s += W(sh[i].d) * std::conj(f.coeff[i]) * g.coeff[i];
  return lat.volume() * s;
}

Mat direct_potential(const ChargeDensity& rho) {
  const auto& lat = *rho.lattice;
  const int s = lat.spinor_dim();
  const CoulombKernel W(lat);
  Mat V = Mat::Zero(lat.total_dim(), lat.total_dim());
  const auto& sh = lat.shifts();
  for (std::size_t i = 1; i < sh.size(); ++i) {
    const cplx v = W(sh[i].d) * rho.coeff[i];
    for (std::size_t a = 0; a < sh[i].src.size(); ++a) {
      const Index r = sh[i].dst[a] * s, c = sh[i].src[a] * s;
      for (int k = 0; k < s; ++k) V(r + k, c + k) = v;
    }
  }
  return V;
}

double p_trace(const Mat& Q, const Mat& pminus) {
  const Mat pplus = Mat::Identity(Q.rows(), Q.cols()) - pminus;
  return (pplus * Q * pplus).trace().real() + (pminus * Q * pminus).trace().real();
}

namespace {
double trace_product(const Mat& A, const Mat& B) { return A.cwiseProduct(B.transpose()).sum().real(); }
}  // namespace

double exchange_term(const Mat& Q, const CoulombKernel& kernel, const MomentumLattice& lattice) {
  return trace_product(Q, exchange_operator(Q, kernel, lattice));
}

Model::Model(std::shared_ptr<const MomentumLattice> lat, Mat h0_, Mat reference_, double alpha_,
             const ExternalDensity& ext, ZeroModeRule rule)
    : lattice(std::move(lat)), h0(std::move(h0_)), reference(std::move(reference_)), alpha(alpha_),
      kernel(*lattice, rule), nuclei(ext) {
  if (h0.rows() != lattice->total_dim() || reference.rows() != h0.rows())
    throw std::invalid_argument("model operators do not match the lattice");
  check_alpha(alpha);
  nu = ext.on_lattice(lattice);
  v_nu = direct_potential(nu);
  nu_self = ext.self_energy(lattice->box_length());
  reference_rank = Index(std::llround(reference.trace().real()));
}

Model bdf_model(const FreeVacuum& vacuum, const ExternalDensity& nu) {
  return bdf_model(vacuum, nu, vacuum.alpha());
}

Model bdf_model(const FreeVacuum& vacuum, const ExternalDensity& nu, double alpha) {
  Model m(vacuum.lattice_ptr(), vacuum.dirac(), vacuum.projector_minus(), alpha, nu, vacuum.rule());
  m.mass_gap = vacuum.threshold().value;
  return m;
}

Model hartree_fock_model(std::shared_ptr<const MomentumLattice> lattice2, const ExternalDensity& nu,
                         double alpha, ZeroModeRule rule) {
  if (lattice2->spinor_dim() != 2) throw ConfigError("Hartree-Fock model needs a 2-spinor lattice");
  const Index n = lattice2->total_dim();
  Mat h0 = Mat::Zero(n, n);
  for (std::size_t i = 0; i < lattice2->size(); ++i)
    for (int k = 0; k < 2; ++k) h0(2 * i + k, 2 * i + k) = 0.5 * lattice2->momentum(i).squaredNorm();
  return Model(lattice2, h0, Mat::Zero(n, n), alpha, nu, rule);
}

EnergyParts energy_parts(const Model& m, const Mat& Q) {
  EnergyParts e;
  e.kinetic = trace_product(m.h0, Q);
  if (m.alpha == 0.0) return e;
  const ChargeDensity rho = density(Q, m.lattice);
  e.external = -m.alpha * coulomb_pairing(rho, m.nu).real();
  e.direct = 0.5 * m.alpha * coulomb_pairing(rho, rho).real();
  e.exchange = -0.5 * m.alpha * exchange_term(Q, m.kernel, *m.lattice);
  return e;
}

double bdf_energy(const Model& m, const Mat& Q) { return energy_parts(m, Q).total(); }

Mat mean_field_operator(const Model& m, const Mat& Q) {
  if (m.alpha == 0.0) return m.h0;
  Mat D = m.h0 + m.alpha * (direct_potential(density(Q, m.lattice)) - m.v_nu) -
          m.alpha * exchange_operator(Q, m.kernel, *m.lattice);
  return hermitian_part(D);
}

double curvature(const Model& m, const Mat& d) {
  if (m.alpha == 0.0) return 0.0;
  const ChargeDensity rho = density(d, m.lattice);
  return m.alpha * (coulomb_pairing(rho, rho).real() - exchange_term(d, m.kernel, *m.lattice));
}

Mat hermitian_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

bool is_admissible(const Mat& Q, const Mat& reference, double tol) {
  if ((Q - Q.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  HermitianEigensolver es(hermitian_part(Q + reference), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev.minCoeff() >= -tol && ev.maxCoeff() <= 1.0 + tol;
}

Mat project_admissible(const Mat& Q, const Mat& reference) {
  HermitianEigensolver es(hermitian_part(Q + reference));
  const RVec ev = es.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint() - reference;
}

BdfState::BdfState(const Model& model, Mat Q, double tol) : Q_(std::move(Q)) {
  if (Q_.rows() != model.dim() || Q_.cols() != model.dim())
    throw std::invalid_argument("state dimension does not match model");
  if (!is_admissible(Q_, model.reference, tol))
    throw InvariantViolation("state violates -P0- <= Q <= P0+");
  rho_ = bdf::density(Q_, model.lattice);
  p_trace_ = bdf::p_trace(Q_, model.reference);
}

double trace_norm(const Mat& h) {
  HermitianEigensolver es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double operator_norm(const Mat& h) {
  HermitianEigensolver es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

BlockNorms block_norms(const Mat& Q, const Mat& pminus) {
  const Mat pplus = Mat::Identity(Q.rows(), Q.cols()) - pminus;
  BlockNorms b;
  b.pp_trace_norm = trace_norm(pplus * Q * pplus);
  b.mm_trace_norm = trace_norm(pminus * Q * pminus);
  b.pm_hs_norm = (pplus * Q * pminus).norm();
  b.mp_hs_norm = (pminus * Q * pplus).norm();
  return b;
}

double kato_ratio(const Mat& Q, const CoulombKernel& kernel, const MomentumLattice& lattice) {
  const int s = lattice.spinor_dim();
  RVec mod(lattice.total_dim());
  for (std::size_t i = 0; i < lattice.size(); ++i)
    mod.segment(i * s, s).setConstant(lattice.momentum(i).norm());
  const double kin = trace_product(mod.asDiagonal() * Q, Q);
  const double x = exchange_term(Q, kernel, lattice);
  return kin > 0.0 ? x / (0.5 * kPi * kin) : 0.0;
}

double vacuum_overlap(const FreeVacuum& vac, std::size_t p, std::size_t q) {
  const auto& P = vac.projector_blocks();
  return (P[p] * (Mat4::Identity() - P[q])).trace().real();
}

}  // namespace bdf
