#include <gtest/gtest.h>

#include <cmath>

#include "bdf/energy.hpp"
#include "bdf/state_structure.hpp"

using namespace bdf;

namespace {

std::shared_ptr<const MomentumLattice> lattice(double L, double cutoff, int spinor_dim = 4) {
  return std::make_shared<const MomentumLattice>(L, cutoff, spinor_dim);
}

ExternalDensity gaussian(double Z, double width = 1.0) { return ExternalDensity({Nucleus{RVec3::Zero(), width, Z}}); }

Mat random_hermitian(Index n, Rng& rng) {
  const Mat g = random_gaussian(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

// tr(Q K[Q]) summed directly over mode quadruples.
double brute_exchange(const Mat& Q, const CoulombKernel& w, const MomentumLattice& lat) {
  const int s = lat.spinor_dim();
  const std::size_t M = lat.size();
  cplx total = 0.0;
  for (std::size_t a = 0; a < M; ++a)
    for (std::size_t b = 0; b < M; ++b)
      for (std::size_t c = 0; c < M; ++c) {
        const IVec3 k = lat.index(a) - lat.index(c);
        const auto d = lat.find(lat.index(b) - k);
        if (!d) continue;
        total += w.weight(k) * (Q.block(s * b, s * a, s, s) * Q.block(s * c, s * *d, s, s)).trace();
      }
  return total.real();
}

}  // namespace

TEST(Density, ZeroStateHasZeroDensity) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const ChargeDensity rho = density(Mat::Zero(lat->total_dim(), lat->total_dim()), lat);
  for (const auto& c : rho.coeff) EXPECT_EQ(std::abs(c), 0.0);
}

TEST(Density, PlaneWaveIsConstant) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const std::size_t e2 = *lat->find(IVec3(0, 1, 0));
  Vec phi = Vec::Zero(lat->total_dim());
  phi(4 * e2 + 1) = cplx(0.6, 0.0);
  phi(4 * e2 + 2) = cplx(0.0, 0.8);
  const ChargeDensity rho = density(phi * phi.adjoint(), lat);
  EXPECT_NEAR(std::abs(rho.at(IVec3::Zero()) - 1.0 / lat->volume()), 0.0, 1e-16);
  for (std::size_t i = 1; i < rho.coeff.size(); ++i) EXPECT_EQ(std::abs(rho.coeff[i]), 0.0);
}

TEST(Density, VacuumDifferenceIsNeutralEverywhere) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const FreeVacuum a = solve_vacuum_lattice(lat, 0.1, 1.0);
  const FreeVacuum b = solve_vacuum_lattice(lat, 0.6, 1.0);
  const ChargeDensity rho = density(a.projector_minus() - b.projector_minus(), lat);
  for (const auto& c : rho.coeff) EXPECT_LT(std::abs(c), 1e-15);
}

TEST(CoulombPairing, ZeroAndSingleCoefficient) {
  const auto lat = lattice(6.0, 2.0);
  ChargeDensity f(lat), g(lat);
  for (auto& c : g.coeff) c = cplx(0.3, -0.1);
  EXPECT_EQ(std::abs(coulomb_pairing(f, g)), 0.0);
  const IVec3 d(1, -1, 0);
  const std::size_t pos = *lat->shift_index(d);
  const cplx a(0.2, 0.5);
  f.coeff[pos] = a;
  const double k2 = lat->momentum_of(d).squaredNorm();
  EXPECT_NEAR(coulomb_pairing(f, f).real(), 4.0 * kPi * lat->volume() * std::norm(a) / k2, 1e-12);
  EXPECT_NEAR(coulomb_pairing(f, f).imag(), 0.0, 1e-14);
}

TEST(CoulombPairing, DirectPotentialRepresentsPairing) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  Rng rng(11);
  const Mat Q1 = random_hermitian(lat->total_dim(), rng), Q2 = random_hermitian(lat->total_dim(), rng);
  const ChargeDensity r1 = density(Q1, lat), r2 = density(Q2, lat);
  EXPECT_NEAR((direct_potential(r1) * Q2).trace().real(), coulomb_pairing(r1, r2).real(),
              1e-10 * std::abs(coulomb_pairing(r1, r2)));
  EXPECT_GE(coulomb_pairing(r1, r1).real(), 0.0);
}

TEST(PTrace, BasicValues) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const FreeVacuum v = solve_vacuum_lattice(lat, 0.2, 1.0);
  const Mat Pm = v.projector_minus();
  EXPECT_EQ(p_trace(Mat::Zero(Pm.rows(), Pm.cols()), Pm), 0.0);
  Rng rng(5);
  const Mat Pp = v.projector_plus();
  Vec phi = Pp * random_gaussian(Pm.rows(), 1, rng);
  phi.normalize();
  EXPECT_NEAR(p_trace(phi * phi.adjoint(), Pm), 1.0, 1e-12);
}

TEST(PTrace, MovedEigenvectorsGiveInteger) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const Mat Pm = solve_vacuum_lattice(lat, 0.2, 1.0).projector_minus();
  Rng rng(9);
  for (int up = 0; up < 3; ++up)
    for (int down = 0; down < 3; ++down) {
      RandomStateOptions o;
      o.moved_up = up;
      o.moved_down = down;
      o.fractional = 0;
      o.rotation_scale = 0.5;
      const Mat Q = random_state(Pm, rng, o);
      EXPECT_NEAR(p_trace(Q, Pm), double(up - down), 1e-10);
      EXPECT_NEAR(Q.trace().real(), double(up - down), 1e-10);
    }
}

TEST(ExchangeTerm, ZeroAndSingleMode) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const CoulombKernel w(*lat);
  const Index n = lat->total_dim();
  EXPECT_EQ(exchange_term(Mat::Zero(n, n), w, *lat), 0.0);
  Vec phi = Vec::Zero(n);
  phi(4 * 3) = 1.0;
  EXPECT_NEAR(exchange_term(phi * phi.adjoint(), w, *lat), 0.0, 1e-16);
}

TEST(ExchangeTerm, MatchesQuadrupleSum) {
  for (auto rule : {ZeroModeRule::Neutral, ZeroModeRule::Madelung}) {
    const auto lat = lattice(2.0 * kPi, 1.2);
    const CoulombKernel w(*lat, rule);
    Rng rng(21);
    const Mat Q = random_hermitian(lat->total_dim(), rng);
    const double ref = brute_exchange(Q, w, *lat);
    EXPECT_NEAR(exchange_term(Q, w, *lat), ref, 1e-11 * std::abs(ref));
  }
}

TEST(ExternalDensity, ChargeAndFourierNormalization) {
  const ExternalDensity nu({Nucleus{RVec3(0.1, 0, 0), 0.8, 2.0}, Nucleus{RVec3::Zero(), 1.0, -0.5}});
  EXPECT_NEAR(nu.total_charge(), 1.5, 1e-15);
  const double V = 216.0;
  EXPECT_NEAR(std::abs(nu.fourier(RVec3::Zero(), V) - 1.5 / V), 0.0, 1e-16);
  EXPECT_GT(nu.self_energy(6.0), 0.0);
  EXPECT_NEAR(nu.scaled(2.0).total_charge(), 3.0, 1e-15);
  EXPECT_NEAR(nu.dilated(2.0).nuclei()[0].width, 1.6, 1e-15);
}

TEST(Energy, ZeroStateHasZeroEnergy) {
  const FreeVacuum v = solve_vacuum_lattice(lattice(2.0 * kPi, 1.5), 0.4, 1.0);
  for (const auto& nu : {ExternalDensity{}, gaussian(2.0)}) {
    const Model m = bdf_model(v, nu);
    EXPECT_EQ(bdf_energy(m, Mat::Zero(m.dim(), m.dim())), 0.0);
  }
}

TEST(Energy, NonNegativeWithoutNucleusAndBoundedBelow) {
  const FreeVacuum v = solve_vacuum_lattice(lattice(2.0 * kPi, 1.2), 0.7, 1.0, {}, ZeroModeRule::Madelung);
  const Model free = bdf_model(v, ExternalDensity{});
  const Model bound = bdf_model(v, gaussian(2.0, 0.8));
  const StateSampler sampler(free.reference);
  Rng rng(17);
  for (int t = 0; t < 60; ++t) {
    RandomStateOptions o;
    o.moved_up = t % 3;
    o.moved_down = (t / 3) % 2;
    o.rotation_scale = 0.2 * (t % 4);
    const Mat Q = sampler(rng, o);
    EXPECT_GE(bdf_energy(free, Q), -1e-10);
    EXPECT_GE(bdf_energy(bound, Q) + 0.5 * bound.alpha * bound.nu_self, -1e-10);
  }
}

TEST(MeanField, UnperturbedIsFreeOperator) {
  const FreeVacuum v = solve_vacuum_lattice(lattice(2.0 * kPi, 1.5), 0.3, 1.0);
  const Model m = bdf_model(v, ExternalDensity{});
  EXPECT_LT((mean_field_operator(m, Mat::Zero(m.dim(), m.dim())) - v.dirac()).norm(), 1e-13);
}

TEST(MeanField, QuadraticExpansionIsExact) {
  const FreeVacuum v = solve_vacuum_lattice(lattice(2.0 * kPi, 1.2), 0.5, 1.0, {}, ZeroModeRule::Madelung);
  const Model m = bdf_model(v, gaussian(1.5, 0.9));
  Rng rng(23);
  const StateSampler sampler(m.reference);
  const Mat Q = sampler(rng);
  const Mat d = random_hermitian(m.dim(), rng);
  const double e0 = bdf_energy(m, Q);
  const double g = (mean_field_operator(m, Q) * d).trace().real();
  const double c = curvature(m, d);
  for (double t : {0.3, -0.7, 1.1}) {
    const double e = bdf_energy(m, Q + t * d);
    EXPECT_NEAR(e, e0 + t * g + 0.5 * t * t * c, 1e-10 * (1 + std::abs(e)));
  }
}

TEST(MeanField, HermitianAndParts) {
  const FreeVacuum v = solve_vacuum_lattice(lattice(2.0 * kPi, 1.2), 0.5, 1.0);
  const Model m = bdf_model(v, gaussian(1.0));
  Rng rng(2);
  const Mat Q = random_state(m.reference, rng);
  const Mat D = mean_field_operator(m, Q);
  EXPECT_LT((D - D.adjoint()).norm(), 1e-12 * D.norm());
  const EnergyParts p = energy_parts(m, Q);
  EXPECT_NEAR(p.total(), bdf_energy(m, Q), 1e-12);
  EXPECT_GE(p.direct, -1e-14);
}

TEST(BdfState, AdmissibilityIsChecked) {
  const FreeVacuum v = solve_vacuum_lattice(lattice(2.0 * kPi, 1.2), 0.2, 1.0);
  const Model m = bdf_model(v, gaussian(1.0));
  Rng rng(4);
  const Mat Q = random_state(m.reference, rng);
  EXPECT_NO_THROW(BdfState(m, Q));
  EXPECT_THROW(BdfState(m, 2.0 * m.reference), InvariantViolation);
  EXPECT_TRUE(is_admissible(project_admissible(Q + 0.3 * Mat::Identity(m.dim(), m.dim()), m.reference),
                            m.reference));
}

TEST(Energy, HartreeFockModelSingleElectronExchangeCancelsDirectTerm) {
  const auto lat2 = lattice(2.0 * kPi, 1.5, 2);
  const Model m = hartree_fock_model(lat2, gaussian(1.0), 1.0, ZeroModeRule::Neutral);
  Rng rng(8);
  Vec phi = random_gaussian(m.dim(), 1, rng);
  phi.normalize();
  const EnergyParts p = energy_parts(m, phi * phi.adjoint());
  EXPECT_NEAR(p.direct + p.exchange, 0.0, 1e-12);
}

TEST(Kato, RatioBelowOneOnFreeStates) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const FreeVacuum v = solve_vacuum_lattice(lat, 0.0, 1.0);
  const CoulombKernel w(*lat);
  Rng rng(31);
  for (int t = 0; t < 10; ++t) {
    const Mat Q = random_state(v.projector_minus(), rng);
    EXPECT_LE(kato_ratio(Q, w, *lat), 1.0 + 1e-9);
  }
}
