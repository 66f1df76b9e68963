#include <gtest/gtest.h>

#include <cmath>

#include "bdf/linalg.hpp"
#include "bdf/limits.hpp"

using namespace bdf;

namespace {

std::shared_ptr<const MomentumLattice> lattice(double L, double cutoff, int spinor_dim = 4) {
  return std::make_shared<const MomentumLattice>(L, cutoff, spinor_dim);
}

ExternalDensity gaussian(double Z, double width = 1.0) { return ExternalDensity({Nucleus{RVec3::Zero(), width, Z}}); }

// Lowest eigenvalue of -Delta/2 - V[nu] on a 2-spinor lattice.
double schrodinger_ground(const std::shared_ptr<const MomentumLattice>& lat2, const ExternalDensity& nu) {
  Mat H = -direct_potential(nu.on_lattice(lat2));
  for (std::size_t i = 0; i < lat2->size(); ++i)
    for (int s = 0; s < 2; ++s) H(2 * Index(i) + s, 2 * Index(i) + s) += 0.5 * lat2->momentum(i).squaredNorm();
  return HermitianEigensolver(H, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

}  // namespace

TEST(FitLine, RecoversSlopeAndIntercept) {
  const auto [s, b] = fit_line({1.0, 2.0, 4.0}, {3.5, 5.5, 9.5});
  EXPECT_NEAR(s, 2.0, 1e-14);
  EXPECT_NEAR(b, 1.5, 1e-14);
  EXPECT_THROW(fit_line({1.0}, {2.0}), std::invalid_argument);
}

TEST(LinearModel, FreeFieldPadsWithGapEdge) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const FreeVacuum free = solve_vacuum_lattice(lat, 0.0, 1.0);
  const LinearModelResult r = linear_model(free, ExternalDensity{});
  EXPECT_EQ(r.q0, 0);
  EXPECT_EQ(r.positive_gap.size(), 0);
  EXPECT_EQ(r.negative_gap.size(), 0);
  EXPECT_NEAR(r.sea_energy, 0.0, 1e-12);
  for (int N = -2; N <= 3; ++N) EXPECT_NEAR(r.energy(N, true), std::abs(N), 1e-12) << N;
  // Uncoupled lattice levels are the rest mass, twice degenerate at p = 0.
  EXPECT_NEAR(r.energy(2, false), 2.0, 1e-12);
}

TEST(LinearModel, AttractiveWeakPotentialBindsWithoutPairs) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const FreeVacuum free = solve_vacuum_lattice(lat, 0.0, 1.0);
  const double Z = 0.5;
  ASSERT_LE(Z, 2.0 / (kPi / 2.0 + 2.0 / kPi));
  const LinearModelResult r = linear_model(free, gaussian(Z));
  EXPECT_EQ(r.q0, 0);
  EXPECT_GT(r.min_homotopy_gap, 0.0);
  ASSERT_GE(r.positive_gap.size(), 1);
  EXPECT_GT(r.positive_gap[0], 0.0);
  EXPECT_LT(r.positive_gap[0], 1.0);
  EXPECT_NEAR(r.energy(1, true), r.sea_energy + r.positive_gap[0], 1e-14);
  EXPECT_NEAR(r.energy(1, false), r.sea_energy + r.eigenvalues[r.negative_count], 1e-14);
  const Mat P = r.level_projector(1);
  EXPECT_LT((P * P - P).norm(), 1e-10);
  EXPECT_GE(P.trace().real(), 1.0 - 1e-10);
}

TEST(WeakCoupling, GapShrinksTowardLinearModel) {
  const auto lat = lattice(2.0 * kPi, 1.2);
  const WeakCouplingTable t = weak_coupling_scan(lat, gaussian(0.5), 1, {0.05, 0.2, 0.1}, ScfConfig{});
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].alpha, 0.2);
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_TRUE(r.converged);
    EXPECT_GT(r.overlap, 0.9);
  }
  EXPECT_TRUE(t.monotone);
  EXPECT_LT(t.rows[2].vacuum_distance, t.rows[0].vacuum_distance + 1e-12);
}

TEST(WeakCoupling, ParallelRowsMatchSerial) {
  const auto lat = lattice(2.0 * kPi, 1.2);
  const auto a = weak_coupling_scan(lat, gaussian(0.5), 1, {0.2, 0.1}, ScfConfig{}, ZeroModeRule::Madelung, 1);
  const auto b = weak_coupling_scan(lat, gaussian(0.5), 1, {0.2, 0.1}, ScfConfig{}, ZeroModeRule::Madelung, 2);
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].energy, b.rows[i].energy);
}

TEST(HartreeFock, FreeElectronAtRest) {
  const HartreeFockResult hf = hartree_fock_solve(lattice(2.0 * kPi, 1.5, 2), ExternalDensity{}, 1, ScfConfig{},
                                                  ZeroModeRule::Neutral);
  ASSERT_TRUE(hf.converged);
  EXPECT_NEAR(hf.energy, 0.0, 1e-12);
  EXPECT_EQ(hf.orbitals.cols(), 1);
}

TEST(HartreeFock, SingleElectronIsLinearProblem) {
  const auto lat2 = lattice(2.0 * kPi, 1.5, 2);
  const ExternalDensity nu = gaussian(1.0);
  const double e = schrodinger_ground(lat2, nu);
  const HartreeFockResult neutral = hartree_fock_solve(lat2, nu, 1, ScfConfig{}, ZeroModeRule::Neutral);
  ASSERT_TRUE(neutral.converged);
  EXPECT_NEAR(neutral.energy, e, 1e-9);
  // The Madelung zero mode enters the exchange only: a constant self-energy shift.
  const HartreeFockResult mad = hartree_fock_solve(lat2, nu, 1, ScfConfig{}, ZeroModeRule::Madelung);
  ASSERT_TRUE(mad.converged);
  EXPECT_NEAR(mad.energy, e - 0.5 * madelung_constant(lat2->box_length()), 1e-9);
  EXPECT_LT(mad.gram_error, 1e-10);
}

TEST(HartreeFock, DoublyChargedNucleusBindsTwoElectrons) {
  const auto lat2 = lattice(2.0 * kPi, 1.5, 2);
  const ExternalDensity nu = gaussian(2.0);
  const HartreeFockResult two = hartree_fock_solve(lat2, nu, 2, ScfConfig{});
  const HartreeFockResult one = hartree_fock_solve(lat2, nu, 1, ScfConfig{});
  const HartreeFockResult free = hartree_fock_solve(lat2, ExternalDensity{}, 1, ScfConfig{});
  ASSERT_TRUE(two.converged && one.converged && free.converged);
  EXPECT_LT(two.energy, one.energy + free.energy);
  EXPECT_EQ(two.orbitals.cols(), 2);
}

TEST(Scaling, IdentityAtUnitFactor) {
  const ScalingCheck s = scaling_identity_check(gaussian(1.0), 1, 1.0, 2.0 * kPi, 1.2, ScfConfig{});
  EXPECT_LT(s.residual, 1e-12);
  EXPECT_LT(s.operator_residual, 1e-15);
}

TEST(Scaling, DoubledSpeedOnPairedLattices) {
  const ScalingCheck s = scaling_identity_check(gaussian(1.0), 1, 2.0, 2.0 * kPi, 0.6, ScfConfig{});
  EXPECT_LT(s.relative, 1e-8);
  EXPECT_LT(s.operator_residual, 1e-12);
}

TEST(Scaling, VacuumWithoutNucleus) {
  const ScalingCheck s = scaling_identity_check(ExternalDensity{}, 0, 3.0, 2.0 * kPi, 0.5, ScfConfig{});
  EXPECT_NEAR(s.energy_left, 0.0, 1e-12);
  EXPECT_NEAR(s.energy_right, 0.0, 1e-12);
}

TEST(Nonrel, SmallScanProducesRows) {
  const NonrelTable t = nonrel_scan(gaussian(1.0), 1, {6.0, 3.0}, 2.0 * kPi, 0.4, ScfConfig{});
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].c, 3.0);
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_TRUE(r.threshold_at_zero);
    EXPECT_NEAR(r.threshold, r.g0_zero, 1e-9 * r.g0_zero);
    EXPECT_GT(r.lower_weight, 0.0);
  }
  EXPECT_LT(t.rows[1].lower_weight, t.rows[0].lower_weight);
}
