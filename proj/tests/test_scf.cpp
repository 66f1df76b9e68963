#include <gtest/gtest.h>

#include <cmath>

#include "bdf/scf.hpp"
#include "bdf/state_structure.hpp"

using namespace bdf;

namespace {

std::shared_ptr<const MomentumLattice> lattice(double L, double cutoff) {
  return std::make_shared<const MomentumLattice>(L, cutoff, 4);
}

ExternalDensity gaussian(double Z, double width = 1.0) { return ExternalDensity({Nucleus{RVec3::Zero(), width, Z}}); }

struct Fixture {
  std::shared_ptr<const MomentumLattice> lat;
  FreeVacuum vac;
  Model model;
  Fixture(double alpha, const ExternalDensity& nu, double cutoff = 1.2)
      : lat(lattice(2.0 * kPi, cutoff)),
        vac(solve_vacuum_lattice(lat, alpha, 1.0, {}, ZeroModeRule::Madelung)),
        model(bdf_model(vac, nu)) {}
};

}  // namespace

TEST(AufbauFill, FillsLowestLevelsWithFractionalTop) {
  Mat H = Mat::Zero(4, 4);
  H.diagonal() << 3.0, -1.0, 2.0, 0.5;
  const Aufbau a = aufbau_fill(H, 2.5, 1e-8);
  EXPECT_NEAR(a.gamma.trace().real(), 2.5, 1e-14);
  EXPECT_NEAR(a.gamma(1, 1).real(), 1.0, 1e-14);
  EXPECT_NEAR(a.gamma(3, 3).real(), 1.0, 1e-14);
  EXPECT_NEAR(a.gamma(2, 2).real(), 0.5, 1e-14);
  EXPECT_NEAR(a.delta, 0.5, 1e-14);
  EXPECT_THROW(aufbau_fill(H, 5.0, 1e-8), ConfigError);
}

TEST(AufbauFill, DegenerateFermiLevelSharesWeight) {
  Mat H = Mat::Zero(3, 3);
  H.diagonal() << 0.0, 1.0, 1.0;
  const Aufbau a = aufbau_fill(H, 2.0, 1e-8);
  EXPECT_NEAR(a.occupation[1], 0.5, 1e-14);
  EXPECT_NEAR(a.occupation[2], 0.5, 1e-14);
  EXPECT_EQ(a.fermi_set.size(), 2u);
}

TEST(MinimizeGlobal, NoNucleusGivesFreeVacuum) {
  const Fixture f(0.3, ExternalDensity{});
  const ScfResult r = minimize_global(f.model, ScfConfig{});
  EXPECT_TRUE(r.report.converged);
  EXPECT_LT(r.Q.norm(), 1e-10);
  EXPECT_NEAR(r.report.energy, 0.0, 1e-12);
}

TEST(MinimizeGlobal, UncoupledExternalFieldDecouples) {
  const Fixture f(0.0, gaussian(1.0));
  const ScfResult r = minimize_global(f.model, ScfConfig{});
  EXPECT_TRUE(r.report.converged);
  EXPECT_LT(r.Q.norm(), 1e-12);
  EXPECT_NEAR(r.report.energy, 0.0, 1e-14);
}

TEST(MinimizeGlobal, PolarizedVacuumIsNeutralAndBounded) {
  const Fixture f(0.1, gaussian(1.0), 1.5);
  const ScfResult r = minimize_global(f.model, ScfConfig{});
  ASSERT_TRUE(r.report.converged);
  EXPECT_NEAR(r.Q.trace().real(), 0.0, 1e-9);
  EXPECT_LE(r.report.energy, 1e-12);
  EXPECT_GE(r.report.energy, -0.5 * f.model.alpha * f.model.nu_self - 1e-12);
  EXPECT_LT(r.report.residual, 1e-9);
}

TEST(MinimizeCharge, ZeroChargeMatchesGlobal) {
  const Fixture f(0.2, gaussian(1.0), 1.5);
  const ScfResult g = minimize_global(f.model, ScfConfig{});
  const ScfResult c = minimize_charge(f.model, ScfConfig{});
  ASSERT_TRUE(g.report.converged && c.report.converged);
  EXPECT_NEAR(g.report.energy, c.report.energy, 1e-10);
  EXPECT_LT((g.Q - c.Q).norm(), 1e-6);
}

TEST(MinimizeCharge, UncoupledFillingCountsRestMasses) {
  const Fixture f(0.0, ExternalDensity{});
  for (int N : {1, 2}) {
    ScfConfig cfg;
    cfg.target_charge = N;
    const ScfResult r = minimize_charge(f.model, cfg);
    ASSERT_TRUE(r.report.converged);
    EXPECT_NEAR(r.report.energy, double(N), 1e-12);
    EXPECT_NEAR(p_trace(r.Q, f.model.reference), double(N), 1e-10);
  }
}

TEST(MinimizeCharge, SingleElectronSatisfiesSandwichAndAufbau) {
  const Fixture f(0.3, gaussian(1.0), 1.5);
  ScfConfig cfg;
  cfg.target_charge = 1.0;
  const ScfResult r = minimize_charge(f.model, cfg);
  const ScfReport& rep = r.report;
  ASSERT_TRUE(rep.converged);
  EXPECT_LT(rep.residual, 1e-8);
  EXPECT_NEAR(rep.charge, 1.0, 1e-9);
  EXPECT_EQ(rep.fractional_levels, 0);
  EXPECT_GE(rep.gap, -1e-10);
  EXPECT_TRUE(rep.mu_in_gap);
  EXPECT_LE(std::abs(rep.mu), f.model.mass_gap);
  const double m = f.model.mass_gap, a = f.model.alpha;
  EXPECT_GE(rep.energy, (1.0 - a * kPi / 4.0) * m - 0.5 * a * f.model.nu_self);
  EXPECT_LE(rep.energy, f.vac.g0_zero());
  EXPECT_TRUE(is_admissible(r.Q, f.model.reference));
}

TEST(MinimizeCharge, FractionalChargeLeavesAtMostOneFractionalLevel) {
  const Fixture f(0.3, gaussian(1.0), 1.5);
  ScfConfig cfg;
  cfg.target_charge = 0.5;
  const ScfResult r = minimize_charge(f.model, cfg);
  ASSERT_TRUE(r.report.converged);
  EXPECT_NEAR(r.report.charge, 0.5, 1e-9);
  EXPECT_LE(r.report.fractional_levels, 1);
}

TEST(MinimizeCharge, EnergyDecreasesAlongTrace) {
  const Fixture f(0.3, gaussian(1.0), 1.5);
  ScfConfig cfg;
  cfg.target_charge = 1.0;
  const ScfResult r = minimize_charge(f.model, cfg);
  const auto& t = r.report.trace;
  ASSERT_GT(t.size(), 2u);
  for (std::size_t i = 2; i < t.size(); ++i) EXPECT_LE(t[i].energy, t[i - 1].energy + 1e-9) << i;
}

TEST(MinimizeCharge, IterationBudgetReportsNonConvergence) {
  const Fixture f(0.3, gaussian(1.0), 1.5);
  ScfConfig cfg;
  cfg.target_charge = 1.0;
  cfg.max_iter = 2;
  EXPECT_FALSE(minimize_charge(f.model, cfg).report.converged);
}

TEST(MinimizeCharge, CheckpointsAreEmitted) {
  const Fixture f(0.3, gaussian(1.0));
  ScfConfig cfg;
  cfg.target_charge = 1.0;
  cfg.checkpoint_every = 2;
  int calls = 0;
  cfg.checkpoint = [&](const Mat& Q, const ScfReport&) {
    ++calls;
    EXPECT_EQ(Q.rows(), f.model.dim());
  };
  const ScfResult r = minimize_charge(f.model, cfg);
  EXPECT_GE(calls, 1);
  ScfConfig again;
  again.target_charge = 1.0;
  const ScfResult warm = minimize_charge(f.model, again, &r.Q);
  EXPECT_LE(warm.report.iterations, 2);
  EXPECT_NEAR(warm.report.energy, r.report.energy, 1e-10);
}

TEST(MinimizeCharge, RejectsChargeBeyondCapacity) {
  const Fixture f(0.3, gaussian(1.0));
  ScfConfig cfg;
  cfg.target_charge = 20.0;
  EXPECT_THROW(minimize_charge(f.model, cfg), ConfigError);
}

TEST(DecomposeSolution, FreeElectronAtRest) {
  const Fixture f(0.0, ExternalDensity{});
  ScfConfig cfg;
  cfg.target_charge = 1.0;
  const ScfResult r = minimize_charge(f.model, cfg);
  const SolutionDecomposition d = decompose_solution(f.model, r.Q, r.report);
  ASSERT_EQ(d.orbitals.cols(), 1);
  EXPECT_NEAR(d.orbital_energies[0], 1.0, 1e-12);
  const std::size_t zero = *f.lat->find(IVec3::Zero());
  const Vec phi = d.orbitals.col(0);
  EXPECT_NEAR(phi.segment(4 * zero, 2).squaredNorm(), 1.0, 1e-10);
  EXPECT_FALSE(d.charged_vacuum);
}

TEST(DecomposeSolution, OrbitalsAreOrthonormalEigenvectors) {
  const Fixture f(0.3, gaussian(2.0), 1.5);
  ScfConfig cfg;
  cfg.target_charge = 2.0;
  const ScfResult r = minimize_charge(f.model, cfg);
  ASSERT_TRUE(r.report.converged);
  const SolutionDecomposition d = decompose_solution(f.model, r.Q, r.report);
  EXPECT_EQ(d.orbitals.cols(), 2);
  EXPECT_LT(d.orthonormality_error, 1e-10);
  EXPECT_LT(d.max_residual, 1e-9);
  for (Index i = 0; i < d.orbital_energies.size(); ++i) {
    EXPECT_GT(d.orbital_energies[i], 0.0);
    EXPECT_LE(d.orbital_energies[i], r.report.mu + 1e-9);
  }
  // Q = P_vac - P0- + sum |phi><phi| at a converged integer-charge solution.
  const Mat rebuilt = d.vacuum_projector - f.model.reference + d.orbitals * d.orbitals.adjoint();
  EXPECT_LT((rebuilt - r.Q).norm(), 1e-7);
}

TEST(ScfConfig, ValidatesFields) {
  ScfConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.tol_residual = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ScfConfig{};
  cfg.damping = Damping::Fixed;
  cfg.theta = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
