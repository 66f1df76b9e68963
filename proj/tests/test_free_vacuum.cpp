#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "bdf/free_vacuum.hpp"

using namespace bdf;

namespace {

std::shared_ptr<const MomentumLattice> lattice(double L, double cutoff) {
  return std::make_shared<const MomentumLattice>(L, cutoff, 4);
}

}  // namespace

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  RVec x, w;
  gauss_legendre(6, x, w);
  for (int k = 0; k <= 11; ++k) {
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], k);
    const double exact = (k % 2) ? 0.0 : 2.0 / (k + 1);
    EXPECT_NEAR(s, exact, 1e-14) << "degree " << k;
  }
}

TEST(RadialGrid, SpansCutoffWithEvaluationOnlyEndpoints) {
  const RadialGrid g = make_radial_grid(10.0, 1.0, 8);
  EXPECT_EQ(g.nodes[0], 0.0);
  EXPECT_NEAR(g.nodes[g.nodes.size() - 1], 10.0, 1e-12);
  EXPECT_EQ(g.weights[0], 0.0);
  EXPECT_EQ(g.weights[g.weights.size() - 1], 0.0);
  EXPECT_NEAR(g.weights.sum(), 10.0, 1e-10);
  for (Index i = 1; i < g.nodes.size(); ++i) EXPECT_GT(g.nodes[i], g.nodes[i - 1]);
}

TEST(Pchip, ReproducesMonotoneData) {
  RVec x(5), y(5);
  x << 0, 1, 2, 3, 4;
  y << 0, 1, 1, 2, 5;
  const Pchip p(x, y);
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(p(x[i]), y[i], 1e-15);
  for (double t = 0.0; t < 3.99; t += 0.05) EXPECT_LE(p(t), p(t + 0.05) + 1e-15);
  EXPECT_NEAR(p(1.5), 1.0, 1e-15);
}

TEST(RadialSymbol, UncoupledIsBare) {
  const RadialGrid g = make_radial_grid(10.0, 1.0, 8);
  const VacuumSymbol s = solve_symbol_radial(0.0, 10.0, 1.0, g);
  EXPECT_LE(s.iterations, 1);
  for (Index i = 0; i < s.grid.size(); ++i) {
    EXPECT_EQ(s.g0[i], 1.0);
    EXPECT_EQ(s.g1[i], s.grid[i]);
  }
}

TEST(RadialSymbol, FirstOrderExpansionAtSmallCoupling) {
  const double a = 0.02;
  const VacuumSymbol s = solve_symbol_radial(a, 10.0, 1.0, make_radial_grid(10.0));
  EXPECT_NEAR(s.g0_at(0.0), 1.01909, 4e-4);
  EXPECT_NEAR(s.g0_at(0.0), 1.0 + a / kPi * std::asinh(10.0), 4e-4);
}

TEST(RadialSymbol, ChainInequalityAtStrongCoupling) {
  const VacuumSymbol s = solve_symbol_radial(0.5, 10.0, 1.0, make_radial_grid(10.0));
  EXPECT_EQ(count_chain_violations(s), 0);
  for (Index i = 0; i < s.grid.size(); ++i) EXPECT_GE(s.g0[i], 1.0);
}

TEST(RadialSymbol, ChainDetectorFlagsViolation) {
  VacuumSymbol s = solve_symbol_radial(0.1, 10.0, 1.0, make_radial_grid(10.0, 1.0, 6));
  s.g1[5] = 0.5 * s.grid[5];
  EXPECT_EQ(count_chain_violations(s), 1);
  EXPECT_THROW(check_chain_inequality(s), InvariantViolation);
}

TEST(RadialSymbol, RejectsCouplingOutsideKatoRange) {
  EXPECT_THROW(solve_symbol_radial(1.3, 10.0, 1.0, make_radial_grid(10.0)), ConfigError);
}

TEST(Threshold, UncoupledAttainedAtZero) {
  const VacuumSymbol s = solve_symbol_radial(0.0, 10.0, 1.0, make_radial_grid(10.0, 1.0, 6));
  const Threshold t = threshold(s);
  EXPECT_EQ(t.value, 1.0);
  EXPECT_EQ(t.argmin, 0.0);
  EXPECT_TRUE(t.attained_at_zero);
}

TEST(Threshold, SmallCouplingEqualsG0AtZero) {
  for (double a : {0.01, 0.05}) {
    const VacuumSymbol s = solve_symbol_radial(a, 10.0, 1.0, make_radial_grid(10.0));
    const Threshold t = threshold(s);
    EXPECT_TRUE(t.attained_at_zero) << a;
    EXPECT_NEAR(t.value, s.g0_at(0.0), 1e-12);
  }
}

TEST(Threshold, StrongCouplingReported) {
  const VacuumSymbol s = solve_symbol_radial(1.0, 10.0, 1.0, make_radial_grid(10.0));
  const Threshold t = threshold(s);
  EXPECT_GT(t.value, 1.0);
  EXPECT_TRUE(std::isfinite(t.argmin));
}

TEST(SymbolCsv, HasHeaderAndOneRowPerNode) {
  const VacuumSymbol s = solve_symbol_radial(0.1, 5.0, 1.0, make_radial_grid(5.0, 1.0, 4));
  std::ostringstream os;
  write_symbol_csv(os, s);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "p,g0,g1,E");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, s.grid.size());
}

TEST(LatticeVacuum, UncoupledIsBareProjector) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const FreeVacuum v = solve_vacuum_lattice(lat, 0.0, 1.0);
  for (std::size_t i = 0; i < lat->size(); ++i) {
    EXPECT_NEAR(v.g0(i), 1.0, 1e-14);
    EXPECT_NEAR(v.g1(i), lat->momentum(i).norm(), 1e-14);
    const Mat4 D = free_dirac_symbol<double>(lat->momentum(i), 1.0);
    const Mat4 P = v.projector_blocks()[i];
    EXPECT_LT((P * P - P).norm(), 1e-13);
    EXPECT_LT((P * D - D * P).norm(), 1e-13);
    EXPECT_LT((P * D).trace().real(), 0.0);
  }
}

TEST(LatticeVacuum, FreeVacuumIsUncharged) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  for (auto rule : {ZeroModeRule::Neutral, ZeroModeRule::Madelung}) {
    const FreeVacuum v = solve_vacuum_lattice(lat, 0.3, 1.0, {}, rule);
    for (const auto& P : v.projector_blocks())
      EXPECT_NEAR((P - 0.5 * Mat4::Identity()).trace().real(), 0.0, 1e-13);
  }
}

TEST(LatticeVacuum, SpectrumIsDoublyDegenerateSymbolEnergy) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const FreeVacuum v = solve_vacuum_lattice(lat, 0.2, 1.0, {}, ZeroModeRule::Madelung);
  for (std::size_t i = 0; i < lat->size(); ++i) {
    Eigen::SelfAdjointEigenSolver<Mat4> es(v.dirac_blocks()[i]);
    const double E = std::hypot(v.g0(i), v.g1(i));
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(es.eigenvalues()[k]), E, 1e-12);
    EXPECT_NEAR(es.eigenvalues()[0], -E, 1e-12);
    EXPECT_NEAR(es.eigenvalues()[1], -E, 1e-12);
  }
}

TEST(LatticeVacuum, AgreesWithRadialSymbol) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const double a = 0.1;
  const VacuumSymbol s = solve_symbol_radial(a, 1.5, 1.0, make_radial_grid(1.5));
  const FreeVacuum v = solve_vacuum_lattice(lat, a, 1.0, {}, ZeroModeRule::Madelung);
  for (std::size_t i = 0; i < lat->size(); ++i) {
    const double k = lat->momentum(i).norm();
    EXPECT_NEAR(v.g0(i) / s.g0_at(k), 1.0, 0.02);
    if (k > 0) {
      EXPECT_NEAR(v.g1(i) / s.g1_at(k), 1.0, 0.02);
    }
  }
}

TEST(LatticeVacuum, SymbolEvaluationRoundTrip) {
  const auto lat = lattice(2.0 * kPi, 1.5);
  const VacuumSymbol s = solve_symbol_radial(0.2, 1.5, 1.0, make_radial_grid(1.5));
  const FreeVacuum v = vacuum_from_symbol(lat, s);
  for (std::size_t i = 0; i < lat->size(); ++i) {
    const double k = lat->momentum(i).norm();
    EXPECT_NEAR(v.g0(i), s.g0_at(k), 1e-13);
    if (k > 0) {
      EXPECT_NEAR(v.g1(i), s.g1_at(k), 1e-13);
    }
  }
  EXPECT_THROW(vacuum_from_symbol(lattice(2.0 * kPi, 2.5), s), ConfigError);
}

TEST(LatticeVacuum, ThresholdAtZeroForWeakCoupling) {
  const FreeVacuum v = solve_vacuum_lattice(lattice(2.0 * kPi, 1.5), 0.05, 1.0, {}, ZeroModeRule::Madelung);
  const Threshold t = v.threshold();
  EXPECT_TRUE(t.attained_at_zero);
  EXPECT_NEAR(t.value, v.g0_zero(), 1e-12);
}
