#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "bdf/lattice.hpp"

using namespace bdf;

namespace {

// Independent count of integer points with |z| <= radius.
std::size_t count_ball(double radius) {
  const int n = int(std::ceil(radius)) + 1;
  std::size_t count = 0;
  for (int x = -n; x <= n; ++x)
    for (int y = -n; y <= n; ++y)
      for (int z = -n; z <= n; ++z)
        if (std::sqrt(double(x * x + y * y + z * z)) <= radius + 1e-12) ++count;
  return count;
}

}  // namespace

TEST(Lattice, SevenModeUnitSpacingBall) {
  const MomentumLattice lat(2.0 * kPi, 1.2, 4);
  EXPECT_EQ(lat.size(), 7u);
  EXPECT_EQ(lat.total_dim(), 28);
  for (const auto& z : lat.modes()) EXPECT_LE(z.squaredNorm(), 1);
}

TEST(Lattice, RadiusOnePointFiveIncludesFaceDiagonals) {
  // |z| <= 1.5 admits |z|^2 in {0, 1, 2}: 1 + 6 + 12 points.
  const MomentumLattice lat(2.0 * kPi, 1.5, 4);
  EXPECT_EQ(lat.size(), count_ball(1.5));
  EXPECT_EQ(lat.size(), 19u);
  EXPECT_EQ(lat.total_dim(), 76);
}

TEST(Lattice, SingleZeroMode) {
  const MomentumLattice lat(2.0 * kPi, 0.5, 4);
  ASSERT_EQ(lat.size(), 1u);
  EXPECT_EQ(lat.index(0), IVec3::Zero());
  EXPECT_EQ(lat.total_dim(), 4);
}

TEST(Lattice, NinetyThreeModeBox) {
  const MomentumLattice lat(6.0, 3.0, 4);
  EXPECT_EQ(count_ball(3.0 * 6.0 / (2.0 * kPi)), 93u);
  EXPECT_EQ(lat.size(), 93u);
  EXPECT_EQ(lat.total_dim(), 372);
}

TEST(Lattice, ClosedUnderNegationAndInsideCutoff) {
  for (double cutoff : {1.0, 2.0, 2.7}) {
    const MomentumLattice lat(8.0, cutoff, 4);
    for (std::size_t i = 0; i < lat.size(); ++i) {
      EXPECT_LE(lat.momentum(i).norm(), cutoff * (1 + 1e-9));
      const auto j = lat.find(-lat.index(i));
      ASSERT_TRUE(j.has_value());
      EXPECT_EQ(*j, lat.negated(i));
    }
  }
}

TEST(Lattice, ShiftTablesPairEveryMode) {
  const MomentumLattice lat(2.0 * kPi, 1.5, 4);
  EXPECT_EQ(lat.shifts().front().d, IVec3::Zero());
  EXPECT_EQ(lat.shifts().front().src.size(), lat.size());
  std::size_t pairs = 0;
  for (const auto& s : lat.shifts()) {
    ASSERT_EQ(s.src.size(), s.dst.size());
    for (std::size_t t = 0; t < s.src.size(); ++t)
      EXPECT_EQ(lat.index(s.dst[t]) - lat.index(s.src[t]), s.d);
    pairs += s.src.size();
  }
  EXPECT_EQ(pairs, lat.size() * lat.size());
}

TEST(Lattice, TotalDimensionCapIsEnforced) {
  EXPECT_THROW(MomentumLattice(20.0, 4.0, 4), ConfigError);
  EXPECT_NO_THROW(MomentumLattice(6.0, 3.0, 4, 400));
  EXPECT_THROW(MomentumLattice(6.0, 3.0, 4, 300), ConfigError);
}

TEST(FreeDiracSymbol, RestFrameIsBeta) {
  const Mat4 m = free_dirac_symbol<double>(RVec3::Zero(), 1.0);
  EXPECT_LT((m - DiracAlgebra<double>::standard().beta).norm(), 1e-15);
  Eigen::SelfAdjointEigenSolver<Mat4> es(m);
  EXPECT_NEAR(es.eigenvalues()(0), -1.0, 1e-14);
  EXPECT_NEAR(es.eigenvalues()(1), -1.0, 1e-14);
  EXPECT_NEAR(es.eigenvalues()(2), 1.0, 1e-14);
  EXPECT_NEAR(es.eigenvalues()(3), 1.0, 1e-14);
}

TEST(FreeDiracSymbol, SquaresToEnergy) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    const RVec3 p(g(rng), g(rng), g(rng));
    for (double c : {1.0, 3.0}) {
      const Mat4 m = free_dirac_symbol<double>(p, c);
      const double e2 = c * c * c * c * (1.0 + p.squaredNorm() / (c * c));
      EXPECT_LT((m * m - e2 * Mat4::Identity()).norm(), 1e-11 * e2);
    }
  }
}

TEST(FreeDiracSymbol, EigenvaluesAtMomentumThree) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(free_dirac_symbol<double>(RVec3(3, 0, 0), 1.0));
  const double s = std::sqrt(10.0);
  EXPECT_NEAR(es.eigenvalues()(0), -s, 1e-13);
  EXPECT_NEAR(es.eigenvalues()(1), -s, 1e-13);
  EXPECT_NEAR(es.eigenvalues()(2), s, 1e-13);
  EXPECT_NEAR(es.eigenvalues()(3), s, 1e-13);
}

TEST(FreeDiracSymbol, LongDoubleInstantiation) {
  const auto m = free_dirac_symbol<long double>(Eigen::Matrix<long double, 3, 1>(0.5L, 0, 0), 1.0L);
  EXPECT_NEAR(double(std::abs(m(0, 0))), 1.0, 1e-18);
}

TEST(CoulombKernel, ZeroModeRules) {
  const MomentumLattice lat(2.0 * kPi, 1.5, 4);
  const CoulombKernel neutral(lat, ZeroModeRule::Neutral);
  const CoulombKernel madelung(lat, ZeroModeRule::Madelung);
  EXPECT_EQ(neutral(IVec3::Zero()), 0.0);
  EXPECT_NEAR(madelung.weight(IVec3::Zero()), madelung_constant(lat.box_length()), 1e-14);
  EXPECT_NEAR(neutral(IVec3(1, 0, 0)), 4.0 * kPi, 1e-13);
  EXPECT_NEAR(neutral(IVec3(1, 1, 0)), 2.0 * kPi, 1e-13);
}

TEST(CoulombKernel, MadelungConstantOfCubicBox) {
  for (double L : {1.0, 6.0, 2.0 * kPi}) EXPECT_NEAR(madelung_constant(L) * L, 2.837297479, 1e-8);
}

TEST(ConvolveKernel, ZeroFieldGivesZero) {
  const auto lat = MomentumLattice(2.0 * kPi, 1.2, 4);
  const CoulombKernel w(lat);
  const std::vector<Mat> field(lat.size(), Mat::Zero(4, 4));
  for (const auto& b : convolve_kernel(field, w, lat)) EXPECT_EQ(b.norm(), 0.0);
}

TEST(ConvolveKernel, SingleModeIdentityGivesZero) {
  const auto lat = MomentumLattice(2.0 * kPi, 0.5, 4);
  const CoulombKernel w(lat);
  const std::vector<Mat> field(1, Mat::Identity(4, 4));
  EXPECT_EQ(convolve_kernel(field, w, lat)[0].norm(), 0.0);
}

TEST(ConvolveKernel, IdentityOnSevenModesSumsNeighbours) {
  const auto lat = MomentumLattice(2.0 * kPi, 1.2, 4);
  const CoulombKernel w(lat);
  const std::vector<Mat> field(lat.size(), Mat::Identity(4, 4));
  const auto out = convolve_kernel(field, w, lat);
  const std::size_t zero = *lat.find(IVec3::Zero());
  const double L3 = std::pow(2.0 * kPi, 3);
  EXPECT_LT((out[zero] - (6.0 * 4.0 * kPi / L3) * Mat::Identity(4, 4)).norm(), 1e-14);
  // Hand sum at p = e1: q = 0 (|k|=1), q = -e1 (|k|=2), and four q = +-e2, +-e3 (|k|^2=2).
  const std::size_t e1 = *lat.find(IVec3(1, 0, 0));
  const double expect = 4.0 * kPi / L3 * (1.0 + 0.25 + 4.0 * 0.5);
  EXPECT_LT((out[e1] - expect * Mat::Identity(4, 4)).norm(), 1e-14);
}

TEST(ExchangeOperator, MatchesBruteForceSum) {
  const MomentumLattice lat(2.0 * kPi, 1.2, 4);
  const CoulombKernel w(lat, ZeroModeRule::Madelung);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const Index n = lat.total_dim();
  Mat Q(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) Q(i, j) = cplx(g(rng), g(rng));
  const Mat K = exchange_operator(Q, w, lat);
  Mat ref = Mat::Zero(n, n);
  const std::size_t M = lat.size();
  for (std::size_t a = 0; a < M; ++a)
    for (std::size_t b = 0; b < M; ++b)
      for (std::size_t c = 0; c < M; ++c) {
        const IVec3 d = lat.index(a) - lat.index(c);
        const auto e = lat.find(lat.index(b) - d);
        if (!e) continue;
        ref.block(4 * a, 4 * b, 4, 4) += w.weight(d) * Q.block(4 * c, 4 * *e, 4, 4);
      }
  EXPECT_LT((K - ref).norm(), 1e-12 * ref.norm());
}

TEST(Lattice, SpinorDimensionOverride) {
  const MomentumLattice lat(6.0, 3.0, 4);
  const MomentumLattice two = lat.with_spinor_dim(2);
  EXPECT_TRUE(lat.same_modes(two));
  EXPECT_EQ(two.total_dim(), 186);
}
