#include "chargechain/ergodic.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "chargechain/catalog.h"
#include "chargechain/errors.h"
#include "chargechain/invariant.h"
#include "oracles.h"
#include "test_util.h"

namespace chargechain {
namespace {

using testing_util::KernelOf;
using testing_util::Matrix2;

TEST(ProjectorTest, AbsorptionRows) {
  const TransitionKernel absorbing = BuildCatalogChain("two_absorbing");
  const Projector pi = ProjectorFinite(absorbing);
  EXPECT_EQ(pi.rank, 2);
  EXPECT_NEAR(pi.matrix(1, 0), 0.5, 1e-12);
  EXPECT_NEAR(pi.matrix(1, 1), 0.0, 1e-12);
  EXPECT_NEAR(pi.matrix(1, 2), 0.5, 1e-12);
  const ProjectorResiduals r = CheckProjector(absorbing, pi);
  EXPECT_LE(r.idempotence, 1e-10);
  EXPECT_LE(r.left, 1e-10);
  EXPECT_LE(r.right, 1e-10);
}

TEST(ProjectorTest, IrreducibleAndIdentity) {
  const TransitionKernel p = Matrix2(0.9, 0.1, 0.2, 0.8);
  const Projector pi = ProjectorFinite(p);
  EXPECT_EQ(pi.rank, 1);
  for (int x = 0; x < 2; ++x) {
    EXPECT_NEAR(pi.matrix(x, 0), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(pi.matrix(x, 1), 1.0 / 3.0, 1e-12);
  }
  const Projector id = ProjectorFinite(KernelOf(oracle::Identity(3)));
  EXPECT_TRUE(id.matrix.isIdentity(0.0));
  EXPECT_EQ(id.rank, 3);
}

TEST(OperatorDistanceTest, SwapAlternates) {
  const TransitionKernel swap = Matrix2(0, 1, 1, 0);
  const DistanceSeries s = ComputeDistanceSeries(swap, ProjectorFinite(swap), 500);
  for (int n = 1; n <= 500; ++n) {
    EXPECT_NEAR(s.cesaro[n - 1], n % 2 ? 1.0 / n : 0.0, 1e-12);
    // L1 distance from a Dirac to (1/2, 1/2).
    EXPECT_NEAR(s.raw[n - 1], 1.0, 1e-12);
  }
  EXPECT_NEAR(CesaroOperatorDistance(swap, 7), 1.0 / 7, 1e-12);
  EXPECT_NEAR(RawOperatorDistance(swap, 7), 1.0, 1e-12);
}

TEST(OperatorDistanceTest, TrivialChains) {
  const TransitionKernel id = KernelOf(oracle::Identity(3));
  const TransitionKernel uniform = Matrix2(0.5, 0.5, 0.5, 0.5);
  for (int n = 1; n <= 20; ++n) {
    EXPECT_EQ(CesaroOperatorDistance(id, n), 0.0);
    EXPECT_LE(CesaroOperatorDistance(uniform, n), 1e-15);
    EXPECT_LE(RawOperatorDistance(uniform, n), 1e-15);
  }
}

TEST(RateFitTest, Examples) {
  std::vector<double> geometric;
  std::vector<double> harmonic;
  for (int n = 1; n <= 20; ++n) geometric.push_back(std::pow(0.5, n));
  for (int n = 1; n <= 500; ++n) harmonic.push_back(1.0 / n);
  const RateFit g = FitRate(geometric);
  EXPECT_EQ(g.kind, RateKind::kGeometric);
  EXPECT_NEAR(g.rho, 0.5, 1e-6);
  EXPECT_EQ(FitRate(harmonic).kind, RateKind::kSubgeometric);

  const std::vector<double> zeros(30, 0.0);
  const RateFit z = FitRate(zeros);
  EXPECT_EQ(z.kind, RateKind::kFiniteExact);
  EXPECT_EQ(z.first_zero, 1);

  const std::vector<double> step = {0.5, 0.25, 0.0, 0.0};
  const RateFit s = FitRate(step);
  EXPECT_EQ(s.kind, RateKind::kFiniteExact);
  EXPECT_EQ(s.first_zero, 3);

  const std::vector<double> short_positive = {0.5, 0.4, 0.3};
  EXPECT_THROW(FitRate(short_positive), PreconditionError);
}

TEST(RateFitTest, TwoStateChainMatchesEigenvalueOracle) {
  const oracle::Mat p = {{0.9, 0.1}, {0.2, 0.8}};
  const double lambda2 = oracle::SecondEigenvalueModulus(p);
  EXPECT_NEAR(lambda2, 0.7, 1e-12);
  const TransitionKernel kernel = KernelOf(p);
  const DistanceSeries s = ComputeDistanceSeries(kernel, ProjectorFinite(kernel), 500);
  const RateFit fit = FitRate(s.raw);
  EXPECT_EQ(fit.kind, RateKind::kGeometric);
  EXPECT_NEAR(fit.rho, lambda2, 0.05 * lambda2);
  // Row 1 is the worse one: |p^n(1, 1) - 1/3| = (2/3) 0.7^n on each coordinate.
  for (int n = 1; n <= 60; ++n) {
    EXPECT_NEAR(s.raw[n - 1], 4.0 / 3.0 * std::pow(0.7, n), 1e-12);
  }
}

TEST(EigenvalueOracleTest, KnownSpectra) {
  EXPECT_NEAR(oracle::SecondEigenvalueModulus({{0, 1}, {1, 0}}), 1.0, 1e-12);
  EXPECT_NEAR(oracle::SecondEigenvalueModulus({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}), 1.0,
              1e-9);
  // Birth-death with eigenvalues 1, 0.5, 0.
  EXPECT_NEAR(oracle::SecondEigenvalueModulus(
                  {{0.5, 0.5, 0}, {0.25, 0.5, 0.25}, {0, 0.5, 0.5}}),
              0.5, 1e-9);
  EXPECT_NEAR(oracle::SecondEigenvalueModulus(
                  {{0.5, 0.5, 0, 0}, {0, 0.5, 0.5, 0}, {0, 0, 0.5, 0.5}, {0.5, 0, 0, 0.5}}),
              std::sqrt(0.5), 1e-9);
}

TEST(EnvelopeTest, HarmonicAndGrowing) {
  std::vector<double> harmonic;
  std::vector<double> slow;
  for (int n = 1; n <= 500; ++n) {
    harmonic.push_back(n % 2 ? 1.0 / n : 0.0);
    slow.push_back(1.0 / std::sqrt(static_cast<double>(n)));
  }
  const EnvelopeCheck h = CheckCesaroEnvelope(harmonic);
  EXPECT_TRUE(h.holds);
  EXPECT_NEAR(h.constant, 1.0, 1e-12);
  EXPECT_FALSE(CheckCesaroEnvelope(slow).holds);
}

TEST(RunErgodicTest, CountableIsRejected) {
  EXPECT_THROW(RunErgodic(BuildCatalogChain("drift_walk_N"), 10), StructureError);
}

// Properties over random chains and the finite catalog.

class ProjectorPropertyTest : public ::testing::TestWithParam<int> {};

TEST_P(ProjectorPropertyTest, ResidualsRankAndAbsorption) {
  std::mt19937_64 rng(12000 + GetParam());
  const std::size_t n = 1 + GetParam() % 8;
  const oracle::Mat p = oracle::RandomStochastic(rng, n, 0.7);
  const TransitionKernel kernel = KernelOf(p);
  const Projector pi = ProjectorFinite(kernel);
  const ProjectorResiduals r = CheckProjector(kernel, pi);
  EXPECT_LE(r.idempotence, 1e-10);
  EXPECT_LE(r.left, 1e-10);
  EXPECT_LE(r.right, 1e-10);
  EXPECT_EQ(pi.rank, InvariantBasisFinite(kernel).dimension());
  // Absorption mass into each class matches value iteration.
  const ChainStructure structure = RecurrentClasses(kernel);
  for (const RecurrentClass& c : structure.classes) {
    std::vector<bool> target(n, false);
    for (State x : c.states) target[x] = true;
    const oracle::Vec h = oracle::AbsorptionByIteration(p, target);
    for (std::size_t x = 0; x < n; ++x) {
      double mass = 0.0;
      for (State y : c.states) mass += pi.matrix(x, y);
      EXPECT_NEAR(mass, h[x], 1e-9);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Random, ProjectorPropertyTest, ::testing::Range(0, 40));

TEST(CesaroRateTest, EveryFiniteCatalogChainWithinCOverN) {
  for (const CatalogEntry& entry : Catalog()) {
    if (!entry.finite) continue;
    const ErgodicReport report = RunErgodic(BuildCatalogChain(entry.name), 500);
    EXPECT_TRUE(report.envelope.holds) << entry.name;
    for (std::size_t i = 0; i < report.cesaro.distances.size(); ++i) {
      EXPECT_LE(report.cesaro.distances[i] * static_cast<double>(i + 1),
                report.envelope.constant + 1e-12);
    }
    EXPECT_EQ(report.projector.rank,
              InvariantBasisFinite(BuildCatalogChain(entry.name)).dimension());
  }
}

TEST(RawRateTest, AperiodicSmallChainsTrackSecondEigenvalue) {
  int checked = 0;
  for (int seed = 0; seed < 60 && checked < 25; ++seed) {
    std::mt19937_64 rng(13000 + seed);
    const std::size_t n = 2 + seed % 3;
    const oracle::Mat p = oracle::RandomStochastic(rng, n, 0.0);
    const double lambda2 = oracle::SecondEigenvalueModulus(p);
    // Slow enough to leave eight points above the noise floor, and a
    // clearly separated second eigenvalue.
    if (lambda2 < 0.3 || lambda2 > 0.95) continue;
    const TransitionKernel kernel = KernelOf(p);
    const DistanceSeries s = ComputeDistanceSeries(kernel, ProjectorFinite(kernel), 500);
    const RateFit fit = FitRate(s.raw);
    EXPECT_EQ(fit.kind, RateKind::kGeometric) << seed;
    EXPECT_NEAR(fit.rho, lambda2, 0.05 * lambda2) << seed;
    ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(CompositeTest, SwapRawStaysWhileCesaroVanishes) {
  const TransitionKernel swap = BuildCatalogChain("swap2");
  const DistanceSeries s = ComputeDistanceSeries(swap, ProjectorFinite(swap), 500);
  EXPECT_GE(*std::min_element(s.raw.begin(), s.raw.end()), 0.1);
  EXPECT_LE(s.cesaro.back(), 0.01);
  const TransitionKernel cycle = BuildCatalogChain("cycle");
  const DistanceSeries c = ComputeDistanceSeries(cycle, ProjectorFinite(cycle), 500);
  EXPECT_GE(*std::min_element(c.raw.begin(), c.raw.end()), 0.1);
  EXPECT_LE(c.cesaro.back(), 0.01);
}

}  // namespace
}  // namespace chargechain
