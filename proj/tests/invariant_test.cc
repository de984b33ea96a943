#include "chargechain/invariant.h"

#include <random>

#include <gtest/gtest.h>

#include "chargechain/catalog.h"
#include "chargechain/errors.h"
#include "oracles.h"
#include "test_util.h"

namespace chargechain {
namespace {

using testing_util::KernelOf;
using testing_util::Matrix2;

const oracle::Mat kTwoAbsorbing = {{1, 0, 0}, {0.5, 0, 0.5}, {0, 0, 1}};

TEST(RecurrentClassesTest, Examples) {
  const ChainStructure swap = RecurrentClasses(Matrix2(0, 1, 1, 0));
  ASSERT_EQ(swap.classes.size(), 1u);
  EXPECT_EQ(swap.classes[0].states, (std::vector<State>{0, 1}));
  EXPECT_EQ(swap.classes[0].period, 2);
  EXPECT_TRUE(swap.transient.empty());

  const ChainStructure id = RecurrentClasses(KernelOf(oracle::Identity(3)));
  ASSERT_EQ(id.classes.size(), 3u);
  for (const RecurrentClass& c : id.classes) EXPECT_EQ(c.period, 1);

  const ChainStructure absorbing = RecurrentClasses(KernelOf(kTwoAbsorbing));
  ASSERT_EQ(absorbing.classes.size(), 2u);
  EXPECT_EQ(absorbing.classes[0].states, std::vector<State>{0});
  EXPECT_EQ(absorbing.classes[1].states, std::vector<State>{2});
  EXPECT_EQ(absorbing.transient, std::vector<State>{1});
}

TEST(InvariantBasisFiniteTest, Examples) {
  const TransitionKernel bd =
      KernelOf({{0.5, 0.5, 0}, {0.25, 0.5, 0.25}, {0, 0.5, 0.5}});
  const InvariantBasis b = InvariantBasisFinite(bd);
  ASSERT_EQ(b.dimension(), 1);
  EXPECT_NEAR(b.measures[0].atom(0), 0.25, 1e-12);
  EXPECT_NEAR(b.measures[0].atom(1), 0.5, 1e-12);
  EXPECT_NEAR(b.measures[0].atom(2), 0.25, 1e-12);

  const InvariantBasis id = InvariantBasisFinite(KernelOf(oracle::Identity(2)));
  ASSERT_EQ(id.dimension(), 2);
  EXPECT_EQ(id.measures[0], FAMeasure::Dirac(id.measures[0].space(), 0));
  EXPECT_EQ(id.measures[1], FAMeasure::Dirac(id.measures[1].space(), 1));

  const InvariantBasis absorbing = InvariantBasisFinite(KernelOf(kTwoAbsorbing));
  ASSERT_EQ(absorbing.dimension(), 2);
  EXPECT_EQ(absorbing.measures[0].atoms(), (AtomWeights{{0, 1.0}}));
  EXPECT_EQ(absorbing.measures[1].atoms(), (AtomWeights{{2, 1.0}}));
  EXPECT_EQ(absorbing.pairwise.size(), 1u);
}

TEST(DetectPfaEndsTest, CatalogWalks) {
  const auto drift = DetectPfaEnds(BuildCatalogChain("drift_walk_N"));
  ASSERT_EQ(drift.size(), 1u);
  EXPECT_EQ(drift[0].ends(), (EndWeights{{"+inf", 1.0}}));
  EXPECT_TRUE(DetectPfaEnds(BuildCatalogChain("restart_walk")).empty());
  const auto walk = DetectPfaEnds(BuildCatalogChain("symmetric_walk_Z"));
  ASSERT_EQ(walk.size(), 2u);
}

TEST(CountableBasisTest, CatalogWalks) {
  const InvariantBasis walk = ComputeInvariantBasis(BuildCatalogChain("symmetric_walk_Z"));
  EXPECT_EQ(walk.ca_count(), 0);
  EXPECT_EQ(walk.pfa_count(), 2);
  EXPECT_TRUE(walk.within_representable_class);

  const TransitionKernel restart = BuildCatalogChain("restart_walk");
  const InvariantBasis r = ComputeInvariantBasis(restart);
  ASSERT_EQ(r.ca_count(), 1);
  EXPECT_EQ(r.pfa_count(), 0);
  // Geometric stationary law: pi(x) = alpha (1 - alpha)^x.
  for (State x = 0; x < 10; ++x) {
    EXPECT_NEAR(r.measures[0].atom(x), 0.1 * std::pow(0.9, x), 1e-9);
  }
  EXPECT_LE(InvarianceResidual(restart, r.measures[0]), 1e-10);

  const InvariantBasis trap = ComputeInvariantBasis(BuildCatalogChain("trap_or_escape"));
  EXPECT_EQ(trap.ca_count(), 1);
  EXPECT_EQ(trap.pfa_count(), 1);
  EXPECT_EQ(trap.pairwise.size(), 1u);
}

TEST(CesaroSequenceTest, Examples) {
  const TransitionKernel id = KernelOf(oracle::Identity(3));
  const FAMeasure mu0(id.space(), {{0, 0.2}, {2, 0.8}});
  for (const FAMeasure& l : CesaroSequence(id, mu0, 10)) {
    EXPECT_LE((l - mu0).TotalVariation(), 1e-15);
  }

  const TransitionKernel swap = Matrix2(0, 1, 1, 0);
  const auto seq = CesaroSequence(swap, FAMeasure::Dirac(swap.space(), 0), 40);
  for (int n = 1; n <= 40; ++n) {
    // A^k delta_0 alternates delta_1, delta_0, ...
    EXPECT_NEAR(seq[n - 1].atom(0), static_cast<double>(n / 2) / n, 1e-14);
    EXPECT_NEAR(seq[n - 1].atom(1), static_cast<double>((n + 1) / 2) / n, 1e-14);
  }
}

TEST(EscapeProfileTest, DriftWalkMatchesClosedForm) {
  const TransitionKernel drift = BuildCatalogChain("drift_walk_N");
  const std::vector<State> sizes = {4, 8, 16};
  const int n_max = 1600;
  const EscapeProfile profile =
      ComputeEscapeProfile(drift, FAMeasure::Dirac(drift.space(), 0), n_max, sizes);
  ASSERT_EQ(profile.windows.size(), 3u);
  for (const EscapeWindow& w : profile.windows) {
    for (int n = 1; n <= n_max; ++n) {
      // A^k delta_0 = delta_k and K_m = [0, m] holds k = 1..m.
      const double expected = static_cast<double>(std::min<State>(n, w.size)) / n;
      ASSERT_NEAR(w.masses[n - 1], expected, 1e-12) << w.size << " " << n;
    }
  }
  EXPECT_GE(profile.pfa_mass_estimate, 0.99 - 1e-12);
}

TEST(EscapeProfileTest, RestartWalkRecyclesMass) {
  const TransitionKernel restart = BuildCatalogChain("restart_walk");
  const EscapeProfile profile = ComputeEscapeProfile(
      restart, FAMeasure::Dirac(restart.space(), 0), 200, {8, 16, 32, 64});
  EXPECT_LE(profile.pfa_mass_estimate, 0.05);
}

TEST(EscapeProfileTest, SymmetricWalkSplitsEvenly) {
  const TransitionKernel walk = BuildCatalogChain("symmetric_walk_Z");
  const EscapeProfile profile = ComputeEscapeProfile(
      walk, FAMeasure::Dirac(walk.space(), 0), 4000, {8, 16, 32});
  EXPECT_NEAR(profile.per_end_split.at("+inf"), 0.5, 0.05);
  EXPECT_NEAR(profile.per_end_split.at("-inf"), 0.5, 0.05);
}

TEST(ClassifyInvariantTest, Periods) {
  const TransitionKernel swap = Matrix2(0, 1, 1, 0);
  const FAMeasure half(swap.space(), {{0, 0.5}, {1, 0.5}});
  const InvariantClassification c = ClassifyInvariant(swap, half);
  EXPECT_TRUE(c.composite);
  EXPECT_EQ(c.period, 2);

  const TransitionKernel uniform = Matrix2(0.5, 0.5, 0.5, 0.5);
  EXPECT_FALSE(ClassifyInvariant(uniform, half).composite);

  const TransitionKernel cycle = BuildCatalogChain("cycle");
  const FAMeasure third(cycle.space(), {{0, 1.0 / 3}, {1, 1.0 / 3}, {2, 1.0 / 3}});
  EXPECT_EQ(ClassifyInvariant(cycle, third).period, 3);
}

// Properties.

class InvariantPropertyTest : public ::testing::TestWithParam<int> {};

TEST_P(InvariantPropertyTest, FiniteBasisAgreesWithOracles) {
  std::mt19937_64 rng(6000 + GetParam());
  const std::size_t n = 1 + GetParam() % 8;
  // Sparse rows give several classes now and then.
  const oracle::Mat p = oracle::RandomStochastic(rng, n, 0.7);
  const TransitionKernel kernel = KernelOf(p);
  const InvariantBasis basis = InvariantBasisFinite(kernel);
  const ChainStructure structure = RecurrentClasses(kernel);
  ASSERT_EQ(basis.dimension(), static_cast<int>(structure.classes.size()));
  EXPECT_EQ(basis.pairwise.size(),
            static_cast<std::size_t>(basis.dimension() * (basis.dimension() - 1) / 2));
  for (std::size_t c = 0; c < structure.classes.size(); ++c) {
    const FAMeasure& pi = basis.measures[c];
    EXPECT_LE(InvarianceResidual(kernel, pi), 1e-10);
    EXPECT_TRUE(pi.IsProbability(1e-12));
    // Restrict to the class and compare with power iteration there.
    const auto& states = structure.classes[c].states;
    oracle::Mat sub(states.size(), oracle::Vec(states.size()));
    for (std::size_t i = 0; i < states.size(); ++i) {
      for (std::size_t j = 0; j < states.size(); ++j) sub[i][j] = p[states[i]][states[j]];
    }
    const oracle::Vec ref = oracle::StationaryByIteration(sub);
    for (std::size_t i = 0; i < states.size(); ++i) {
      EXPECT_NEAR(pi.atom(states[i]), ref[i], 1e-9);
    }
  }
}

TEST_P(InvariantPropertyTest, YosidaHewittPartsOfInvariantMixturesStayInvariant) {
  static const char* kNames[] = {"symmetric_walk_Z", "drift_walk_N", "restart_walk",
                                 "trap_or_escape", "dyadic_unit_interval"};
  const TransitionKernel kernel = BuildCatalogChain(kNames[GetParam() % 5]);
  const InvariantBasis basis = ComputeInvariantBasis(kernel);
  ASSERT_GT(basis.dimension(), 0);
  std::mt19937_64 rng(7000 + GetParam());
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  FAMeasure mix(kernel.space());
  double total = 0.0;
  std::vector<double> weights;
  for (int i = 0; i < basis.dimension(); ++i) total += weights.emplace_back(unit(rng));
  for (int i = 0; i < basis.dimension(); ++i) {
    mix += (weights[i] / total) * basis.measures[i];
  }
  EXPECT_LE(InvarianceResidual(kernel, mix), 1e-10);
  const YosidaHewittParts parts = YosidaHewitt(mix);
  EXPECT_LE(InvarianceResidual(kernel, parts.countably_additive), 1e-10);
  EXPECT_LE(InvarianceResidual(kernel, parts.purely_finitely_additive), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Random, InvariantPropertyTest, ::testing::Range(0, 40));

TEST(InvariantExistenceTest, EveryCatalogChainHasAnInvariantObject) {
  for (const CatalogEntry& entry : Catalog()) {
    const TransitionKernel kernel = BuildCatalogChain(entry.name);
    const InvariantBasis basis = ComputeInvariantBasis(kernel);
    EXPECT_GT(basis.dimension(), 0) << entry.name;
    for (const FAMeasure& mu : basis.measures) {
      EXPECT_LE(InvarianceResidual(kernel, mu), 1e-10) << entry.name;
    }
    if (basis.pfa_count() == 0 && basis.conclusive) {
      EXPECT_LT(basis.dimension(), 1 << 20) << entry.name;
    }
  }
}

}  // namespace
}  // namespace chargechain
