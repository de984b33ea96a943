#include "chargechain/kernel.h"

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

TransitionKernel Swap() { return Matrix2(0, 1, 1, 0); }

TEST(ApplyTTest, ConstantAndPermutation) {
  const TransitionKernel swap = Swap();
  const BoundedFunction one = BoundedFunction::Constant(swap.space(), 1.0);
  const BoundedFunction t1 = ApplyT(swap, one);
  EXPECT_EQ(t1(0), 1.0);
  EXPECT_EQ(t1(1), 1.0);
  const BoundedFunction f(swap.space(), {{0, 1.0}, {1, 0.0}});
  const BoundedFunction tf = ApplyT(swap, f);
  EXPECT_EQ(tf(0), 0.0);
  EXPECT_EQ(tf(1), 1.0);
}

TEST(ApplyTTest, DriftWalkKeepsEndLimit) {
  const TransitionKernel drift = BuildCatalogChain("drift_walk_N");
  const BoundedFunction f(drift.space(), {{0, 3.0}, {1, -1.0}}, 0.0,
                          {{"+inf", 7.5}});
  const BoundedFunction tf = ApplyT(drift, f);
  EXPECT_EQ(tf.EndLimit("+inf"), 7.5);
  EXPECT_EQ(tf(0), -1.0);
  // f(2) already reads the end limit.
  EXPECT_EQ(tf(1), 7.5);
  EXPECT_EQ(tf(1000), 7.5);
}

TEST(ApplyATest, FiniteAndCountable) {
  const TransitionKernel swap = Swap();
  EXPECT_EQ(ApplyA(swap, FAMeasure::Dirac(swap.space(), 0)),
            FAMeasure::Dirac(swap.space(), 1));

  const TransitionKernel restart = BuildCatalogChain("restart_walk");
  const FAMeasure moved =
      ApplyA(restart, FAMeasure::EndCharge(restart.space(), "+inf"));
  EXPECT_NEAR(moved.atom(0), 0.1, 1e-15);
  EXPECT_NEAR(moved.end("+inf"), 0.9, 1e-15);
  EXPECT_EQ(moved.atoms().size(), 1u);

  const TransitionKernel walk = BuildCatalogChain("symmetric_walk_Z");
  const FAMeasure end = FAMeasure::EndCharge(walk.space(), "+inf");
  EXPECT_EQ(ApplyA(walk, end), end);
}

TEST(KernelPowerTest, Examples) {
  const TransitionKernel swap = Swap();
  EXPECT_TRUE(KernelPower(swap, 2).matrix().isIdentity(0.0));
  EXPECT_EQ(KernelPower(swap, 1).matrix(), swap.matrix());
  const TransitionKernel uniform = Matrix2(0.5, 0.5, 0.5, 0.5);
  EXPECT_TRUE(KernelPower(uniform, 3).matrix().isApprox(uniform.matrix(), 1e-15));
  EXPECT_THROW(KernelPower(swap, 0), PreconditionError);
  EXPECT_THROW(KernelPower(BuildCatalogChain("drift_walk_N"), 2), StructureError);
}

TEST(CesaroKernelTest, Examples) {
  const TransitionKernel swap = Swap();
  const Eigen::MatrixXd q2 = CesaroKernel(swap, 2).matrix();
  EXPECT_TRUE(q2.isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5), 1e-15));
  EXPECT_EQ(CesaroKernel(swap, 1).matrix(), swap.matrix());
  const TransitionKernel uniform = Matrix2(0.5, 0.5, 0.5, 0.5);
  for (int m = 1; m <= 6; ++m) {
    EXPECT_TRUE(CesaroKernel(uniform, m).matrix().isApprox(uniform.matrix(), 1e-15));
  }
}

TEST(EndActionTest, CatalogWalks) {
  const EndAction drift = ComputeEndAction(BuildCatalogChain("drift_walk_N"), "+inf");
  EXPECT_EQ(drift.preserved_mass, 1.0);
  EXPECT_TRUE(drift.leak_atoms.empty());
  EXPECT_TRUE(drift.leak_ends.empty());

  const EndAction restart = ComputeEndAction(BuildCatalogChain("restart_walk"), "+inf");
  EXPECT_NEAR(restart.preserved_mass, 0.9, 1e-15);
  ASSERT_EQ(restart.leak_atoms.size(), 1u);
  EXPECT_NEAR(restart.leak_atoms.at(0), 0.1, 1e-15);

  const TransitionKernel walk = BuildCatalogChain("symmetric_walk_Z");
  EXPECT_EQ(ComputeEndAction(walk, "+inf").preserved_mass, 1.0);
  EXPECT_EQ(ComputeEndAction(walk, "-inf").preserved_mass, 1.0);
}

TEST(DualityTest, Examples) {
  const TransitionKernel swap = Swap();
  const FAMeasure mu(swap.space(), {{0, 0.3}, {1, -0.8}});
  EXPECT_EQ(DualityResidual(swap, BoundedFunction::Constant(swap.space(), 1.0), mu),
            0.0);
  const TransitionKernel drift = BuildCatalogChain("drift_walk_N");
  const BoundedFunction f(drift.space(), {{0, 1.0}}, 0.0, {{"+inf", -2.5}});
  EXPECT_EQ(DualityResidual(drift, f, FAMeasure::EndCharge(drift.space(), "+inf")),
            0.0);
}

TEST(KernelValidationTest, RejectsBadRows) {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.4, 0.5, 0.5;
  EXPECT_THROW(TransitionKernel::Finite(bad), ValidationError);
  bad << 1.2, -0.2, 0.5, 0.5;
  EXPECT_THROW(TransitionKernel::Finite(bad), ValidationError);
  EXPECT_THROW(TransitionKernel::Finite(Eigen::MatrixXd::Ones(2, 3) / 3.0),
               ValidationError);
}

TEST(CountableKernelTest, RowsFollowTails) {
  const TransitionKernel walk = BuildCatalogChain("symmetric_walk_Z");
  const SparseRow row = walk.Row(-40);
  ASSERT_EQ(row.size(), 2u);
  EXPECT_EQ(row.at(-41), 0.5);
  EXPECT_EQ(row.at(-39), 0.5);
  EXPECT_DOUBLE_EQ(walk.Probability(3, MeasurableSet::TailOf("+inf", 3)), 0.5);
}

// Randomized properties on finite kernels.

class FiniteKernelPropertyTest : public ::testing::TestWithParam<int> {};

TEST_P(FiniteKernelPropertyTest, PowersStochasticAndCompose) {
  std::mt19937_64 rng(3000 + GetParam());
  const std::size_t n = 1 + GetParam() % 7;
  const oracle::Mat p = oracle::RandomStochastic(rng, n);
  const TransitionKernel kernel = KernelOf(p);
  for (int k = 1; k <= 5; ++k) {
    const Eigen::MatrixXd pk = KernelPower(kernel, k).matrix();
    const Eigen::MatrixXd qk = CesaroKernel(kernel, k).matrix();
    const oracle::Mat ref = oracle::Power(p, k);
    for (std::size_t x = 0; x < n; ++x) {
      EXPECT_NEAR(pk.row(x).sum(), 1.0, 1e-12);
      EXPECT_NEAR(qk.row(x).sum(), 1.0, 1e-12);
      for (std::size_t y = 0; y < n; ++y) EXPECT_NEAR(pk(x, y), ref[x][y], 1e-12);
    }
    // A^k via the power equals k applications of A.
    const FAMeasure eta = testing_util::MeasureOf(
        kernel.space(), oracle::RandomWeights(rng, n, 0.0));
    FAMeasure iter = eta;
    for (int i = 0; i < k; ++i) iter = ApplyA(kernel, iter);
    const FAMeasure direct = ApplyA(KernelPower(kernel, k), eta);
    EXPECT_LE((iter - direct).TotalVariation(), 1e-12);
  }
}

TEST_P(FiniteKernelPropertyTest, MassPositivityAndContraction) {
  std::mt19937_64 rng(4000 + GetParam());
  const std::size_t n = 1 + GetParam() % 9;
  const TransitionKernel kernel = KernelOf(oracle::RandomStochastic(rng, n));
  oracle::Vec w = oracle::RandomWeights(rng, n, 0.2);
  double total = 0.0;
  for (double v : w) total += v;
  if (total == 0.0) w[0] = total = 1.0;
  for (double& v : w) v /= total;
  const FAMeasure prob = testing_util::MeasureOf(kernel.space(), w);
  const FAMeasure image = ApplyA(kernel, prob);
  EXPECT_TRUE(image.IsNonnegative());
  EXPECT_NEAR(image.Total(), 1.0, 1e-12);

  std::uniform_real_distribution<double> signed_unit(-1.0, 1.0);
  FAMeasure mu(kernel.space());
  for (std::size_t x = 0; x < n; ++x) mu.AddAtom(static_cast<State>(x), signed_unit(rng));
  EXPECT_LE(ApplyA(kernel, mu).TotalVariation(), mu.TotalVariation() + 1e-12);
}

TEST_P(FiniteKernelPropertyTest, DualityHolds) {
  std::mt19937_64 rng(5000 + GetParam());
  const std::size_t n = 1 + GetParam() % 9;
  const TransitionKernel kernel = KernelOf(oracle::RandomStochastic(rng, n));
  std::uniform_real_distribution<double> signed_unit(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<State, double> values;
    FAMeasure mu(kernel.space());
    for (std::size_t x = 0; x < n; ++x) {
      values[static_cast<State>(x)] = signed_unit(rng);
      mu.AddAtom(static_cast<State>(x), signed_unit(rng));
    }
    const BoundedFunction f(kernel.space(), values);
    EXPECT_LE(DualityResidual(kernel, f, mu), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Random, FiniteKernelPropertyTest, ::testing::Range(0, 40));

TEST(CountableDualityTest, CatalogWalksWithEndLimits) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> signed_unit(-1.0, 1.0);
  for (const char* name : {"symmetric_walk_Z", "drift_walk_N", "restart_walk",
                           "trap_or_escape", "dyadic_unit_interval"}) {
    const TransitionKernel kernel = BuildCatalogChain(name);
    const StateSpace& space = kernel.space();
    const bool z = space.support() == Support::kIntegerLine;
    for (int trial = 0; trial < 20; ++trial) {
      std::map<State, double> values;
      FAMeasure mu(space);
      EndWeights limits;
      for (State x = z ? -6 : 0; x <= 6; ++x) {
        values[x] = signed_unit(rng);
        mu.AddAtom(x, signed_unit(rng));
      }
      for (const End& e : space.ends()) {
        limits[e.id] = signed_unit(rng);
        mu.AddEnd(e.id, signed_unit(rng));
      }
      const BoundedFunction f(space, values, 0.0, limits);
      EXPECT_LE(DualityResidual(kernel, f, mu), 1e-12) << name;
    }
  }
}

}  // namespace
}  // namespace chargechain
