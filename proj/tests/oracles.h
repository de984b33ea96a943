#ifndef CHARGECHAIN_TESTS_ORACLES_H_
#define CHARGECHAIN_TESTS_ORACLES_H_

// Reference computations written against plain vectors, sharing nothing
// with the library's linear algebra.

#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

Mat Multiply(const Mat& a, const Mat& b);
Mat Power(const Mat& p, int k);
Mat Identity(std::size_t n);
Vec LeftApply(const Vec& mu, const Mat& p);

// min over C subset of E of a(C) + b(E \ C); E given as a bit mask.
double SubsetLatticeInf(const Vec& a, const Vec& b, std::uint32_t set);

// Power iteration on the lazy chain (I + P) / 2 from the uniform start.
Vec StationaryByIteration(const Mat& p, int iterations = 200000);

// Probability of eventually hitting `target` (a closed set) from each
// state, by value iteration.
Vec AbsorptionByIteration(const Mat& p, const std::vector<bool>& target,
                          int iterations = 100000);

// Second largest eigenvalue modulus from the characteristic polynomial
// (Faddeev-LeVerrier), with the root at one divided out. At most 4 states.
double SecondEigenvalueModulus(const Mat& p);

// max over E with phi(E) <= eps (phi(E) < eps when strict) of
// max_x p(x, E), all 2^n subsets.
struct DoeblinBrute {
  double max_probability = 0.0;
  bool any_admissible = false;
};
DoeblinBrute BruteDoeblin(const Mat& p, const Vec& phi, double epsilon,
                          bool strict = false);

Mat RandomStochastic(std::mt19937_64& rng, std::size_t n, double sparsity = 0.3);
Vec RandomWeights(std::mt19937_64& rng, std::size_t n, double zero_chance = 0.3);

}  // namespace oracle

#endif  // CHARGECHAIN_TESTS_ORACLES_H_
