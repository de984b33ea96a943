#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace oracle {

Mat Multiply(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.empty() ? 0 : b[0].size();
  Mat c(n, Vec(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (a[i][k] == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

Mat Identity(std::size_t n) {
  Mat id(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) id[i][i] = 1.0;
  return id;
}

Mat Power(const Mat& p, int k) {
  Mat result = Identity(p.size());
  for (int i = 0; i < k; ++i) result = Multiply(result, p);
  return result;
}

Vec LeftApply(const Vec& mu, const Mat& p) {
  Vec out(p.empty() ? 0 : p[0].size(), 0.0);
  for (std::size_t x = 0; x < mu.size(); ++x) {
    for (std::size_t y = 0; y < out.size(); ++y) out[y] += mu[x] * p[x][y];
  }
  return out;
}

double SubsetLatticeInf(const Vec& a, const Vec& b, std::uint32_t set) {
  double best = INFINITY;
  // Enumerate C as submasks of E.
  for (std::uint32_t c = set;; c = (c - 1) & set) {
    double value = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(set >> i & 1u)) continue;
      value += (c >> i & 1u) ? a[i] : b[i];
    }
    best = std::min(best, value);
    if (c == 0) break;
  }
  return best;
}

Vec StationaryByIteration(const Mat& p, int iterations) {
  const std::size_t n = p.size();
  Vec pi(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < iterations; ++it) {
    Vec next = LeftApply(pi, p);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = 0.5 * (next[i] + pi[i]);
      change += std::abs(next[i] - pi[i]);
    }
    pi = std::move(next);
    if (change < 1e-16) break;
  }
  return pi;
}

Vec AbsorptionByIteration(const Mat& p, const std::vector<bool>& target,
                          int iterations) {
  const std::size_t n = p.size();
  Vec h(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) h[i] = target[i] ? 1.0 : 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vec next(n, 0.0);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (target[i]) {
        next[i] = 1.0;
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) next[i] += p[i][j] * h[j];
      change = std::max(change, std::abs(next[i] - h[i]));
    }
    h = std::move(next);
    if (change < 1e-17) break;
  }
  return h;
}

namespace {

using Complex = std::complex<double>;

// Coefficients c[0..n] of det(lambda I - P), c[0] = 1.
Vec CharacteristicPolynomial(const Mat& p) {
  const std::size_t n = p.size();
  Vec c(n + 1, 0.0);
  c[0] = 1.0;
  Mat m = Identity(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const Mat am = Multiply(p, m);
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += am[i][i];
    c[k] = -trace / static_cast<double>(k);
    m = am;
    for (std::size_t i = 0; i < n; ++i) m[i][i] += c[k];
  }
  return c;
}

std::vector<Complex> Roots(const Vec& c) {
  // Monic polynomial of degree c.size() - 1.
  const std::size_t degree = c.size() - 1;
  if (degree == 0) return {};
  if (degree == 1) return {Complex(-c[1])};
  if (degree == 2) {
    const Complex disc = std::sqrt(Complex(c[1] * c[1] - 4.0 * c[2]));
    return {(-c[1] + disc) / 2.0, (-c[1] - disc) / 2.0};
  }
  if (degree == 3) {
    // Depressed cubic t^3 + pt + q with x = t - b/3.
    const double b = c[1], cc = c[2], d = c[3];
    const double p = cc - b * b / 3.0;
    const double q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;
    const Complex disc = std::sqrt(Complex(q * q / 4.0 + p * p * p / 27.0));
    Complex u = std::pow(-q / 2.0 + disc, 1.0 / 3.0);
    if (std::abs(u) < 1e-300) u = std::pow(-q / 2.0 - disc, 1.0 / 3.0);
    const Complex omega(-0.5, std::sqrt(3.0) / 2.0);
    std::vector<Complex> roots;
    for (int k = 0; k < 3; ++k) {
      const Complex uk = u * std::pow(omega, k);
      const Complex t = std::abs(uk) < 1e-300 ? Complex(0.0) : uk - p / (3.0 * uk);
      roots.push_back(t - b / 3.0);
    }
    return roots;
  }
  throw std::invalid_argument("closed form roots need degree <= 3");
}

}  // namespace

double SecondEigenvalueModulus(const Mat& p) {
  if (p.empty() || p.size() > 4) {
    throw std::invalid_argument("eigenvalue oracle handles 1 to 4 states");
  }
  const Vec c = CharacteristicPolynomial(p);
  // Synthetic division by (lambda - 1).
  Vec deflated(c.size() - 1, 0.0);
  double carry = 0.0;
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    carry = c[i] + carry;
    deflated[i] = carry;
  }
  double best = 0.0;
  for (const Complex& r : Roots(deflated)) best = std::max(best, std::abs(r));
  return best;
}

DoeblinBrute BruteDoeblin(const Mat& p, const Vec& phi, double epsilon,
                          bool strict) {
  const std::size_t n = p.size();
  DoeblinBrute out;
  for (std::uint32_t set = 1; set < (1u << n); ++set) {
    double weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (set >> i & 1u) weight += phi[i];
    }
    if (strict ? weight >= epsilon - 1e-12 : weight > epsilon + 1e-12) continue;
    out.any_admissible = true;
    for (std::size_t x = 0; x < n; ++x) {
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (set >> i & 1u) mass += p[x][i];
      }
      out.max_probability = std::max(out.max_probability, mass);
    }
  }
  return out;
}

Mat RandomStochastic(std::mt19937_64& rng, std::size_t n, double sparsity) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  Mat p(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (unit(rng) < sparsity) continue;
      p[i][j] = unit(rng);
      sum += p[i][j];
    }
    if (sum == 0.0) {
      p[i][pick(rng)] = 1.0;
      sum = 1.0;
    }
    for (double& v : p[i]) v /= sum;
  }
  return p;
}

Vec RandomWeights(std::mt19937_64& rng, std::size_t n, double zero_chance) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec w(n, 0.0);
  for (double& v : w) v = unit(rng) < zero_chance ? 0.0 : unit(rng);
  return w;
}

}  // namespace oracle
