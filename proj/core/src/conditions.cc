#include "chargechain/conditions.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>

#include "chargechain/errors.h"
#include "parallel.h"

namespace chargechain {
namespace {

constexpr double kMassTolerance = 1e-10;
constexpr State kMaxSurrogateWindow = 2048;

void RequireFinite(const TransitionKernel& kernel, const char* op) {
  if (!kernel.is_finite()) {
    throw StructureError(std::string(op) + " needs a finite kernel");
  }
}

void RequireCapacity(const TransitionKernel& kernel) {
  if (kernel.size() > kDoeblinMaxStates) {
    throw CapacityError("Doeblin check enumerates subsets of at most " +
                        std::to_string(kDoeblinMaxStates) + " states, got " +
                        std::to_string(kernel.size()));
  }
}

bool Admissible(double weight, double epsilon, Admission admission) {
  return admission == Admission::kNonStrict
             ? weight <= epsilon + kDoeblinTolerance
             : weight < epsilon - kDoeblinTolerance;
}

struct RowBest {
  double probability = 0.0;
  std::vector<int> states;
};

// Best admissible set for one row. States with phi = 0 in the row support
// always belong to the maximizer; only the charged ones are enumerated.
RowBest BestForRow(const Eigen::MatrixXd& p, Eigen::Index x,
                   const std::vector<double>& phi, double epsilon,
                   Admission admission) {
  RowBest best;
  double base = 0.0;
  std::vector<int> charged;
  for (Eigen::Index y = 0; y < p.cols(); ++y) {
    if (p(x, y) <= 0.0) continue;
    if (phi[y] == 0.0) {
      base += p(x, y);
      best.states.push_back(static_cast<int>(y));
    } else if (Admissible(phi[y], epsilon, admission)) {
      charged.push_back(static_cast<int>(y));
    }
  }
  if (charged.size() > static_cast<std::size_t>(kDoeblinMaxStates)) {
    throw CapacityError("Doeblin row " + std::to_string(x) + " has " +
                        std::to_string(charged.size()) +
                        " charged states in its support (limit " +
                        std::to_string(kDoeblinMaxStates) + ")");
  }
  const std::uint32_t count = 1u << charged.size();
  std::vector<double> mass(count, 0.0);
  std::vector<double> weight(count, 0.0);
  double best_mass = 0.0;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 1; mask < count; ++mask) {
    const int low = std::countr_zero(mask);
    const std::uint32_t rest = mask & (mask - 1);
    mass[mask] = mass[rest] + p(x, charged[low]);
    weight[mask] = weight[rest] + phi[charged[low]];
    if (Admissible(weight[mask], epsilon, admission) && mass[mask] > best_mass) {
      best_mass = mass[mask];
      best_mask = mask;
    }
  }
  best.probability = base + best_mass;
  for (std::size_t i = 0; i < charged.size(); ++i) {
    if (best_mask & (1u << i)) best.states.push_back(charged[i]);
  }
  std::sort(best.states.begin(), best.states.end());
  return best;
}

std::vector<double> DensePhi(const StateSpace& space, const FAMeasure& phi,
                             Eigen::Index n) {
  if (!(phi.space() == space)) {
    throw DomainError("phi lives on a different state space");
  }
  if (!phi.IsCountablyAdditive()) {
    throw PreconditionError("phi must be countably additive (no end charges)");
  }
  if (!phi.IsNonnegative()) throw PreconditionError("phi must be nonnegative");
  std::vector<double> dense(static_cast<std::size_t>(n), 0.0);
  for (const auto& [x, w] : phi.atoms()) {
    if (x < 0 || x >= n) throw DomainError("phi charges state outside the matrix");
    dense[x] = w;
  }
  return dense;
}

void ValidateEpsilon(double epsilon) {
  if (!std::isfinite(epsilon) || epsilon <= 0.0 || epsilon > 1.0) {
    throw PreconditionError("epsilon must lie in (0, 1], got " +
                            std::to_string(epsilon));
  }
}

void ValidateStep(int k) {
  if (k < 1) throw PreconditionError("step count must be at least 1");
}

Eigen::MatrixXd DensePower(const Eigen::MatrixXd& p, int k) {
  Eigen::MatrixXd result = p;
  for (int i = 1; i < k; ++i) result = result * p;
  return result;
}

DoeblinCheck CheckVariant(const TransitionKernel& kernel, const FAMeasure& phi,
                          double epsilon, int k, DoeblinVariant variant) {
  RequireFinite(kernel, "Doeblin check");
  RequireCapacity(kernel);
  ValidateStep(k);
  const TransitionKernel q = variant == DoeblinVariant::kPower
                                 ? KernelPower(kernel, k)
                                 : CesaroKernel(kernel, k);
  return CheckDoeblinMatrix(kernel.space(), q.matrix(), phi, epsilon,
                            variant == DoeblinVariant::kPower
                                ? Admission::kNonStrict
                                : Admission::kStrict);
}

bool Disjoint(const StateSpace& space, const MeasurableSet& a,
              const MeasurableSet& b) {
  if (space.is_finite()) {
    for (State x = 0; x < space.size(); ++x) {
      if (a.Contains(space, x) && b.Contains(space, x)) return false;
    }
    return true;
  }
  for (const End& end : space.ends()) {
    if (a.ContainsEnd(space, end.id) && b.ContainsEnd(space, end.id)) return false;
  }
  // Beyond every atom and tail boundary membership is decided by the ends,
  // so a finite scan settles the rest.
  State lo = 0;
  State hi = 0;
  for (const MeasurableSet* set : {&a, &b}) {
    for (State x : set->atoms()) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    for (const Tail& tail : set->tails()) {
      lo = std::min(lo, tail.after);
      hi = std::max(hi, tail.after);
    }
  }
  if (space.support() == Support::kHalfLine) lo = 0;
  for (State x = lo - 1; x <= hi + 1; ++x) {
    if (!space.Contains(x)) continue;
    if (a.Contains(space, x) && b.Contains(space, x)) return false;
  }
  return true;
}

FAMeasure BasisSum(const StateSpace& space, const InvariantBasis& basis) {
  FAMeasure sum(space);
  for (std::size_t i = 0; i < basis.measures.size(); ++i) {
    if (basis.kinds[i] == InvariantKind::kCountablyAdditive) sum += basis.measures[i];
  }
  return sum;
}

}  // namespace

DoeblinCheck CheckDoeblinMatrix(const StateSpace& space,
                                const Eigen::MatrixXd& transition,
                                const FAMeasure& phi, double epsilon,
                                Admission admission) {
  ValidateEpsilon(epsilon);
  if (transition.rows() != transition.cols()) {
    throw DomainError("transition matrix must be square");
  }
  const Eigen::Index n = transition.rows();
  const std::vector<double> dense = DensePhi(space, phi, n);

  DoeblinCheck check;
  check.vacuous = std::none_of(dense.begin(), dense.end(), [&](double w) {
    return Admissible(w, epsilon, admission);
  });

  std::vector<RowBest> rows(static_cast<std::size_t>(n));
  internal::ParallelFor(rows.size(), [&](std::size_t x) {
    rows[x] = BestForRow(transition, static_cast<Eigen::Index>(x), dense,
                         epsilon, admission);
  });
  std::size_t arg = 0;
  for (std::size_t x = 1; x < rows.size(); ++x) {
    if (rows[x].probability > rows[arg].probability) arg = x;
  }
  if (!rows.empty()) {
    check.extremum.x = static_cast<State>(arg);
    check.extremum.probability = rows[arg].probability;
    check.extremum.set = MeasurableSet::Atoms(
        std::set<State>(rows[arg].states.begin(), rows[arg].states.end()));
  }
  check.holds =
      check.extremum.probability <= 1.0 - epsilon + kDoeblinTolerance;
  return check;
}

DoeblinCheck CheckDoeblin(const TransitionKernel& kernel, const FAMeasure& phi,
                          double epsilon, int k) {
  return CheckVariant(kernel, phi, epsilon, k, DoeblinVariant::kPower);
}

DoeblinCheck CheckDoeblinTilde(const TransitionKernel& kernel,
                               const FAMeasure& phi, double epsilon, int m) {
  return CheckVariant(kernel, phi, epsilon, m, DoeblinVariant::kCesaro);
}

std::vector<double> DefaultEpsilonGrid() {
  return {0.9, 0.75, 0.5, 0.4, 0.3, 0.25, 0.2, 0.1, 0.05, 0.01};
}

DoeblinSearchResult SearchDoeblin(const TransitionKernel& kernel, int k_max,
                                  std::span<const double> epsilon_grid,
                                  const InvariantBasis& basis,
                                  DoeblinVariant variant) {
  RequireFinite(kernel, "Doeblin search");
  RequireCapacity(kernel);
  if (k_max < 1) throw ValidationError("k_max must be at least 1");
  if (epsilon_grid.empty()) throw ValidationError("epsilon grid is empty");
  std::vector<double> grid(epsilon_grid.begin(), epsilon_grid.end());
  for (double eps : grid) {
    if (!std::isfinite(eps) || eps <= 0.0 || eps > 1.0) {
      throw ValidationError("epsilon grid value " + std::to_string(eps) +
                            " outside (0, 1]");
    }
  }
  std::sort(grid.begin(), grid.end(), std::greater<>());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const StateSpace& space = kernel.space();
  const auto n = kernel.size();
  std::vector<FAMeasure> candidates;
  FAMeasure sum = BasisSum(space, basis);
  if (!sum.IsZero()) candidates.push_back(std::move(sum));
  AtomWeights uniform;
  AtomWeights counting;
  for (State x = 0; x < n; ++x) {
    uniform[x] = 1.0 / static_cast<double>(n);
    counting[x] = 1.0;
  }
  candidates.emplace_back(space, uniform);
  candidates.emplace_back(space, counting);

  const Admission admission = variant == DoeblinVariant::kPower
                                  ? Admission::kNonStrict
                                  : Admission::kStrict;
  std::vector<Eigen::MatrixXd> steps;
  {
    const Eigen::MatrixXd& p = kernel.matrix();
    Eigen::MatrixXd power = p;
    Eigen::MatrixXd running = p;
    for (int k = 1; k <= k_max; ++k) {
      if (k > 1) {
        power = power * p;
        running += power;
      }
      steps.push_back(variant == DoeblinVariant::kPower
                          ? power
                          : Eigen::MatrixXd(running / static_cast<double>(k)));
    }
  }

  DoeblinSearchResult result;
  std::optional<DoeblinWitness> vacuous_witness;
  for (double eps : grid) {
    for (int k = 1; k <= k_max; ++k) {
      for (const FAMeasure& phi : candidates) {
        const DoeblinCheck check =
            CheckDoeblinMatrix(space, steps[k - 1], phi, eps, admission);
        ++result.candidates_checked;
        DoeblinWitness candidate{phi, eps, k, check.vacuous, variant};
        if (check.holds && !check.vacuous) {
          result.witness = std::move(candidate);
          return result;
        }
        if (check.holds && !vacuous_witness) {
          vacuous_witness = std::move(candidate);
        } else if (!check.holds && !check.vacuous && !result.rejected) {
          result.rejected = std::move(candidate);
          result.rejected_counterexample = check.extremum;
        }
      }
    }
  }
  result.witness = std::move(vacuous_witness);
  return result;
}

bool VerifyDoeblinWitness(const TransitionKernel& kernel,
                          const DoeblinWitness& witness) {
  const DoeblinCheck check = CheckVariant(kernel, witness.phi, witness.epsilon,
                                          witness.k, witness.variant);
  return check.holds && check.vacuous == witness.vacuous;
}

StarVerdict CheckStar(const TransitionKernel& kernel,
                      const InvariantBasis& basis) {
  StarVerdict verdict;
  verdict.within_representable_class = !kernel.is_finite();
  for (std::size_t i = 0; i < basis.measures.size(); ++i) {
    if (!basis.measures[i].IsCountablyAdditive()) {
      verdict.evidence.push_back(basis.measures[i]);
    }
  }
  verdict.holds = verdict.evidence.empty();
  return verdict;
}

StarVerdict CheckStarTilde(const TransitionKernel& kernel,
                           const InvariantBasis& basis) {
  StarVerdict verdict;
  verdict.within_representable_class = !kernel.is_finite();
  for (std::size_t i = 0; i < basis.measures.size(); ++i) {
    if (basis.kinds[i] == InvariantKind::kPurelyFinitelyAdditive) {
      verdict.evidence.push_back(basis.measures[i]);
    }
  }
  verdict.holds = verdict.evidence.empty();
  return verdict;
}

DoubleStarVerdict CheckDoubleStar(const InvariantBasis& basis) {
  DoubleStarVerdict verdict;
  verdict.dimension = basis.dimension();
  verdict.ca_count = basis.ca_count();
  verdict.pfa_count = basis.pfa_count();
  verdict.within_representable_class = basis.within_representable_class;
  verdict.holds = basis.conclusive && verdict.dimension > 0;
  return verdict;
}

bool IsStochasticallyClosed(const TransitionKernel& kernel,
                            const MeasurableSet& set) {
  RequireFinite(kernel, "closedness check");
  const Eigen::MatrixXd& p = kernel.matrix();
  const StateSpace& space = kernel.space();
  for (State x = 0; x < kernel.size(); ++x) {
    if (!set.Contains(space, x)) continue;
    double inside = 0.0;
    for (State y = 0; y < kernel.size(); ++y) {
      if (set.Contains(space, y)) inside += p(x, y);
    }
    if (inside < 1.0 - kDoeblinTolerance) return false;
  }
  return true;
}

std::optional<MeasurableSet> CheckAlpha(const TransitionKernel& kernel,
                                        const FAMeasure& mu,
                                        const MeasurableSet& k_mu) {
  RequireFinite(kernel, "(alpha) check");
  if (!(mu.space() == kernel.space())) {
    throw DomainError("measure lives on a different state space");
  }
  if (!mu.IsNonnegative() || InvarianceResidual(kernel, mu) > kInvarianceTolerance) {
    throw PreconditionError("(alpha) needs a nonnegative invariant measure");
  }
  const double total = mu.Total();
  const StateSpace& space = kernel.space();
  const Eigen::MatrixXd& p = kernel.matrix();
  const auto n = kernel.size();
  std::vector<bool> keep(static_cast<std::size_t>(n));
  for (State x = 0; x < n; ++x) keep[x] = k_mu.Contains(space, x);
  bool changed = true;
  while (changed) {
    changed = false;
    for (State x = 0; x < n; ++x) {
      if (!keep[x]) continue;
      double inside = 0.0;
      for (State y = 0; y < n; ++y) {
        if (keep[y]) inside += p(x, y);
      }
      if (inside < 1.0 - kDoeblinTolerance) {
        keep[x] = false;
        changed = true;
      }
    }
  }
  std::set<State> members;
  for (State x = 0; x < n; ++x) {
    if (keep[x]) members.insert(x);
  }
  MeasurableSet k = MeasurableSet::Atoms(std::move(members));
  if (std::abs(Evaluate(mu, k) - total) > kMassTolerance) return std::nullopt;
  return k;
}

bool VerifySingularityCertificate(const InvariantBasis& basis,
                                  const SingularityCertificate& certificate) {
  if (certificate.first >= basis.measures.size() ||
      certificate.second >= basis.measures.size() ||
      certificate.first == certificate.second) {
    return false;
  }
  const FAMeasure& a = basis.measures[certificate.first];
  const FAMeasure& b = basis.measures[certificate.second];
  if (std::abs(Evaluate(a, certificate.first_set) - a.Total()) > kMassTolerance) {
    return false;
  }
  if (std::abs(Evaluate(b, certificate.second_set) - b.Total()) > kMassTolerance) {
    return false;
  }
  return Disjoint(a.space(), certificate.first_set, certificate.second_set);
}

BetaVerdict CheckBeta(const InvariantBasis& basis) {
  BetaVerdict verdict;
  verdict.witnesses = basis.pairwise;
  const std::size_t n = basis.measures.size();
  std::set<std::pair<std::size_t, std::size_t>> covered;
  bool valid = true;
  for (const SingularityCertificate& c : basis.pairwise) {
    if (!VerifySingularityCertificate(basis, c)) {
      valid = false;
      break;
    }
    covered.insert(std::minmax(c.first, c.second));
  }
  verdict.holds = valid && covered.size() == n * (n - 1) / 2;
  return verdict;
}

DiracBoundResult DiracBoundResidual(const TransitionKernel& kernel,
                              const MeasurableSet& g, int m,
                              std::span<const FAMeasure> trials) {
  RequireFinite(kernel, "mixture bound");
  ValidateStep(m);
  const StateSpace& space = kernel.space();
  const Eigen::MatrixXd pm = DensePower(kernel.matrix(), m);
  DiracBoundResult result;
  result.sup_dirac = -1.0;
  for (State x = 0; x < kernel.size(); ++x) {
    double mass = 0.0;
    for (State y = 0; y < kernel.size(); ++y) {
      if (g.Contains(space, y)) mass += pm(x, y);
    }
    if (mass > result.sup_dirac) {
      result.sup_dirac = mass;
      result.argmax = x;
    }
  }
  auto push = [&](FAMeasure eta) {
    for (int i = 0; i < m; ++i) eta = ApplyA(kernel, eta);
    return Evaluate(eta, g);
  };
  for (const FAMeasure& eta : trials) {
    if (!(eta.space() == space) || !eta.IsProbability()) {
      throw PreconditionError("mixture trials must be probability measures");
    }
    result.max_mixture = std::max(result.max_mixture, push(eta));
  }
  result.dirac_gap =
      std::abs(push(FAMeasure::Dirac(space, result.argmax)) - result.sup_dirac);
  return result;
}

TransitionKernel ReflectedTruncation(const TransitionKernel& kernel,
                                     State window) {
  if (kernel.is_finite()) {
    throw StructureError("reflected truncation needs a countable kernel");
  }
  if (window < 1) throw PreconditionError("truncation window must be positive");
  if (window > kMaxSurrogateWindow) {
    throw CapacityError("truncation window " + std::to_string(window) +
                        " exceeds " + std::to_string(kMaxSurrogateWindow));
  }
  const State lo = kernel.space().support() == Support::kHalfLine ? 0 : -window;
  const State hi = window;
  const auto n = static_cast<Eigen::Index>(hi - lo + 1);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (State x = lo; x <= hi; ++x) {
    labels.push_back(std::to_string(x));
    for (const auto& [y, w] : kernel.Row(x)) {
      p(x - lo, std::clamp(y, lo, hi) - lo) += w;
    }
  }
  return TransitionKernel::Finite(std::move(p), std::move(labels));
}

SurrogateTrend TruncatedDoeblinSurrogate(const TransitionKernel& kernel,
                                         std::span<const State> windows,
                                         double epsilon, int k) {
  ValidateEpsilon(epsilon);
  ValidateStep(k);
  SurrogateTrend trend;
  trend.epsilon = epsilon;
  trend.k = k;
  for (State window : windows) {
    const TransitionKernel truncated = ReflectedTruncation(kernel, window);
    const InvariantBasis basis = InvariantBasisFinite(truncated);
    const FAMeasure phi = BasisSum(truncated.space(), basis);
    DoeblinCheck check =
        CheckDoeblinMatrix(truncated.space(), DensePower(truncated.matrix(), k),
                           phi, epsilon, Admission::kNonStrict);
    // Back to the original labels.
    const State lo = kernel.space().support() == Support::kHalfLine ? 0 : -window;
    std::set<State> atoms;
    for (State y : check.extremum.set.atoms()) atoms.insert(y + lo);
    check.extremum.set = MeasurableSet::Atoms(std::move(atoms));
    check.extremum.x += lo;
    trend.points.push_back({window, std::move(check)});
  }
  trend.nondecreasing = true;
  for (std::size_t i = 1; i < trend.points.size(); ++i) {
    if (trend.points[i].check.extremum.probability <
        trend.points[i - 1].check.extremum.probability - kDoeblinTolerance) {
      trend.nondecreasing = false;
    }
  }
  trend.fails_in_limit =
      trend.nondecreasing && !trend.points.empty() &&
      trend.points.back().check.extremum.probability >
          1.0 - epsilon + kDoeblinTolerance;
  return trend;
}

std::string ToString(QuasicompactDiagnostic diagnostic) {
  switch (diagnostic) {
    case QuasicompactDiagnostic::kConsistent:
      return "consistent";
    case QuasicompactDiagnostic::kInconsistent:
      return "inconsistent";
    case QuasicompactDiagnostic::kNotDecidable:
      return "not_decidable";
  }
  return "not_decidable";
}

ConditionReport BuildConditionReport(const TransitionKernel& kernel,
                                     const InvariantBasis& basis,
                                     const ConditionOptions& options) {
  ConditionReport report;
  report.star = CheckStar(kernel, basis);
  report.star_tilde = CheckStarTilde(kernel, basis);
  report.double_star = CheckDoubleStar(basis);
  report.beta = CheckBeta(basis);

  if (kernel.is_finite()) {
    const ChainStructure structure = RecurrentClasses(kernel);
    for (std::size_t i = 0; i < basis.measures.size(); ++i) {
      std::set<State> members(structure.transient.begin(),
                              structure.transient.end());
      for (const auto& [x, w] : basis.measures[i].atoms()) members.insert(x);
      AlphaEntry entry;
      entry.measure = i;
      entry.k_mu = MeasurableSet::Atoms(std::move(members));
      entry.k = CheckAlpha(kernel, basis.measures[i], entry.k_mu);
      report.alpha.push_back(std::move(entry));
    }
    if (kernel.size() <= kDoeblinMaxStates) {
      report.doeblin = SearchDoeblin(kernel, options.k_max, options.epsilon_grid,
                                     basis, DoeblinVariant::kPower);
      report.doeblin_tilde =
          SearchDoeblin(kernel, options.k_max, options.epsilon_grid, basis,
                        DoeblinVariant::kCesaro);
    }
  } else {
    report.surrogate = TruncatedDoeblinSurrogate(
        kernel, options.surrogate_windows, options.surrogate_epsilon, 1);
  }

  if (basis.pfa_count() > 0) {
    report.quasicompact = QuasicompactDiagnostic::kInconsistent;
    report.quasicompact_reason =
        "an invariant end charge exists, so (*) fails";
  } else if (kernel.is_finite() || basis.conclusive) {
    report.quasicompact = QuasicompactDiagnostic::kConsistent;
    report.quasicompact_reason =
        kernel.is_finite() ? "finite chain: (*) and (**) hold"
                           : "no invariant end charge was found";
  } else {
    report.quasicompact = QuasicompactDiagnostic::kNotDecidable;
    report.quasicompact_reason =
        "truncation did not settle the countably additive part";
  }
  return report;
}

}  // namespace chargechain
