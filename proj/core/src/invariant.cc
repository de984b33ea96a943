#include "chargechain/invariant.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include <Eigen/SparseCore>

#include "chain_graph.h"
#include "chargechain/errors.h"

namespace chargechain {
namespace {

void RequireFinite(const TransitionKernel& kernel, const char* op) {
  if (!kernel.is_finite()) {
    throw StructureError(std::string(op) + " needs a finite kernel");
  }
}

// Largest |state| a countable kernel refers to explicitly, plus its largest
// jump. Windows at least this wide contain every exception and every
// to_finite target with room for one step.
State StructuralBound(const TransitionKernel& kernel) {
  State bound = std::max(std::abs(kernel.ExceptionLow()),
                         std::abs(kernel.ExceptionHigh()));
  for (const auto& [x, row] : kernel.exceptions()) {
    for (const auto& [y, w] : row) bound = std::max(bound, std::abs(y));
  }
  for (const auto& [id, tail] : kernel.tails()) {
    for (const auto& [s, w] : tail.to_finite) bound = std::max(bound, std::abs(s));
  }
  return bound + kernel.MaxOffset();
}

Eigen::VectorXd ClassStationary(const std::vector<std::vector<std::pair<int, double>>>& rows,
                                const std::vector<int>& members) {
  std::vector<int> local(rows.size(), -1);
  for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = static_cast<int>(i);
  const auto n = static_cast<Eigen::Index>(members.size());
  if (n <= 256) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (const auto& [j, w] : rows[members[i]]) p(i, local[j]) += w;
    }
    return internal::StationaryDense(p);
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& [j, w] : rows[members[i]]) triplets.emplace_back(i, local[j], w);
  }
  Eigen::SparseMatrix<double> p(n, n);
  p.setFromTriplets(triplets.begin(), triplets.end());
  return internal::StationarySparse(p);
}

// Dense-indexed evolution of a measure under A, atoms confined to a window
// and overflow moved into end buckets.
class TruncatedEvolution {
 public:
  TruncatedEvolution(const TransitionKernel& kernel, State half_width,
                     const FAMeasure& mu0)
      : kernel_(kernel) {
    const StateSpace& space = kernel.space();
    if (space.is_finite()) {
      lo_ = 0;
      hi_ = space.size() - 1;
    } else {
      hi_ = std::max(half_width, StructuralBound(kernel));
      lo_ = space.support() == Support::kHalfLine ? 0 : -hi_;
    }
    const std::size_t n = static_cast<std::size_t>(hi_ - lo_ + 1);
    rows_.resize(n);
    for (State x = lo_; x <= hi_; ++x) {
      for (const auto& [y, w] : kernel.Row(x)) rows_[Index(x)].push_back({y, w});
    }
    for (const End& end : space.ends()) {
      end_ids_.push_back(end.id);
      actions_.push_back(ComputeEndAction(kernel, end.id));
    }
    atoms_.assign(n, 0.0);
    ends_.assign(end_ids_.size(), 0.0);
    for (const auto& [x, w] : mu0.atoms()) Deposit(x, w, atoms_, ends_);
    for (const auto& [id, w] : mu0.ends()) ends_[EndIndex(id)] += w;
  }

  void Step() {
    std::vector<double> atoms(atoms_.size(), 0.0);
    std::vector<double> ends(ends_.size(), 0.0);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const double m = atoms_[i];
      if (m == 0.0) continue;
      for (const auto& [y, w] : rows_[i]) Deposit(y, m * w, atoms, ends);
    }
    for (std::size_t e = 0; e < ends_.size(); ++e) {
      const double m = ends_[e];
      if (m == 0.0) continue;
      const EndAction& action = actions_[e];
      ends[e] += m * action.preserved_mass;
      for (const auto& [s, w] : action.leak_atoms) Deposit(s, m * w, atoms, ends);
      for (const auto& [other, w] : action.leak_ends) ends[EndIndex(other)] += m * w;
    }
    atoms_ = std::move(atoms);
    ends_ = std::move(ends);
  }

  // Mass on [0, m] (half-line, finite) or [-m, m] (integer line).
  double WindowMass(State m) const {
    const State a = std::max(lo_, kernel_.space().is_finite() ||
                                          kernel_.space().support() == Support::kHalfLine
                                      ? State{0}
                                      : -m);
    const State b = std::min(hi_, m);
    double total = 0.0;
    for (State x = a; x <= b; ++x) total += atoms_[Index(x)];
    return total;
  }

  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& ends() const { return ends_; }
  const std::vector<std::string>& end_ids() const { return end_ids_; }
  State lo() const { return lo_; }

 private:
  std::size_t Index(State x) const { return static_cast<std::size_t>(x - lo_); }

  std::size_t EndIndex(std::string_view id) const {
    for (std::size_t e = 0; e < end_ids_.size(); ++e) {
      if (end_ids_[e] == id) return e;
    }
    throw DomainError("unknown end id '" + std::string(id) + "'");
  }

  void Deposit(State y, double m, std::vector<double>& atoms,
               std::vector<double>& ends) const {
    if (y >= lo_ && y <= hi_) {
      atoms[Index(y)] += m;
      return;
    }
    const End* end = kernel_.space().EndInDirection(y > hi_ ? Direction::kPlus
                                                            : Direction::kMinus);
    ends[EndIndex(end->id)] += m;
  }

  const TransitionKernel& kernel_;
  State lo_ = 0;
  State hi_ = 0;
  std::vector<std::vector<std::pair<State, double>>> rows_;
  std::vector<std::string> end_ids_;
  std::vector<EndAction> actions_;
  std::vector<double> atoms_;
  std::vector<double> ends_;
};

struct TruncationClass {
  FAMeasure measure;
  double outer_mass;
  bool exact;
};

}  // namespace

int InvariantBasis::ca_count() const {
  return static_cast<int>(std::count(kinds.begin(), kinds.end(),
                                     InvariantKind::kCountablyAdditive));
}

int InvariantBasis::pfa_count() const {
  return static_cast<int>(std::count(kinds.begin(), kinds.end(),
                                     InvariantKind::kPurelyFinitelyAdditive));
}

ChainStructure RecurrentClasses(const TransitionKernel& kernel) {
  RequireFinite(kernel, "RecurrentClasses");
  const Eigen::MatrixXd& p = kernel.matrix();
  const int n = static_cast<int>(p.rows());
  internal::Adjacency graph(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (p(i, j) > 0.0) graph[i].push_back(j);
    }
  }
  ChainStructure structure;
  std::vector<bool> recurrent(n, false);
  for (const internal::ClosedClass& c : internal::FindClosedClasses(graph)) {
    RecurrentClass rc;
    rc.period = c.period;
    for (int v : c.members) {
      rc.states.push_back(v);
      recurrent[v] = true;
    }
    structure.classes.push_back(std::move(rc));
  }
  for (int v = 0; v < n; ++v) {
    if (!recurrent[v]) structure.transient.push_back(v);
  }
  return structure;
}

std::vector<SingularityCertificate> PairwiseCertificates(
    const std::vector<FAMeasure>& measures) {
  std::vector<SingularityCertificate> out;
  for (std::size_t i = 0; i < measures.size(); ++i) {
    for (std::size_t j = i + 1; j < measures.size(); ++j) {
      if (auto w = FindSingularityWitness(measures[i], measures[j])) {
        out.push_back({i, j, std::move(w->first), std::move(w->second)});
      }
    }
  }
  return out;
}

InvariantBasis InvariantBasisFinite(const TransitionKernel& kernel) {
  RequireFinite(kernel, "InvariantBasisFinite");
  const ChainStructure structure = RecurrentClasses(kernel);
  const Eigen::MatrixXd& p = kernel.matrix();
  InvariantBasis basis;
  for (const RecurrentClass& c : structure.classes) {
    const auto n = static_cast<Eigen::Index>(c.states.size());
    Eigen::MatrixXd sub(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) sub(i, j) = p(c.states[i], c.states[j]);
    }
    const Eigen::VectorXd pi = internal::StationaryDense(sub);
    AtomWeights atoms;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (pi(i) != 0.0) atoms.emplace(c.states[i], pi(i));
    }
    basis.measures.emplace_back(kernel.space(), std::move(atoms));
    basis.kinds.push_back(InvariantKind::kCountablyAdditive);
    basis.periods.push_back(c.period);
  }
  basis.pairwise = PairwiseCertificates(basis.measures);
  return basis;
}

std::vector<FAMeasure> DetectPfaEnds(const TransitionKernel& kernel) {
  if (kernel.is_finite()) {
    throw StructureError("DetectPfaEnds needs a countable kernel with tail rows");
  }
  const std::vector<End>& ends = kernel.space().ends();
  const int k = static_cast<int>(ends.size());
  const int sink = k;
  std::vector<EndAction> actions;
  for (const End& end : ends) actions.push_back(ComputeEndAction(kernel, end.id));
  auto index_of = [&](std::string_view id) {
    for (int i = 0; i < k; ++i) {
      if (ends[i].id == id) return i;
    }
    throw DomainError("unknown end id");
  };

  // End-to-end chain with every leak to atoms sent to an absorbing sink.
  internal::Adjacency graph(k + 1);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (int i = 0; i < k; ++i) {
    p(i, i) += actions[i].preserved_mass;
    for (const auto& [other, w] : actions[i].leak_ends) p(i, index_of(other)) += w;
    for (const auto& [s, w] : actions[i].leak_atoms) p(i, sink) += w;
    for (int j = 0; j <= k; ++j) {
      if (p(i, j) > 0.0) graph[i].push_back(j);
    }
  }
  graph[sink].push_back(sink);

  std::vector<FAMeasure> charges;
  for (const internal::ClosedClass& c : internal::FindClosedClasses(graph)) {
    if (c.members.front() == sink || c.members.back() == sink) continue;
    const auto n = static_cast<Eigen::Index>(c.members.size());
    Eigen::MatrixXd sub(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) sub(i, j) = p(c.members[i], c.members[j]);
    }
    const Eigen::VectorXd pi = internal::StationaryDense(sub);
    FAMeasure charge(kernel.space());
    for (Eigen::Index i = 0; i < n; ++i) charge.AddEnd(ends[c.members[i]].id, pi(i));
    charges.push_back(std::move(charge));
  }
  return charges;
}

InvariantBasis InvariantBasisCountable(const TransitionKernel& kernel,
                                       const CountableSolveOptions& options) {
  if (kernel.is_finite()) {
    throw StructureError("InvariantBasisCountable needs a countable kernel");
  }
  const StateSpace& space = kernel.space();
  const bool half_line = space.support() == Support::kHalfLine;
  const State bound = StructuralBound(kernel);
  State window = std::max(options.initial_window, 4 * (bound + 1));

  std::vector<TruncationClass> accepted;
  bool conclusive = true;
  while (true) {
    const State lo = half_line ? 0 : -window;
    const State hi = window;
    const State inner = window / 2;
    const auto n = static_cast<std::size_t>(hi - lo + 1);
    // Reflected truncation: targets outside [lo, hi] are clamped onto it.
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    internal::Adjacency graph(n);
    for (State x = lo; x <= hi; ++x) {
      auto& row = rows[x - lo];
      for (const auto& [y, w] : kernel.Row(x)) {
        const int j = static_cast<int>(std::clamp(y, lo, hi) - lo);
        if (!row.empty() && row.back().first == j) {
          row.back().second += w;
        } else {
          row.push_back({j, w});
        }
      }
      for (const auto& [j, w] : row) graph[x - lo].push_back(j);
    }

    std::vector<TruncationClass> tight;
    bool any_loose = false;
    bool ambiguous = false;
    for (const internal::ClosedClass& c : internal::FindClosedClasses(graph)) {
      const Eigen::VectorXd pi = ClassStationary(rows, c.members);
      double outer = 0.0;
      bool exact = true;
      AtomWeights atoms;
      for (std::size_t i = 0; i < c.members.size(); ++i) {
        const State x = c.members[i] + lo;
        if (std::abs(x) > inner) {
          outer += pi(static_cast<Eigen::Index>(i));
          exact = false;
        } else if (pi(static_cast<Eigen::Index>(i)) > 1e-18) {
          atoms.emplace(x, pi(static_cast<Eigen::Index>(i)));
        }
      }
      bool ok = exact || outer <= options.tightness;
      if (ok && !atoms.empty()) {
        FAMeasure mu(space, std::move(atoms));
        mu *= 1.0 / mu.Total();
        if (InvarianceResidual(kernel, mu) <= kInvarianceTolerance) {
          tight.push_back({std::move(mu), outer, exact});
          continue;
        }
      }
      any_loose = true;
      if (outer < 0.01) ambiguous = true;
    }
    const bool last = !any_loose || window * 2 > options.max_window;
    if (last) {
      accepted = std::move(tight);
      // A rejected class that still keeps most of its mass inside the
      // inner window may yet concentrate on a larger one.
      conclusive = !ambiguous;
      break;
    }
    window *= 2;
  }

  InvariantBasis basis;
  basis.within_representable_class = true;
  basis.conclusive = conclusive;
  for (TruncationClass& c : accepted) {
    basis.measures.push_back(std::move(c.measure));
    basis.kinds.push_back(InvariantKind::kCountablyAdditive);
    basis.periods.push_back(1);
  }
  for (FAMeasure& charge : DetectPfaEnds(kernel)) {
    basis.measures.push_back(std::move(charge));
    basis.kinds.push_back(InvariantKind::kPurelyFinitelyAdditive);
    basis.periods.push_back(1);
  }
  basis.pairwise = PairwiseCertificates(basis.measures);
  return basis;
}

InvariantBasis ComputeInvariantBasis(const TransitionKernel& kernel) {
  return kernel.is_finite() ? InvariantBasisFinite(kernel)
                            : InvariantBasisCountable(kernel);
}

std::vector<FAMeasure> CesaroSequence(const TransitionKernel& kernel,
                                      const FAMeasure& mu0, int count,
                                      State window) {
  if (!mu0.IsProbability()) {
    throw PreconditionError("Cesaro sequence needs an initial probability measure");
  }
  if (count < 1) throw PreconditionError("Cesaro sequence needs count >= 1");
  TruncatedEvolution evolution(kernel, window, mu0);
  std::vector<double> atom_sum(evolution.atoms().size(), 0.0);
  std::vector<double> end_sum(evolution.ends().size(), 0.0);
  std::vector<FAMeasure> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int n = 1; n <= count; ++n) {
    evolution.Step();
    for (std::size_t i = 0; i < atom_sum.size(); ++i) atom_sum[i] += evolution.atoms()[i];
    for (std::size_t e = 0; e < end_sum.size(); ++e) end_sum[e] += evolution.ends()[e];
    FAMeasure lambda(kernel.space());
    for (std::size_t i = 0; i < atom_sum.size(); ++i) {
      if (atom_sum[i] != 0.0) {
        lambda.AddAtom(evolution.lo() + static_cast<State>(i), atom_sum[i] / n);
      }
    }
    for (std::size_t e = 0; e < end_sum.size(); ++e) {
      if (end_sum[e] != 0.0) lambda.AddEnd(evolution.end_ids()[e], end_sum[e] / n);
    }
    out.push_back(std::move(lambda));
  }
  return out;
}

EscapeProfile ComputeEscapeProfile(const TransitionKernel& kernel,
                                   const FAMeasure& mu0, int n_max,
                                   std::vector<State> window_sizes) {
  if (kernel.is_finite()) {
    throw StructureError("escape profiles need a countable kernel");
  }
  if (!mu0.IsProbability() || !mu0.IsCountablyAdditive()) {
    throw PreconditionError("escape profile needs an atomic probability measure");
  }
  if (n_max < 1 || window_sizes.empty()) {
    throw PreconditionError("escape profile needs n_max >= 1 and a window");
  }
  std::sort(window_sizes.begin(), window_sizes.end());
  window_sizes.erase(std::unique(window_sizes.begin(), window_sizes.end()),
                     window_sizes.end());
  if (window_sizes.front() < 0) {
    throw PreconditionError("window sizes must be nonnegative");
  }
  TruncatedEvolution evolution(kernel, window_sizes.back(), mu0);

  EscapeProfile profile;
  std::vector<double> cumulative(window_sizes.size(), 0.0);
  std::vector<double> end_sum(evolution.ends().size(), 0.0);
  for (State m : window_sizes) {
    EscapeWindow w;
    w.size = m;
    w.masses.reserve(static_cast<std::size_t>(n_max));
    profile.windows.push_back(std::move(w));
  }
  for (int n = 1; n <= n_max; ++n) {
    evolution.Step();
    for (std::size_t i = 0; i < window_sizes.size(); ++i) {
      cumulative[i] += evolution.WindowMass(window_sizes[i]);
      profile.windows[i].masses.push_back(std::clamp(cumulative[i] / n, 0.0, 1.0));
    }
    for (std::size_t e = 0; e < end_sum.size(); ++e) end_sum[e] += evolution.ends()[e];
  }
  profile.pfa_mass_estimate =
      std::clamp(1.0 - profile.windows.back().masses.back(), 0.0, 1.0);
  double end_total = 0.0;
  for (std::size_t e = 0; e < end_sum.size(); ++e) {
    const double mass = end_sum[e] / n_max;
    profile.per_end_mass.emplace(evolution.end_ids()[e], mass);
    end_total += mass;
  }
  for (const auto& [id, mass] : profile.per_end_mass) {
    profile.per_end_split.emplace(id, end_total > 0.0 ? mass / end_total : 0.0);
  }
  return profile;
}

InvariantClassification ClassifyInvariant(const TransitionKernel& kernel,
                                          const FAMeasure& mu) {
  RequireFinite(kernel, "ClassifyInvariant");
  if (InvarianceResidual(kernel, mu) > kInvarianceTolerance) {
    throw PreconditionError("ClassifyInvariant needs an invariant measure");
  }
  InvariantClassification out;
  for (const RecurrentClass& c : RecurrentClasses(kernel).classes) {
    double mass = 0.0;
    for (State x : c.states) mass += std::abs(mu.atom(x));
    if (mass > 1e-12) out.period = std::lcm(out.period, c.period);
  }
  out.composite = out.period >= 2;
  return out;
}

}  // namespace chargechain
