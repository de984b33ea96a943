#include "chargechain/measure.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "chargechain/errors.h"

namespace chargechain {
namespace {

template <typename Map, typename Key>
void AddWeight(Map& map, const Key& key, double weight) {
  if (weight == 0.0) return;
  auto it = map.find(key);
  if (it == map.end()) {
    map.emplace(key, weight);
    return;
  }
  it->second += weight;
  if (it->second == 0.0) map.erase(it);
}

void RequireNonnegative(const FAMeasure& mu, const char* op) {
  if (!mu.IsNonnegative()) {
    throw PreconditionError(std::string(op) +
                            " needs nonnegative measures; route signed "
                            "inputs through the Jordan parts");
  }
}

// Pointwise combination over the union of keys; zero results dropped.
template <typename Map, typename Fn>
Map Pointwise(const Map& a, const Map& b, Fn fn) {
  Map out;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    double va = 0.0;
    double vb = 0.0;
    typename Map::key_type key;
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      key = ia->first;
      va = (ia++)->second;
    } else if (ia == a.end() || ib->first < ia->first) {
      key = ib->first;
      vb = (ib++)->second;
    } else {
      key = ia->first;
      va = (ia++)->second;
      vb = (ib++)->second;
    }
    const double v = fn(va, vb);
    if (v != 0.0) out.emplace_hint(out.end(), key, v);
  }
  return out;
}

}  // namespace

FAMeasure::FAMeasure(StateSpace space) : space_(std::move(space)) {}

FAMeasure::FAMeasure(StateSpace space, AtomWeights atoms, EndWeights ends)
    : space_(std::move(space)) {
  for (const auto& [x, w] : atoms) AddAtom(x, w);
  for (const auto& [id, w] : ends) AddEnd(id, w);
}

FAMeasure FAMeasure::Dirac(const StateSpace& space, State x, double weight) {
  FAMeasure mu(space);
  mu.AddAtom(x, weight);
  return mu;
}

FAMeasure FAMeasure::EndCharge(const StateSpace& space, std::string_view end,
                               double weight) {
  FAMeasure mu(space);
  mu.AddEnd(end, weight);
  return mu;
}

double FAMeasure::atom(State x) const {
  auto it = atoms_.find(x);
  return it == atoms_.end() ? 0.0 : it->second;
}

double FAMeasure::end(std::string_view id) const {
  auto it = ends_.find(id);
  return it == ends_.end() ? 0.0 : it->second;
}

double FAMeasure::Total() const {
  double total = 0.0;
  for (const auto& [x, w] : atoms_) total += w;
  for (const auto& [id, w] : ends_) total += w;
  return total;
}

double FAMeasure::TotalVariation() const {
  double total = 0.0;
  for (const auto& [x, w] : atoms_) total += std::abs(w);
  for (const auto& [id, w] : ends_) total += std::abs(w);
  return total;
}

bool FAMeasure::IsNonnegative() const {
  for (const auto& [x, w] : atoms_) {
    if (w < 0.0) return false;
  }
  for (const auto& [id, w] : ends_) {
    if (w < 0.0) return false;
  }
  return true;
}

bool FAMeasure::IsProbability(double tol) const {
  return IsNonnegative() && std::abs(Total() - 1.0) <= tol;
}

void FAMeasure::AddAtom(State x, double weight) {
  if (!std::isfinite(weight)) {
    throw ValidationError("measure weights must be finite");
  }
  if (!space_.Contains(x)) {
    throw DomainError("state " + std::to_string(x) +
                      " is outside the state space");
  }
  AddWeight(atoms_, x, weight);
}

void FAMeasure::AddEnd(std::string_view id, double weight) {
  if (!std::isfinite(weight)) {
    throw ValidationError("measure weights must be finite");
  }
  const End& end = space_.GetEnd(id);
  AddWeight(ends_, end.id, weight);
}

void FAMeasure::CheckSameSpace(const FAMeasure& other) const {
  if (!(space_ == other.space_)) {
    throw DomainError("measures live on different state spaces");
  }
}

FAMeasure& FAMeasure::operator+=(const FAMeasure& other) {
  CheckSameSpace(other);
  for (const auto& [x, w] : other.atoms_) AddWeight(atoms_, x, w);
  for (const auto& [id, w] : other.ends_) AddWeight(ends_, id, w);
  return *this;
}

FAMeasure& FAMeasure::operator-=(const FAMeasure& other) {
  CheckSameSpace(other);
  for (const auto& [x, w] : other.atoms_) AddWeight(atoms_, x, -w);
  for (const auto& [id, w] : other.ends_) AddWeight(ends_, id, -w);
  return *this;
}

FAMeasure& FAMeasure::operator*=(double factor) {
  if (factor == 0.0) {
    atoms_.clear();
    ends_.clear();
    return *this;
  }
  for (auto& [x, w] : atoms_) w *= factor;
  for (auto& [id, w] : ends_) w *= factor;
  return *this;
}

FAMeasure operator+(FAMeasure a, const FAMeasure& b) { return a += b; }
FAMeasure operator-(FAMeasure a, const FAMeasure& b) { return a -= b; }
FAMeasure operator-(FAMeasure a) { return a *= -1.0; }
FAMeasure operator*(double factor, FAMeasure a) { return a *= factor; }

BoundedFunction::BoundedFunction(StateSpace space,
                                 std::map<State, double> window,
                                 double default_value, EndWeights end_limits)
    : space_(std::move(space)),
      window_(std::move(window)),
      default_value_(default_value),
      end_limits_(std::move(end_limits)) {
  for (const auto& [x, v] : window_) {
    if (!space_.Contains(x)) {
      throw DomainError("function window state " + std::to_string(x) +
                        " is outside the state space");
    }
    if (!std::isfinite(v)) throw ValidationError("function values must be finite");
  }
  for (const auto& [id, v] : end_limits_) {
    space_.GetEnd(id);
    if (!std::isfinite(v)) throw ValidationError("end limits must be finite");
  }
  if (!std::isfinite(default_value_)) {
    throw ValidationError("function default must be finite");
  }
}

BoundedFunction BoundedFunction::Constant(const StateSpace& space, double c) {
  EndWeights limits;
  for (const End& end : space.ends()) limits.emplace(end.id, c);
  return BoundedFunction(space, {}, c, std::move(limits));
}

double BoundedFunction::operator()(State x) const {
  if (auto it = window_.find(x); it != window_.end()) return it->second;
  if (space_.is_finite()) return default_value_;
  const State hi = window_.empty() ? -1 : window_.rbegin()->first;
  const State lo = window_.empty() ? 0 : window_.begin()->first;
  const End* end = nullptr;
  if (x > hi) {
    end = space_.EndInDirection(Direction::kPlus);
  } else if (x < lo) {
    end = space_.EndInDirection(Direction::kMinus);
  }
  if (end != nullptr) {
    if (auto limit = EndLimit(end->id)) return *limit;
  }
  return default_value_;
}

std::optional<double> BoundedFunction::EndLimit(std::string_view end) const {
  auto it = end_limits_.find(end);
  if (it == end_limits_.end()) return std::nullopt;
  return it->second;
}

double BoundedFunction::SupNorm() const {
  double norm = std::abs(default_value_);
  for (const auto& [x, v] : window_) norm = std::max(norm, std::abs(v));
  for (const auto& [id, v] : end_limits_) norm = std::max(norm, std::abs(v));
  return norm;
}

double Evaluate(const FAMeasure& mu, const MeasurableSet& set) {
  const StateSpace& space = mu.space();
  for (const Tail& tail : set.tails()) space.GetEnd(tail.end);
  // Sum over the uncomplemented core, then complement against mu(X).
  const MeasurableSet core(set.atoms(), set.tails(), false);
  double inside = 0.0;
  for (const auto& [x, w] : mu.atoms()) {
    if (core.Contains(space, x)) inside += w;
  }
  for (const auto& [id, w] : mu.ends()) {
    if (core.ContainsEnd(space, id)) inside += w;
  }
  return set.complemented() ? mu.Total() - inside : inside;
}

double Pair(const FAMeasure& mu, const BoundedFunction& f) {
  if (!(mu.space() == f.space())) {
    throw DomainError("measure and function live on different spaces");
  }
  double total = 0.0;
  for (const auto& [x, w] : mu.atoms()) total += w * f(x);
  for (const auto& [id, w] : mu.ends()) {
    auto limit = f.EndLimit(id);
    if (!limit) {
      throw DomainError("function has no declared limit at end '" + id + "'");
    }
    total += w * *limit;
  }
  return total;
}

JordanParts JordanDecompose(const FAMeasure& mu) {
  AtomWeights pos_atoms;
  AtomWeights neg_atoms;
  for (const auto& [x, w] : mu.atoms()) {
    (w > 0.0 ? pos_atoms : neg_atoms).emplace(x, std::abs(w));
  }
  EndWeights pos_ends;
  EndWeights neg_ends;
  for (const auto& [id, w] : mu.ends()) {
    (w > 0.0 ? pos_ends : neg_ends).emplace(id, std::abs(w));
  }
  return {FAMeasure(mu.space(), std::move(pos_atoms), std::move(pos_ends)),
          FAMeasure(mu.space(), std::move(neg_atoms), std::move(neg_ends))};
}

YosidaHewittParts YosidaHewitt(const FAMeasure& mu) {
  return {FAMeasure(mu.space(), mu.atoms(), {}),
          FAMeasure(mu.space(), {}, mu.ends())};
}

FAMeasure LatticeInf(const FAMeasure& a, const FAMeasure& b) {
  RequireNonnegative(a, "LatticeInf");
  RequireNonnegative(b, "LatticeInf");
  if (!(a.space() == b.space())) {
    throw DomainError("measures live on different state spaces");
  }
  auto min_of = [](double x, double y) { return std::min(x, y); };
  return FAMeasure(a.space(), Pointwise(a.atoms(), b.atoms(), min_of),
                   Pointwise(a.ends(), b.ends(), min_of));
}

FAMeasure LatticeSup(const FAMeasure& a, const FAMeasure& b) {
  RequireNonnegative(a, "LatticeSup");
  RequireNonnegative(b, "LatticeSup");
  if (!(a.space() == b.space())) {
    throw DomainError("measures live on different state spaces");
  }
  auto max_of = [](double x, double y) { return std::max(x, y); };
  return FAMeasure(a.space(), Pointwise(a.atoms(), b.atoms(), max_of),
                   Pointwise(a.ends(), b.ends(), max_of));
}

FAMeasure LatticeInfSigned(const FAMeasure& a, const FAMeasure& b) {
  // a ^ b = b - (a - b)^-.
  return b - JordanDecompose(a - b).negative;
}

FAMeasure LatticeSupSigned(const FAMeasure& a, const FAMeasure& b) {
  return -LatticeInfSigned(-a, -b);
}

double LatticeInfOracle(const FAMeasure& a, const FAMeasure& b,
                        const MeasurableSet& set) {
  const StateSpace& space = a.space();
  if (!space.is_finite() || !(space == b.space())) {
    throw StructureError("lattice oracle needs two measures on one finite space");
  }
  if (space.size() > kLatticeOracleMaxStates) {
    throw CapacityError("lattice oracle supports at most " +
                        std::to_string(kLatticeOracleMaxStates) + " states");
  }
  RequireNonnegative(a, "LatticeInfOracle");
  RequireNonnegative(b, "LatticeInfOracle");

  std::vector<double> wa;
  std::vector<double> wb;
  for (State x = 0; x < space.size(); ++x) {
    if (set.Contains(space, x)) {
      wa.push_back(a.atom(x));
      wb.push_back(b.atom(x));
    }
  }
  const std::size_t n = wa.size();
  double best = std::numeric_limits<double>::infinity();
  // Each subset C is summed from scratch so the oracle shares no running
  // state between candidates.
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      value += (mask >> i & 1U) ? wa[i] : wb[i];
    }
    best = std::min(best, value);
  }
  return best;
}

bool IsDisjoint(const FAMeasure& a, const FAMeasure& b) {
  return LatticeInf(a, b).IsZero();
}

MeasurableSet SupportSet(const FAMeasure& mu, State margin_min,
                         State margin_max) {
  std::set<State> atoms;
  for (const auto& [x, w] : mu.atoms()) atoms.insert(x);
  std::vector<Tail> tails;
  for (const End& end : mu.space().ends()) {
    if (mu.end(end.id) == 0.0) continue;
    tails.push_back({end.id, end.direction == Direction::kPlus ? margin_max
                                                               : margin_min});
  }
  return MeasurableSet(std::move(atoms), std::move(tails));
}

std::optional<SingularityWitness> FindSingularityWitness(const FAMeasure& a,
                                                         const FAMeasure& b) {
  RequireNonnegative(a, "FindSingularityWitness");
  RequireNonnegative(b, "FindSingularityWitness");
  if (!IsDisjoint(a, b)) return std::nullopt;
  State lo = 0;
  State hi = 0;
  for (const FAMeasure* mu : {&a, &b}) {
    if (!mu->atoms().empty()) {
      lo = std::min(lo, mu->atoms().begin()->first);
      hi = std::max(hi, mu->atoms().rbegin()->first);
    }
  }
  return SingularityWitness{SupportSet(a, lo, hi), SupportSet(b, lo, hi)};
}

}  // namespace chargechain
