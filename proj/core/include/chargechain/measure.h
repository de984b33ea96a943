#ifndef CHARGECHAIN_MEASURE_H_
#define CHARGECHAIN_MEASURE_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "chargechain/state_space.h"

namespace chargechain {

using AtomWeights = std::map<State, double>;
using EndWeights = std::map<std::string, double, std::less<>>;

// Signed finitely additive measure: a finite sparse atomic part plus one
// charge bucket per end. The split between the two parts is the
// countably additive / purely finitely additive decomposition of the
// measure. Zero weights are never stored.
class FAMeasure {
 public:
  explicit FAMeasure(StateSpace space);
  // Validates states and end ids against the space.
  FAMeasure(StateSpace space, AtomWeights atoms, EndWeights ends = {});

  static FAMeasure Dirac(const StateSpace& space, State x,
                         double weight = 1.0);
  static FAMeasure EndCharge(const StateSpace& space, std::string_view end,
                             double weight = 1.0);

  const StateSpace& space() const { return space_; }
  const AtomWeights& atoms() const { return atoms_; }
  const EndWeights& ends() const { return ends_; }

  double atom(State x) const;
  double end(std::string_view id) const;

  // mu(X).
  double Total() const;
  // |mu|(X) = sum of absolute weights.
  double TotalVariation() const;
  bool IsNonnegative() const;
  // Membership in S_ba: nonnegative with total mass one (within tol).
  bool IsProbability(double tol = 1e-12) const;
  bool IsCountablyAdditive() const { return ends_.empty(); }
  bool IsPurelyFinitelyAdditive() const { return atoms_.empty(); }
  bool IsZero() const { return atoms_.empty() && ends_.empty(); }

  void AddAtom(State x, double weight);
  void AddEnd(std::string_view id, double weight);

  FAMeasure& operator+=(const FAMeasure& other);
  FAMeasure& operator-=(const FAMeasure& other);
  FAMeasure& operator*=(double factor);

  bool operator==(const FAMeasure&) const = default;

 private:
  void CheckSameSpace(const FAMeasure& other) const;

  StateSpace space_;
  AtomWeights atoms_;
  EndWeights ends_;
};

FAMeasure operator+(FAMeasure a, const FAMeasure& b);
FAMeasure operator-(FAMeasure a, const FAMeasure& b);
FAMeasure operator-(FAMeasure a);
FAMeasure operator*(double factor, FAMeasure a);

// Bounded function with finitely many explicit values and a limit along each
// end. Value rule for an unlisted state x:
//   * beyond the largest listed state (or every state, when nothing is
//     listed and x >= 0) the +inf limit applies when declared;
//   * below the smallest listed state (or x < 0 when nothing is listed) the
//     -inf limit applies when declared;
//   * otherwise `default_value`.
class BoundedFunction {
 public:
  BoundedFunction(StateSpace space, std::map<State, double> window,
                  double default_value = 0.0, EndWeights end_limits = {});

  // f == c everywhere, with every end limit equal to c.
  static BoundedFunction Constant(const StateSpace& space, double c);

  const StateSpace& space() const { return space_; }
  const std::map<State, double>& window() const { return window_; }
  double default_value() const { return default_value_; }
  const EndWeights& end_limits() const { return end_limits_; }

  double operator()(State x) const;
  std::optional<double> EndLimit(std::string_view end) const;
  double SupNorm() const;

 private:
  StateSpace space_;
  std::map<State, double> window_;
  double default_value_;
  EndWeights end_limits_;
};

// mu(E). Throws DomainError when E mentions ends outside mu's space.
double Evaluate(const FAMeasure& mu, const MeasurableSet& set);

// <mu, f> = sum of atom weights times f plus end weights times end limits.
// Throws DomainError when a charged end has no declared limit.
double Pair(const FAMeasure& mu, const BoundedFunction& f);

struct JordanParts {
  FAMeasure positive;
  FAMeasure negative;
};
JordanParts JordanDecompose(const FAMeasure& mu);

struct YosidaHewittParts {
  FAMeasure countably_additive;
  FAMeasure purely_finitely_additive;
};
YosidaHewittParts YosidaHewitt(const FAMeasure& mu);

// Lattice infimum / supremum of nonnegative measures (PreconditionError
// otherwise). Atoms and end buckets are compared pointwise; an atom never
// overlaps an end charge, so cross pairs contribute nothing.
FAMeasure LatticeInf(const FAMeasure& a, const FAMeasure& b);
FAMeasure LatticeSup(const FAMeasure& a, const FAMeasure& b);
// Signed inputs, routed through Jordan parts: a ^ b = b - (a - b)^-.
FAMeasure LatticeInfSigned(const FAMeasure& a, const FAMeasure& b);
FAMeasure LatticeSupSigned(const FAMeasure& a, const FAMeasure& b);

inline constexpr int kLatticeOracleMaxStates = 20;

// Brute force min over C subset of E of a(C) + b(E \ C) on a finite space.
// CapacityError when |X| > 20, PreconditionError on signed inputs.
double LatticeInfOracle(const FAMeasure& a, const FAMeasure& b,
                        const MeasurableSet& set);

// Both inputs nonnegative. Disjoint iff the lattice infimum vanishes.
bool IsDisjoint(const FAMeasure& a, const FAMeasure& b);

struct SingularityWitness {
  MeasurableSet first;   // a(first) = a(X)
  MeasurableSet second;  // b(second) = b(X), first and second disjoint
};
// Witness sets inside the finite/co-tail algebra, or nullopt when the
// measures share an atom or an end bucket.
std::optional<SingularityWitness> FindSingularityWitness(const FAMeasure& a,
                                                         const FAMeasure& b);

// Support of the atomic part plus a tail for every charged end. Tails start
// beyond `margin_max` (for +inf) or below `margin_min` (for -inf).
MeasurableSet SupportSet(const FAMeasure& mu, State margin_min,
                         State margin_max);

}  // namespace chargechain

#endif  // CHARGECHAIN_MEASURE_H_
