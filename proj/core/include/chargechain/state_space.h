#ifndef CHARGECHAIN_STATE_SPACE_H_
#define CHARGECHAIN_STATE_SPACE_H_

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace chargechain {

using State = std::int64_t;

enum class Direction { kPlus, kMinus };

// A direction to infinity. Purely finitely additive mass is bucketed per end.
struct End {
  std::string id;
  Direction direction = Direction::kPlus;

  bool operator==(const End&) const = default;
};

enum class Support {
  kHalfLine,     // {0, 1, 2, ...}, one end at +inf
  kIntegerLine,  // Z, ends at +inf and -inf
};

inline constexpr std::string_view kPlusEndId = "+inf";
inline constexpr std::string_view kMinusEndId = "-inf";

// Either {0, ..., size-1} or a countable half-line / integer line together
// with its ends.
class StateSpace {
 public:
  static StateSpace Finite(std::int64_t size,
                           std::vector<std::string> labels = {});
  // Uses the default end ids "+inf" / "-inf".
  static StateSpace Countable(Support support);
  static StateSpace Countable(Support support, std::vector<End> ends);

  bool is_finite() const { return finite_; }
  // Number of states; only meaningful for finite spaces.
  std::int64_t size() const { return size_; }
  Support support() const { return support_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<End>& ends() const { return ends_; }

  bool Contains(State x) const;
  // nullptr when the id is not an end of this space.
  const End* FindEnd(std::string_view id) const;
  // Throws DomainError on unknown ids.
  const End& GetEnd(std::string_view id) const;
  // The end lying in `direction`, nullptr if the space has none there.
  const End* EndInDirection(Direction direction) const;

  bool operator==(const StateSpace&) const = default;

 private:
  StateSpace() = default;

  bool finite_ = true;
  std::int64_t size_ = 0;
  Support support_ = Support::kHalfLine;
  std::vector<std::string> labels_;
  std::vector<End> ends_;
};

// tail(end, after): every state strictly beyond `after` in the end's
// direction.
struct Tail {
  std::string end;
  State after = 0;

  bool operator==(const Tail&) const = default;
};

// Element of the finite/co-tail algebra: (atoms U tails), optionally
// complemented. Stands in for the full power set of X.
class MeasurableSet {
 public:
  MeasurableSet() = default;
  MeasurableSet(std::set<State> atoms, std::vector<Tail> tails,
                bool complemented = false);

  static MeasurableSet Empty() { return {}; }
  static MeasurableSet Whole() { return MeasurableSet({}, {}, true); }
  static MeasurableSet Atoms(std::set<State> atoms) {
    return MeasurableSet(std::move(atoms), {});
  }
  static MeasurableSet TailOf(std::string end, State after) {
    return MeasurableSet({}, {Tail{std::move(end), after}});
  }

  const std::set<State>& atoms() const { return atoms_; }
  const std::vector<Tail>& tails() const { return tails_; }
  bool complemented() const { return complemented_; }

  MeasurableSet Complement() const;

  // Membership of a state. Throws DomainError for unknown end ids.
  bool Contains(const StateSpace& space, State x) const;
  // Whether the set eventually contains every state toward `end`, i.e.
  // whether a charge bucketed at that end is counted.
  bool ContainsEnd(const StateSpace& space, std::string_view end) const;

  // Tails merged per end, atoms covered by a tail dropped, states validated
  // against the space.
  MeasurableSet Canonical(const StateSpace& space) const;

  bool operator==(const MeasurableSet&) const = default;

 private:
  std::set<State> atoms_;
  std::vector<Tail> tails_;
  bool complemented_ = false;
};

// All states of a finite space as a set. Throws StructureError on countable
// spaces.
MeasurableSet AllStates(const StateSpace& space);

}  // namespace chargechain

#endif  // CHARGECHAIN_STATE_SPACE_H_
