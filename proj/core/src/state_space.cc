#include "chargechain/state_space.h"

#include <algorithm>
#include <map>
#include <string>
#include <utility>

#include "chargechain/errors.h"

namespace chargechain {
namespace {

bool InTail(const End& end, State after, State x) {
  return end.direction == Direction::kPlus ? x > after : x < after;
}

}  // namespace

StateSpace StateSpace::Finite(std::int64_t size,
                              std::vector<std::string> labels) {
  if (size < 1) {
    throw ValidationError("finite state space needs at least one state");
  }
  if (!labels.empty() && static_cast<std::int64_t>(labels.size()) != size) {
    throw ValidationError("label count " + std::to_string(labels.size()) +
                          " does not match size " + std::to_string(size));
  }
  StateSpace space;
  space.finite_ = true;
  space.size_ = size;
  space.labels_ = std::move(labels);
  return space;
}

StateSpace StateSpace::Countable(Support support) {
  std::vector<End> ends{{std::string(kPlusEndId), Direction::kPlus}};
  if (support == Support::kIntegerLine) {
    ends.push_back({std::string(kMinusEndId), Direction::kMinus});
  }
  return Countable(support, std::move(ends));
}

StateSpace StateSpace::Countable(Support support, std::vector<End> ends) {
  const std::size_t expected = support == Support::kHalfLine ? 1 : 2;
  if (ends.size() != expected) {
    throw ValidationError("countable support needs exactly " +
                          std::to_string(expected) + " end(s)");
  }
  bool plus = false;
  bool minus = false;
  for (const End& end : ends) {
    if (end.id.empty()) throw ValidationError("end id must be nonempty");
    (end.direction == Direction::kPlus ? plus : minus) = true;
  }
  if (support == Support::kHalfLine && !plus) {
    throw ValidationError("half-line end must point toward +inf");
  }
  if (support == Support::kIntegerLine && !(plus && minus)) {
    throw ValidationError("integer line needs one end per direction");
  }
  if (ends.size() == 2 && ends[0].id == ends[1].id) {
    throw ValidationError("end ids must be unique");
  }
  // Canonical order: +inf first.
  std::sort(ends.begin(), ends.end(), [](const End& a, const End& b) {
    return a.direction == Direction::kPlus && b.direction != Direction::kPlus;
  });
  StateSpace space;
  space.finite_ = false;
  space.support_ = support;
  space.ends_ = std::move(ends);
  return space;
}

bool StateSpace::Contains(State x) const {
  if (finite_) return x >= 0 && x < size_;
  return support_ == Support::kIntegerLine || x >= 0;
}

const End* StateSpace::FindEnd(std::string_view id) const {
  for (const End& end : ends_) {
    if (end.id == id) return &end;
  }
  return nullptr;
}

const End& StateSpace::GetEnd(std::string_view id) const {
  const End* end = FindEnd(id);
  if (end == nullptr) {
    throw DomainError("unknown end id '" + std::string(id) + "'");
  }
  return *end;
}

const End* StateSpace::EndInDirection(Direction direction) const {
  for (const End& end : ends_) {
    if (end.direction == direction) return &end;
  }
  return nullptr;
}

MeasurableSet::MeasurableSet(std::set<State> atoms, std::vector<Tail> tails,
                             bool complemented)
    : atoms_(std::move(atoms)),
      tails_(std::move(tails)),
      complemented_(complemented) {}

MeasurableSet MeasurableSet::Complement() const {
  return MeasurableSet(atoms_, tails_, !complemented_);
}

bool MeasurableSet::Contains(const StateSpace& space, State x) const {
  bool in = atoms_.count(x) > 0;
  for (const Tail& tail : tails_) {
    if (in) break;
    in = InTail(space.GetEnd(tail.end), tail.after, x);
  }
  return in != complemented_;
}

bool MeasurableSet::ContainsEnd(const StateSpace& space,
                                std::string_view end) const {
  space.GetEnd(end);
  bool in = false;
  for (const Tail& tail : tails_) {
    space.GetEnd(tail.end);
    if (tail.end == end) in = true;
  }
  return in != complemented_;
}

MeasurableSet MeasurableSet::Canonical(const StateSpace& space) const {
  std::map<std::string, State> widest;
  for (const Tail& tail : tails_) {
    const End& end = space.GetEnd(tail.end);
    auto [it, inserted] = widest.emplace(tail.end, tail.after);
    if (!inserted) {
      it->second = end.direction == Direction::kPlus
                       ? std::min(it->second, tail.after)
                       : std::max(it->second, tail.after);
    }
  }
  std::vector<Tail> tails;
  // Order tails like the space's ends.
  for (const End& end : space.ends()) {
    auto it = widest.find(end.id);
    if (it != widest.end()) tails.push_back({end.id, it->second});
  }
  std::set<State> atoms;
  for (State x : atoms_) {
    if (!space.Contains(x)) {
      throw DomainError("state " + std::to_string(x) +
                        " is outside the state space");
    }
    bool covered = false;
    for (const Tail& tail : tails) {
      covered = covered || InTail(space.GetEnd(tail.end), tail.after, x);
    }
    if (!covered) atoms.insert(x);
  }
  return MeasurableSet(std::move(atoms), std::move(tails), complemented_);
}

MeasurableSet AllStates(const StateSpace& space) {
  if (!space.is_finite()) {
    throw StructureError("AllStates needs a finite state space");
  }
  std::set<State> atoms;
  for (State x = 0; x < space.size(); ++x) atoms.insert(atoms.end(), x);
  return MeasurableSet::Atoms(std::move(atoms));
}

}  // namespace chargechain
