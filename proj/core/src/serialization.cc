#include "chargechain/serialization.h"

#include <charconv>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chargechain/errors.h"

namespace chargechain {
namespace {

[[noreturn]] void Fail(const std::string& path, const std::string& message) {
  throw ValidationError("field '" + path + "': " + message);
}

std::string Join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string Index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const Json& RequireObject(const Json& value, const std::string& path) {
  if (!value.is_object()) Fail(path, "expected an object");
  return value;
}

const Json& RequireArray(const Json& value, const std::string& path) {
  if (!value.is_array()) Fail(path, "expected an array");
  return value;
}

const Json& Field(const Json& object, std::string_view key,
                  const std::string& path) {
  RequireObject(object, path);
  const auto it = object.find(std::string(key));
  if (it == object.end()) Fail(Join(path, key), "missing");
  return *it;
}

const Json* OptionalField(const Json& object, std::string_view key,
                          const std::string& path) {
  RequireObject(object, path);
  const auto it = object.find(std::string(key));
  return it == object.end() ? nullptr : &*it;
}

double Number(const Json& value, const std::string& path) {
  if (!value.is_number()) Fail(path, "expected a number");
  return value.get<double>();
}

std::string String(const Json& value, const std::string& path) {
  if (!value.is_string()) Fail(path, "expected a string");
  return value.get<std::string>();
}

bool Bool(const Json& value, const std::string& path) {
  if (!value.is_boolean()) Fail(path, "expected true or false");
  return value.get<bool>();
}

std::int64_t Integer(const Json& value, const std::string& path) {
  if (!value.is_number_integer()) Fail(path, "expected an integer");
  return value.get<std::int64_t>();
}

std::int64_t ParseIntKey(std::string_view key, const std::string& path) {
  std::string_view digits = key;
  if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
  std::int64_t value = 0;
  const auto [end, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc() || end != digits.data() + digits.size()) {
    Fail(path, "key '" + std::string(key) + "' is not an integer");
  }
  return value;
}

std::string OffsetKey(std::int64_t d) {
  return d > 0 ? "+" + std::to_string(d) : std::to_string(d);
}

SparseRow RowFromJson(const Json& value, const std::string& path) {
  RequireObject(value, path);
  SparseRow row;
  for (const auto& [key, w] : value.items()) {
    const std::string at = Join(path, key);
    row[ParseIntKey(key, at)] = Number(w, at);
  }
  return row;
}

Json RowToJson(const SparseRow& row) {
  Json out = Json::object();
  for (const auto& [y, w] : row) out[std::to_string(y)] = w;
  return out;
}

bool DefaultEnds(const StateSpace& space) {
  const StateSpace reference = StateSpace::Countable(space.support());
  return reference.ends() == space.ends();
}

StateSpace SpaceFromJson(const Json& spec) {
  const std::string support = String(Field(spec, "support", ""), "support");
  Support s;
  if (support == "N") {
    s = Support::kHalfLine;
  } else if (support == "Z") {
    s = Support::kIntegerLine;
  } else {
    Fail("support", "expected \"N\" or \"Z\", got \"" + support + "\"");
  }
  const Json* ends = OptionalField(spec, "ends", "");
  if (ends == nullptr) return StateSpace::Countable(s);
  RequireArray(*ends, "ends");
  std::vector<End> list;
  for (std::size_t i = 0; i < ends->size(); ++i) {
    const std::string at = Index("ends", i);
    const Json& e = (*ends)[i];
    const std::string dir = String(Field(e, "direction", at), Join(at, "direction"));
    if (dir != "+" && dir != "-") Fail(Join(at, "direction"), "expected \"+\" or \"-\"");
    list.push_back({String(Field(e, "id", at), Join(at, "id")),
                    dir == "+" ? Direction::kPlus : Direction::kMinus});
  }
  return StateSpace::Countable(s, std::move(list));
}

}  // namespace

Json ParseJsonText(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    // e.byte is one past the offending character.
    const std::size_t stop = std::min<std::size_t>(
        e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ValidationError(std::string(what) + ": line " + std::to_string(line) +
                          ", column " + std::to_string(column) +
                          ": malformed JSON");
  }
}

TransitionKernel ChainFromJson(const Json& spec) {
  RequireObject(spec, "chain");
  const std::string kind = String(Field(spec, "kind", ""), "kind");
  if (kind == "finite") {
    const Json& rows = RequireArray(Field(spec, "matrix", ""), "matrix");
    const std::size_t n = rows.size();
    if (n == 0) Fail("matrix", "needs at least one row");
    Eigen::MatrixXd matrix(static_cast<Eigen::Index>(n),
                           static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const std::string at = Index("matrix", i);
      const Json& row = RequireArray(rows[i], at);
      if (row.size() != n) {
        Fail(at, "has " + std::to_string(row.size()) + " entries, expected " +
                     std::to_string(n));
      }
      for (std::size_t j = 0; j < n; ++j) {
        matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            Number(row[j], Index(at, j));
      }
    }
    std::vector<std::string> labels;
    if (const Json* l = OptionalField(spec, "labels", "")) {
      RequireArray(*l, "labels");
      for (std::size_t i = 0; i < l->size(); ++i) {
        labels.push_back(String((*l)[i], Index("labels", i)));
      }
    }
    return TransitionKernel::Finite(std::move(matrix), std::move(labels));
  }
  if (kind == "walk") {
    StateSpace space = SpaceFromJson(spec);
    std::map<State, SparseRow> exceptions;
    if (const Json* ex = OptionalField(spec, "exceptions", "")) {
      RequireObject(*ex, "exceptions");
      for (const auto& [key, row] : ex->items()) {
        const std::string at = Join("exceptions", key);
        exceptions[ParseIntKey(key, at)] = RowFromJson(row, at);
      }
    }
    std::map<std::string, TailRow> tails;
    for (const auto& [key, value] : spec.items()) {
      if (key.rfind("tail_", 0) == 0 && space.FindEnd(key.substr(5)) == nullptr) {
        Fail(key, "no end named '" + key.substr(5) + "'");
      }
    }
    for (const End& end : space.ends()) {
      const std::string at = "tail_" + end.id;
      const Json& tail = RequireObject(Field(spec, at, ""), at);
      TailRow row;
      for (const auto& [key, sub] : tail.items()) {
        if (key != "relative" && key != "to_finite" && key != "to_other_end") {
          Fail(Join(at, key), "unknown field");
        }
      }
      if (const Json* rel = OptionalField(tail, "relative", at)) {
        for (const auto& [d, w] : RequireObject(*rel, Join(at, "relative")).items()) {
          const std::string p = Join(Join(at, "relative"), d);
          row.relative[ParseIntKey(d, p)] = Number(w, p);
        }
      }
      if (const Json* fin = OptionalField(tail, "to_finite", at)) {
        row.to_finite = RowFromJson(*fin, Join(at, "to_finite"));
      }
      if (const Json* other = OptionalField(tail, "to_other_end", at)) {
        for (const auto& [e, w] :
             RequireObject(*other, Join(at, "to_other_end")).items()) {
          row.to_other_end[e] = Number(w, Join(Join(at, "to_other_end"), e));
        }
      }
      tails[end.id] = std::move(row);
    }
    return TransitionKernel::Countable(std::move(space), std::move(exceptions),
                                       std::move(tails));
  }
  Fail("kind", "expected \"finite\" or \"walk\", got \"" + kind + "\"");
}

TransitionKernel ParseChainSpec(std::string_view text) {
  return ChainFromJson(ParseJsonText(text, "chain spec"));
}

Json ChainToJson(const TransitionKernel& kernel) {
  Json out;
  const StateSpace& space = kernel.space();
  if (kernel.is_finite()) {
    out["kind"] = "finite";
    const Eigen::MatrixXd& m = kernel.matrix();
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      Json row = Json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    out["matrix"] = std::move(rows);
    if (!space.labels().empty()) out["labels"] = space.labels();
    return out;
  }
  out["kind"] = "walk";
  out["support"] = space.support() == Support::kHalfLine ? "N" : "Z";
  if (!DefaultEnds(space)) {
    Json ends = Json::array();
    for (const End& e : space.ends()) {
      ends.push_back({{"id", e.id},
                      {"direction", e.direction == Direction::kPlus ? "+" : "-"}});
    }
    out["ends"] = std::move(ends);
  }
  Json exceptions = Json::object();
  for (const auto& [x, row] : kernel.exceptions()) {
    exceptions[std::to_string(x)] = RowToJson(row);
  }
  out["exceptions"] = std::move(exceptions);
  for (const auto& [id, tail] : kernel.tails()) {
    Json relative = Json::object();
    for (const auto& [d, w] : tail.relative) relative[OffsetKey(d)] = w;
    Json other = Json::object();
    for (const auto& [e, w] : tail.to_other_end) other[e] = w;
    out["tail_" + id] = {{"relative", std::move(relative)},
                         {"to_finite", RowToJson(tail.to_finite)},
                         {"to_other_end", std::move(other)}};
  }
  return out;
}

std::string DumpJson(const Json& value) { return value.dump(2) + "\n"; }

Json MeasureToJson(const FAMeasure& mu) {
  Json atoms = Json::object();
  for (const auto& [x, w] : mu.atoms()) atoms[std::to_string(x)] = w;
  Json ends = Json::object();
  for (const auto& [id, w] : mu.ends()) ends[id] = w;
  return {{"atoms", std::move(atoms)}, {"ends", std::move(ends)}};
}

FAMeasure MeasureFromJson(const StateSpace& space, const Json& value) {
  RequireObject(value, "measure");
  AtomWeights atoms;
  EndWeights ends;
  if (const Json* a = OptionalField(value, "atoms", "measure")) {
    for (const auto& [key, w] : RequireObject(*a, "measure.atoms").items()) {
      const std::string at = Join("measure.atoms", key);
      atoms[ParseIntKey(key, at)] = Number(w, at);
    }
  }
  if (const Json* e = OptionalField(value, "ends", "measure")) {
    for (const auto& [id, w] : RequireObject(*e, "measure.ends").items()) {
      ends[id] = Number(w, Join("measure.ends", id));
    }
  }
  return FAMeasure(space, std::move(atoms), std::move(ends));
}

Json SetToJson(const MeasurableSet& set) {
  Json tails = Json::array();
  for (const Tail& t : set.tails()) {
    tails.push_back({{"end", t.end}, {"after", t.after}});
  }
  return {{"atoms", set.atoms()},
          {"tails", std::move(tails)},
          {"complement", set.complemented()}};
}

MeasurableSet SetFromJson(const StateSpace& space, const Json& value) {
  RequireObject(value, "set");
  std::set<State> atoms;
  std::vector<Tail> tails;
  bool complement = false;
  if (const Json* a = OptionalField(value, "atoms", "set")) {
    RequireArray(*a, "set.atoms");
    for (std::size_t i = 0; i < a->size(); ++i) {
      atoms.insert(Integer((*a)[i], Index("set.atoms", i)));
    }
  }
  if (const Json* t = OptionalField(value, "tails", "set")) {
    RequireArray(*t, "set.tails");
    for (std::size_t i = 0; i < t->size(); ++i) {
      const std::string at = Index("set.tails", i);
      tails.push_back({String(Field((*t)[i], "end", at), Join(at, "end")),
                       Integer(Field((*t)[i], "after", at), Join(at, "after"))});
    }
  }
  if (const Json* c = OptionalField(value, "complement", "set")) {
    complement = Bool(*c, "set.complement");
  }
  MeasurableSet set(std::move(atoms), std::move(tails), complement);
  for (State x : set.atoms()) {
    if (!space.Contains(x)) Fail("set.atoms", "state " + std::to_string(x) + " outside the space");
  }
  for (const Tail& tail : set.tails()) {
    if (space.is_finite() || space.FindEnd(tail.end) == nullptr) {
      Fail("set.tails", "unknown end '" + tail.end + "'");
    }
  }
  return set;
}

Json CertificateToJson(const SingularityCertificate& certificate) {
  return {{"first", certificate.first},
          {"second", certificate.second},
          {"first_set", SetToJson(certificate.first_set)},
          {"second_set", SetToJson(certificate.second_set)}};
}

SingularityCertificate CertificateFromJson(const StateSpace& space,
                                           const Json& value) {
  SingularityCertificate c;
  c.first = static_cast<std::size_t>(Integer(Field(value, "first", "certificate"),
                                             "certificate.first"));
  c.second = static_cast<std::size_t>(Integer(Field(value, "second", "certificate"),
                                              "certificate.second"));
  c.first_set = SetFromJson(space, Field(value, "first_set", "certificate"));
  c.second_set = SetFromJson(space, Field(value, "second_set", "certificate"));
  return c;
}

Json BasisToJson(const InvariantBasis& basis) {
  Json measures = Json::array();
  for (std::size_t i = 0; i < basis.measures.size(); ++i) {
    measures.push_back(
        {{"kind", basis.kinds[i] == InvariantKind::kCountablyAdditive ? "ca" : "pfa"},
         {"period", basis.periods[i]},
         {"measure", MeasureToJson(basis.measures[i])}});
  }
  Json pairwise = Json::array();
  for (const SingularityCertificate& c : basis.pairwise) {
    pairwise.push_back(CertificateToJson(c));
  }
  return {{"dimension", basis.dimension()},
          {"ca_count", basis.ca_count()},
          {"pfa_count", basis.pfa_count()},
          {"conclusive", basis.conclusive},
          {"within_representable_class", basis.within_representable_class},
          {"measures", std::move(measures)},
          {"pairwise", std::move(pairwise)}};
}

InvariantBasis BasisFromJson(const StateSpace& space, const Json& value) {
  InvariantBasis basis;
  const Json& measures = RequireArray(Field(value, "measures", "basis"), "basis.measures");
  for (std::size_t i = 0; i < measures.size(); ++i) {
    const std::string at = Index("basis.measures", i);
    const std::string kind = String(Field(measures[i], "kind", at), Join(at, "kind"));
    if (kind != "ca" && kind != "pfa") Fail(Join(at, "kind"), "expected \"ca\" or \"pfa\"");
    basis.kinds.push_back(kind == "ca" ? InvariantKind::kCountablyAdditive
                                       : InvariantKind::kPurelyFinitelyAdditive);
    basis.periods.push_back(
        static_cast<int>(Integer(Field(measures[i], "period", at), Join(at, "period"))));
    basis.measures.push_back(MeasureFromJson(space, Field(measures[i], "measure", at)));
  }
  const Json& pairwise = RequireArray(Field(value, "pairwise", "basis"), "basis.pairwise");
  for (const Json& c : pairwise) basis.pairwise.push_back(CertificateFromJson(space, c));
  basis.conclusive = Bool(Field(value, "conclusive", "basis"), "basis.conclusive");
  basis.within_representable_class =
      Bool(Field(value, "within_representable_class", "basis"),
           "basis.within_representable_class");
  return basis;
}

Json WitnessToJson(const DoeblinWitness& witness) {
  return {{"phi", MeasureToJson(witness.phi)},
          {"epsilon", witness.epsilon},
          {"k", witness.k},
          {"vacuous", witness.vacuous},
          {"variant", witness.variant == DoeblinVariant::kPower ? "power" : "cesaro"}};
}

DoeblinWitness WitnessFromJson(const StateSpace& space, const Json& value) {
  RequireObject(value, "witness");
  const std::string variant = String(Field(value, "variant", "witness"), "witness.variant");
  if (variant != "power" && variant != "cesaro") {
    Fail("witness.variant", "expected \"power\" or \"cesaro\"");
  }
  DoeblinWitness w{MeasureFromJson(space, Field(value, "phi", "witness")),
                   Number(Field(value, "epsilon", "witness"), "witness.epsilon"),
                   static_cast<int>(Integer(Field(value, "k", "witness"), "witness.k")),
                   Bool(Field(value, "vacuous", "witness"), "witness.vacuous"),
                   variant == "power" ? DoeblinVariant::kPower : DoeblinVariant::kCesaro};
  return w;
}

Json ExtremumToJson(const DoeblinExtremum& extremum) {
  return {{"set", SetToJson(extremum.set)},
          {"x", extremum.x},
          {"probability", extremum.probability}};
}

}  // namespace chargechain
