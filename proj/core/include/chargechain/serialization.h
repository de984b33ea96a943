#ifndef CHARGECHAIN_SERIALIZATION_H_
#define CHARGECHAIN_SERIALIZATION_H_

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "chargechain/conditions.h"
#include "chargechain/invariant.h"
#include "chargechain/kernel.h"
#include "chargechain/measure.h"

namespace chargechain {

using Json = nlohmann::json;

// Chain spec layouts:
//   {"kind": "finite", "matrix": [[...], ...], "labels": [...]}
//   {"kind": "walk", "support": "N" | "Z",
//    "exceptions": {"0": {"1": 1.0}},
//    "tail_+inf": {"relative": {"-1": 0.5, "+1": 0.5},
//                  "to_finite": {"0": 0.1},
//                  "to_other_end": {"-inf": 0.2}},
//    "ends": [{"id": "+inf", "direction": "+"}]}   (optional)
// Measures: {"atoms": {"0": 0.3}, "ends": {"+inf": 0.7}}.
// Sets: {"atoms": [0], "tails": [{"end": "+inf", "after": 5}],
//        "complement": false}.

// Syntax errors become ValidationError naming line and column.
Json ParseJsonText(std::string_view text, std::string_view what = "input");

// Field errors name the offending path, e.g. "matrix[1]".
TransitionKernel ChainFromJson(const Json& spec);
TransitionKernel ParseChainSpec(std::string_view text);
Json ChainToJson(const TransitionKernel& kernel);

// Two-space indentation, sorted keys, trailing newline.
std::string DumpJson(const Json& value);

Json MeasureToJson(const FAMeasure& mu);
FAMeasure MeasureFromJson(const StateSpace& space, const Json& value);

Json SetToJson(const MeasurableSet& set);
MeasurableSet SetFromJson(const StateSpace& space, const Json& value);

Json CertificateToJson(const SingularityCertificate& certificate);
SingularityCertificate CertificateFromJson(const StateSpace& space,
                                           const Json& value);

Json BasisToJson(const InvariantBasis& basis);
InvariantBasis BasisFromJson(const StateSpace& space, const Json& value);

Json WitnessToJson(const DoeblinWitness& witness);
DoeblinWitness WitnessFromJson(const StateSpace& space, const Json& value);

Json ExtremumToJson(const DoeblinExtremum& extremum);

}  // namespace chargechain

#endif  // CHARGECHAIN_SERIALIZATION_H_
