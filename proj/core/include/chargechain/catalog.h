#ifndef CHARGECHAIN_CATALOG_H_
#define CHARGECHAIN_CATALOG_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "chargechain/kernel.h"

namespace chargechain {

using CatalogParams = std::map<std::string, double, std::less<>>;

struct ParamSpec {
  std::string name;
  double default_value = 0.0;
  double min = 0.0;  // inclusive
  double max = 0.0;  // inclusive
  bool integer = false;
  std::string description;
};

// Verdict keys: dimension, ca_count, pfa_count, period, star, quasicompact.
// `source` says where the value comes from: "closed form", "class
// structure", "end analysis" or "artifact choice".
struct ExpectedVerdict {
  std::string condition;
  std::string verdict;
  std::string source;
};

struct CatalogEntry {
  std::string name;
  std::string description;
  bool finite = true;
  std::vector<ParamSpec> params;
  // At default parameters.
  std::vector<ExpectedVerdict> expected;
};

const std::vector<CatalogEntry>& Catalog();

// ValidationError for unknown names.
const CatalogEntry& FindCatalogEntry(std::string_view name);

// Defaults filled in; unknown keys, non-integers for integer parameters and
// out-of-range values raise ValidationError.
CatalogParams ResolveCatalogParams(const CatalogEntry& entry,
                                   const CatalogParams& params);

TransitionKernel BuildCatalogChain(std::string_view name,
                                   const CatalogParams& params = {});

}  // namespace chargechain

#endif  // CHARGECHAIN_CATALOG_H_
