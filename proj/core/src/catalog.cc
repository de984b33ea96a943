#include "chargechain/catalog.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "chargechain/errors.h"

namespace chargechain {
namespace {

std::string PlusEnd() { return std::string(kPlusEndId); }
std::string MinusEnd() { return std::string(kMinusEndId); }

std::vector<CatalogEntry> MakeCatalog() {
  std::vector<CatalogEntry> entries;
  auto finite = [](std::string dim, std::string period) {
    return std::vector<ExpectedVerdict>{
        {"dimension", dim, "class structure"},
        {"ca_count", dim, "class structure"},
        {"pfa_count", "0", "finite space"},
        {"period", period, "class structure"},
        {"star", "holds", "finite space"},
        {"quasicompact", "consistent", "finite space"},
    };
  };
  auto countable = [](std::string ca, std::string pfa, bool star_holds) {
    return std::vector<ExpectedVerdict>{
        {"dimension", std::to_string(std::stoi(ca) + std::stoi(pfa)),
         "end analysis"},
        {"ca_count", ca, "closed form"},
        {"pfa_count", pfa, "end analysis"},
        {"period", "1", "artifact choice"},
        {"star", star_holds ? "holds" : "fails", "end analysis"},
        {"quasicompact", star_holds ? "consistent" : "inconsistent",
         "end analysis"},
    };
  };

  entries.push_back({"finite_uniform",
                     "n states, every row uniform",
                     true,
                     {{"n", 2, 1, 512, true, "number of states"}},
                     finite("1", "1")});
  entries.push_back({"swap2",
                     "two states exchanged at every step",
                     true,
                     {},
                     finite("1", "2")});
  entries.push_back({"cycle",
                     "deterministic rotation x -> x + 1 mod d",
                     true,
                     {{"d", 3, 2, 512, true, "cycle length"}},
                     finite("1", "3")});
  entries.push_back(
      {"birth_death",
       "states 0..n-1, up with p, down with q, held otherwise; blocked moves "
       "stay put",
       true,
       {{"n", 5, 2, 512, true, "number of states"},
        {"p", 0.4, 0, 1, false, "up probability"},
        {"q", 0.3, 0, 1, false, "down probability"}},
       finite("1", "1")});
  entries.push_back({"two_absorbing",
                     "absorbing 0 and 2, state 1 splits evenly",
                     true,
                     {},
                     finite("2", "1")});
  entries.push_back(
      {"grid_unit_interval",
       "grid i/N on [0,1]; halve the position with p, else step right "
       "(held at 1)",
       true,
       {{"N", 16, 1, 511, true, "grid resolution"},
        {"p", 0.5, 0, 1, false, "halving probability"}},
       finite("1", "1")});
  entries.push_back({"symmetric_walk_Z",
                     "simple symmetric walk on the integers",
                     false,
                     {},
                     countable("0", "2", false)});
  entries.push_back(
      {"drift_walk_N",
       "walk on 0, 1, 2, ... moving right with p_right, left otherwise "
       "(held at 0)",
       false,
       {{"p_right", 1.0, 0, 1, false, "probability of a right step"}},
       countable("0", "1", false)});
  entries.push_back(
      {"restart_walk",
       "walk on 0, 1, 2, ... moving right, restarting at 0 with alpha",
       false,
       {{"alpha", 0.1, 0, 1, false, "restart probability"}},
       countable("1", "0", true)});
  entries.push_back({"trap_or_escape",
                     "0 absorbing, every other state drifts right",
                     false,
                     {},
                     countable("1", "1", false)});
  entries.push_back(
      {"dyadic_unit_interval",
       "points 2^-k of (0,1]; halve with p, stay otherwise",
       false,
       {{"p", 0.5, 0, 1, false, "halving probability"}},
       countable("0", "1", false)});
  return entries;
}

double Get(const CatalogParams& params, std::string_view key) {
  return params.find(key)->second;
}

void RequirePositive(double value, std::string_view name) {
  if (!(value > 0.0)) {
    throw ValidationError("parameter '" + std::string(name) +
                          "' must be positive");
  }
}

TransitionKernel Build(const CatalogEntry& entry, const CatalogParams& p) {
  const std::string& name = entry.name;
  if (name == "finite_uniform") {
    const auto n = static_cast<Eigen::Index>(Get(p, "n"));
    return TransitionKernel::Finite(
        Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n)));
  }
  if (name == "swap2") {
    Eigen::MatrixXd m(2, 2);
    m << 0, 1, 1, 0;
    return TransitionKernel::Finite(m);
  }
  if (name == "cycle") {
    const auto d = static_cast<Eigen::Index>(Get(p, "d"));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) m(i, (i + 1) % d) = 1.0;
    return TransitionKernel::Finite(m);
  }
  if (name == "birth_death") {
    const auto n = static_cast<Eigen::Index>(Get(p, "n"));
    const double up = Get(p, "p");
    const double down = Get(p, "q");
    RequirePositive(up, "p");
    RequirePositive(down, "q");
    if (up + down > 1.0 + 1e-12) {
      throw ValidationError("parameters 'p' + 'q' must not exceed 1");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      m(i, std::min(i + 1, n - 1)) += up;
      m(i, std::max<Eigen::Index>(i - 1, 0)) += down;
      m(i, i) += std::max(0.0, 1.0 - up - down);
    }
    return TransitionKernel::Finite(m);
  }
  if (name == "two_absorbing") {
    Eigen::MatrixXd m(3, 3);
    m << 1, 0, 0, 0.5, 0, 0.5, 0, 0, 1;
    return TransitionKernel::Finite(m);
  }
  if (name == "grid_unit_interval") {
    const auto n = static_cast<Eigen::Index>(Get(p, "N"));
    const double half = Get(p, "p");
    RequirePositive(half, "p");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i <= n; ++i) {
      m(i, i / 2) += half;
      m(i, std::min(i + 1, n)) += 1.0 - half;
      labels.push_back(std::to_string(i) + "/" + std::to_string(n));
    }
    return TransitionKernel::Finite(m, std::move(labels));
  }
  if (name == "symmetric_walk_Z") {
    TailRow row;
    row.relative = {{-1, 0.5}, {1, 0.5}};
    return TransitionKernel::Countable(
        StateSpace::Countable(Support::kIntegerLine), {},
        {{PlusEnd(), row}, {MinusEnd(), row}});
  }
  if (name == "drift_walk_N") {
    const double right = Get(p, "p_right");
    RequirePositive(right, "p_right");
    TailRow row;
    row.relative = {{-1, 1.0 - right}, {1, right}};
    return TransitionKernel::Countable(
        StateSpace::Countable(Support::kHalfLine),
        {{0, {{0, 1.0 - right}, {1, right}}}}, {{PlusEnd(), row}});
  }
  if (name == "restart_walk") {
    const double alpha = Get(p, "alpha");
    RequirePositive(alpha, "alpha");
    TailRow row;
    row.relative = {{1, 1.0 - alpha}};
    row.to_finite = {{0, alpha}};
    return TransitionKernel::Countable(
        StateSpace::Countable(Support::kHalfLine), {}, {{PlusEnd(), row}});
  }
  if (name == "trap_or_escape") {
    TailRow row;
    row.relative = {{1, 1.0}};
    return TransitionKernel::Countable(
        StateSpace::Countable(Support::kHalfLine), {{0, {{0, 1.0}}}},
        {{PlusEnd(), row}});
  }
  if (name == "dyadic_unit_interval") {
    const double half = Get(p, "p");
    RequirePositive(half, "p");
    TailRow row;
    row.relative = {{0, 1.0 - half}, {1, half}};
    return TransitionKernel::Countable(
        StateSpace::Countable(Support::kHalfLine), {}, {{PlusEnd(), row}});
  }
  throw ValidationError("catalog entry '" + name + "' has no builder");
}

}  // namespace

const std::vector<CatalogEntry>& Catalog() {
  static const std::vector<CatalogEntry> entries = MakeCatalog();
  return entries;
}

const CatalogEntry& FindCatalogEntry(std::string_view name) {
  for (const CatalogEntry& entry : Catalog()) {
    if (entry.name == name) return entry;
  }
  throw ValidationError("unknown catalog entry '" + std::string(name) + "'");
}

CatalogParams ResolveCatalogParams(const CatalogEntry& entry,
                                   const CatalogParams& params) {
  CatalogParams resolved;
  for (const auto& [key, value] : params) {
    const auto it = std::find_if(entry.params.begin(), entry.params.end(),
                                 [&](const ParamSpec& s) { return s.name == key; });
    if (it == entry.params.end()) {
      throw ValidationError("catalog entry '" + entry.name +
                            "' has no parameter '" + key + "'");
    }
  }
  for (const ParamSpec& spec : entry.params) {
    const auto it = params.find(spec.name);
    const double value = it == params.end() ? spec.default_value : it->second;
    if (!std::isfinite(value) || value < spec.min || value > spec.max) {
      throw ValidationError("parameter '" + spec.name + "' of '" + entry.name +
                            "' must lie in [" + std::to_string(spec.min) +
                            ", " + std::to_string(spec.max) + "]");
    }
    if (spec.integer && value != std::floor(value)) {
      throw ValidationError("parameter '" + spec.name + "' of '" + entry.name +
                            "' must be an integer");
    }
    resolved[spec.name] = value;
  }
  return resolved;
}

TransitionKernel BuildCatalogChain(std::string_view name,
                                   const CatalogParams& params) {
  const CatalogEntry& entry = FindCatalogEntry(name);
  return Build(entry, ResolveCatalogParams(entry, params));
}

}  // namespace chargechain
