#ifndef CHARGECHAIN_CLI_REPORT_H_
#define CHARGECHAIN_CLI_REPORT_H_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chargechain/catalog.h"
#include "chargechain/conditions.h"
#include "chargechain/ergodic.h"
#include "chargechain/invariant.h"
#include "chargechain/kernel.h"
#include "chargechain/serialization.h"

namespace chargechain::cli {

inline constexpr int kReportSchema = 1;

enum class Task { kInvariants, kConditions, kDoeblinSearch, kErgodic, kEscape };

std::string ToString(Task task);
// ValidationError for unknown names; "all" expands to every task.
std::set<Task> ParseTasks(const std::vector<std::string>& names);

struct AnalysisOptions {
  std::set<Task> tasks = {Task::kInvariants, Task::kConditions,
                          Task::kDoeblinSearch, Task::kErgodic, Task::kEscape};
  int n_max = 500;
  int k_max = 6;
  std::vector<double> epsilon_grid = DefaultEpsilonGrid();
  std::vector<State> windows = {8, 16, 32, 64};
};

// Throws ValidationError for non-positive horizons, empty task sets and bad
// window lists.
void ValidateOptions(const AnalysisOptions& options);

// Where the chain came from; only catalog provenance enters the report.
struct ChainSource {
  std::optional<std::string> catalog;
  CatalogParams params;
};

Json ConditionReportToJson(const ConditionReport& report);
Json DoeblinSearchToJson(const DoeblinSearchResult& result);
Json RateFitToJson(const RateFit& fit);
Json ErgodicToJson(const ErgodicReport& report);
Json EscapeToJson(const EscapeProfile& profile, int n_max);

Json BuildReport(const TransitionKernel& kernel, const ChainSource& source,
                 const AnalysisOptions& options);

// Header "n,cesaro_distance,raw_distance".
std::string ErgodicCsv(const ErgodicReport& report);
// Header "n,window,mass".
std::string EscapeCsv(const EscapeProfile& profile);

struct VerificationLine {
  std::string check;
  bool ok = false;
  std::string detail;
};

// Re-runs every embedded witness through its checker.
std::vector<VerificationLine> VerifyReport(const Json& report);

}  // namespace chargechain::cli

#endif  // CHARGECHAIN_CLI_REPORT_H_
