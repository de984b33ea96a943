#include "chargechain_cli/report.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chargechain/errors.h"

namespace chargechain::cli {
namespace {

constexpr double kVerifyTolerance = 1e-10;

Json StarToJson(const StarVerdict& verdict) {
  Json evidence = Json::array();
  for (const FAMeasure& mu : verdict.evidence) evidence.push_back(MeasureToJson(mu));
  return {{"holds", verdict.holds},
          {"within_representable_class", verdict.within_representable_class},
          {"evidence", std::move(evidence)}};
}

Json SurrogateToJson(const SurrogateTrend& trend) {
  Json points = Json::array();
  for (const SurrogatePoint& p : trend.points) {
    points.push_back({{"window", p.window},
                      {"max_probability", p.check.extremum.probability},
                      {"x", p.check.extremum.x},
                      {"set", SetToJson(p.check.extremum.set)},
                      {"vacuous", p.check.vacuous},
                      {"holds", p.check.holds}});
  }
  return {{"epsilon", trend.epsilon},
          {"k", trend.k},
          {"points", std::move(points)},
          {"nondecreasing", trend.nondecreasing},
          {"fails_in_limit", trend.fails_in_limit}};
}

ConditionOptions ToConditionOptions(const AnalysisOptions& options) {
  ConditionOptions c;
  c.k_max = options.k_max;
  c.epsilon_grid = options.epsilon_grid;
  c.surrogate_windows = options.windows;
  return c;
}

Eigen::MatrixXd ProjectorFromJson(const StateSpace& space, const Json& rows) {
  const auto n = static_cast<Eigen::Index>(space.size());
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) {
    throw ValidationError("field 'ergodic.projector': expected one row per state");
  }
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    const FAMeasure row = MeasureFromJson(space, rows[static_cast<std::size_t>(x)]);
    for (const auto& [y, w] : row.atoms()) pi(x, y) = w;
  }
  return pi;
}

std::string Format(double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

}  // namespace

std::string ToString(Task task) {
  switch (task) {
    case Task::kInvariants:
      return "invariants";
    case Task::kConditions:
      return "conditions";
    case Task::kDoeblinSearch:
      return "doeblin-search";
    case Task::kErgodic:
      return "ergodic";
    case Task::kEscape:
      return "escape";
  }
  return "invariants";
}

std::set<Task> ParseTasks(const std::vector<std::string>& names) {
  const std::vector<Task> all = {Task::kInvariants, Task::kConditions,
                                 Task::kDoeblinSearch, Task::kErgodic,
                                 Task::kEscape};
  std::set<Task> tasks;
  for (const std::string& name : names) {
    if (name == "all") {
      tasks.insert(all.begin(), all.end());
      continue;
    }
    const auto it = std::find_if(all.begin(), all.end(),
                                 [&](Task t) { return ToString(t) == name; });
    if (it == all.end()) throw ValidationError("unknown task '" + name + "'");
    tasks.insert(*it);
  }
  if (tasks.empty()) throw ValidationError("task list is empty");
  return tasks;
}

void ValidateOptions(const AnalysisOptions& options) {
  if (options.tasks.empty()) throw ValidationError("task list is empty");
  if (options.n_max < 1 || options.n_max > 1000000) {
    throw ValidationError("--n-max must lie in [1, 1000000]");
  }
  if (options.k_max < 1 || options.k_max > 64) {
    throw ValidationError("--k-max must lie in [1, 64]");
  }
  if (options.epsilon_grid.empty()) throw ValidationError("--eps-grid is empty");
  for (double eps : options.epsilon_grid) {
    if (!std::isfinite(eps) || eps <= 0.0 || eps > 1.0) {
      throw ValidationError("--eps-grid value " + Format(eps) + " outside (0, 1]");
    }
  }
  if (options.windows.empty()) throw ValidationError("--windows is empty");
  for (State w : options.windows) {
    if (w < 1 || w > 2048) throw ValidationError("--windows entries must lie in [1, 2048]");
  }
}

Json ConditionReportToJson(const ConditionReport& report) {
  Json alpha = Json::array();
  for (const AlphaEntry& entry : report.alpha) {
    alpha.push_back({{"measure", entry.measure},
                     {"k_mu", SetToJson(entry.k_mu)},
                     {"k", entry.k ? SetToJson(*entry.k) : Json(nullptr)}});
  }
  Json witnesses = Json::array();
  for (const SingularityCertificate& c : report.beta.witnesses) {
    witnesses.push_back(CertificateToJson(c));
  }
  Json out = {
      {"star", StarToJson(report.star)},
      {"star_tilde", StarToJson(report.star_tilde)},
      {"double_star",
       {{"holds", report.double_star.holds},
        {"dimension", report.double_star.dimension},
        {"ca_count", report.double_star.ca_count},
        {"pfa_count", report.double_star.pfa_count},
        {"within_representable_class",
         report.double_star.within_representable_class}}},
      {"alpha", std::move(alpha)},
      {"beta", {{"holds", report.beta.holds}, {"witnesses", std::move(witnesses)}}},
      {"quasicompact_diagnostic", ToString(report.quasicompact)},
      {"quasicompact_reason", report.quasicompact_reason},
  };
  if (report.surrogate) out["surrogate"] = SurrogateToJson(*report.surrogate);
  return out;
}

Json DoeblinSearchToJson(const DoeblinSearchResult& result) {
  return {{"witness", result.witness ? WitnessToJson(*result.witness) : Json(nullptr)},
          {"rejected", result.rejected ? WitnessToJson(*result.rejected) : Json(nullptr)},
          {"counterexample", result.rejected_counterexample
                                 ? ExtremumToJson(*result.rejected_counterexample)
                                 : Json(nullptr)},
          {"candidates_checked", result.candidates_checked}};
}

Json RateFitToJson(const RateFit& fit) {
  Json out = {{"kind", ToString(fit.kind)}};
  if (fit.kind == RateKind::kFiniteExact) {
    out["first_zero"] = fit.first_zero;
    return out;
  }
  out["rho"] = fit.rho;
  out["rho_low"] = fit.rho_low;
  out["rho_high"] = fit.rho_high;
  out["fitted_from"] = fit.fitted_from;
  out["fitted_to"] = fit.fitted_to;
  return out;
}

Json ErgodicToJson(const ErgodicReport& report) {
  Json projector = Json::array();
  for (const FAMeasure& row : report.projector.rows) {
    projector.push_back(MeasureToJson(row));
  }
  Json series = Json::array();
  for (std::size_t i = 0; i < report.cesaro.distances.size(); ++i) {
    series.push_back({{"n", i + 1},
                      {"cesaro_distance", report.cesaro.distances[i]},
                      {"raw_distance", report.raw.distances[i]}});
  }
  const auto& raw = report.raw.distances;
  return {{"rank", report.projector.rank},
          {"projector", std::move(projector)},
          {"residuals",
           {{"idempotence", report.residuals.idempotence},
            {"left", report.residuals.left},
            {"right", report.residuals.right}}},
          {"uniform", report.cesaro.uniform},
          {"cesaro",
           {{"rate", RateFitToJson(report.cesaro.rate)},
            {"envelope_constant", report.envelope.constant},
            {"envelope_holds", report.envelope.holds},
            {"final_distance", report.cesaro.distances.back()}}},
          {"raw",
           {{"rate", RateFitToJson(report.raw.rate)},
            {"final_distance", raw.back()},
            {"min_distance", *std::min_element(raw.begin(), raw.end())}}},
          {"series", std::move(series)}};
}

Json EscapeToJson(const EscapeProfile& profile, int n_max) {
  Json windows = Json::array();
  for (const EscapeWindow& w : profile.windows) {
    windows.push_back({{"size", w.size}, {"masses", w.masses}});
  }
  Json mass = Json::object();
  for (const auto& [id, m] : profile.per_end_mass) mass[id] = m;
  Json split = Json::object();
  for (const auto& [id, m] : profile.per_end_split) split[id] = m;
  return {{"n_max", n_max},
          {"initial", "dirac at 0"},
          {"windows", std::move(windows)},
          {"pfa_mass_estimate", profile.pfa_mass_estimate},
          {"per_end_mass", std::move(mass)},
          {"per_end_split", std::move(split)}};
}

Json BuildReport(const TransitionKernel& kernel, const ChainSource& source,
                 const AnalysisOptions& options) {
  ValidateOptions(options);
  const auto wants = [&](Task t) { return options.tasks.count(t) > 0; };
  Json report;
  report["schema"] = kReportSchema;
  report["chain"] = ChainToJson(kernel);
  if (source.catalog) {
    Json params = Json::object();
    for (const auto& [k, v] : source.params) params[k] = v;
    report["source"] = {{"catalog", *source.catalog}, {"params", std::move(params)}};
  }
  Json tasks = Json::array();
  for (Task t : options.tasks) tasks.push_back(ToString(t));
  report["tasks"] = std::move(tasks);
  report["options"] = {{"n_max", options.n_max},
                       {"k_max", options.k_max},
                       {"epsilon_grid", options.epsilon_grid},
                       {"windows", options.windows}};

  const InvariantBasis basis = ComputeInvariantBasis(kernel);
  if (wants(Task::kInvariants)) {
    Json inv = BasisToJson(basis);
    if (kernel.is_finite()) {
      Json classes = Json::array();
      for (std::size_t i = 0; i < basis.measures.size(); ++i) {
        const InvariantClassification c = ClassifyInvariant(kernel, basis.measures[i]);
        classes.push_back({{"measure", i}, {"composite", c.composite}, {"period", c.period}});
      }
      inv["classification"] = std::move(classes);
    }
    report["invariants"] = std::move(inv);
  }

  if (wants(Task::kConditions) || wants(Task::kDoeblinSearch)) {
    const ConditionReport conditions =
        BuildConditionReport(kernel, basis, ToConditionOptions(options));
    if (wants(Task::kConditions)) {
      report["conditions"] = ConditionReportToJson(conditions);
    }
    if (wants(Task::kDoeblinSearch)) {
      if (conditions.doeblin && conditions.doeblin_tilde) {
        report["doeblin_search"] = {{"power", DoeblinSearchToJson(*conditions.doeblin)},
                                    {"cesaro", DoeblinSearchToJson(*conditions.doeblin_tilde)}};
      } else if (kernel.is_finite()) {
        report["doeblin_search"] = {
            {"skipped", "more than " + std::to_string(kDoeblinMaxStates) + " states"}};
      } else {
        report["doeblin_search"] = {
            {"skipped", "countable chain; see conditions.surrogate"}};
      }
    }
  }

  if (wants(Task::kErgodic)) {
    if (kernel.is_finite()) {
      report["ergodic"] = ErgodicToJson(RunErgodic(kernel, options.n_max));
    } else {
      report["ergodic"] = {{"skipped", "countable chain; see escape"}};
    }
  }
  if (wants(Task::kEscape)) {
    if (kernel.is_finite()) {
      report["escape"] = {{"skipped", "finite chain"}};
    } else {
      const EscapeProfile profile =
          ComputeEscapeProfile(kernel, FAMeasure::Dirac(kernel.space(), 0),
                               options.n_max, options.windows);
      report["escape"] = EscapeToJson(profile, options.n_max);
    }
  }
  return report;
}

std::string ErgodicCsv(const ErgodicReport& report) {
  std::string out = "n,cesaro_distance,raw_distance\n";
  for (std::size_t i = 0; i < report.cesaro.distances.size(); ++i) {
    out += std::to_string(i + 1) + "," + Format(report.cesaro.distances[i]) +
           "," + Format(report.raw.distances[i]) + "\n";
  }
  return out;
}

std::string EscapeCsv(const EscapeProfile& profile) {
  std::string out = "n,window,mass\n";
  for (const EscapeWindow& w : profile.windows) {
    for (std::size_t i = 0; i < w.masses.size(); ++i) {
      out += std::to_string(i + 1) + "," + std::to_string(w.size) + "," +
             Format(w.masses[i]) + "\n";
    }
  }
  return out;
}

std::vector<VerificationLine> VerifyReport(const Json& report) {
  std::vector<VerificationLine> lines;
  auto add = [&](std::string check, bool ok, std::string detail = {}) {
    lines.push_back({std::move(check), ok, std::move(detail)});
  };
  if (!report.is_object() || !report.contains("schema") ||
      report["schema"] != kReportSchema) {
    throw ValidationError("field 'schema': expected 1");
  }
  if (!report.contains("chain")) throw ValidationError("field 'chain': missing");
  const TransitionKernel kernel = ChainFromJson(report["chain"]);
  const StateSpace& space = kernel.space();

  const InvariantBasis basis = report.contains("invariants")
                                   ? BasisFromJson(space, report["invariants"])
                                   : ComputeInvariantBasis(kernel);
  if (report.contains("invariants")) {
    for (std::size_t i = 0; i < basis.measures.size(); ++i) {
      const double r = InvarianceResidual(kernel, basis.measures[i]);
      add("invariance[" + std::to_string(i) + "]", r <= kVerifyTolerance,
          "residual " + Format(r));
    }
    for (const SingularityCertificate& c : basis.pairwise) {
      add("singularity[" + std::to_string(c.first) + "," + std::to_string(c.second) + "]",
          VerifySingularityCertificate(basis, c));
    }
  }

  if (report.contains("conditions")) {
    const Json& cond = report["conditions"];
    for (const char* key : {"star", "star_tilde"}) {
      const Json& verdict = cond.at(key);
      std::size_t i = 0;
      for (const Json& e : verdict.at("evidence")) {
        const FAMeasure mu = MeasureFromJson(space, e);
        const double r = InvarianceResidual(kernel, mu);
        add(std::string(key) + ".evidence[" + std::to_string(i++) + "]",
            mu.IsPurelyFinitelyAdditive() && r <= kVerifyTolerance,
            "residual " + Format(r));
      }
    }
    for (const Json& entry : cond.at("alpha")) {
      const auto m = entry.at("measure").get<std::size_t>();
      const std::string name = "alpha[" + std::to_string(m) + "]";
      if (entry.at("k").is_null() || m >= basis.measures.size()) {
        add(name, false, "no closed set reported");
        continue;
      }
      const MeasurableSet k = SetFromJson(space, entry.at("k"));
      const FAMeasure& mu = basis.measures[m];
      const bool full = std::abs(Evaluate(mu, k) - mu.Total()) <= kVerifyTolerance;
      add(name, IsStochasticallyClosed(kernel, k) && full);
    }
    std::size_t i = 0;
    for (const Json& w : cond.at("beta").at("witnesses")) {
      add("beta.witness[" + std::to_string(i++) + "]",
          VerifySingularityCertificate(basis, CertificateFromJson(space, w)));
    }
    if (cond.contains("surrogate")) {
      const Json& s = cond["surrogate"];
      std::vector<State> windows;
      std::vector<double> values;
      for (const Json& p : s.at("points")) {
        windows.push_back(p.at("window").get<State>());
        values.push_back(p.at("max_probability").get<double>());
      }
      const SurrogateTrend trend = TruncatedDoeblinSurrogate(
          kernel, windows, s.at("epsilon").get<double>(), s.at("k").get<int>());
      bool same = trend.points.size() == values.size();
      for (std::size_t j = 0; same && j < values.size(); ++j) {
        same = std::abs(trend.points[j].check.extremum.probability - values[j]) <= 1e-12;
      }
      add("surrogate", same);
    }
  }

  if (report.contains("doeblin_search") && !report["doeblin_search"].contains("skipped")) {
    for (const char* variant : {"power", "cesaro"}) {
      const Json& search = report["doeblin_search"].at(variant);
      const std::string name = std::string("doeblin.") + variant;
      if (!search.at("witness").is_null()) {
        const DoeblinWitness w = WitnessFromJson(space, search["witness"]);
        add(name + ".witness", VerifyDoeblinWitness(kernel, w));
      }
      if (!search.at("counterexample").is_null()) {
        const DoeblinWitness w = WitnessFromJson(space, search["rejected"]);
        const Json& ce = search["counterexample"];
        const MeasurableSet e = SetFromJson(space, ce.at("set"));
        const State x = ce.at("x").get<State>();
        const double reported = ce.at("probability").get<double>();
        const TransitionKernel q = w.variant == DoeblinVariant::kPower
                                       ? KernelPower(kernel, w.k)
                                       : CesaroKernel(kernel, w.k);
        const double p = q.Probability(x, e);
        const double phi_e = Evaluate(w.phi, e);
        const bool admissible = w.variant == DoeblinVariant::kPower
                                    ? phi_e <= w.epsilon + kDoeblinTolerance
                                    : phi_e < w.epsilon - kDoeblinTolerance;
        add(name + ".counterexample",
            admissible && std::abs(p - reported) <= 1e-12 &&
                p > 1.0 - w.epsilon + kDoeblinTolerance,
            "p = " + Format(p));
      }
    }
  }

  if (report.contains("ergodic") && !report["ergodic"].contains("skipped")) {
    Projector projector;
    projector.matrix = ProjectorFromJson(space, report["ergodic"].at("projector"));
    const ProjectorResiduals r = CheckProjector(kernel, projector);
    const double worst = std::max({r.idempotence, r.left, r.right});
    add("projector", worst <= kVerifyTolerance, "residual " + Format(worst));
  }
  return lines;
}

}  // namespace chargechain::cli
