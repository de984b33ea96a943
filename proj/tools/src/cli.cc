#include "chargechain_cli/cli.h"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "chargechain/errors.h"
#include "chargechain_cli/report.h"

namespace chargechain::cli {
namespace {

struct ChainArgs {
  std::string chain_file;
  std::string catalog;
  std::vector<std::string> params;
};

void AddChainOptions(CLI::App* sub, ChainArgs& args) {
  sub->add_option("--chain", args.chain_file, "Chain spec JSON file");
  sub->add_option("--catalog", args.catalog, "Catalog entry name");
  sub->add_option("--param", args.params, "Catalog parameter key=value (repeatable)");
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

double ParseDouble(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    throw ValidationError(std::string(what) + ": '" + std::string(text) +
                          "' is not a number");
  }
  return value;
}

State ParseState(std::string_view text, std::string_view what) {
  State value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    throw ValidationError(std::string(what) + ": '" + std::string(text) +
                          "' is not an integer");
  }
  return value;
}

std::vector<std::string> SplitComma(const std::string& text) {
  std::vector<std::string> parts;
  std::string current;
  std::istringstream in(text);
  while (std::getline(in, current, ',')) parts.push_back(current);
  return parts;
}

std::vector<double> ParseDoubleList(const std::string& text, std::string_view what) {
  std::vector<double> values;
  for (const std::string& part : SplitComma(text)) values.push_back(ParseDouble(part, what));
  return values;
}

std::vector<State> ParseStateList(const std::string& text, std::string_view what) {
  std::vector<State> values;
  for (const std::string& part : SplitComma(text)) values.push_back(ParseState(part, what));
  return values;
}

TransitionKernel LoadChain(const ChainArgs& args, ChainSource& source) {
  if (args.chain_file.empty() == args.catalog.empty()) {
    throw ValidationError("give exactly one of --chain and --catalog");
  }
  if (!args.chain_file.empty()) {
    if (!args.params.empty()) throw ValidationError("--param needs --catalog");
    return ParseChainSpec(ReadFile(args.chain_file));
  }
  CatalogParams params;
  for (const std::string& p : args.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("--param expects key=value, got '" + p + "'");
    }
    params[p.substr(0, eq)] = ParseDouble(p.substr(eq + 1), "--param " + p.substr(0, eq));
  }
  const CatalogEntry& entry = FindCatalogEntry(args.catalog);
  source.catalog = entry.name;
  source.params = ResolveCatalogParams(entry, params);
  return BuildCatalogChain(entry.name, source.params);
}

void Emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    WriteFileAtomically(path, text);
  }
}

void RequireFormat(const std::string& format) {
  if (format != "json" && format != "csv") {
    throw ValidationError("--format must be json or csv");
  }
}

Json WithSchema(Json body) {
  body["schema"] = kReportSchema;
  return body;
}

}  // namespace

void WriteFileAtomically(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  std::filesystem::path temp = target;
  temp += ".tmp";
  {
    std::ofstream file(temp, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write '" + temp.string() + "'");
    file << contents;
    file.flush();
    if (!file) throw Error("write to '" + temp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(temp, target, ec);
  if (ec) {
    std::filesystem::remove(temp);
    throw Error("cannot move report into '" + path + "': " + ec.message());
  }
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Invariant charges, Doeblin conditions and ergodic diagnostics "
               "for Markov chains"};
  app.require_subcommand(1);

  ChainArgs chain;
  std::string out_path;
  std::string format = "json";
  std::string tasks = "all";
  std::string eps_grid;
  std::string windows;
  int n_max = 500;
  int k_max = 6;

  CLI::App* analyze = app.add_subcommand("analyze", "Run the analysis pipeline");
  AddChainOptions(analyze, chain);
  analyze->add_option("--tasks", tasks,
                      "Comma list of invariants,conditions,doeblin-search,ergodic,escape or all");
  analyze->add_option("--n-max", n_max, "Horizon for ergodic and escape series");
  analyze->add_option("--k-max", k_max, "Largest step count in the Doeblin search");
  analyze->add_option("--eps-grid", eps_grid, "Comma list of epsilon values");
  analyze->add_option("--windows", windows, "Comma list of window sizes");
  analyze->add_option("--out", out_path, "Report path (stdout when absent)");
  analyze->add_option("--format", format, "json or csv");

  std::string phi_text;
  double epsilon = 0.0;
  int k = 1;
  bool cesaro = false;
  CLI::App* doeblin = app.add_subcommand("doeblin", "Doeblin search or a single check");
  AddChainOptions(doeblin, chain);
  doeblin->add_option("--k-max", k_max, "Largest step count");
  doeblin->add_option("--eps-grid", eps_grid, "Comma list of epsilon values");
  doeblin->add_option("--windows", windows, "Surrogate window sizes (countable chains)");
  doeblin->add_option("--phi", phi_text, "Measure literal; checks one (phi, eps, k)");
  doeblin->add_option("--epsilon", epsilon, "Epsilon for --phi");
  doeblin->add_option("--k", k, "Step count for --phi");
  doeblin->add_flag("--cesaro", cesaro, "Use the Cesaro kernel with strict admission");
  doeblin->add_option("--out", out_path, "Output path");

  CLI::App* ergodic = app.add_subcommand("ergodic", "Projector and distance series");
  AddChainOptions(ergodic, chain);
  ergodic->add_option("--n-max", n_max, "Horizon");
  ergodic->add_option("--out", out_path, "Output path");
  ergodic->add_option("--format", format, "json or csv");

  std::string initial_text;
  CLI::App* escape = app.add_subcommand("escape", "Cesaro escape profile");
  AddChainOptions(escape, chain);
  escape->add_option("--n-max", n_max, "Horizon");
  escape->add_option("--windows", windows, "Comma list of window sizes");
  escape->add_option("--initial", initial_text, "Initial measure literal (default dirac at 0)");
  escape->add_option("--out", out_path, "Output path");
  escape->add_option("--format", format, "json or csv");

  CLI::App* catalog = app.add_subcommand("catalog", "Catalog entries");
  catalog->require_subcommand(1);
  CLI::App* list = catalog->add_subcommand("list", "List entries");
  list->add_option("--format", format, "text or json");
  std::string export_name;
  CLI::App* exporter = catalog->add_subcommand("export", "Write an entry as a chain spec");
  exporter->add_option("name", export_name, "Entry name")->required();
  exporter->add_option("--param", chain.params, "Parameter key=value (repeatable)");
  exporter->add_option("--out", out_path, "Output path");

  std::string report_path;
  CLI::App* verify = app.add_subcommand("verify-report", "Re-verify embedded witnesses");
  verify->add_option("report", report_path, "Report JSON file")->required();

  std::vector<std::string> argv_storage;
  argv_storage.push_back("chargechain");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  try {
    AnalysisOptions options;
    options.n_max = n_max;
    options.k_max = k_max;
    if (!eps_grid.empty()) options.epsilon_grid = ParseDoubleList(eps_grid, "--eps-grid");
    if (!windows.empty()) options.windows = ParseStateList(windows, "--windows");

    if (analyze->parsed()) {
      RequireFormat(format);
      options.tasks = ParseTasks(SplitComma(tasks));
      ValidateOptions(options);
      ChainSource source;
      const TransitionKernel kernel = LoadChain(chain, source);
      if (format == "csv") {
        if (kernel.is_finite()) {
          Emit(out_path, ErgodicCsv(RunErgodic(kernel, options.n_max)), out);
        } else {
          Emit(out_path,
               EscapeCsv(ComputeEscapeProfile(kernel, FAMeasure::Dirac(kernel.space(), 0),
                                              options.n_max, options.windows)),
               out);
        }
        return kExitOk;
      }
      Emit(out_path, DumpJson(BuildReport(kernel, source, options)), out);
      return kExitOk;
    }

    if (doeblin->parsed()) {
      ValidateOptions(options);
      ChainSource source;
      const TransitionKernel kernel = LoadChain(chain, source);
      Json body;
      body["chain"] = ChainToJson(kernel);
      if (!phi_text.empty()) {
        const FAMeasure phi =
            MeasureFromJson(kernel.space(), ParseJsonText(phi_text, "--phi"));
        const DoeblinCheck check = cesaro ? CheckDoeblinTilde(kernel, phi, epsilon, k)
                                          : CheckDoeblin(kernel, phi, epsilon, k);
        body["check"] = {{"holds", check.holds},
                         {"vacuous", check.vacuous},
                         {"epsilon", epsilon},
                         {"k", k},
                         {"variant", cesaro ? "cesaro" : "power"},
                         {"extremum", ExtremumToJson(check.extremum)}};
      } else if (kernel.is_finite()) {
        const InvariantBasis basis = ComputeInvariantBasis(kernel);
        body["doeblin_search"] = {
            {"power", DoeblinSearchToJson(SearchDoeblin(kernel, options.k_max,
                                                        options.epsilon_grid, basis,
                                                        DoeblinVariant::kPower))},
            {"cesaro", DoeblinSearchToJson(SearchDoeblin(kernel, options.k_max,
                                                         options.epsilon_grid, basis,
                                                         DoeblinVariant::kCesaro))}};
      } else {
        const SurrogateTrend trend = TruncatedDoeblinSurrogate(kernel, options.windows);
        ConditionReport partial;
        partial.surrogate = trend;
        body["surrogate"] = ConditionReportToJson(partial)["surrogate"];
      }
      Emit(out_path, DumpJson(WithSchema(std::move(body))), out);
      return kExitOk;
    }

    if (ergodic->parsed()) {
      RequireFormat(format);
      ValidateOptions(options);
      ChainSource source;
      const TransitionKernel kernel = LoadChain(chain, source);
      if (!kernel.is_finite()) {
        throw ValidationError("ergodic needs a finite chain; use escape for countable chains");
      }
      const ErgodicReport report = RunErgodic(kernel, options.n_max);
      if (format == "csv") {
        Emit(out_path, ErgodicCsv(report), out);
      } else {
        Emit(out_path,
             DumpJson(WithSchema({{"chain", ChainToJson(kernel)},
                                  {"ergodic", ErgodicToJson(report)}})),
             out);
      }
      return kExitOk;
    }

    if (escape->parsed()) {
      RequireFormat(format);
      ValidateOptions(options);
      ChainSource source;
      const TransitionKernel kernel = LoadChain(chain, source);
      if (kernel.is_finite()) throw ValidationError("escape needs a countable chain");
      const FAMeasure initial =
          initial_text.empty()
              ? FAMeasure::Dirac(kernel.space(), 0)
              : MeasureFromJson(kernel.space(), ParseJsonText(initial_text, "--initial"));
      const EscapeProfile profile =
          ComputeEscapeProfile(kernel, initial, options.n_max, options.windows);
      if (format == "csv") {
        Emit(out_path, EscapeCsv(profile), out);
      } else {
        Json body = {{"chain", ChainToJson(kernel)},
                     {"escape", EscapeToJson(profile, options.n_max)}};
        if (!initial_text.empty()) body["escape"]["initial"] = MeasureToJson(initial);
        Emit(out_path, DumpJson(WithSchema(std::move(body))), out);
      }
      return kExitOk;
    }

    if (list->parsed()) {
      if (list->count("--format") == 0) format = "text";
      if (format != "json" && format != "text") {
        throw ValidationError("--format must be text or json");
      }
      if (format == "json") {
        Json entries = Json::array();
        for (const CatalogEntry& entry : Catalog()) {
          Json params = Json::array();
          for (const ParamSpec& p : entry.params) {
            params.push_back({{"name", p.name},
                              {"default", p.default_value},
                              {"min", p.min},
                              {"max", p.max},
                              {"integer", p.integer},
                              {"description", p.description}});
          }
          Json expected = Json::object();
          for (const ExpectedVerdict& v : entry.expected) {
            expected[v.condition] = {{"verdict", v.verdict}, {"source", v.source}};
          }
          entries.push_back({{"name", entry.name},
                             {"description", entry.description},
                             {"finite", entry.finite},
                             {"params", std::move(params)},
                             {"expected", std::move(expected)}});
        }
        out << DumpJson(WithSchema({{"catalog", std::move(entries)}}));
      } else {
        for (const CatalogEntry& entry : Catalog()) {
          out << entry.name << (entry.finite ? "  finite" : "  countable");
          for (const ParamSpec& p : entry.params) {
            std::ostringstream d;
            d << p.default_value;
            out << "  " << p.name << "=" << d.str();
          }
          out << "  " << entry.description << "\n";
        }
      }
      return kExitOk;
    }

    if (exporter->parsed()) {
      ChainArgs args;
      args.catalog = export_name;
      args.params = chain.params;
      ChainSource source;
      const TransitionKernel kernel = LoadChain(args, source);
      Emit(out_path, DumpJson(ChainToJson(kernel)), out);
      return kExitOk;
    }

    if (verify->parsed()) {
      const Json report = ParseJsonText(ReadFile(report_path), report_path);
      const std::vector<VerificationLine> lines = VerifyReport(report);
      bool ok = true;
      for (const VerificationLine& line : lines) {
        out << (line.ok ? "PASS " : "FAIL ") << line.check;
        if (!line.detail.empty()) out << " (" << line.detail << ")";
        out << "\n";
        ok = ok && line.ok;
      }
      out << (ok ? "verified " : "failed ") << lines.size() << " checks\n";
      return ok ? kExitOk : kExitFailure;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const CapacityError& e) {
    err << "capacity: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const Json::exception& e) {
    err << "error: malformed report: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace chargechain::cli
