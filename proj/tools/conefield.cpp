// Command line front end: runs scenario files and writes their artifacts.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "conefield/cli/run.hpp"

namespace cf = conefield;
namespace cli = conefield::cli;

namespace {

struct Globals {
  std::string out = "out";
  int resolution = 0;
  double eps0 = 0.0;
  int levels = 0;
  std::string format;
};

std::vector<double> parse_point(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double x = std::stod(item, &used);
    if (used != item.size()) throw cf::Error(cf::ErrorCode::InvalidArgument, "bad coordinate '" + item + "'");
    v.push_back(x);
  }
  return v;
}

void apply_overrides(cli::Scenario& sc, const Globals& g) {
  if (g.resolution > 0)
    for (cf::Axis& a : sc.axes) a.cells = g.resolution;
  if (g.eps0 > 0.0) sc.schedule.eps0 = g.eps0;
  if (g.levels > 0) sc.schedule.levels = g.levels;
  if (!g.format.empty()) sc.outputs.format = g.format;
}

/// Keeps only analyses of one type, adding a default one if the scenario has none.
void focus(cli::Scenario& sc, const std::string& type, cli::Json args = cli::Json::object()) {
  std::vector<cli::AnalysisSpec> kept;
  for (const auto& a : sc.analyses)
    if (a.type == type) kept.push_back(a);
  if (kept.empty()) kept.push_back({type, type, std::move(args), cli::Json::object()});
  sc.analyses = std::move(kept);
}

int execute(cli::Scenario sc, const Globals& g) {
  apply_overrides(sc, g);
  const std::string dir = g.out.empty() ? sc.outputs.dir : g.out;
  const cli::ReportBundle b = cli::run(sc, {sc.outputs.format});
  const auto files = cli::emit(b, dir);
  for (const auto& a : b.report["analyses"]) {
    std::printf("%-24s %s\n", a["name"].get<std::string>().c_str(), a["passed"].get<bool>() ? "ok" : "FAILED");
    if (a.contains("error")) std::fprintf(stderr, "  %s\n", a["error"].get<std::string>().c_str());
    if (a.contains("expectations"))
      for (const auto& e : a["expectations"])
        if (!e["pass"].get<bool>())
          std::fprintf(stderr, "  expected %s = %s, got %s\n", e["key"].get<std::string>().c_str(), e["expected"].dump().c_str(),
                       e["actual"].dump().c_str());
  }
  std::printf("wrote %zu file(s) to %s\n", files.size(), dir.c_str());
  return b.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed cone fields on gridded charts: recurrence, Lyapunov and temporal functions"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  g.out.clear();
  app.add_option("--out", g.out, "Output directory (default: the scenario's outputs.dir)");
  app.add_option("--resolution", g.resolution, "Override the cell count on every axis")->check(CLI::PositiveNumber);
  app.add_option("--eps0", g.eps0, "Override the largest enlargement")->check(CLI::PositiveNumber);
  app.add_option("--levels", g.levels, "Override the number of schedule levels")->check(CLI::Range(2, 64));
  app.add_option("--format", g.format, "Artifact format")->check(CLI::IsMember({"csv", "svg", "both"}));

  std::string scenario_path;
  std::string from, to;
  struct Verb {
    const char* name;
    const char* help;
    std::string type;
  };
  const std::vector<Verb> verbs{
      {"analyze", "Run every analysis in the scenario", ""},
      {"recurrent", "Recurrent set and stable classes", "recurrent"},
      {"lyapunov", "Complete Lyapunov function", "lyapunov"},
      {"temporal", "Steep temporal function", "temporal"},
      {"check-gh", "Causality and hyperbolicity report", "gh"},
      {"smooth", "Mollify the scenario's smoothing inputs", "smooth"},
  };
  std::vector<CLI::App*> subs;
  for (const Verb& v : verbs) {
    CLI::App* s = app.add_subcommand(v.name, v.help);
    s->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    subs.push_back(s);
  }
  CLI::App* reach = app.add_subcommand("reach", "Metric-shortest causal path between two points");
  reach->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  reach->add_option("--from", from, "Start point, comma separated")->required();
  reach->add_option("--to", to, "End point, comma separated")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    cli::Scenario sc = cli::load_scenario(scenario_path);
    for (std::size_t i = 0; i < verbs.size(); ++i) {
      if (!subs[i]->parsed() || verbs[i].type.empty()) continue;
      if (verbs[i].type == "smooth")
        focus(sc, "smooth", {{"type", "smooth"}, {"g", "abs(y)"}, {"s", 0.1}, {"pins", {0.0}}});
      else focus(sc, verbs[i].type);
    }
    if (reach->parsed()) {
      cli::Json args = {{"type", "reach"}, {"from", {{"point", parse_point(from)}}}, {"to", {{"point", parse_point(to)}}}};
      sc.analyses = {{"reach", "reach", args, cli::Json::object()}};
    }
    return execute(std::move(sc), g);
  } catch (const cli::ScenarioError& e) {
    std::fprintf(stderr, "%s: %s\n", scenario_path.c_str(), e.what());
    return 2;
  } catch (const cf::Error& e) {
    std::fprintf(stderr, "%s: %s\n", scenario_path.c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", scenario_path.c_str(), e.what());
    return 2;
  }
}
