#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "conefield/cli/emit.hpp"
#include "conefield/cli/run.hpp"

using namespace conefield;
namespace fs = std::filesystem;

namespace {

const std::string kDir = SCENARIO_DIR;

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<cli::Issue> issues_of(const std::string& text) {
  try {
    cli::parse_scenario(text, "inline.json");
  } catch (const cli::ScenarioError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<cli::Issue>& issues, const std::string& where, const std::string& text = "") {
  for (const auto& i : issues)
    if (i.where == where && i.message.find(text) != std::string::npos) return true;
  return false;
}

const std::string kSmall = R"({
  "name": "small",
  "chart": {"bounds": [[-1, 1], [-1, 1]], "resolution": 12},
  "field": {"kind": "vector", "components": ["-y", "-z"]},
  "sets": {"origin": {"point": [0, 0]}},
  "analyses": [
    {"type": "recurrent", "name": "rec"},
    {"type": "lyapunov", "name": "tau", "expect": {"monotone": true}}
  ]
})";

}  // namespace

TEST(Parse, BundledMinkowski) {
  const cli::Scenario sc = cli::load_scenario(kDir + "/minkowski.json");
  EXPECT_EQ(sc.name, "minkowski");
  EXPECT_EQ(sc.dim(), 2);
  EXPECT_EQ(sc.axes[0].cells, 64);
  EXPECT_EQ(sc.axes[1].cells, 64);
  EXPECT_EQ(sc.analyses.size(), 3u);
  EXPECT_EQ(sc.field_json["kind"], "standard");
}

TEST(Parse, EveryBundledScenarioLoads) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(kDir))
    if (e.path().extension() == ".json") {
      EXPECT_NO_THROW(cli::load_scenario(e.path().string())) << e.path();
      ++n;
    }
  EXPECT_GE(n, 7u);
}

TEST(Parse, MissingResolution) {
  const auto issues = issues_of(R"({"name": "x", "chart": {"bounds": [[0, 1], [0, 1]]}, "field": {"kind": "standard", "s": 1}})");
  EXPECT_TRUE(mentions(issues, "chart.resolution", "missing"));
}

TEST(Parse, NonPositiveEps0) {
  for (const char* eps : {"0", "-0.5"}) {
    const auto issues = issues_of(std::string(R"({"name": "x", "chart": {"bounds": [[0, 1], [0, 1]], "resolution": 8},
      "field": {"kind": "standard", "s": 1}, "schedule": {"eps0": )") + eps + "}}");
    EXPECT_TRUE(mentions(issues, "schedule.eps0", "BadScheduleParams")) << eps;
  }
}

TEST(Parse, ReportsEveryProblem) {
  const auto issues = issues_of(R"({"name": "x", "chart": {"bounds": [[0, 1], [0, 1]]},
    "charts": [], "field": {"kind": "standard", "s": 1}, "schedule": {"levels": 1, "ratio": 2},
    "analyses": [{"type": "nonsense", "name": "a"}, {"type": "reach", "name": "a"}]})");
  EXPECT_TRUE(mentions(issues, "chart.resolution"));
  EXPECT_TRUE(mentions(issues, "charts", "one chart"));
  EXPECT_TRUE(mentions(issues, "schedule.levels", "BadScheduleParams"));
  EXPECT_TRUE(mentions(issues, "schedule.ratio", "BadScheduleParams"));
  EXPECT_TRUE(mentions(issues, "analyses[0].type", "nonsense"));
  EXPECT_TRUE(mentions(issues, "analyses[1].name", "duplicate"));
  EXPECT_GE(issues.size(), 6u);
}

TEST(Parse, WrongTypes) {
  const auto issues = issues_of(R"({"name": 1, "chart": {"bounds": [[0, 1], [0, 1]], "resolution": 8},
    "field": {"kind": "standard", "s": 1}, "analyses": [{"type": "graph", "name": 2}]})");
  EXPECT_TRUE(mentions(issues, "name", "string"));
  EXPECT_TRUE(mentions(issues, "analyses[0].name", "string"));
}

TEST(Parse, SyntaxErrorCarriesLine) {
  try {
    cli::parse_scenario("{\n  \"name\": \"x\",\n  oops\n}", "bad.json");
    FAIL();
  } catch (const cli::ScenarioError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Run, EmptyAnalysesPass) {
  const cli::Scenario sc = cli::parse_scenario(R"({"name": "e", "chart": {"bounds": [[0, 1], [0, 1]], "resolution": 8},
    "field": {"kind": "standard", "s": 1}, "analyses": []})");
  const cli::ReportBundle b = cli::run(sc, {});
  EXPECT_TRUE(b.passed);
  EXPECT_TRUE(b.artifacts.empty());
  EXPECT_TRUE(b.report["analyses"].empty());
}

TEST(Run, MinkowskiPipeline) {
  const cli::ReportBundle b = cli::run(cli::load_scenario(kDir + "/minkowski.json"), {});
  EXPECT_TRUE(b.passed);
  const auto& a = b.report["analyses"];
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0]["result"]["empty"], true);
  EXPECT_EQ(a[1]["result"]["ok"], true);
  for (const char* k : {"gh0", "gh1", "gh2", "steep"}) EXPECT_EQ(a[2]["result"][k], true) << k;
}

TEST(Run, CylinderWitness) {
  const cli::ReportBundle b = cli::run(cli::load_scenario(kDir + "/ctc_cylinder.json"), {});
  EXPECT_TRUE(b.passed);
  const auto& r = b.report["analyses"][0]["result"];
  EXPECT_EQ(r["causal"], false);
  ASSERT_TRUE(r["cycle"].is_array());
  EXPECT_GE(r["cycle"].size(), 2u);
  EXPECT_EQ(r["cycle"].front(), r["cycle"].back());
}

TEST(Run, FailedExpectationAndTaggedError) {
  const cli::Scenario sc = cli::parse_scenario(R"({"name": "t", "chart": {"bounds": [[-1, 1], [-1, 1]], "resolution": 12},
    "field": {"kind": "vector", "components": ["-y", "-z"]},
    "sets": {"none": {"region": "1"}, "origin": {"point": [0, 0]}},
    "analyses": [
      {"type": "recurrent", "name": "rec", "expect": {"empty": true}},
      {"type": "stability", "name": "broken", "Y": "none", "U": "origin"}]})",
                                               "scenarios/t.json");
  const cli::ReportBundle b = cli::run(sc, {});
  EXPECT_FALSE(b.passed);
  const auto& a = b.report["analyses"];
  EXPECT_EQ(a[0]["passed"], false);
  EXPECT_EQ(a[0]["expectations"][0]["actual"], false);
  const std::string err = a[1]["error"];
  EXPECT_NE(err.find("broken"), std::string::npos) << err;
  EXPECT_NE(err.find("scenarios/t.json"), std::string::npos) << err;
}

TEST(Emit, HeadersAndDeterminism) {
  const cli::Scenario sc = cli::parse_scenario(kSmall, "small.json");
  const fs::path root = fs::temp_directory_path() / "conefield_test_cli";
  fs::remove_all(root);
  const auto first = cli::emit(cli::run(sc, {}), (root / "a").string());
  const auto second = cli::emit(cli::run(sc, {}), (root / "b").string());
  ASSERT_EQ(first.size(), second.size());
  ASSERT_FALSE(first.empty());
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(fs::path(first[i]).filename(), fs::path(second[i]).filename());
    EXPECT_EQ(read(first[i]), read(second[i])) << first[i];
  }
  const std::string tau = read(root / "a" / "tau.csv");
  EXPECT_EQ(tau.substr(0, tau.find('\n')), "i,j,value");
  EXPECT_EQ(std::count(tau.begin(), tau.end(), '\n'), 1 + 12 * 12);
  const std::string svg = read(root / "a" / "tau.svg");
  EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.rfind("<?xml", 0) == 0, true);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_TRUE(fs::exists(root / "a" / "report.json"));
  fs::remove_all(root);
}

TEST(Emit, FormatSelection) {
  cli::Scenario sc = cli::parse_scenario(kSmall, "small.json");
  for (const auto& [format, csv, svg] : std::vector<std::tuple<std::string, bool, bool>>{
           {"csv", true, false}, {"svg", false, true}, {"both", true, true}}) {
    const cli::ReportBundle b = cli::run(sc, {format});
    bool has_csv = false, has_svg = false;
    for (const auto& a : b.artifacts) {
      has_csv = has_csv || a.filename == "tau.csv";
      has_svg = has_svg || a.filename == "tau.svg";
    }
    EXPECT_EQ(has_csv, csv) << format;
    EXPECT_EQ(has_svg, svg) << format;
  }
}
