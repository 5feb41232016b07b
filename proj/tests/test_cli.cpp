#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "fif/cli.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / ("fifdim_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = fif::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Writes a config whose output directory is a fresh scratch subdirectory.
std::string config(const std::string& name, json doc) {
  doc["output"]["dir"] = (scratch() / name).string();
  const fs::path path = scratch() / (name + ".json");
  std::ofstream(path) << doc.dump(2);
  return path.string();
}

json alpha(const std::vector<double>& knots, const std::string& f, const std::string& b, json scaling) {
  return {{"system", {{"kind", "alpha"}, {"knots", knots}, {"germ", f}, {"base", b}, {"scaling", scaling}}}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> rows(const fs::path& p) {
  std::vector<std::vector<std::string>> out;
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(cell);
    out.push_back(r);
  }
  return out;
}

const json& theorem(const json& report, const std::string& name) {
  for (const auto& t : report["theorems"]) {
    if (t["theorem"] == name) return t;
  }
  throw std::runtime_error("missing " + name);
}

}  // namespace

TEST_CASE("moran subcommand") {
  Run r = run({"moran", "--ratios", "0.5,0.5"});
  CHECK(r.code == 0);
  CHECK(std::stod(r.out) == doctest::Approx(1.0).epsilon(1e-10));
  r = run({"moran", "--ratios", "0.5,1.2"});
  CHECK(r.code == 2);
  CHECK(r.err.find("ratio must be in (0,1)") != std::string::npos);
  r = run({"moran", "--ratios", "0.3333333333,0.3333333333,0.3333333333,0.3333333333"});
  CHECK(r.code == 0);
  CHECK(std::stod(r.out) == doctest::Approx(1.26186).epsilon(1e-5));
  CHECK(run({"moran", "--ratios", "abc"}).code == 2);
  CHECK(run({"moran"}).code == 2);
}

TEST_CASE("command line errors never crash") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"build"}).code == 2);
  CHECK(run({"build", "--config", (scratch() / "missing.json").string()}).code == 2);

  const fs::path bad = scratch() / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK(run({"report", "--config", bad.string()}).code == 2);

  json unknown = alpha({0, 0.5, 1}, "x", "x^2", "0.2");
  unknown["sampling"]["grdi_exponent"] = 12;
  Run r = run({"build", "--config", config("unknown", unknown)});
  CHECK(r.code == 2);
  CHECK(r.err.find("grdi_exponent") != std::string::npos);

  r = run({"build", "--config", config("badexpr", alpha({0, 0.5, 1}, "sin(", "0", "0.2"))});
  CHECK(r.code == 2);
  CHECK(r.err.find("offset 4") != std::string::npos);
  CHECK(run({"build", "--config", config("logzero", alpha({0, 0.5, 1}, "log(x)", "0", "0.2"))}).code == 2);
  CHECK(run({"build", "--config", config("bigalpha", alpha({0, 0.5, 1}, "x", "x^2", "1.2"))}).code == 2);
  CHECK(run({"build", "--config", config("twoknots", alpha({0, 1}, "x", "x^2", "0.2"))}).code == 2);

  json ladder = alpha({0, 0.5, 1}, "x", "x^2", "0.2");
  ladder["sampling"]["grid_exponent"] = 10;
  CHECK(run({"boxdim", "--config", config("ladder", ladder)}).code == 2);

  // a tiny tolerance still terminates: the iteration lands on an exact floating-point fixed point
  json tight = alpha({0, 0.5, 1}, "sin(x)", "sin(1)*x", "0.5");
  tight["sampling"] = {{"grid_exponent", 8}, {"tol", 1e-300}};
  tight["boxdim"] = {{"m_min", 1}, {"m_max", 5}};
  CHECK(run({"build", "--config", config("tight", tight)}).code == 0);

  r = run({"moran", "--ratios", "0.999999999999,0.999999999999"});
  CHECK(r.code == 3);
  CHECK(r.err.find("1e6") != std::string::npos);
}

TEST_CASE("build subcommand") {
  json zero = alpha({0, 0.5, 1}, "x^2 + 1", "1 + x", "0");
  zero["sampling"]["grid_exponent"] = 10;
  zero["boxdim"] = {{"m_min", 2}, {"m_max", 7}};
  Run r = run({"build", "--config", config("zero", zero)});
  REQUIRE(r.code == 0);
  const oracle::Csv csv = oracle::read_csv(scratch() / "zero" / "fif.csv");
  REQUIRE(csv.x.size() == 1025);
  for (std::size_t i = 0; i < csv.x.size(); ++i) CHECK(csv.value[i] == doctest::Approx(csv.x[i] * csv.x[i] + 1));
  const json meta = json::parse(slurp(scratch() / "zero" / "fif.meta.json"));
  CHECK(meta["iterations"] == 1);
  CHECK(meta["epsilon"] == 0.0);
  CHECK(meta.contains("M"));
  CHECK(meta.contains("alpha_sup"));

  r = run({"build", "--config", config("joinup", alpha({0, 0.5, 1}, "x", "x^2 + 0.1", "0.2"))});
  CHECK(r.code == 2);
  CHECK(r.err.find("join-up") != std::string::npos);

  json sin = alpha({0, 0.5, 1}, "sin(3.141592653589793*x)", "0", "0.5");
  sin["sampling"] = {{"grid_exponent", 12}, {"tol", 1e-8}};
  sin["boxdim"] = {{"m_min", 4}, {"m_max", 9}};
  REQUIRE(run({"build", "--config", config("sin", sin)}).code == 0);
  const oracle::Csv s = oracle::read_csv(scratch() / "sin" / "fif.csv");
  const oracle::Recursion ref{0.0, 1.0, 2, [](std::size_t, double) { return 0.5; },
                              [](std::size_t j, double u) { return std::sin(3.141592653589793 * (0.5 * u + 0.5 * double(j))); },
                              [](double x) { return std::sin(3.141592653589793 * x); }};
  double worst = 0;
  for (std::size_t i = 0; i < s.x.size(); i += 5) worst = std::max(worst, std::fabs(s.value[i] - ref(s.x[i], 60)));
  CHECK(worst <= 2e-8);

  // --tol and --out override the config
  r = run({"build", "--config", config("sin2", sin), "--tol", "1e-4", "--out", (scratch() / "elsewhere").string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(scratch() / "elsewhere" / "fif.csv"));
  CHECK(run({"build", "--config", config("sin3", sin), "--tol", "-1"}).code == 2);
}

TEST_CASE("eval subcommand") {
  json sin = alpha({0, 0.5, 1}, "sin(3.141592653589793*x)", "0", "0.5");
  Run r = run({"eval", "--config", config("eval", sin), "--x", "0,0.5,0.3", "--depth", "40"});
  REQUIRE(r.code == 0);
  std::stringstream ss(r.out);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "x,value,err");
  std::getline(ss, line);
  CHECK(line.rfind("0,0,", 0) == 0);
  CHECK(run({"eval", "--config", config("eval2", sin), "--x", "2"}).code == 2);
}

TEST_CASE("osc subcommand") {
  json lin = alpha({0, 0.5, 1}, "x", "x^3", "0.2");
  REQUIRE(run({"osc", "--config", config("oscx", lin), "--function", "germ"}).code == 0);
  for (const auto& row : rows(scratch() / "oscx" / "osc_germ.csv")) CHECK(std::stod(row[1]) == doctest::Approx(1.0));

  json flat = alpha({0, 0.5, 1}, "2", "2 + x*(1-x)", "0.2");
  REQUIRE(run({"osc", "--config", config("oscc", flat), "--function", "germ"}).code == 0);
  const auto flat_rows = rows(scratch() / "oscc" / "osc_germ.csv");
  CHECK(flat_rows.size() == 12);
  for (const auto& row : flat_rows) CHECK(std::stod(row[1]) == 0.0);

  json sin = alpha({0, 0.5, 1}, "sin(3.141592653589793*x)", "0", "0.6");
  sin["oscillation"] = {{"p", 2}, {"m_max", 10}, {"beta", 0.3}};
  const std::string path = config("oscf", sin);
  Run r = run({"osc", "--config", path, "--function", "fif"});
  REQUIRE(r.code == 0);
  const double observed = std::stod(r.out.substr(r.out.find("exponent") + 9));
  REQUIRE(run({"build", "--config", path}).code == 0);
  const oracle::Csv csv = oracle::read_csv(scratch() / "oscf" / "fif.csv");
  const auto osc_rows = rows(scratch() / "oscf" / "osc_fif.csv");
  double top = 0;
  for (const auto& row : osc_rows) {
    const unsigned m = unsigned(std::stoul(row[0]));
    CHECK(std::stod(row[1]) == doctest::Approx(oracle::osc(csv.value, 2, m)).epsilon(1e-6));
    top = std::max(top, std::stod(row[2]));
  }
  CHECK(0.3 < observed);
  CHECK(top < 10.0);

  json cls = {{"system", {{"kind", "classical"}, {"data", {{0, 0}, {0.5, 1}, {1, 0}}}, {"scaling", "0.3"},
                          {"offsets", {"x", "1 - x"}}}}};
  CHECK(run({"osc", "--config", config("osccls", cls), "--function", "germ"}).code == 2);
  CHECK(run({"osc", "--config", config("osccls2", cls), "--function", "fif"}).code == 0);
  CHECK(run({"osc", "--config", config("osccls3", cls), "--function", "other"}).code == 2);
}

TEST_CASE("report subcommand") {
  const std::string bv = config("bv", alpha({0, 0.5, 1}, "sin(3*x)", "sin(3)*x", "0.2"));
  Run r = run({"report", "--config", bv});
  REQUIRE(r.code == 0);
  const std::string text = slurp(scratch() / "bv" / "report.json");
  const json rep = json::parse(text);
  const json& b = theorem(rep, "bv_dimension_one");
  CHECK(b["verdict"] == "pass");
  CHECK(b["prediction"]["lo"] == 1.0);
  CHECK(std::fabs(b["estimate"].get<double>() - 1.0) <= 0.1);
  for (const char* key : {"theorem", "constants", "lhs", "rhs", "verdict", "prediction", "estimate", "tolerance",
                          "agreement"}) {
    CHECK(b.contains(key));
  }
  CHECK(rep["theorems"].size() == 6);

  REQUIRE(run({"report", "--config", bv}).code == 0);
  CHECK(slurp(scratch() / "bv" / "report.json") == text);

  json tent = {{"system", {{"kind", "classical"}, {"data", {{0, 0}, {0.5, 1}, {1, 0}}}, {"scaling", "0.8"},
                           {"offsets", {"x", "1 - x"}}}},
               {"sampling", {{"grid_exponent", 17}}},
               {"boxdim", {{"m_min", 6}, {"m_max", 12}}}};
  REQUIRE(run({"report", "--config", config("tent", tent)}).code == 0);
  const json tr = json::parse(slurp(scratch() / "tent" / "report.json"));
  const json& ex = theorem(tr, "exact_box_dimension");
  CHECK(ex["hypothesis_verdict"] == "fail");
  CHECK(ex["agreement"] == "not_asserted");
  CHECK(std::fabs(ex["estimate"].get<double>() - 1.678) <= 0.1);

  REQUIRE(run({"report", "--config", config("zero", alpha({0, 0.5, 1}, "exp(x)", "1 + (exp(1)-1)*x", "0"))}).code == 0);
  const json zr = json::parse(slurp(scratch() / "zero" / "report.json"));
  for (const auto& t : zr["theorems"]) CHECK(t["verdict"] == "pass");
}

TEST_CASE("boxdim and verify subcommands") {
  const std::string path = config("bd", alpha({0, 0.5, 1}, "1 - abs(2*x - 1)", "0", "0.05"));
  Run r = run({"boxdim", "--config", path});
  REQUIRE(r.code == 0);
  const auto bd = rows(scratch() / "bd" / "boxdim.csv");
  CHECK(bd.size() == 8);
  CHECK(bd.front()[0] == "4");

  r = run({"verify", "--config", path, "--seed", "7"});
  REQUIRE(r.code == 0);
  const json v = json::parse(slurp(scratch() / "bd" / "verify.json"));
  CHECK(v["checks"].size() == 5);
  CHECK(v["bilipschitz"]["seed"] == 7);
  CHECK(v["checks"][0]["theorem"] == "metric_contraction");
  CHECK(v["checks"][0]["verdict"] == "pass");
  CHECK(r.out.find("bilipschitz") != std::string::npos);
}
