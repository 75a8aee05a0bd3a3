#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ltv/cli.hpp"
#include "ltv/error.hpp"
#include "ltv/problem.hpp"

namespace fs = std::filesystem;
using ltv::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string problem(const char* name) { return std::string(LTV_PROBLEMS_DIR) + "/" + name; }

// Writes a scratch problem file and returns its path.
std::string scratch(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / ("ltv_test_" + name + ".ini");
  std::ofstream(p) << body;
  return p.string();
}

// key,value report lines.
std::map<std::string, std::string> report(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma != std::string::npos) out[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return out;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

Table table(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(cells, cell, ',')) {
      if (header)
        t.columns.push_back(cell);
      else
        row.push_back(std::stod(cell));
    }
    if (!header) t.rows.push_back(row);
    header = false;
  }
  return t;
}

double num(const std::map<std::string, std::string>& r, const std::string& key) {
  const auto it = r.find(key);
  REQUIRE_MESSAGE(it != r.end(), key);
  return std::stod(it->second);
}

const char* kStructuredHead = R"([system]
a11   = "-1 - cos(t)^2"
a12   = "-cos(t)^2"
alpha = -2
beta  = -2
)";

}  // namespace

TEST_CASE("exit codes") {
  CHECK(invoke({}).code == ltv::cli::kUsageError);
  CHECK(invoke({"--help"}).code == ltv::cli::kSuccess);
  CHECK(invoke({"frobnicate", problem("cos_squared.ini")}).code == ltv::cli::kUsageError);
  CHECK(invoke({"analyze"}).code == ltv::cli::kUsageError);
  CHECK(invoke({"analyze", "/nonexistent/problem.ini"}).code == ltv::cli::kUsageError);
  CHECK(invoke({"--format", "xml", "analyze", problem("cos_squared.ini")}).code == ltv::cli::kUsageError);
  CHECK(invoke({"--tol", "abc", "analyze", problem("cos_squared.ini")}).code == ltv::cli::kUsageError);

  const Outcome syntax = invoke({"analyze", scratch("syntax", "[system]\na11 = \"2t\"\na12 = \"1\"\nalpha = 1\nbeta = 0\n")});
  CHECK(syntax.code == ltv::cli::kUsageError);
  CHECK(syntax.err.find("system.a11") != std::string::npos);
  CHECK(invoke({"analyze", scratch("unknown", "[system]\na11 = \"foo(t)\"\na12 = \"1\"\nalpha = 1\nbeta = 0\n")})
            .code == ltv::cli::kUsageError);
  CHECK(invoke({"floquet", problem("damped.ini")}).code == ltv::cli::kUsageError);
  CHECK(invoke({"solve", problem("rotation.ini")}).code == ltv::cli::kUsageError);

  const Outcome rejected = invoke({"analyze", problem("not_commuting.ini")});
  CHECK(rejected.code == ltv::cli::kModelRejected);
  CHECK(rejected.err.find("commuting") != std::string::npos);
  const Outcome degenerate = invoke({"analyze", problem("degenerate.ini")});
  CHECK(degenerate.code == ltv::cli::kModelRejected);
  CHECK(degenerate.err.find("a12") != std::string::npos);

  CHECK(invoke({"reduce", problem("zero_crossing.ini")}).code == ltv::cli::kNumericalFailure);
}

TEST_CASE("problem file validation") {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return ltv::parse_problem(in);
  };
  CHECK_NOTHROW(parse(kStructuredHead));
  CHECK_THROWS_AS(parse(std::string(kStructuredHead) + "colour = red\n"), ltv::InvalidArgument);
  CHECK_THROWS_AS(parse(std::string(kStructuredHead) + "a21 = \"0\"\na22 = \"0\"\n"), ltv::InvalidArgument);
  CHECK_THROWS_AS(parse(std::string(kStructuredHead) + "[floquet]\nperiod = -1\n"), ltv::InvalidArgument);
  CHECK_THROWS_AS(parse(std::string(kStructuredHead) + "[floquet]\nperiod = t\n"), ltv::InvalidArgument);
  CHECK_THROWS_AS(parse("[system]\na11 = \"1\"\nalpha = 1\nbeta = 0\n"), ltv::InvalidArgument);
  CHECK_THROWS_AS(parse("[system]\na11 = \"1\"\na12 = \"1\"\nalpha = 1\n"), ltv::InvalidArgument);

  const ltv::ProblemSpec spec = parse(std::string(kStructuredHead) +
                                      "t0 = 0.5\n[floquet]\nperiod = pi\n[solve]\nx0 = \"1, -2\"\n"
                                      "t_end = 4\nsamples = 11\n[tolerances]\nrel = 1e-9\n");
  CHECK(spec.system.structured());
  CHECK(spec.system.t0 == 0.5);
  CHECK(*spec.period == doctest::Approx(3.141592653589793));
  CHECK(spec.solve->x0(1) == -2.0);
  CHECK(spec.solve->samples == 11);
  CHECK(spec.tolerances.rel == 1e-9);
  CHECK(spec.analysis_window() == 3.5);
}

TEST_CASE("analyze fits the general form of the worked example") {
  const Outcome o = invoke({"analyze", problem("general_form.ini")});
  REQUIRE(o.code == 0);
  const auto r = report(o.out);
  CHECK(r.at("constants") == "fitted");
  CHECK(num(r, "alpha") == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(num(r, "beta") == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(r.at("branch") == "Imaginary");
  CHECK(num(r, "omega") == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(num(r, "commutation_residual") <= 1e-8);

  const auto given = report(invoke({"analyze", problem("cos_squared.ini")}).out);
  CHECK(given.at("constants") == "given");
  CHECK(num(given, "gamma_sq") == -1.0);
}

TEST_CASE("solve reproduces the closed-form first component") {
  const Outcome o = invoke({"solve", problem("cos_squared.ini")});
  REQUIRE(o.code == 0);
  const Table t = table(o.out);
  CHECK(t.columns == std::vector<std::string>{"t", "x1", "x2"});
  REQUIRE(t.rows.size() == 101);
  CHECK(t.rows.back()[0] == 5.0);
  for (const auto& row : t.rows) {
    const double s = row[0];
    const double ref = -std::exp(-s) * std::sin(0.5 * s + 0.5 * std::sin(s) * std::cos(s));
    CHECK(std::abs(row[1] - ref) <= 1e-8);
  }

  const Outcome checked = invoke({"solve", "--verify", problem("cos_squared.ini")});
  REQUIRE(checked.code == 0);
  const Table v = table(checked.out);
  CHECK(v.columns.size() == 7);
  CHECK(v.columns[5] == "dx1");
  for (const auto& row : v.rows) {
    CHECK(row[5] <= 1e-6);
    CHECK(row[6] <= 1e-6);
  }

  const std::string zero = scratch("zero", std::string(kStructuredHead) +
                                               "[solve]\nx0 = \"0, 0\"\nt_end = 5\nsamples = 21\n");
  const Table z = table(invoke({"solve", zero}).out);
  REQUIRE(z.rows.size() == 21);
  for (const auto& row : z.rows) {
    CHECK(row[1] == 0.0);
    CHECK(row[2] == 0.0);
  }
}

TEST_CASE("floquet reports") {
  const Outcome o = invoke({"floquet", problem("cos_squared.ini")});
  REQUIRE(o.code == 0);
  const auto r = report(o.out);
  CHECK(r.at("verdict") == "AsymptoticallyStable");
  for (const char* pipeline : {"averages", "monodromy"}) {
    const std::string p = pipeline;
    CHECK(num(r, p + ".exponents.0.re") == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(std::abs(num(r, p + ".exponents.0.im")) == doctest::Approx(0.5).epsilon(1e-6));
  }
  CHECK(num(r, "exponent_delta") <= 1e-6);
  CHECK(num(r, "trace.sum_residual") <= 1e-8);

  const auto rot = report(invoke({"floquet", problem("rotation.ini")}).out);
  CHECK(rot.at("averages.reduced") == "true");
  CHECK(num(rot, "averages.raw_exponents.0.im") == 1.0);
  CHECK(num(rot, "averages.exponents.0.im") == 0.0);
  CHECK(rot.at("verdict") == "Stable");

  const auto az = report(invoke({"floquet", problem("alpha_zero.ini")}).out);
  CHECK(num(az, "alpha_zero.lambda_plus") == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(num(az, "alpha_zero.lambda_plus_shortcut") == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(az.at("verdict") == "Unstable");
}

TEST_CASE("reduce") {
  const Outcome o = invoke({"reduce", problem("damped.ini")});
  REQUIRE(o.code == 0);
  CHECK(report(o.out).at("equation") == "x'' + 0.5 x' + 4 x = 0");

  const Outcome checked = invoke({"reduce", "--check", problem("damped.ini")});
  CHECK(checked.code == 0);
  const auto r = report(checked.out);
  CHECK(num(r, "roundtrip_residual") <= 1e-6);
  CHECK(r.at("roundtrip_pass") == "true");

  // Time-dependent coefficients come back as a table.
  const Outcome table_out = invoke({"reduce", "--check", problem("erfi_example.ini")});
  CHECK(table_out.code == 0);
  CHECK(table_out.out.find("t,p,q") != std::string::npos);
}

TEST_CASE("verify runs the residual suite") {
  for (const char* file : {"cos_squared.ini", "general_form.ini", "damped.ini", "alpha_zero.ini"}) {
    CAPTURE(file);
    const Outcome o = invoke({"verify", problem(file)});
    CHECK(o.code == 0);
    CHECK(report(o.out).at("pass") == "true");
  }
  const auto r = report(invoke({"verify", problem("cos_squared.ini")}).out);
  for (const char* check : {"commutation", "closed_form_vs_expm", "defining_property", "liouville",
                            "trajectory_vs_rk45", "pipeline_delta", "trace_sum", "trace_product"})
    CHECK(r.at(std::string("checks.") + check + ".pass") == "true");
  CHECK(report(invoke({"verify", problem("alpha_zero.ini")}).out).count("alpha_zero.difference") == 1);
}

TEST_CASE("output is deterministic and available as JSON") {
  for (const char* cmd : {"analyze", "solve", "floquet", "verify"}) {
    CAPTURE(cmd);
    const Outcome a = invoke({cmd, problem("cos_squared.ini")});
    const Outcome b = invoke({cmd, problem("cos_squared.ini")});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);

    const Outcome j = invoke({"--format", "json", cmd, problem("cos_squared.ini")});
    REQUIRE(j.code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc.is_object());
  }
  const auto doc = nlohmann::json::parse(invoke({"--format", "json", "floquet", problem("cos_squared.ini")}).out);
  CHECK(doc["verdict"] == "AsymptoticallyStable");
  CHECK(doc["averages"]["exponents"][0]["re"].get<double>() == doctest::Approx(-1.0));
  const auto rows = nlohmann::json::parse(invoke({"--format", "json", "solve", problem("cos_squared.ini")}).out);
  CHECK(rows["columns"].size() == 3);
  CHECK(rows["rows"].size() == 101);

  // --tol reaches the integrator.
  const Outcome loose = invoke({"--tol", "1e-6", "floquet", problem("cos_squared.ini")});
  CHECK(loose.code == 0);
  CHECK(loose.out != invoke({"floquet", problem("cos_squared.ini")}).out);
}
