#include "ltv/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "ltv/error.hpp"
#include "ltv/floquet.hpp"
#include "ltv/fundamental.hpp"
#include "ltv/problem.hpp"
#include "ltv/reduction.hpp"
#include "ltv/rk45.hpp"

namespace ltv::cli {
namespace {

using Json = nlohmann::ordered_json;

enum class Format { Csv, Json };

struct Settings {
  std::string file;
  std::optional<double> tol;
  Format format = Format::Csv;
  bool verify = false;
  bool check = false;
};

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string short_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Json to_json(const cplx& z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

Json to_json(const Mat2d& m) {
  return Json::array({Json::array({m(0, 0), m(0, 1)}), Json::array({m(1, 0), m(1, 1)})});
}

Json to_json(const Mat2c& m) {
  if (m.imag().cwiseAbs().maxCoeff() == 0.0) return to_json(Mat2d(m.real()));
  Json rows = Json::array();
  for (int i = 0; i < 2; ++i) rows.push_back(Json::array({to_json(m(i, 0)), to_json(m(i, 1))}));
  return rows;
}

Json to_json(const std::array<cplx, 2>& pair) {
  return Json::array({to_json(pair[0]), to_json(pair[1])});
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

void flatten(const Json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
  } else if (j.is_number()) {
    out << csv_field(prefix) << ',' << number(j.get<double>()) << '\n';
  } else if (j.is_boolean()) {
    out << csv_field(prefix) << ',' << (j.get<bool>() ? "true" : "false") << '\n';
  } else if (j.is_string()) {
    out << csv_field(prefix) << ',' << csv_field(j.get<std::string>()) << '\n';
  } else {
    out << csv_field(prefix) << ",\n";
  }
}

void emit(const Json& report, Format format, std::ostream& out) {
  if (format == Format::Json) {
    out << report.dump(2) << '\n';
  } else {
    flatten(report, "", out);
  }
}

/// Table output: CSV with a header row, or {"columns": [...], "rows": [[...]]}.
void emit_table(const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows,
                Format format, std::ostream& out) {
  if (format == Format::Json) {
    Json j{{"columns", columns}, {"rows", rows}};
    out << j.dump(2) << '\n';
    return;
  }
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << number(row[i]);
    out << '\n';
  }
}

struct Loaded {
  ProblemSpec spec;
  Model model;
};

Loaded load(const Settings& s) {
  Loaded l{load_problem(s.file), {}};
  if (s.tol) {
    if (!(*s.tol > 0.0)) throw InvalidArgument("--tol must be > 0");
    l.spec.tolerances.rel = *s.tol;
  }
  l.model = build_model(l.spec);
  return l;
}

std::vector<double> analysis_grid(const ProblemSpec& spec) {
  return chebyshev_grid(spec.system.t0, spec.system.t0 + spec.analysis_window(), 33);
}

Json model_json(const Loaded& l) {
  const StructuredSystem& s = *l.model.structured;
  Json j;
  j["form"] = l.spec.system.structured() ? "structured" : "general";
  j["alpha"] = s.alpha();
  j["beta"] = s.beta();
  j["constants"] = l.model.fit ? "fitted" : "given";
  if (l.model.fit) {
    j["fit_residual"] = l.model.fit->residual;
    j["fit_threshold"] = l.model.fit->threshold;
  }
  return j;
}

// ---- analyze ---------------------------------------------------------------

Json analyze(const Loaded& l) {
  const StructuredSystem& s = *l.model.structured;
  const FundamentalMatrix fm(s);
  const GammaClass& gc = fm.gamma();
  const auto grid = analysis_grid(l.spec);

  Json j = model_json(l);
  j["gamma_sq"] = gc.gamma_sq;
  j["branch"] = to_string(gc.branch);
  if (gc.branch == GammaBranch::RealPositive) j["gamma"] = gc.root;
  if (gc.branch == GammaBranch::Imaginary) j["omega"] = gc.root;
  j["f_behaviour"] = to_string(primitive_asymptotics(s.a11(), s.t0()));
  j["g_behaviour"] = to_string(primitive_asymptotics(s.a12(), s.t0()));
  j["asymptotics"] = to_string(classify_asymptotics(fm));
  j["window_begin"] = grid.front();
  j["window_end"] = grid.back();
  j["commutation_residual"] = commutation_residual(s, grid);
  j["derivative_commutation_residual"] = derivative_commutation_residual(s, grid);
  return j;
}

// ---- solve -----------------------------------------------------------------

int solve(const Loaded& l, const Settings& settings, std::ostream& out, std::ostream& err) {
  if (!l.spec.solve) throw InvalidArgument("solve needs a [solve] section");
  const auto& sv = *l.spec.solve;
  const StructuredSystem& s = *l.model.structured;
  const FundamentalMatrix fm(s);
  const double t0 = s.t0();
  const std::size_t n = sv.samples;

  std::vector<std::string> columns{"t", "x1", "x2"};
  std::vector<std::vector<double>> rows;
  rows.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = k + 1 == n ? sv.t_end : t0 + (sv.t_end - t0) * static_cast<double>(k) / (n - 1);
    const Vec2d x = solve_ivp(fm, sv.x0, t);
    rows.push_back({t, x(0), x(1)});
  }

  double worst = 0.0;
  if (settings.verify) {
    columns.insert(columns.end(), {"x1_rk45", "x2_rk45", "dx1", "dx2"});
    const GeneralSystem& g = l.model.general;
    const auto traj = rk45([&g](double t, const Vec2d& x) -> Vec2d { return g.matrix(t) * x; }, t0,
                           sv.x0, sv.t_end, l.spec.tolerances.rel, l.spec.tolerances.abs);
    for (auto& row : rows) {
      const Vec2d y = traj.at(row[0]);
      const double d1 = std::abs(row[1] - y(0));
      const double d2 = std::abs(row[2] - y(1));
      worst = std::max({worst, d1, d2});
      row.insert(row.end(), {y(0), y(1), d1, d2});
    }
  }
  emit_table(columns, rows, settings.format, out);
  if (settings.verify && !(worst <= 1e-6)) {
    err << "error: closed form and rk45 differ by " << number(worst) << " (limit 1e-06)\n";
    return kNumericalFailure;
  }
  return kSuccess;
}

// ---- floquet ---------------------------------------------------------------

Json floquet_json(const FloquetData& fd) {
  Json j;
  j["B"] = to_json(fd.B);
  j["exponents"] = to_json(fd.exponents);
  j["multipliers"] = to_json(fd.multipliers);
  j["raw_exponents"] = to_json(fd.raw_exponents);
  j["reduced"] = fd.reduced;
  j["defective"] = fd.defective;
  j["verdict"] = to_string(stability_verdict(fd));
  if (!fd.warnings.empty()) j["warnings"] = fd.warnings;
  return j;
}

double require_period(const ProblemSpec& spec) {
  if (!spec.period) throw InvalidArgument("this command needs a [floquet] section with a period");
  return *spec.period;
}

// For alpha = 0 the shortcut lambda+ = a11 + beta a12 / 2 is reported next to
// the general formula; the two differ unless beta mean(a12) = 0.
Json alpha_zero_json(const StructuredSystem& s, double T, const FloquetData& avg) {
  const Mat2d B = average_matrix(s, T);
  const double m11 = B(0, 0);
  const double m12 = B(0, 1);
  Json js;
  js["lambda_plus_shortcut"] = m11 + 0.5 * s.beta() * m12;
  js["lambda_minus_shortcut"] = m11;
  js["lambda_plus"] = avg.raw_exponents[0].real();
  js["lambda_minus"] = avg.raw_exponents[1].real();
  js["difference"] = std::abs(m11 + 0.5 * s.beta() * m12 - avg.raw_exponents[0].real());
  return js;
}

Json floquet(const Loaded& l) {
  const double T = require_period(l.spec);
  const StructuredSystem& s = *l.model.structured;
  const FloquetData avg = floquet_from_averages(s, T);
  const Monodromy mono = monodromy_numeric(l.model.general, T, l.spec.tolerances.rel);
  const FloquetData num = exponents_from_monodromy(mono);
  const TraceReport tr = trace_identities(s, T);

  Json j = model_json(l);
  j["period"] = T;
  j["averages"] = floquet_json(avg);
  Json jm = floquet_json(num);
  jm["C"] = to_json(mono.C);
  j["monodromy"] = std::move(jm);
  j["exponent_delta"] = exponent_distance(avg.exponents, num.exponents, T);
  Json jt;
  jt["trace_integral"] = tr.trace_integral;
  jt["sum_residual"] = tr.sum_residual;
  jt["product_residual"] = tr.product_residual;
  if (tr.sum_residual_averages) jt["sum_residual_averages"] = *tr.sum_residual_averages;
  if (tr.product_residual_averages) jt["product_residual_averages"] = *tr.product_residual_averages;
  j["trace"] = std::move(jt);

  if (s.alpha() == 0.0) j["alpha_zero"] = alpha_zero_json(s, T, avg);
  j["verdict"] = to_string(stability_verdict(avg));
  return j;
}

// ---- reduce ----------------------------------------------------------------

std::string signed_term(double c, const std::string& what) {
  if (c == 0.0) return {};
  return (c < 0.0 ? " - " : " + ") + short_number(std::abs(c)) + " " + what;
}

int reduce(const Loaded& l, const Settings& settings, std::ostream& out, std::ostream& err) {
  const StructuredSystem& s = *l.model.structured;
  const double a = s.t0();
  const double b = a + l.spec.analysis_window();
  const SecondOrderEquation eq = second_order_from_structured(s, a, b);

  const auto grid = chebyshev_grid(a, b, 33);
  std::vector<double> p, q;
  for (double t : grid) {
    p.push_back(eq.damping(t));
    q.push_back(eq.stiffness(t));
  }
  const auto flat = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo <= 1e-9 * (1.0 + std::abs(*hi) + std::abs(*lo));
  };
  const bool constant = flat(p) && flat(q);

  Json j = model_json(l);
  j["window_begin"] = a;
  j["window_end"] = b;
  j["constant_coefficients"] = constant;

  int code = kSuccess;
  if (settings.check) {
    // Companion system started from the scalar data of the first component;
    // its x must follow x1 of the closed form for two independent starts.
    const FundamentalMatrix fm(s);
    const GeneralSystem companion = system_from_second_order(eq, a);
    double worst = 0.0;
    for (const Vec2d& x0 : {Vec2d(1.0, 0.0), Vec2d(0.0, 1.0)}) {
      const Vec2d start(x0(0), (s.matrix(a) * x0)(0));
      const auto traj = rk45(
          [&companion](double t, const Vec2d& y) -> Vec2d { return companion.matrix(t) * y; }, a,
          start, b, 1e-11, 1e-13);
      for (double t : grid) {
        const double exact = solve_ivp(fm, x0, t)(0);
        worst = std::max(worst, std::abs(traj.at(t)(0) - exact) / (1.0 + std::abs(exact)));
      }
    }
    j["roundtrip_residual"] = worst;
    j["roundtrip_pass"] = worst <= 1e-6;
    if (!(worst <= 1e-6)) {
      err << "error: reduction round trip residual " << number(worst) << " exceeds 1e-06\n";
      code = kNumericalFailure;
    }
  }

  if (constant) {
    const double pc = p.front(), qc = q.front();
    j["p"] = pc;
    j["q"] = qc;
    j["equation"] = "x''" + signed_term(pc, "x'") + signed_term(qc, "x") + " = 0";
    emit(j, settings.format, out);
    return code;
  }
  if (settings.format == Format::Json) {
    Json table = Json::array();
    for (std::size_t k = 0; k < grid.size(); ++k) table.push_back({grid[k], p[k], q[k]});
    j["columns"] = {"t", "p", "q"};
    j["rows"] = std::move(table);
    emit(j, settings.format, out);
    return code;
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < grid.size(); ++k) rows.push_back({grid[k], p[k], q[k]});
  emit_table({"t", "p", "q"}, rows, settings.format, out);
  if (j.contains("roundtrip_residual"))
    err << "roundtrip_residual," << number(j["roundtrip_residual"].get<double>()) << '\n';
  return code;
}

// ---- verify ----------------------------------------------------------------

struct Check {
  std::string name;
  double value;
  double limit;
};

int verify(const Loaded& l, const Settings& settings, std::ostream& out, std::ostream& err) {
  const StructuredSystem& s = *l.model.structured;
  const GeneralSystem& g = l.model.general;
  const FundamentalMatrix fm(s);
  const auto grid = analysis_grid(l.spec);
  std::vector<Check> checks;
  Json alpha_zero;

  checks.push_back({"commutation", commutation_residual(s, grid), 1e-8});
  checks.push_back({"derivative_commutation", derivative_commutation_residual(s, grid), 1e-6});

  double oracle = 0.0, defining = 0.0, liouville = 0.0, structure = 0.0;
  constexpr double h = 1e-4;
  for (double t : grid) {
    const Mat2d P = fm(t);
    const Mat2d E = expm2(s.primitive(t));
    oracle = std::max(oracle, (P - E).norm() / E.norm());
    const Mat2d dP = (fm(t + h) - fm(t - h)) / (2.0 * h);
    defining = std::max(defining, (dP - g.matrix(t) * P).norm() / P.norm());
    const double det = fm.determinant(t);
    liouville = std::max(liouville, std::abs(P.determinant() - det) / det);
    structure = std::max(structure, (g.matrix(t) - s.matrix(t)).norm() / (1.0 + g.matrix(t).norm()));
  }
  checks.push_back({"structure", structure, 1e-8});
  checks.push_back({"closed_form_vs_expm", oracle, 1e-10});
  checks.push_back({"defining_property", defining, 1e-6});
  checks.push_back({"liouville", liouville, 1e-8});

  if (l.spec.solve) {
    const auto& sv = *l.spec.solve;
    const auto traj = rk45([&g](double t, const Vec2d& x) -> Vec2d { return g.matrix(t) * x; },
                           s.t0(), sv.x0, sv.t_end, l.spec.tolerances.rel, l.spec.tolerances.abs);
    double worst = 0.0;
    for (std::size_t k = 0; k < sv.samples; ++k) {
      const double t = s.t0() + (sv.t_end - s.t0()) * static_cast<double>(k) / (sv.samples - 1);
      worst = std::max(worst, (solve_ivp(fm, sv.x0, t) - traj.at(t)).cwiseAbs().maxCoeff());
    }
    checks.push_back({"trajectory_vs_rk45", worst, 1e-6});
  }

  if (l.spec.period) {
    const double T = *l.spec.period;
    const FloquetData avg = floquet_from_averages(s, T);
    const FloquetData num = exponents_from_monodromy(monodromy_numeric(g, T, l.spec.tolerances.rel));
    checks.push_back({"pipeline_delta", exponent_distance(avg.exponents, num.exponents, T), 1e-6});
    const TraceReport tr = trace_identities(s, T);
    checks.push_back({"trace_sum", tr.sum_residual, 1e-8});
    checks.push_back({"trace_product", tr.product_residual / (1.0 + std::exp(tr.trace_integral)), 1e-8});
    if (avg.B.imag().cwiseAbs().maxCoeff() == 0.0) {
      double periodic = 0.0;
      for (int k = 0; k < 5; ++k) {
        const double t = s.t0() + T * k / 5.0;
        const Mat2d P0 = periodic_part(fm, avg, t);
        periodic = std::max(periodic, (periodic_part(fm, avg, t + T) - P0).norm() / (1.0 + P0.norm()));
      }
      checks.push_back({"periodic_part", periodic, 1e-7});
    }
    if (s.alpha() == 0.0) alpha_zero = alpha_zero_json(s, T, avg);
  }

  Json j = model_json(l);
  bool all = true;
  Json jc = Json::object();
  for (const auto& c : checks) {
    const bool pass = c.value <= c.limit;
    all = all && pass;
    jc[c.name] = Json{{"value", c.value}, {"limit", c.limit}, {"pass", pass}};
  }
  j["checks"] = std::move(jc);
  if (!alpha_zero.is_null()) j["alpha_zero"] = std::move(alpha_zero);
  j["pass"] = all;
  emit(j, settings.format, out);
  if (!all) {
    err << "error: verification failed\n";
    return kNumericalFailure;
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-form analysis of commuting-class planar linear systems", "ltv"};
  app.require_subcommand(1);
  app.fallthrough();

  Settings settings;
  std::string format = "csv";
  double tol = 0.0;
  CLI::Option* tol_opt = app.add_option("--tol", tol, "relative integration tolerance");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));

  const auto with_file = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("file", settings.file, "problem file")->required();
    return sub;
  };
  CLI::App* analyze_cmd = with_file("analyze", "fit constants, gamma branch and asymptotics");
  CLI::App* solve_cmd = with_file("solve", "sample the closed-form solution");
  solve_cmd->add_flag("--verify", settings.verify, "add rk45 oracle columns");
  CLI::App* floquet_cmd = with_file("floquet", "Floquet exponents from both pipelines");
  CLI::App* reduce_cmd = with_file("reduce", "equivalent second-order equation");
  reduce_cmd->add_flag("--check", settings.check, "integrate the reduced equation back");
  CLI::App* verify_cmd = with_file("verify", "full residual suite");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  settings.format = format == "json" ? Format::Json : Format::Csv;
  if (tol_opt->count()) settings.tol = tol;

  try {
    const Loaded l = load(settings);
    if (analyze_cmd->parsed()) {
      emit(analyze(l), settings.format, out);
      return kSuccess;
    }
    if (solve_cmd->parsed()) return solve(l, settings, out, err);
    if (floquet_cmd->parsed()) {
      emit(floquet(l), settings.format, out);
      return kSuccess;
    }
    if (reduce_cmd->parsed()) return reduce(l, settings, out, err);
    if (verify_cmd->parsed()) return verify(l, settings, out, err);
    return kUsageError;
  } catch (const NotCommutingClass& e) {
    err << "error: NotCommutingClass: " << e.what() << '\n';
    return kModelRejected;
  } catch (const DegenerateA12& e) {
    err << "error: DegenerateA12: " << e.what() << '\n';
    return kModelRejected;
  } catch (const ModelRejection& e) {
    err << "error: " << e.what() << '\n';
    return kModelRejected;
  } catch (const SyntaxError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const UnknownIdentifier& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ZeroCrossing& e) {
    err << "error: ZeroCrossing: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace ltv::cli
