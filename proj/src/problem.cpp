#include "ltv/problem.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ltv/error.hpp"

namespace ltv {
namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Removes surrounding quotes or a trailing comment from a raw INI value.
std::string clean_value(const std::string& key, const std::string& raw) {
  std::string v = trim(raw);
  if (!v.empty() && v.front() == '"') {
    const auto close = v.find('"', 1);
    if (close == std::string::npos) throw InvalidArgument("unterminated quote in '" + key + "'");
    const std::string rest = trim(std::string_view(v).substr(close + 1));
    if (!rest.empty() && rest.front() != ';' && rest.front() != '#')
      throw InvalidArgument("unexpected text after quoted value of '" + key + "'");
    return v.substr(1, close - 1);
  }
  const auto comment = v.find_first_of(";#");
  if (comment != std::string::npos) v = trim(std::string_view(v).substr(0, comment));
  return v;
}

Expression parse_field(const std::string& key, const std::string& text) {
  try {
    return parse(text);
  } catch (const Error& e) {
    throw InvalidArgument("in '" + key + "': " + e.what());
  }
}

double constant_field(const std::string& key, const std::string& text) {
  const Expression e = parse_field(key, text);
  if (e.depends_on_time()) throw InvalidArgument("'" + key + "' must not depend on t");
  const double v = eval(e, 0.0);
  if (!std::isfinite(v)) throw InvalidArgument("'" + key + "' is not finite");
  return v;
}

Asymptotic behaviour_field(const std::string& key, const std::string& text) {
  if (text == "bounded") return Asymptotic::Bounded;
  if (text == "+inf" || text == "inf") return Asymptotic::TendsToPlusInfinity;
  if (text == "-inf") return Asymptotic::TendsToMinusInfinity;
  if (text == "zero" || text == "0") return Asymptotic::TendsToZero;
  if (text == "unknown") return Asymptotic::Unknown;
  throw InvalidArgument("'" + key + "' must be one of bounded, +inf, -inf, zero, unknown");
}

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"system",
       {"a11", "a12", "a21", "a22", "alpha", "beta", "t0", "window", "a11_antiderivative",
        "a12_antiderivative", "f_behaviour", "g_behaviour"}},
      {"floquet", {"period"}},
      {"solve", {"x0", "t_end", "samples"}},
      {"tolerances", {"rel", "abs", "fit"}},
  };
  return keys;
}

}  // namespace

double ProblemSpec::analysis_window() const {
  if (system.window) return *system.window;
  if (solve && solve->t_end != system.t0) return std::abs(solve->t_end - system.t0);
  if (period) return *period;
  return 3.0;
}

ProblemSpec parse_problem(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgument(std::string("problem file: ") + e.what());
  }

  std::map<std::string, std::map<std::string, std::string>> values;
  for (const auto& [section, body] : tree) {
    const auto it = allowed_keys().find(section);
    if (it == allowed_keys().end() || body.empty())
      throw InvalidArgument("problem file: unknown section or top-level key '" + section + "'");
    for (const auto& [key, node] : body) {
      if (!it->second.count(key))
        throw InvalidArgument("problem file: unknown key '" + section + "." + key + "'");
      values[section][key] = clean_value(section + "." + key, node.data());
    }
  }

  const auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    const auto s = values.find(section);
    if (s == values.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
  };

  ProblemSpec spec;
  auto& sys = spec.system;
  const auto a11 = get("system", "a11");
  const auto a12 = get("system", "a12");
  if (!a11 || !a12) throw InvalidArgument("problem file: [system] needs a11 and a12");
  sys.a11 = parse_field("system.a11", *a11);
  sys.a12 = parse_field("system.a12", *a12);

  const bool has_constants = get("system", "alpha") || get("system", "beta");
  const bool has_entries = get("system", "a21") || get("system", "a22");
  if (has_constants == has_entries)
    throw InvalidArgument(
        "problem file: give exactly one of {alpha, beta} (structured) or {a21, a22} (general)");
  if (has_constants) {
    const auto alpha = get("system", "alpha");
    const auto beta = get("system", "beta");
    if (!alpha || !beta) throw InvalidArgument("problem file: structured form needs alpha and beta");
    sys.alpha = constant_field("system.alpha", *alpha);
    sys.beta = constant_field("system.beta", *beta);
  } else {
    const auto a21 = get("system", "a21");
    const auto a22 = get("system", "a22");
    if (!a21 || !a22) throw InvalidArgument("problem file: general form needs a21 and a22");
    sys.a21 = parse_field("system.a21", *a21);
    sys.a22 = parse_field("system.a22", *a22);
  }
  if (auto v = get("system", "t0")) sys.t0 = constant_field("system.t0", *v);
  if (auto v = get("system", "window")) {
    sys.window = constant_field("system.window", *v);
    if (!(*sys.window > 0.0)) throw InvalidArgument("problem file: window must be > 0");
  }
  if (auto v = get("system", "a11_antiderivative"))
    sys.a11_antiderivative = parse_field("system.a11_antiderivative", *v);
  if (auto v = get("system", "a12_antiderivative"))
    sys.a12_antiderivative = parse_field("system.a12_antiderivative", *v);
  if (auto v = get("system", "f_behaviour")) sys.f_behaviour = behaviour_field("system.f_behaviour", *v);
  if (auto v = get("system", "g_behaviour")) sys.g_behaviour = behaviour_field("system.g_behaviour", *v);

  if (auto v = get("floquet", "period")) {
    spec.period = constant_field("floquet.period", *v);
    if (!(*spec.period > 0.0)) throw InvalidArgument("problem file: period must be > 0");
  }

  if (values.count("solve")) {
    ProblemSpec::Solve solve;
    const auto x0 = get("solve", "x0");
    const auto t_end = get("solve", "t_end");
    if (!x0 || !t_end) throw InvalidArgument("problem file: [solve] needs x0 and t_end");
    const auto comma = x0->find(',');
    if (comma == std::string::npos || x0->find(',', comma + 1) != std::string::npos)
      throw InvalidArgument("problem file: x0 must be two comma-separated values");
    solve.x0 = Vec2d(constant_field("solve.x0", x0->substr(0, comma)),
                     constant_field("solve.x0", x0->substr(comma + 1)));
    solve.t_end = constant_field("solve.t_end", *t_end);
    if (auto v = get("solve", "samples")) {
      const double n = constant_field("solve.samples", *v);
      if (n < 2 || n > 1e7 || n != std::floor(n))
        throw InvalidArgument("problem file: samples must be an integer in [2, 1e7]");
      solve.samples = static_cast<std::size_t>(n);
    }
    spec.solve = solve;
  }

  if (auto v = get("tolerances", "rel")) spec.tolerances.rel = constant_field("tolerances.rel", *v);
  if (auto v = get("tolerances", "abs")) spec.tolerances.abs = constant_field("tolerances.abs", *v);
  if (auto v = get("tolerances", "fit")) spec.tolerances.fit = constant_field("tolerances.fit", *v);
  if (!(spec.tolerances.rel > 0.0) || !(spec.tolerances.abs > 0.0) || !(spec.tolerances.fit > 0.0))
    throw InvalidArgument("problem file: tolerances must be > 0");
  return spec;
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open problem file '" + path + "'");
  return parse_problem(in);
}

namespace {

CoefficientFunction make_coefficient(const Expression& e, const std::optional<Expression>& primitive,
                                     Asymptotic behaviour, const ProblemSpec& spec) {
  CoefficientFunction c = CoefficientFunction::from_expression(e);
  if (primitive) {
    const Expression p = *primitive;
    const double t0 = spec.system.t0;
    c = c.with_antiderivative([p](double t) { return eval(p, t); }, t0, t0 + spec.analysis_window());
  }
  if (spec.period) {
    try {
      c = c.with_period(*spec.period);
    } catch (const InvalidArgument&) {
      // Left undeclared; the Floquet report carries a warning.
    }
  }
  return c.with_primitive_behaviour(behaviour);
}

}  // namespace

GeneralSystem build_general(const ProblemSpec& spec) {
  const auto& sys = spec.system;
  GeneralSystem g;
  g.t0 = sys.t0;
  g.a11 = make_coefficient(sys.a11, sys.a11_antiderivative, sys.f_behaviour, spec);
  g.a12 = make_coefficient(sys.a12, sys.a12_antiderivative, sys.g_behaviour, spec);
  if (sys.structured()) {
    return StructuredSystem(g.a11, g.a12, *sys.alpha, *sys.beta, sys.t0).as_general();
  }
  g.a21 = make_coefficient(*sys.a21, std::nullopt, Asymptotic::Unknown, spec);
  g.a22 = make_coefficient(*sys.a22, std::nullopt, Asymptotic::Unknown, spec);
  return g;
}

Model build_model(const ProblemSpec& spec) {
  Model m;
  m.general = build_general(spec);
  if (spec.system.structured()) {
    m.structured.emplace(m.general.a11, m.general.a12, *spec.system.alpha, *spec.system.beta,
                         spec.system.t0);
    return m;
  }
  const auto grid =
      chebyshev_grid(spec.system.t0, spec.system.t0 + spec.analysis_window(), 33);
  m.fit = fit_constants(m.general, grid, spec.tolerances.fit);
  m.structured = fit_structure(m.general, grid, spec.tolerances.fit);
  return m;
}

}  // namespace ltv
