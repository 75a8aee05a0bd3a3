#pragma once

// Problem files: INI-style sections with `key = value` lines; expression
// values may be quoted. Comments start with ';' or '#'.
//
//   [system]
//   a11   = "-1 - cos(t)^2"     ; always required
//   a12   = "-cos(t)^2"         ; always required
//   alpha = -2                  ; structured form: alpha and beta ...
//   beta  = -2
//   a21   = "2*cos(t)^2"        ; ... or general form: a21 and a22
//   a22   = "-1 + cos(t)^2"
//   t0    = 0
//   window = 3                  ; probe window length (optional)
//   a11_antiderivative = "..."  ; optional closed forms
//   a12_antiderivative = "..."
//   f_behaviour = bounded       ; optional: bounded, +inf, -inf, zero, unknown
//   g_behaviour = +inf
//
//   [floquet]
//   period = pi
//
//   [solve]
//   x0 = "0, 1"
//   t_end = 5
//   samples = 101
//
//   [tolerances]
//   rel = 1e-10
//   abs = 1e-12
//   fit = 1e-8

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include "ltv/expr.hpp"
#include "ltv/numerics.hpp"
#include "ltv/sysmodel.hpp"

namespace ltv {

struct ProblemSpec {
  struct System {
    Expression a11, a12;
    std::optional<Expression> a21, a22;
    std::optional<double> alpha, beta;
    double t0 = 0.0;
    std::optional<double> window;
    std::optional<Expression> a11_antiderivative, a12_antiderivative;
    Asymptotic f_behaviour = Asymptotic::Unknown;
    Asymptotic g_behaviour = Asymptotic::Unknown;

    bool structured() const { return alpha.has_value(); }
  };
  struct Solve {
    Vec2d x0 = Vec2d::Zero();
    double t_end = 0.0;
    std::size_t samples = 101;
  };
  struct Tolerances {
    double rel = 1e-10;
    double abs = 1e-12;
    double fit = 1e-8;
  };

  System system;
  std::optional<double> period;
  std::optional<Solve> solve;
  Tolerances tolerances;

  /// Length of the probe window: [system] window, else t_end - t0, else the
  /// period, else 3.
  double analysis_window() const;
};

/// Throws InvalidArgument (with the offending key) or the expression errors.
ProblemSpec parse_problem(std::istream& in);
ProblemSpec load_problem(const std::string& path);

struct Model {
  GeneralSystem general;
  std::optional<StructuredSystem> structured;
  std::optional<FitReport> fit;  ///< present for general-form input
};

/// Builds the coefficient functions (with declared period and closed forms)
/// and, when requested, fits the commuting structure.
GeneralSystem build_general(const ProblemSpec& spec);
/// Throws NotCommutingClass / DegenerateA12 for general-form input that is
/// not in the commuting class.
Model build_model(const ProblemSpec& spec);

}  // namespace ltv
