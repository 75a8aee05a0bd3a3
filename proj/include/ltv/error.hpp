#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ltv {

/// Compact number text for diagnostics ("%.6g").
inline std::string short_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// ---- expression language -------------------------------------------------

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& found)
      : Error(format(offset, expected, found)), offset_(offset), expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string format(std::size_t offset, const std::vector<std::string>& expected,
                            const std::string& found) {
    std::string msg = "syntax error at offset " + std::to_string(offset) + ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) msg += i + 1 == expected.size() ? " or " : ", ";
      msg += expected[i];
    }
    return msg + ", found " + found;
  }

  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(std::size_t offset, std::string name)
      : Error("unknown identifier '" + name + "' at offset " + std::to_string(offset)),
        offset_(offset),
        name_(std::move(name)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::size_t offset_;
  std::string name_;
};

/// Evaluation left the domain of an operator (ln of non-positive, 1/0, ...).
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string subexpression)
      : Error(what + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}

  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

// ---- numerics --------------------------------------------------------------

class OverflowError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Adaptive step fell below 1e-14 |t1 - t0|.
class StepUnderflow : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class InversionFailure : public Error {
 public:
  using Error::Error;
};

/// Two routes that must agree did not.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// ---- model -----------------------------------------------------------------

class ModelRejection : public Error {
 public:
  using Error::Error;
};

class NotCommutingClass : public ModelRejection {
 public:
  NotCommutingClass(double residual, double threshold)
      : ModelRejection("not in the commuting class: fit residual " + short_text(residual) +
                       " exceeds " + short_text(threshold)),
        residual_(residual),
        threshold_(threshold) {}

  double residual() const noexcept { return residual_; }
  double threshold() const noexcept { return threshold_; }

 private:
  double residual_;
  double threshold_;
};

class DegenerateA12 : public ModelRejection {
 public:
  using ModelRejection::ModelRejection;
};

/// a12 vanishes inside the window, so the second-order reduction is singular.
class ZeroCrossing : public Error {
 public:
  explicit ZeroCrossing(double time)
      : Error("a12 vanishes near t = " + std::to_string(time)), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace ltv
