#pragma once

// Coefficient-function expression language.
//
//   expr    := term   { ('+' | '-') term }
//   term    := unary  { ('*' | '/') unary }
//   unary   := '-' unary | power
//   power   := primary [ '^' unary ]            (right associative)
//   primary := number | 't' | 'pi' | 'e'
//            | function '(' expr ')' | '(' expr ')'
//   function:= sin | cos | tan | sinh | cosh | tanh | exp | ln | sqrt
//            | abs | erf | erfi
//
// `^` binds tighter than unary minus, so "-t^2" is -(t^2). Juxtaposition is
// not multiplication: "2t" is a syntax error.

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

namespace ltv {

enum class NodeKind { Number, Time, Constant, Negate, Add, Sub, Mul, Div, Pow, Call };

enum class Function { Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Ln, Sqrt, Abs, Erf, Erfi };

const char* function_name(Function f);

struct ExprNode {
  NodeKind kind;
  double value = 0.0;           // Number, Constant
  Function function{};          // Call
  std::string_view name;        // Constant: "pi" or "e"
  std::shared_ptr<const ExprNode> lhs;  // unary operand / left operand / call argument
  std::shared_ptr<const ExprNode> rhs;
};

/// Immutable parsed expression; cheap to copy and safe to share across threads.
class Expression {
 public:
  Expression() = default;
  explicit Expression(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}

  const ExprNode& root() const { return *root_; }
  bool empty() const { return !root_; }

  double operator()(double t) const;

  /// True when the tree contains the variable `t`.
  bool depends_on_time() const;

  friend bool operator==(const Expression& a, const Expression& b);

 private:
  std::shared_ptr<const ExprNode> root_;
};

/// Throws SyntaxError (byte offset + expected set) or UnknownIdentifier.
Expression parse(std::string_view source);

/// Throws DomainError naming the offending subexpression.
double eval(const Expression& e, double t);

/// Canonical text; parse(to_string(e)) == e.
std::string to_string(const Expression& e);
std::string to_string(const ExprNode& node);

}  // namespace ltv
