#include "ltv/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "ltv/error.hpp"
#include "ltv/special.hpp"

namespace ltv {
namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

constexpr std::size_t kMaxDepth = 256;

constexpr std::array<std::pair<std::string_view, Function>, 12> kFunctions = {{
    {"sin", Function::Sin},
    {"cos", Function::Cos},
    {"tan", Function::Tan},
    {"sinh", Function::Sinh},
    {"cosh", Function::Cosh},
    {"tanh", Function::Tanh},
    {"exp", Function::Exp},
    {"ln", Function::Ln},
    {"sqrt", Function::Sqrt},
    {"abs", Function::Abs},
    {"erf", Function::Erf},
    {"erfi", Function::Erfi},
}};

NodePtr make_leaf(NodeKind kind, double value, std::string_view name = {}) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->value = value;
  n->name = name;
  return n;
}

NodePtr make_unary(NodeKind kind, NodePtr operand) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->lhs = std::move(operand);
  return n;
}

NodePtr make_binary(NodeKind kind, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr make_call(Function f, NodePtr arg) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Call;
  n->function = f;
  n->lhs = std::move(arg);
  return n;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    if (src_.empty()) throw SyntaxError(0, {"expression"}, "end of input");
    NodePtr e = expression();
    skip_ws();
    if (pos_ != src_.size()) fail({"operator", "end of input"});
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxDepth) {
        --p.depth_;
        throw SyntaxError(p.pos_, {"shallower nesting"}, "nesting deeper than 256 levels");
      }
    }
    ~DepthGuard() { --p.depth_; }
  };

  void skip_ws() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  std::string describe_here() const {
    if (pos_ >= src_.size()) return "end of input";
    const unsigned char c = static_cast<unsigned char>(src_[pos_]);
    if (std::isprint(c)) return std::string("'") + src_[pos_] + "'";
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%02x", c);
    return std::string("byte ") + buf;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    throw SyntaxError(pos_, std::move(expected), describe_here());
  }

  NodePtr expression() {
    DepthGuard guard(*this);
    NodePtr lhs = term();
    for (;;) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      NodePtr rhs = term();
      lhs = make_binary(c == '+' ? NodeKind::Add : NodeKind::Sub, std::move(lhs), std::move(rhs));
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      NodePtr rhs = unary();
      lhs = make_binary(c == '*' ? NodeKind::Mul : NodeKind::Div, std::move(lhs), std::move(rhs));
    }
  }

  NodePtr unary() {
    DepthGuard guard(*this);
    if (peek() == '-') {
      ++pos_;
      return make_unary(NodeKind::Negate, unary());
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (peek() == '^') {
      ++pos_;
      return make_binary(NodeKind::Pow, std::move(base), unary());
    }
    return base;
  }

  NodePtr primary() {
    const char c = peek();
    if (is_digit(c) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      NodePtr inner = expression();
      if (peek() != ')') fail({"')'"});
      ++pos_;
      return inner;
    }
    if (is_ident_start(c)) return identifier();
    fail({"number", "identifier", "'('", "'-'"});
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ - start == 1 && src_[start] == '.') {
      pos_ = start;
      fail({"digit"});
    }
    // Exponent only when digits follow; "2e" leaves 'e' for the caller.
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
      if (q < src_.size() && is_digit(src_[q])) {
        pos_ = q;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_ || !std::isfinite(value)) {
      pos_ = start;
      fail({"representable number"});
    }
    return make_leaf(NodeKind::Number, value);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "t") return make_leaf(NodeKind::Time, 0.0);
    if (name == "pi") return make_leaf(NodeKind::Constant, std::numbers::pi, "pi");
    if (name == "e") return make_leaf(NodeKind::Constant, std::numbers::e, "e");
    for (const auto& [fname, f] : kFunctions) {
      if (name != fname) continue;
      if (peek() != '(') fail({"'('"});
      ++pos_;
      NodePtr arg = expression();
      if (peek() != ')') fail({"')'"});
      ++pos_;
      return make_call(f, std::move(arg));
    }
    throw UnknownIdentifier(start, std::string(name));
  }
};

int precedence(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub:
      return 1;
    case NodeKind::Mul:
    case NodeKind::Div:
      return 2;
    case NodeKind::Negate:
      return 3;
    case NodeKind::Pow:
      return 4;
    default:
      return 5;
  }
}

void print(const ExprNode& n, std::string& out);

void print_wrapped(const ExprNode& n, bool parens, std::string& out) {
  if (parens) out += '(';
  print(n, out);
  if (parens) out += ')';
}

void print(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Number: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, n.value);
      out.append(buf, res.ptr);
      return;
    }
    case NodeKind::Time:
      out += 't';
      return;
    case NodeKind::Constant:
      out += n.name;
      return;
    case NodeKind::Negate:
      out += '-';
      print_wrapped(*n.lhs, precedence(*n.lhs) < 3, out);
      return;
    case NodeKind::Call:
      out += function_name(n.function);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
    case NodeKind::Pow:
      print_wrapped(*n.lhs, precedence(*n.lhs) <= 4, out);
      out += '^';
      print_wrapped(*n.rhs, precedence(*n.rhs) < 3, out);
      return;
    default: {
      const int p = precedence(n);
      const char op = n.kind == NodeKind::Add   ? '+'
                      : n.kind == NodeKind::Sub ? '-'
                      : n.kind == NodeKind::Mul ? '*'
                                                : '/';
      print_wrapped(*n.lhs, precedence(*n.lhs) < p, out);
      out += ' ';
      out += op;
      out += ' ';
      print_wrapped(*n.rhs, precedence(*n.rhs) <= p, out);
      return;
    }
  }
}

double finite_or_throw(double v, const ExprNode& n) {
  if (!std::isfinite(v)) throw DomainError("result is not finite", to_string(n));
  return v;
}

double evaluate(const ExprNode& n, double t) {
  switch (n.kind) {
    case NodeKind::Number:
    case NodeKind::Constant:
      return n.value;
    case NodeKind::Time:
      return t;
    case NodeKind::Negate:
      return -evaluate(*n.lhs, t);
    case NodeKind::Add:
      return finite_or_throw(evaluate(*n.lhs, t) + evaluate(*n.rhs, t), n);
    case NodeKind::Sub:
      return finite_or_throw(evaluate(*n.lhs, t) - evaluate(*n.rhs, t), n);
    case NodeKind::Mul:
      return finite_or_throw(evaluate(*n.lhs, t) * evaluate(*n.rhs, t), n);
    case NodeKind::Div: {
      const double num = evaluate(*n.lhs, t);
      const double den = evaluate(*n.rhs, t);
      if (den == 0.0) throw DomainError("division by zero", to_string(n));
      return finite_or_throw(num / den, n);
    }
    case NodeKind::Pow: {
      const double base = evaluate(*n.lhs, t);
      const double expo = evaluate(*n.rhs, t);
      if (base < 0.0 && expo != std::trunc(expo))
        throw DomainError("negative base with non-integer exponent", to_string(n));
      if (base == 0.0 && expo < 0.0) throw DomainError("division by zero", to_string(n));
      return finite_or_throw(std::pow(base, expo), n);
    }
    case NodeKind::Call: {
      const double x = evaluate(*n.lhs, t);
      switch (n.function) {
        case Function::Sin:
          return std::sin(x);
        case Function::Cos:
          return std::cos(x);
        case Function::Tan:
          return finite_or_throw(std::tan(x), n);
        case Function::Sinh:
          return finite_or_throw(std::sinh(x), n);
        case Function::Cosh:
          return finite_or_throw(std::cosh(x), n);
        case Function::Tanh:
          return std::tanh(x);
        case Function::Exp:
          return finite_or_throw(std::exp(x), n);
        case Function::Ln:
          if (x <= 0.0) throw DomainError("logarithm of a non-positive value", to_string(n));
          return std::log(x);
        case Function::Sqrt:
          if (x < 0.0) throw DomainError("square root of a negative value", to_string(n));
          return std::sqrt(x);
        case Function::Abs:
          return std::abs(x);
        case Function::Erf:
          return std::erf(x);
        case Function::Erfi:
          return finite_or_throw(erfi(x), n);
      }
    }
  }
  return 0.0;  // unreachable
}

bool contains_time(const ExprNode& n) {
  if (n.kind == NodeKind::Time) return true;
  if (n.lhs && contains_time(*n.lhs)) return true;
  return n.rhs && contains_time(*n.rhs);
}

bool same_tree(const ExprNode* a, const ExprNode* b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Number:
      return a->value == b->value;
    case NodeKind::Constant:
      return a->name == b->name;
    case NodeKind::Call:
      if (a->function != b->function) return false;
      break;
    default:
      break;
  }
  return same_tree(a->lhs.get(), b->lhs.get()) && same_tree(a->rhs.get(), b->rhs.get());
}

}  // namespace

const char* function_name(Function f) {
  for (const auto& [name, fn] : kFunctions)
    if (fn == f) return name.data();
  return "?";
}

double Expression::operator()(double t) const { return eval(*this, t); }

bool Expression::depends_on_time() const { return root_ && contains_time(*root_); }

bool operator==(const Expression& a, const Expression& b) {
  return same_tree(a.root_.get(), b.root_.get());
}

Expression parse(std::string_view source) { return Expression(Parser(source).parse()); }

double eval(const Expression& e, double t) {
  if (e.empty()) throw InvalidArgument("eval: empty expression");
  if (!std::isfinite(t)) throw InvalidArgument("eval: non-finite time");
  return evaluate(e.root(), t);
}

std::string to_string(const ExprNode& node) {
  std::string out;
  print(node, out);
  return out;
}

std::string to_string(const Expression& e) { return e.empty() ? std::string() : to_string(e.root()); }

}  // namespace ltv
