#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "ltv/error.hpp"
#include "ltv/expr.hpp"

using namespace ltv;

namespace {

// Random well-formed source text over the full grammar.
class SourceGenerator {
 public:
  explicit SourceGenerator(unsigned seed) : rng_(seed) {}

  std::string expression(int depth = 0) {
    const int pick = depth > 5 ? pick_in(0, 2) : pick_in(0, 9);
    switch (pick) {
      case 0: return number();
      case 1: return "t";
      case 2: return pick_in(0, 1) ? "pi" : "e";
      case 3: return "-" + expression(depth + 1);
      case 4: return expression(depth + 1) + binary_op() + expression(depth + 1);
      case 5: return "(" + expression(depth + 1) + ")";
      case 6: return function() + "(" + expression(depth + 1) + ")";
      case 7: return expression(depth + 1) + "^" + expression(depth + 1);
      case 8: return " " + expression(depth + 1) + "\t";
      default: return expression(depth + 1) + " * " + expression(depth + 1);
    }
  }

  std::mt19937& rng() { return rng_; }

 private:
  int pick_in(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::string number() {
    static const char* kNumbers[] = {"0", "1", "2", "0.5", "3.25", "1e3", "2.5E-2", "10", ".5", "7."};
    return kNumbers[pick_in(0, 9)];
  }
  std::string binary_op() {
    static const char* kOps[] = {"+", "-", "*", "/", " + ", " - "};
    return kOps[pick_in(0, 5)];
  }
  std::string function() {
    static const char* kFns[] = {"sin", "cos",  "tan", "sinh", "cosh", "tanh",
                                 "exp", "ln", "sqrt", "abs", "erf", "erfi"};
    return kFns[pick_in(0, 11)];
  }

  std::mt19937 rng_;
};

double eval_or_nan(const Expression& e, double t) {
  try {
    return eval(e, t);
  } catch (const DomainError&) {
    return std::nan("");
  }
}

}  // namespace

TEST_CASE("grammar fixtures") {
  const Expression e = parse("cos(t)^2");
  REQUIRE(e.root().kind == NodeKind::Pow);
  CHECK(e.root().lhs->kind == NodeKind::Call);
  CHECK(e.root().lhs->function == Function::Cos);
  CHECK(e.root().lhs->lhs->kind == NodeKind::Time);
  CHECK(e.root().rhs->kind == NodeKind::Number);
  CHECK(e.root().rhs->value == 2.0);

  const Expression g = parse("-1 - cos(t)^2");
  REQUIRE(g.root().kind == NodeKind::Sub);
  CHECK(g.root().lhs->kind == NodeKind::Negate);
  CHECK(g.root().lhs->lhs->value == 1.0);
  CHECK(g.root().rhs->kind == NodeKind::Pow);

  // ^ binds tighter than unary minus and is right-associative.
  CHECK(eval(parse("-2^2"), 0.0) == -4.0);
  CHECK(eval(parse("2^3^2"), 0.0) == 512.0);
  CHECK(eval(parse("2^-1"), 0.0) == 0.5);
  CHECK(eval(parse("(-2)^2"), 0.0) == 4.0);
  CHECK(eval(parse("8 - 3 - 2"), 0.0) == 3.0);
  CHECK(eval(parse("8 / 4 / 2"), 0.0) == 1.0);
  CHECK(eval(parse("1 + 2 * 3"), 0.0) == 7.0);
  CHECK(eval(parse("--t"), 3.0) == 3.0);
  CHECK(eval(parse("  t\t*\n2 "), 1.5) == 3.0);
  CHECK(eval(parse("pi"), 0.0) == std::numbers::pi);
  CHECK(eval(parse("e"), 0.0) == std::numbers::e);
  CHECK(eval(parse("1e-3"), 0.0) == 1e-3);
  CHECK(eval(parse("2.5E+2"), 0.0) == 250.0);
}

TEST_CASE("syntax errors carry offsets and expected tokens") {
  try {
    parse("2t");
    FAIL("accepted implicit multiplication");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 1);
    CHECK_FALSE(e.expected().empty());
  }
  const auto offset_of = [](const char* src) -> long {
    try {
      parse(src);
    } catch (const SyntaxError& e) {
      return static_cast<long>(e.offset());
    }
    return -1;
  };
  CHECK(offset_of("") == 0);
  CHECK(offset_of("1 +") == 3);
  CHECK(offset_of("(t") == 2);
  CHECK(offset_of("sin t") == 4);
  CHECK(offset_of("t)") == 1);
  CHECK(offset_of("1e") == 1);
  CHECK(offset_of("3 ** 2") == 3);

  try {
    parse("1 + foo(t)");
    FAIL("accepted unknown identifier");
  } catch (const UnknownIdentifier& e) {
    CHECK(e.offset() == 4);
    CHECK(e.name() == "foo");
  }
  CHECK_THROWS_AS(parse("x"), UnknownIdentifier);
  CHECK_THROWS_AS(parse("sin"), SyntaxError);
}

TEST_CASE("nesting depth is bounded") {
  std::string deep(10000, '(');
  deep += "t";
  deep += std::string(10000, ')');
  CHECK_THROWS_AS(parse(deep), SyntaxError);
  CHECK_THROWS_AS(parse(std::string(100000, '-') + "1"), SyntaxError);
  std::string ok(100, '(');
  ok += "t" + std::string(100, ')');
  CHECK(eval(parse(ok), 2.0) == 2.0);
}

TEST_CASE("evaluation and domain errors") {
  CHECK(eval(parse("cos(t)^2"), 0.0) == 1.0);
  CHECK(eval(parse("erfi(t)"), 1.0) == doctest::Approx(1.650425758797542876).epsilon(1e-14));
  CHECK(eval(parse("abs(t) + sqrt(4) + ln(e) + exp(0)"), -2.0) == 6.0);
  CHECK(eval(parse("erf(t)"), 1.0) == doctest::Approx(std::erf(1.0)));
  CHECK(eval(parse("tanh(t) - sinh(t)/cosh(t)"), 0.7) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval(parse("(-8)^(1/3)"), 0.0), DomainError);

  CHECK_THROWS_AS(eval(parse("1/t"), 0.0), DomainError);
  CHECK_THROWS_AS(eval(parse("ln(t)"), 0.0), DomainError);
  CHECK_THROWS_AS(eval(parse("ln(t)"), -1.0), DomainError);
  CHECK_THROWS_AS(eval(parse("sqrt(t)"), -1.0), DomainError);
  CHECK_THROWS_AS(eval(parse("t^0.5"), -1.0), DomainError);
  CHECK_THROWS_AS(eval(parse("t^-1"), 0.0), DomainError);
  CHECK_THROWS_AS(eval(parse("exp(t)"), 1000.0), DomainError);
  CHECK(eval(parse("t^3"), -2.0) == -8.0);
  try {
    eval(parse("1 + 1/(t - 1)"), 1.0);
    FAIL("no domain error");
  } catch (const DomainError& e) {
    CHECK(e.subexpression() == "1 / (t - 1)");
  }
}

TEST_CASE("algebraic identities hold on random inputs") {
  const Expression pyth = parse("sin(t)^2 + cos(t)^2");
  const Expression odd = parse("erfi(t)");
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::uniform_real_distribution<double> v(-6.0, 6.0);
  for (int k = 0; k < 10000; ++k) {
    CHECK(std::abs(pyth(u(rng)) - 1.0) <= 1e-14);
    const double x = v(rng);
    CHECK(odd(-x) == -odd(x));
  }
}

TEST_CASE("time dependence") {
  CHECK(parse("t").depends_on_time());
  CHECK(parse("sin(2*t) + 1").depends_on_time());
  CHECK_FALSE(parse("sin(2*pi) + e^2").depends_on_time());
}

TEST_CASE("pretty-print round trip is the identity on the tree") {
  for (const char* src :
       {"cos(t)^2", "-1 - cos(t)^2", "-(1 - t)", "(t - 1) - (t - 2)", "2^(3^2)", "(2^3)^2",
        "-t^2", "(-t)^2", "t / (2 * t)", "t * (2 / t)", "t - (-1)", "exp(-t^2) * erfi(t)",
        "1e300 * t", "0.1 + 0.2", "2^-t"}) {
    CAPTURE(src);
    const Expression e = parse(src);
    const std::string printed = to_string(e);
    CHECK(parse(printed) == e);
    CHECK(to_string(parse(printed)) == printed);
  }
  CHECK(to_string(parse("((t))")) == "t");
  CHECK(to_string(parse("1 + (2 * 3)")) == "1 + 2 * 3");
  CHECK(to_string(parse("(1 + 2) * 3")) == "(1 + 2) * 3");

  SourceGenerator gen(1234);
  for (int k = 0; k < 20000; ++k) {
    const std::string src = gen.expression();
    CAPTURE(src);
    const Expression e = parse(src);
    const Expression back = parse(to_string(e));
    CHECK(back == e);
    const double t = 0.37;
    const double a = eval_or_nan(e, t);
    const double b = eval_or_nan(back, t);
    CHECK(((std::isnan(a) && std::isnan(b)) || a == b));
  }
}

TEST_CASE("fuzzing the parser never crashes") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> len(0, 40);
  std::uniform_int_distribution<int> byte(0, 255);
  static const char kAlphabet[] = "0123456789.eE+-*/^() tsincoxpqrlabhf,\t";
  std::uniform_int_distribution<int> letter(0, sizeof kAlphabet - 2);
  SourceGenerator gen(99);

  long accepted = 0, rejected = 0;
  for (int k = 0; k < 100000; ++k) {
    std::string src;
    switch (k % 3) {
      case 0:
        for (int i = len(rng); i > 0; --i) src += static_cast<char>(byte(rng));
        break;
      case 1:
        for (int i = len(rng); i > 0; --i) src += kAlphabet[letter(rng)];
        break;
      default: {
        // Mutated well-formed input.
        src = gen.expression();
        if (!src.empty()) {
          std::uniform_int_distribution<std::size_t> at(0, src.size() - 1);
          src[at(rng)] = kAlphabet[letter(rng)];
          if (k % 2) src.erase(at(rng), 1);
        }
      }
    }
    try {
      const Expression e = parse(src);
      ++accepted;
      (void)eval_or_nan(e, 0.5);
      CHECK(parse(to_string(e)) == e);
    } catch (const SyntaxError& e) {
      ++rejected;
      CHECK(e.offset() <= src.size());
    } catch (const UnknownIdentifier& e) {
      ++rejected;
      CHECK(e.offset() < src.size());
    }
  }
  CHECK(accepted + rejected == 100000);
  CHECK(accepted > 0);
  CHECK(rejected > 0);
}
