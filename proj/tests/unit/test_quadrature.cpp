#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "ltv/error.hpp"
#include "ltv/quadrature.hpp"
#include "ltv/special.hpp"

using namespace ltv;

namespace {

// Reference values computed with mpmath at 30 digits.
struct Ref {
  double x, erfi, dawson;
};
constexpr Ref kRefs[] = {
    {0.1, 0.11321517416959979929, 0.099335992397852866508},
    {0.5, 0.61495209469651098084, 0.42443638350202229593},
    {1.0, 1.650425758797542876, 0.53807950691276841914},
    {2.0, 18.564802414575552599, 0.30134038892379196603},
    {3.5, 35282.28771517168531, 0.14962159308075648475},
    {4.0, 1296959.7307176392315, 0.12934800123600511559},
    {4.5, 80197458.901217478177, 0.11408861022682498016},
    {6.0, 411275145582823.87097, 0.084542688974543852239},
    {10.0, 1.5243074227086696994e+42, 0.050253847187598528033},
    {12.0, 1.6299357995243494037e+61, 0.041812876453988260318},
    {20.0, 1.4747975396287862024e+172, 0.025031367926403671947},
    {-1.3, -2.9560865768516224879, -0.48339751738482409884},
};

}  // namespace

TEST_CASE("Gauss-Kronrod on smooth integrands") {
  auto r = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(r.error <= 1e-10);

  r = integrate([](double x) { return std::exp(x); }, 0.0, 1.0);
  CHECK(std::abs(r.value - (std::numbers::e - 1.0)) < 1e-14);

  // Reversed limits negate the integral.
  r = integrate([](double x) { return x * x; }, 3.0, 0.0);
  CHECK(r.value == doctest::Approx(-9.0).epsilon(1e-14));

  r = integrate([](double) { return 1.0; }, 2.0, 2.0);
  CHECK(r.value == 0.0);
}

TEST_CASE("adaptive subdivision handles peaked and oscillatory integrands") {
  // Lorentzian peak of width 1e-3.
  const double eps = 1e-3;
  auto r = integrate([eps](double x) { return eps / (x * x + eps * eps); }, -1.0, 1.0);
  CHECK(r.value == doctest::Approx(2.0 * std::atan(1.0 / eps)).epsilon(1e-10));
  CHECK(r.intervals > 1);

  r = integrate([](double x) { return std::cos(50.0 * x); }, 0.0, 3.0);
  CHECK(std::abs(r.value - std::sin(150.0) / 50.0) < 1e-11);

  // Integrable endpoint singularity.
  r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                {1e-9, 1e-9, 4000});
  CHECK(std::abs(r.value - 2.0) < 1e-7);
}

TEST_CASE("quadrature failures") {
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / x; }, 0.0, 1.0), QuadratureError);
  CHECK_THROWS_AS(
      integrate([](double) { return std::numeric_limits<double>::quiet_NaN(); }, 0.0, 1.0),
      QuadratureError);
  QuadratureOptions tiny;
  tiny.max_subdivisions = 2;
  CHECK_THROWS_AS(integrate([](double x) { return std::sin(1.0 / (x + 1e-4)); }, 0.0, 1.0, tiny),
                  QuadratureError);
}

TEST_CASE("erfi and Dawson against high-precision references") {
  for (const auto& ref : kRefs) {
    CAPTURE(ref.x);
    CHECK(erfi(ref.x) == doctest::Approx(ref.erfi).epsilon(1e-13));
    CHECK(dawson(ref.x) == doctest::Approx(ref.dawson).epsilon(1e-13));
  }
  CHECK(erfi(0.0) == 0.0);
  CHECK(dawson(0.0) == 0.0);
  CHECK(std::isinf(erfi(30.0)));
  CHECK(erfi(-30.0) < 0.0);
}

TEST_CASE("erfi is odd and its derivative is 2/sqrt(pi) exp(x^2)") {
  for (double x = -5.0; x <= 5.0; x += 0.173) {
    CHECK(erfi(-x) == -erfi(x));
    const double h = 1e-5 * (1.0 + std::abs(x));
    const double d = (erfi(x + h) - erfi(x - h)) / (2.0 * h);
    CHECK(d == doctest::Approx(2.0 * std::numbers::inv_sqrtpi * std::exp(x * x)).epsilon(1e-7));
  }
}

TEST_CASE("erfi matches quadrature of exp(s^2)") {
  for (double x : {0.3, 1.0, 1.5, 2.7, 3.9, 4.2}) {
    const auto r = integrate([](double s) { return std::exp(s * s); }, 0.0, x, {0.0, 1e-13, 4000});
    CHECK(erfi(x) == doctest::Approx(2.0 * std::numbers::inv_sqrtpi * r.value).epsilon(1e-12));
  }
}
