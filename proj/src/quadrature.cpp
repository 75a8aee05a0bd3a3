#include "ltv/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "ltv/error.hpp"

namespace ltv {
namespace {

// Kronrod nodes on [0, 1]; odd indices are the 7-point Gauss nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool at_rounding_floor = false;
  bool operator<(const Segment& other) const { return error < other.error; }
};

double checked(const std::function<double(double)>& f, double x) {
  const double v = f(x);
  if (!std::isfinite(v))
    throw QuadratureError("integrand is not finite at x = " + short_text(x));
  return v;
}

Segment gauss_kronrod15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double fc = checked(f, center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double abs_sum = std::abs(kronrod);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    f1[j] = checked(f, center - dx);
    f2[j] = checked(f, center + dx);
    kronrod += kKronrodWeights[j] * (f1[j] + f2[j]);
    abs_sum += kKronrodWeights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1[j] + f2[j]);
  }

  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j)
    asc += kKronrodWeights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  const double value = kronrod * half;
  asc *= std::abs(half);
  abs_sum *= std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  bool floor = false;
  if (abs_sum > std::numeric_limits<double>::min() / (50 * eps) && 50 * eps * abs_sum >= err) {
    err = 50 * eps * abs_sum;
    floor = true;
  }
  return {a, b, value, err, floor};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opt) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidArgument("integrate: non-finite limits");
  QuadratureResult out;
  if (a == b) return out;

  std::priority_queue<Segment> heap;
  heap.push(gauss_kronrod15(f, a, b));
  double total = heap.top().value;
  double total_err = heap.top().error;
  out.evaluations = 15;

  while (total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (heap.size() >= opt.max_subdivisions)
      throw QuadratureError("integrate: no convergence after " + std::to_string(heap.size()) +
                            " subdivisions (error estimate " + short_text(total_err) + ")");
    const Segment worst = heap.top();
    // Estimate is at the rounding floor.
    if (worst.at_rounding_floor) break;
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid == worst.a || mid == worst.b)
      throw QuadratureError("integrate: interval collapsed below machine resolution");
    const Segment left = gauss_kronrod15(f, worst.a, mid);
    const Segment right = gauss_kronrod15(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to shed the drift of the incremental updates.
  total = 0.0;
  total_err = 0.0;
  out.intervals = heap.size();
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = total_err;
  return out;
}

}  // namespace ltv
