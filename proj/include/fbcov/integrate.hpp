#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <tuple>
#include <utility>
#include <stdexcept>
#include <vector>

namespace fbcov {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;  // |K15 - G7| summed over the final partition
  int evaluations = 0;
  int intervals = 0;
};

struct IntegrationOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  int max_intervals = 4000;
  int initial_panels = 1;  // split [a, b] evenly before adapting
};

namespace detail {

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
/// Bisects the segment with the largest error estimate until the summed
/// estimate drops below max(abs_tol, rel_tol * |I|). Throws IntegrationError
/// if max_intervals is reached first.
template <class F>
IntegrationResult integrate_adaptive(F&& f, double a, double b,
                                     const IntegrationOptions& opt = {}) {
  if (!(b > a)) throw std::invalid_argument("integrate_adaptive: need b > a");
  std::priority_queue<detail::Segment> heap;
  IntegrationResult res;
  const int panels = std::max(1, opt.initial_panels);
  const double width = (b - a) / panels;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == panels) ? b : a + (i + 1) * width;
    heap.push(detail::kronrod15(f, lo, hi));
    res.evaluations += 15;
  }
  auto totals = [&heap] {
    // Re-summing from scratch avoids drift from incremental updates.
    auto copy = heap;
    double v = 0.0, e = 0.0;
    while (!copy.empty()) {
      v += copy.top().value;
      e += copy.top().error;
      copy.pop();
    }
    return std::pair{v, e};
  };
  double value = 0.0, error = 0.0;
  std::tie(value, error) = totals();
  while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
    if (static_cast<int>(heap.size()) >= opt.max_intervals) {
      throw IntegrationError("integrate_adaptive: tolerance not reached within interval budget");
    }
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::kronrod15(f, worst.a, mid);
    const auto right = detail::kronrod15(f, mid, worst.b);
    res.evaluations += 30;
    heap.push(left);
    heap.push(right);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    if (heap.size() % 64 == 0) std::tie(value, error) = totals();
  }
  std::tie(value, error) = totals();
  res.value = value;
  res.error = error;
  res.intervals = static_cast<int>(heap.size());
  return res;
}

}  // namespace fbcov
