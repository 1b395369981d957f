#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <type_traits>
#include <vector>

namespace clustersim::quad {

// 21-point Kronrod extension of the 10-point Gauss rule (abscissae on [-1,1]).
struct Kronrod21 {
  static const std::array<double, 11> nodes;
  static const std::array<double, 11> kronrod_weights;
  static const std::array<double, 5> gauss_weights;  // at nodes[1], nodes[3], ...
};

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  std::size_t max_intervals = 2000;
};

template <class T>
struct Result {
  T value{};
  double abs_error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& x) { return std::abs(x); }

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F, class T = std::invoke_result_t<F&, double>>
Panel<T> kronrod_panel(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const auto& x = Kronrod21::nodes;
  const auto& wk = Kronrod21::kronrod_weights;
  const auto& wg = Kronrod21::gauss_weights;

  const T fc = f(center);
  T kronrod = fc * wk[10];
  T gauss{};
  for (std::size_t i = 0; i < 10; ++i) {
    const double dx = half * x[i];
    const T sum = f(center - dx) + f(center + dx);
    kronrod += wk[i] * sum;
    if (i % 2 == 1) gauss += wg[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  // QUADPACK-style error scaling; keeps estimates honest for smooth panels.
  double err = magnitude(kronrod - gauss);
  err = std::min(err, 200.0 * err * std::sqrt(200.0 * err / (magnitude(kronrod) + 1e-300)));
  err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * magnitude(kronrod));
  return {a, b, kronrod, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b].
/// Works for real or complex valued integrands. Never throws; check `converged`.
template <class F>
auto integrate(F&& f, double a, double b, const Options& opt = {})
    -> Result<std::invoke_result_t<F&, double>> {
  using T = std::invoke_result_t<F&, double>;
  Result<T> out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Panel<T>> heap;
  auto first = detail::kronrod_panel(f, a, b);
  out.evaluations += 21;
  T total = first.value;
  double total_err = first.error;
  heap.push(first);

  auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total)); };
  while (total_err > target() && heap.size() < opt.max_intervals) {
    auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // cannot bisect further
    heap.pop();
    auto left = detail::kronrod_panel(f, worst.a, mid);
    auto right = detail::kronrod_panel(f, mid, worst.b);
    out.evaluations += 42;
    total += (left.value + right.value) - worst.value;
    total_err += (left.error + right.error) - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed accumulated cancellation from the incremental updates.
  T sum{};
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = sum;
  out.abs_error = err;
  out.converged = err <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(sum));
  return out;
}

/// Integral over [a, inf) via the map x = a + t / (1 - t), t in [0, 1).
template <class F>
auto integrate_to_infinity(F&& f, double a, const Options& opt = {})
    -> Result<std::invoke_result_t<F&, double>> {
  using T = std::invoke_result_t<F&, double>;
  auto mapped = [&](double t) -> T {
    if (t >= 1.0) return T{};
    const double one_minus = 1.0 - t;
    const double x = a + t / one_minus;
    const T v = f(x);
    return v * (1.0 / (one_minus * one_minus));
  };
  return integrate(mapped, 0.0, 1.0, opt);
}

}  // namespace clustersim::quad
