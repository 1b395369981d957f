#include "clustersim/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "clustersim/errors.hpp"
#include "clustersim/quadrature.hpp"

namespace clustersim::specfun {
namespace {

using cplx = std::complex<double>;

constexpr int kMaxSeriesTerms = 10000;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Stirling correction lnGamma(x) - [(x-1/2)ln x - x + ln(2 pi)/2], valid for x >= 10.
double stirling_tail(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  return r * (1.0 / 12.0 +
              r2 * (-1.0 / 360.0 +
                    r2 * (1.0 / 1260.0 +
                          r2 * (-1.0 / 1680.0 +
                                r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360360.0 + r2 * (1.0 / 156.0)))))));
}

constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;

template <class T>
struct SeriesSum {
  T value;
  double error;
};

// Sum of the 2F1 power series; nullopt if it does not settle within the cap.
template <class T>
std::optional<SeriesSum<T>> series(double a, double b, double c, T z) {
  T sum = 1.0;
  T term = 1.0;
  const double az = std::abs(z);
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    const double ratio = (a + n) * (b + n) / ((c + n) * (n + 1.0));
    term *= ratio * z;
    sum += term;
    if (term == T{}) return SeriesSum<T>{sum, kEps * std::abs(sum)};
    const double next = std::abs((a + n + 1) * (b + n + 1) / ((c + n + 1) * (n + 2.0))) * az;
    if (next < 1.0) {
      const double tail = std::abs(term) * next / (1.0 - next);
      if (tail <= 1e-16 * std::abs(sum)) {
        return SeriesSum<T>{sum, tail + kEps * std::abs(sum) * std::sqrt(n + 1.0)};
      }
    }
  }
  return std::nullopt;
}

void check_params(double b, double c, const char* where) {
  if (!(b > 0.0) || !(c > b) || !std::isfinite(c)) {
    throw DomainError(std::string(where) + ": requires c > b > 0");
  }
}

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

}  // namespace

double ln_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("ln_gamma: requires finite x > 0");
  double shift = 1.0;
  while (x < 10.0) {
    shift *= x;
    x += 1.0;
  }
  return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + stirling_tail(x) - std::log(shift);
}

double gamma(double x) {
  if (x > 0.0) return std::exp(ln_gamma(x));
  if (near_integer(x) && std::round(x) <= 0.0) throw DomainError("gamma: pole at non-positive integer");
  return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma(1.0 - x));
}

double rgamma(double x) {
  if (x <= 0.0 && x == std::round(x)) return 0.0;
  return 1.0 / gamma(x);
}

double ln_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta: requires a > 0 and b > 0");
  const double big = std::max(a, b);
  const double small = std::min(a, b);
  if (big < 10.0) return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
  // lnGamma(big + small) - lnGamma(big) without cancelling two huge numbers.
  const double rise = (big - 0.5) * std::log1p(small / big) + small * std::log(big + small) - small +
                      stirling_tail(big + small) - stirling_tail(big);
  return ln_gamma(small) - rise;
}

double beta(double a, double b) { return std::exp(ln_beta(a, b)); }

double pow2_beta(double bits, double x) {
  if (!(bits >= 0.0)) throw DomainError("pow2_beta: requires bits >= 0");
  return std::exp(bits * std::numbers::ln2 + ln_beta(std::exp2(bits), x));
}

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("digamma: requires finite x > 0");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / x;
  const double r2 = r * r;
  const double tail =
      r2 * (1.0 / 12.0 -
            r2 * (1.0 / 120.0 -
                  r2 * (1.0 / 252.0 -
                        r2 * (1.0 / 240.0 -
                              r2 * (1.0 / 132.0 - r2 * (691.0 / 32760.0 - r2 * (1.0 / 12.0)))))));
  return result + std::log(x) - 0.5 * r - tail;
}

ComplexSpecFunResult hyp2f1_euler(double a, double b, double c, cplx z, double rel_tol) {
  check_params(b, c, "hyp2f1_euler");
  if (z.real() > 0.0 && z.imag() == 0.0 && z.real() >= 1.0) {
    throw DomainError("hyp2f1_euler: integrand singular for real z >= 1");
  }
  const double e = c - b;
  // Split at t = 1/2 and remove the endpoint power singularities:
  // t = u^(1/b) on the left piece, 1 - t = v^(1/e) on the right piece.
  auto left = [&](double u) -> cplx {
    const double t = std::pow(u, 1.0 / b);
    return std::pow(1.0 - t, e - 1.0) * std::pow(1.0 - t * z, -a) / b;
  };
  auto right = [&](double v) -> cplx {
    const double s = std::pow(v, 1.0 / e);
    const double t = 1.0 - s;
    return std::pow(t, b - 1.0) * std::pow(1.0 - t * z, -a) / e;
  };
  quad::Options opt{0.0, rel_tol, 4000};
  auto l = quad::integrate(left, 0.0, std::pow(0.5, b), opt);
  auto r = quad::integrate(right, 0.0, std::pow(0.5, e), opt);
  const double norm = std::exp(ln_gamma(c) - ln_gamma(b) - ln_gamma(e));
  ComplexSpecFunResult out{norm * (l.value + r.value), norm * (l.abs_error + r.abs_error)};
  if (!l.converged || !r.converged) {
    throw QuadratureError("hyp2f1_euler: quadrature did not converge", std::abs(out.value),
                          out.est_abs_error, l.evaluations + r.evaluations);
  }
  return out;
}

SpecFunResult hyp2f1(double a, double b, double c, double z) {
  check_params(b, c, "hyp2f1");
  if (!(z <= 0.0) || !std::isfinite(a)) throw DomainError("hyp2f1: requires finite a and z <= 0");
  if (z == 0.0) return {1.0, 0.0};
  if (z >= -0.5) {
    if (auto s = series(a, b, c, z)) return {s->value, s->error};
  } else {
    const double w = z / (z - 1.0);
    if (auto s = series(a, c - b, c, w)) {
      const double pre = std::pow(1.0 - z, -a);
      return {pre * s->value, pre * s->error};
    }
  }
  const auto q = hyp2f1_euler(a, b, c, cplx(z, 0.0));
  return {q.value.real(), q.est_abs_error};
}

ComplexSpecFunResult hyp2f1(double a, double b, double c, cplx z) {
  check_params(b, c, "hyp2f1");
  if (!(z.real() <= 0.0) || !std::isfinite(a) || !std::isfinite(z.imag())) {
    throw DomainError("hyp2f1: requires finite a and Re(z) <= 0");
  }
  if (z == cplx{}) return {1.0, 0.0};
  const double az = std::abs(z);
  if (az <= 0.5) {
    if (auto s = series(a, b, c, z)) return {s->value, s->error};
  }
  if (az >= 2.0 && !near_integer(a - b)) {
    // Connection formula about z = infinity; both series run in 1/z with |1/z| <= 1/2.
    const cplx inv = 1.0 / z;
    const cplx mz = -z;
    const double gc = gamma(c);
    const double c1 = gc * gamma(b - a) * rgamma(b) * rgamma(c - a);
    const double c2 = gc * gamma(a - b) * rgamma(a) * rgamma(c - b);
    cplx value{};
    double err = 0.0;
    if (c1 != 0.0) {
      auto s = series(a, 1.0 - c + a, 1.0 - b + a, inv);
      if (!s) return hyp2f1_euler(a, b, c, z);
      const cplx pre = c1 * std::pow(mz, -a);
      value += pre * s->value;
      err += std::abs(pre) * s->error;
    }
    if (c2 != 0.0) {
      auto s = series(b, 1.0 - c + b, 1.0 - a + b, inv);
      if (!s) return hyp2f1_euler(a, b, c, z);
      const cplx pre = c2 * std::pow(mz, -b);
      value += pre * s->value;
      err += std::abs(pre) * s->error;
    }
    return {value, err + kEps * (std::abs(value) + std::abs(c1) + std::abs(c2))};
  }
  const cplx w = z / (z - 1.0);
  if (std::abs(w) <= 0.9) {
    if (auto s = series(a, c - b, c, w)) {
      const cplx pre = std::pow(1.0 - z, -a);
      return {pre * s->value, std::abs(pre) * s->error};
    }
  }
  return hyp2f1_euler(a, b, c, z);
}

}  // namespace clustersim::specfun
