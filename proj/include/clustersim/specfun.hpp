#pragma once

#include <complex>

namespace clustersim::specfun {

struct SpecFunResult {
  double value = 0.0;
  double est_abs_error = 0.0;
};

struct ComplexSpecFunResult {
  std::complex<double> value{};
  double est_abs_error = 0.0;
};

/// Gauss hypergeometric 2F1(a, b; c; z) for real z <= 0 and c > b > 0.
///
/// |z| <= 1/2 sums the defining series directly. Further out the Pfaff
/// transformation maps the argument to z/(z-1) in (1/3, 1); if that series
/// needs more than 10000 terms the Euler integral is evaluated by adaptive
/// quadrature instead. Throws DomainError outside the admissible region.
SpecFunResult hyp2f1(double a, double b, double c, double z);

/// 2F1 for complex z with Re(z) <= 0 and real c > b > 0.
///
/// Uses the power series near the origin, the Pfaff series for moderate |z|
/// and the 1/z connection formula for large |z| (falling back to the Euler
/// integral when a - b is an integer, where that formula degenerates).
ComplexSpecFunResult hyp2f1(double a, double b, double c, std::complex<double> z);

/// Euler-integral representation of 2F1, evaluated by adaptive quadrature.
/// Gamma(c)/(Gamma(b)Gamma(c-b)) * int_0^1 t^(b-1) (1-t)^(c-b-1) (1-tz)^(-a) dt.
ComplexSpecFunResult hyp2f1_euler(double a, double b, double c, std::complex<double> z,
                                  double rel_tol = 1e-13);

/// log Gamma(x) for x > 0.
double ln_gamma(double x);

/// Gamma(x) for real x that is not a non-positive integer.
double gamma(double x);

/// 1 / Gamma(x); zero at the poles of Gamma.
double rgamma(double x);

/// log B(a, b). Stable when one argument is huge (e.g. a = 2^60).
double ln_beta(double a, double b);

/// B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b), computed in log space.
double beta(double a, double b);

/// psi(x) = d/dx log Gamma(x), x > 0, accurate to about 1e-13 absolute.
double digamma(double x);

/// 2^bits * B(2^bits, x), the RVQ distortion kernel, evaluated without
/// overflow for any bits >= 0.
double pow2_beta(double bits, double x);

}  // namespace clustersim::specfun
