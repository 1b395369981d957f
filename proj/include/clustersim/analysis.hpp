#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "clustersim/config.hpp"
#include "clustersim/feedback.hpp"

namespace clustersim::analysis {

/// Analytical value with the accumulated quadrature error estimate.
struct BoundValue {
  double value = 0.0;
  double quadrature_error = 0.0;
};

struct GammaFit {
  double k = 0.0;
  double theta = 0.0;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// ---- interferer count --------------------------------------------------------

/// P[N = n] for the typical (area-biased) cluster, from a Gamma fit of the
/// normalized Voronoi cell size.
double pmf_n(int n, double ratio);

/// pmf_n(0..m) where m is the first index with cumulative mass >= 1 - tail.
std::vector<double> pmf_table(double ratio, double tail = 1e-8);

// ---- interference Laplace transforms ----------------------------------------

/// int_rho^inf x s / (s + (1+x)^alpha) dx, i.e. minus the log Laplace transform of
/// unit-density Exp(1)-faded interference from beyond rho, divided by 2 pi.
std::complex<double> interference_exponent(std::complex<double> s, double rho, double alpha);

/// Laplace transform of the interference from a PPP of density lambda_b outside a
/// disk of radius r_excl about the receiver.
std::complex<double> laplace_interference_outside(std::complex<double> s, double r_excl,
                                                  double lambda_b, double alpha);

/// Laplace transform of the interference from n base stations uniform on the annulus
/// r_in < r < r_out about the receiver.
std::complex<double> laplace_interference_annulus(std::complex<double> s, double r_in,
                                                  double r_out, double alpha, int n);

// ---- radii -------------------------------------------------------------------

/// P[r_M > r] for the circumscribed radius, density-scaled: 2x e^-x + e^-2x, x = pi lambda_c r^2.
double circumradius_ccdf(double r, double lambda_c);

// ---- coverage and rate ---------------------------------------------------------

struct QuadratureOptions {
  double inner_abs_tol = 1e-5;  ///< Fourier inversion / rate kernel, per point
  double outer_abs_tol = 2e-5;  ///< integration over the radii
};

/// P[X >= c] by Gil-Pelaez inversion of the characteristic function char_fn of X.
/// The tail of the inversion integral beyond t is bounded by
/// envelope(t) t^(-shape) / (pi shape), so envelope must be nonincreasing with
/// |char_fn(u)| <= envelope(t) (t/u)^shape for u >= t. Throws QuadratureError when
/// the absolute target cannot be met.
BoundValue inversion_probability(const std::function<std::complex<double>(double)>& char_fn, double c,
                                 double shape, const std::function<double(double)>& envelope,
                                 double abs_tol);

/// Same, with the caller supplying tail_bound(t) >= (1/pi) int_t^inf |char_fn(u)| / u du
/// directly (nonincreasing in t). Useful for mixtures whose terms decay at different rates.
BoundValue inversion_probability(const std::function<std::complex<double>(double)>& char_fn, double c,
                                 const std::function<double(double)>& tail_bound, double abs_tol);

/// Coverage lower bound with intercell interference nulling (antennas follow N).
BoundValue coverage_lb_ic(const SimConfig& cfg, double threshold, const QuadratureOptions& q = {});

/// Coverage lower bound with a fixed antenna count and the thresholding policy.
BoundValue coverage_lb_thresholded(const SimConfig& cfg, double threshold,
                                   const QuadratureOptions& q = {});

/// (1/ln 2) int_0^inf p(e^x - 1) dx, truncated where p drops below `floor`.
BoundValue rate_from_coverage(const std::function<double(double)>& coverage, double floor = 1e-4,
                              double abs_tol = 1e-4);

/// Average rate lower bound implied by coverage_lb_ic.
BoundValue rate_lb_ic(const SimConfig& cfg, const QuadratureOptions& q = {});

/// Average rate lower bound implied by coverage_lb_thresholded.
BoundValue rate_lb_thresholded(const SimConfig& cfg, const QuadratureOptions& q = {});

// ---- inter-cluster interference statistics ---------------------------------------

/// First two moments of the inter-cluster interference outside the inscribed-disk
/// exclusion, averaged over (r0, r_m). Throws DomainError for alpha <= 2.
Moments iout_moments(double lambda_b, double lambda_c, double alpha);

/// Second-order moment matching.
GammaFit gamma_fit(double mean, double variance);

/// E{log2 X} for X ~ Gamma(k, theta).
double gamma_log2_mean(const GammaFit& fit);

/// E{(1+r_01)^-alpha} for the nearest interferer beyond the serving distance.
double nearest_interferer_gain(double lambda_b, double alpha);

// ---- limited feedback rate loss ----------------------------------------------------

/// Upper bound on the mean rate loss under equal bit allocation (antennas follow N).
double rate_loss_ub_equal(const SimConfig& cfg);

/// Inputs shared by all realizations of the adaptive bound.
struct AdaptiveBoundContext {
  GammaFit fit;
  double e_iout = 0.0;
  double inv_snr = 0.0;
};

AdaptiveBoundContext adaptive_context(const SimConfig& cfg);

/// Per-realization rate-loss bound for an adaptive allocation (intra distances ascending).
double rate_loss_ub_adaptive(std::span<const double> r_intra, const feedback::BitAllocation& alloc,
                             int b_tot, int n_t, double alpha, const AdaptiveBoundContext& ctx);

}  // namespace clustersim::analysis
