#include "clustersim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "clustersim/errors.hpp"
#include "clustersim/quadrature.hpp"
#include "clustersim/specfun.hpp"

namespace clustersim::analysis {
namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Largest inversion panel count before giving up.
constexpr int kMaxPanels = 120;

// Radii from uniform variables: r0 with its nearest-neighbour law, r_m conditioned on
// exceeding r0 (r_m^2 - r0^2 is exponential with rate 4 pi lambda_c).
double r0_from(double q, double lambda_b) { return std::sqrt(-std::log1p(-q) / (kPi * lambda_b)); }
double rm_from(double q, double r0, double lambda_c) {
  return std::sqrt(r0 * r0 - std::log1p(-q) / (4.0 * kPi * lambda_c));
}

double circum_g(double x) { return 2.0 * x * std::exp(-x) + std::exp(-2.0 * x); }

// r_M conditioned on exceeding r0: solves G(x) = (1 - q) G(x0) by bisection.
double rM_from(double q, double r0, double lambda_c) {
  const double x0 = kPi * lambda_c * r0 * r0;
  const double target = (1.0 - q) * circum_g(x0);
  double lo = x0, hi = std::max(1.0, 2.0 * x0);
  while (circum_g(hi) > target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (circum_g(mid) > target ? lo : hi) = mid;
  }
  return std::sqrt(0.5 * (lo + hi) / (kPi * lambda_c));
}

int follow_dof(const SimConfig& cfg) {
  if (!cfg.follows_n()) throw DomainError("analysis: expected antennas that follow N");
  return std::get<FollowN>(cfg.antenna_mode).extra_dof;
}

int fixed_antennas(const SimConfig& cfg) {
  if (cfg.follows_n()) throw DomainError("analysis: expected a fixed antenna count");
  return std::get<Fixed>(cfg.antenna_mode).antennas;
}

quad::Options tol(double abs_tol) { return {abs_tol, 1e-12, 400}; }

double m1(double rho, double alpha) {
  const double q = 1.0 + rho;
  return std::pow(q, 2.0 - alpha) / (alpha - 2.0) - std::pow(q, 1.0 - alpha) / (alpha - 1.0);
}

double m2(double rho, double alpha) {
  const double q = 1.0 + rho;
  return std::pow(q, 2.0 - 2.0 * alpha) / (2.0 * alpha - 2.0) -
         std::pow(q, 1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0);
}

// Integral over the unit square of a smooth integrand, nested adaptive.
template <class F>
BoundValue unit_square(F&& f, double abs_tol) {
  double inner_err = 0.0;
  auto outer = quad::integrate(
      [&](double q0) {
        auto r = quad::integrate([&](double q1) { return f(q0, q1); }, 0.0, 1.0, tol(abs_tol));
        inner_err = std::max(inner_err, r.abs_error);
        return r.value;
      },
      0.0, 1.0, tol(abs_tol));
  return {outer.value, outer.abs_error + inner_err};
}

// Integral over the unit cube; the last coordinate is skipped when f ignores it.
template <class F>
BoundValue unit_cube(F&& f, bool uses_last, double abs_tol) {
  if (!uses_last) return unit_square([&](double q0, double q1) { return f(q0, q1, 0.5); }, abs_tol);
  double mid_err = 0.0;
  auto outer = quad::integrate(
      [&](double q0) {
        auto v = unit_square([&](double q1, double q2) { return f(q0, q1, q2); }, abs_tol);
        mid_err = std::max(mid_err, v.quadrature_error);
        return v.value;
      },
      0.0, 1.0, tol(abs_tol));
  return {outer.value, outer.abs_error + mid_err};
}

// Real Laplace transform exponent without the hypergeometric complex path.
double exponent_real(double s, double rho, double alpha) {
  if (s == 0.0) return 0.0;
  const double q = 1.0 + rho;
  const double z = -std::pow(q, -alpha) * s;
  const double f1 = specfun::hyp2f1(1.0, 1.0 - 2.0 / alpha, 2.0 - 2.0 / alpha, z).value;
  const double f2 = specfun::hyp2f1(1.0, 1.0 - 1.0 / alpha, 2.0 - 1.0 / alpha, z).value;
  return std::pow(q, 2.0 - alpha) / (alpha - 2.0) * s * f1 - std::pow(q, 1.0 - alpha) / (alpha - 1.0) * s * f2;
}

// E{ ln(1 + S/Y) } = int_0^inf L_Y(z) (1 - L_S(z)) / z dz for independent S, Y >= 0,
// evaluated on a logarithmic grid in z. `kernel(z)` returns L_Y(z)(1 - L_S(z)).
template <class K>
double log_rate_kernel(K&& kernel, double scale, double abs_tol) {
  // L_Y carries exp(-z * scale); beyond z = 60/scale the integrand is negligible.
  const double hi = std::log(60.0 / scale);
  const double lo = hi - 60.0;
  auto r = quad::integrate([&](double u) { return kernel(std::exp(u)); }, lo, hi, tol(abs_tol));
  if (!r.converged) throw QuadratureError("rate kernel did not converge", r.value, r.abs_error, r.evaluations);
  return r.value;
}

}  // namespace

// ---- interferer count --------------------------------------------------------

double pmf_n(int n, double ratio) {
  if (n < 0) return 0.0;
  const double nn = n;
  const double lp = 4.5 * std::log(3.5) + specfun::ln_gamma(nn + 4.5) + nn * std::log(ratio) -
                    specfun::ln_gamma(4.5) - specfun::ln_gamma(nn + 1.0) - (nn + 4.5) * std::log(ratio + 3.5);
  return std::exp(lp);
}

std::vector<double> pmf_table(double ratio, double tail) {
  std::vector<double> p;
  double cum = 0.0;
  for (int n = 0; n < 100000; ++n) {
    p.push_back(pmf_n(n, ratio));
    cum += p.back();
    if (cum >= 1.0 - tail) break;
  }
  return p;
}

// ---- interference Laplace transforms ----------------------------------------

cplx interference_exponent(cplx s, double rho, double alpha) {
  if (s == cplx{}) return {};
  if (s.imag() == 0.0 && s.real() > 0.0) return exponent_real(s.real(), rho, alpha);
  const double q = 1.0 + rho;
  const cplx z = -std::pow(q, -alpha) * s;
  const cplx f1 = specfun::hyp2f1(1.0, 1.0 - 2.0 / alpha, 2.0 - 2.0 / alpha, z).value;
  const cplx f2 = specfun::hyp2f1(1.0, 1.0 - 1.0 / alpha, 2.0 - 1.0 / alpha, z).value;
  return std::pow(q, 2.0 - alpha) / (alpha - 2.0) * s * f1 - std::pow(q, 1.0 - alpha) / (alpha - 1.0) * s * f2;
}

cplx laplace_interference_outside(cplx s, double r_excl, double lambda_b, double alpha) {
  return std::exp(-2.0 * kPi * lambda_b * interference_exponent(s, r_excl, alpha));
}

cplx laplace_interference_annulus(cplx s, double r_in, double r_out, double alpha, int n) {
  if (n == 0) return 1.0;
  const double area = r_out * r_out - r_in * r_in;
  if (!(area > 0)) {
    // Degenerate annulus: every interferer sits at r_in.
    return std::pow(std::pow(1.0 + r_in, alpha) / (std::pow(1.0 + r_in, alpha) + s), n);
  }
  const cplx b = 1.0 - 2.0 * (interference_exponent(s, r_in, alpha) - interference_exponent(s, r_out, alpha)) / area;
  return std::pow(b, n);
}

double circumradius_ccdf(double r, double lambda_c) {
  return std::min(1.0, circum_g(kPi * lambda_c * r * r));
}

// ---- coverage and rate ---------------------------------------------------------

BoundValue inversion_probability(const std::function<cplx(double)>& char_fn, double c, double shape,
                                 const std::function<double(double)>& envelope, double abs_tol) {
  return inversion_probability(
      char_fn, c, [&](double t) { return envelope(t) * std::pow(t, -shape) / (kPi * shape); }, abs_tol);
}

BoundValue inversion_probability(const std::function<cplx(double)>& char_fn, double c,
                                 const std::function<double(double)>& tail_bound, double abs_tol) {
  auto integrand = [&](double t) {
    return (char_fn(t) * std::exp(cplx(0.0, -c * t))).imag() / t;
  };
  // Panels grow geometrically; the first resolves the oscillation e^{-ict}.
  double lo = 0.0;
  double hi = 1.0 / (1.0 + c);
  double sum = 0.0, err = 0.0;
  std::size_t evals = 0;
  const auto panel_tol = tol(abs_tol * kPi / 16.0);
  for (int panel = 0; panel < kMaxPanels; ++panel) {
    auto r = quad::integrate(integrand, lo, hi, panel_tol);
    sum += r.value;
    err += r.abs_error;
    evals += r.evaluations;
    if (tail_bound(hi) < abs_tol / 4.0) {
      const double total_err = err / kPi + tail_bound(hi);
      if (total_err > abs_tol) {
        throw QuadratureError("coverage inversion missed its target", 0.5 + sum / kPi, total_err, evals);
      }
      return {0.5 + sum / kPi, total_err};
    }
    lo = hi;
    hi *= 2.0;
  }
  throw QuadratureError("coverage inversion did not reach its tail", 0.5 + sum / kPi, err / kPi, evals);
}

BoundValue coverage_lb_ic(const SimConfig& cfg, double threshold, const QuadratureOptions& q) {
  cfg.validate();
  const int d = follow_dof(cfg);
  if (d < 1) throw DomainError("coverage_lb_ic: need at least one spare antenna");
  if (!(threshold > 0)) throw DomainError("coverage_lb_ic: threshold must be positive");
  const double w = cfg.noise_power();
  double inner_err = 0.0;
  auto conditional = [&](double q0, double q1) {
    const double r0 = r0_from(q0, cfg.lambda_b);
    const double rm = rm_from(q1, r0, cfg.lambda_c);
    const double a = threshold * std::pow(1.0 + r0, cfg.alpha);
    auto chf = [&](double t) {
      return std::pow(cplx(1.0, -t), -d) * laplace_interference_outside(cplx(0.0, a * t), rm, cfg.lambda_b, cfg.alpha);
    };
    auto env = [&](double t) {
      return std::abs(laplace_interference_outside(cplx(0.0, a * t), rm, cfg.lambda_b, cfg.alpha));
    };
    auto p = inversion_probability(chf, a * w, d, env, q.inner_abs_tol);
    inner_err = std::max(inner_err, p.quadrature_error);
    return p.value;
  };
  auto v = unit_square(conditional, q.outer_abs_tol);
  return {std::clamp(v.value, 0.0, 1.0), v.quadrature_error + inner_err};
}

BoundValue coverage_lb_thresholded(const SimConfig& cfg, double threshold, const QuadratureOptions& q) {
  cfg.validate();
  const int n_t = fixed_antennas(cfg);
  if (n_t < 2) throw DomainError("coverage_lb_thresholded: need at least two antennas");
  if (!(threshold > 0)) throw DomainError("coverage_lb_thresholded: threshold must be positive");
  const double w = cfg.noise_power();
  const auto pmf = pmf_table(cfg.ratio());
  const int n_max = static_cast<int>(pmf.size()) - 1;
  double tail_single = 0.0;
  for (int n = n_t; n <= n_max; ++n) tail_single += pmf[n];
  double inner_err = 0.0;

  auto conditional = [&](double q0, double q1, double q2) {
    const double r0 = r0_from(q0, cfg.lambda_b);
    const double rm = rm_from(q1, r0, cfg.lambda_c);
    const double rM = rM_from(q2, r0, cfg.lambda_c);
    const double a = threshold * std::pow(1.0 + r0, cfg.alpha);
    auto chf = [&](double t) {
      const cplx s(0.0, a * t);
      cplx coordinated = 0.0;
      for (int n = 0; n < std::min(n_t, n_max + 1); ++n) coordinated += pmf[n] * std::pow(cplx(1.0, -t), -(n_t - n));
      cplx single = 0.0;
      if (n_max >= n_t) {
        const cplx b = laplace_interference_annulus(s, r0, rM, cfg.alpha, 1);
        for (int n = n_max; n >= n_t; --n) single = single * b + pmf[n];
        single *= std::pow(b, n_t) * std::pow(cplx(1.0, -t), -n_t);
      }
      return laplace_interference_outside(s, rm, cfg.lambda_b, cfg.alpha) * (coordinated + single);
    };
    // Term n decays like t^-(n_t - n); weighting each by its mass keeps the tail tight.
    auto tail = [&](double t) {
      double sum = tail_single / (n_t * std::pow(t, n_t));
      for (int n = 0; n < std::min(n_t, n_max + 1); ++n) sum += pmf[n] / ((n_t - n) * std::pow(t, n_t - n));
      return std::abs(laplace_interference_outside(cplx(0.0, a * t), rm, cfg.lambda_b, cfg.alpha)) * sum / kPi;
    };
    auto p = inversion_probability(chf, a * w, tail, q.inner_abs_tol);
    inner_err = std::max(inner_err, p.quadrature_error);
    return p.value;
  };
  const auto v = unit_cube(conditional, n_max >= n_t, q.outer_abs_tol);
  return {std::clamp(v.value, 0.0, 1.0), v.quadrature_error + inner_err};
}

BoundValue rate_from_coverage(const std::function<double(double)>& coverage, double floor, double abs_tol) {
  double hi = 1.0;
  while (hi < 200.0 && coverage(std::expm1(hi)) >= floor) hi *= 2.0;
  auto r = quad::integrate([&](double x) { return coverage(std::expm1(x)); }, 0.0, hi, tol(abs_tol * std::numbers::ln2));
  return {r.value / std::numbers::ln2, r.abs_error / std::numbers::ln2};
}

// The rate bounds integrate E{log2(1 + S/Y)} directly through the Laplace transforms,
// which equals integrating the coverage bound over thresholds but needs only real arguments.
BoundValue rate_lb_ic(const SimConfig& cfg, const QuadratureOptions& q) {
  cfg.validate();
  const int d = follow_dof(cfg);
  const double w = cfg.noise_power();
  auto conditional = [&](double q0, double q1) {
    const double r0 = r0_from(q0, cfg.lambda_b);
    const double rm = rm_from(q1, r0, cfg.lambda_c);
    const double l0 = std::pow(1.0 + r0, cfg.alpha);
    auto kernel = [&](double z) {
      const double s = z * l0;
      return std::exp(-s * w - 2.0 * kPi * cfg.lambda_b * exponent_real(s, rm, cfg.alpha)) *
             -std::expm1(-d * std::log1p(z));
    };
    return log_rate_kernel(kernel, l0 * w, q.inner_abs_tol) / std::numbers::ln2;
  };
  return unit_square(conditional, q.outer_abs_tol);
}

BoundValue rate_lb_thresholded(const SimConfig& cfg, const QuadratureOptions& q) {
  cfg.validate();
  const int n_t = fixed_antennas(cfg);
  const double w = cfg.noise_power();
  const auto pmf = pmf_table(cfg.ratio());
  const int n_max = static_cast<int>(pmf.size()) - 1;
  auto conditional = [&](double q0, double q1, double q2) {
    const double r0 = r0_from(q0, cfg.lambda_b);
    const double rm = rm_from(q1, r0, cfg.lambda_c);
    const double rM = rM_from(q2, r0, cfg.lambda_c);
    const double l0 = std::pow(1.0 + r0, cfg.alpha);
    auto kernel = [&](double z) {
      const double s = z * l0;
      const double out = std::exp(-s * w - 2.0 * kPi * cfg.lambda_b * exponent_real(s, rm, cfg.alpha));
      double coordinated = 0.0;
      for (int n = 0; n < std::min(n_t, n_max + 1); ++n) coordinated += pmf[n] * -std::expm1(-(n_t - n) * std::log1p(z));
      double single = 0.0;
      if (n_max >= n_t) {
        const double b = laplace_interference_annulus(s, r0, rM, cfg.alpha, 1).real();
        for (int n = n_max; n >= n_t; --n) single = single * b + pmf[n];
        single *= std::pow(b, n_t) * -std::expm1(-n_t * std::log1p(z));
      }
      return out * (coordinated + single);
    };
    return log_rate_kernel(kernel, l0 * w, q.inner_abs_tol) / std::numbers::ln2;
  };
  return unit_cube(conditional, n_max >= n_t, q.outer_abs_tol);
}

// ---- inter-cluster interference statistics ---------------------------------------

Moments iout_moments(double lambda_b, double lambda_c, double alpha) {
  if (!(alpha > 2.0)) throw DomainError("iout_moments: alpha must exceed 2");
  auto rho = [&](double q0, double q1) {
    const double r0 = r0_from(q0, lambda_b);
    return rm_from(q1, r0, lambda_c) - r0;
  };
  const auto mean = unit_square([&](double q0, double q1) { return m1(rho(q0, q1), alpha); }, 1e-12);
  const auto var = unit_square([&](double q0, double q1) { return m2(rho(q0, q1), alpha); }, 1e-12);
  return {2.0 * kPi * lambda_b * mean.value, 2.0 * kPi * lambda_b * var.value};
}

GammaFit gamma_fit(double mean, double variance) {
  if (!(mean > 0) || !(variance > 0)) throw DomainError("gamma_fit: moments must be positive");
  return {mean * mean / variance, variance / mean};
}

double gamma_log2_mean(const GammaFit& fit) {
  return specfun::digamma(fit.k) / std::numbers::ln2 + std::log2(fit.theta);
}

double nearest_interferer_gain(double lambda_b, double alpha) {
  auto f = [&](double q0, double q1) {
    const double r0 = r0_from(q0, lambda_b);
    const double r = std::sqrt(r0 * r0 - std::log1p(-q1) / (kPi * lambda_b));
    return std::pow(1.0 + r, -alpha);
  };
  return unit_square(f, 1e-12).value;
}

// ---- limited feedback rate loss ----------------------------------------------------

double rate_loss_ub_equal(const SimConfig& cfg) {
  cfg.validate();
  const int d = follow_dof(cfg);
  if (d < 2) throw DomainError("rate_loss_ub_equal: need at least two spare antennas");
  const auto pmf = pmf_table(cfg.ratio());
  const double b_tot = cfg.b_tot;
  double desired = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const int n = static_cast<int>(i);
    const double nt = n + d;
    const double per = std::floor(b_tot / (n + 1));
    desired += specfun::gamma(nt / (nt - 1.0)) * std::exp2(-(b_tot - n * per) / (nt - 1.0)) * pmf[i];
    residual += n * specfun::gamma((2.0 * nt - 1.0) / (nt - 1.0)) * std::exp2(-per / (nt - 1.0)) * pmf[i];
  }
  const auto mom = iout_moments(cfg.lambda_b, cfg.lambda_c, cfg.alpha);
  const auto fit = gamma_fit(mom.mean, mom.variance);
  const double gain = nearest_interferer_gain(cfg.lambda_b, cfg.alpha);
  return std::numbers::log2e * desired - gamma_log2_mean(fit) +
         std::log2(cfg.noise_power() + fit.k * fit.theta + residual * gain);
}

AdaptiveBoundContext adaptive_context(const SimConfig& cfg) {
  const auto mom = iout_moments(cfg.lambda_b, cfg.lambda_c, cfg.alpha);
  return {gamma_fit(mom.mean, mom.variance), mom.mean, cfg.noise_power()};
}

double rate_loss_ub_adaptive(std::span<const double> r_intra, const feedback::BitAllocation& alloc, int b_tot,
                             int n_t, double alpha, const AdaptiveBoundContext& ctx) {
  if (n_t < 2) throw DomainError("rate_loss_ub_adaptive: need at least two antennas");
  const double nt = n_t;
  const double b0 = alloc.b0;
  const double floor_term = ctx.e_iout + ctx.inv_snr;
  const double desired = std::numbers::log2e * specfun::gamma(nt / (nt - 1.0)) * std::exp2(-b0 / (nt - 1.0));
  const double log_out = gamma_log2_mean(ctx.fit);
  const std::size_t k = alloc.effective_set.size();
  const double g2 = specfun::gamma((2.0 * nt - 1.0) / (nt - 1.0));
  if (k == 0) {
    std::vector<double> bits(alloc.b_intra.begin(), alloc.b_intra.end());
    return desired - log_out + std::log2(feedback::residual_objective(r_intra, bits, n_t, alpha) + floor_term);
  }
  const double kk = static_cast<double>(k);
  const double gm = feedback::geometric_mean_gain(r_intra, k, alpha);
  if (alloc.regime == feedback::Regime::DominantResidual) {
    return desired - log_out + std::log2(g2 * kk * gm) + (b0 - b_tot) / (kk * (nt - 1.0));
  }
  return desired - log_out + std::log2(floor_term) +
         std::numbers::log2e * g2 / floor_term * kk * std::exp2(-(b_tot - b0) / (kk * (nt - 1.0))) * gm;
}

}  // namespace clustersim::analysis
