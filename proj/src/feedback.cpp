#include "clustersim/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "clustersim/errors.hpp"
#include "clustersim/specfun.hpp"

namespace clustersim::feedback {
namespace {

std::vector<double> log2_distances(std::span<const double> r) {
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = std::log2(1.0 + r[i]);
  return out;
}

double prefix_mean(const std::vector<double>& v, std::size_t k) {
  return std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
         static_cast<double>(k);
}

void require_nt(int n_t) {
  if (n_t < 2) throw DomainError("feedback: need at least two antennas");
}

}  // namespace

int BitAllocation::total() const { return b0 + std::accumulate(b_intra.begin(), b_intra.end(), 0); }

std::size_t rvq_select(const CVector& v, std::span<const CVector> codebook) {
  std::size_t best = 0;
  double best_gain = -1.0;
  for (std::size_t i = 0; i < codebook.size(); ++i) {
    const double g = std::norm(v.dot(codebook[i]));
    if (g > best_gain) {
      best_gain = g;
      best = i;
    }
  }
  return best;
}

CVector rvq_quantize(const CVector& v_dir, int bits, Rng& rng) {
  if (bits < 1) throw DomainError("rvq_quantize: need at least one bit");
  if (bits > kMaxCodebookBits) throw BudgetExceeded("rvq_quantize: codebook larger than 2^22");
  const int n_t = static_cast<int>(v_dir.size());
  const std::size_t size = std::size_t{1} << bits;
  CVector best;
  double best_gain = -1.0;
  for (std::size_t i = 0; i < size; ++i) {
    CVector c = channel::sample_isotropic(n_t, rng);
    const double g = std::norm(v_dir.dot(c));
    if (g > best_gain) {
      best_gain = g;
      best = std::move(c);
    }
  }
  return best;
}

double sample_rvq_distortion(int n_t, double bits, Rng& rng) {
  if (n_t == 1) return 0.0;  // a direction in C^1 is exact up to phase
  require_nt(n_t);
  if (bits < 0) throw DomainError("sample_rvq_distortion: negative bits");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = 1.0 - unif(rng);  // (0, 1]
  // P(Z > z) = (1 - z^(n_t-1))^K with K = 2^bits; invert with expm1 so huge K stays exact.
  const double one_minus = -std::expm1(std::log(u) * std::exp2(-bits));
  return std::pow(one_minus, 1.0 / (n_t - 1));
}

CVector rvq_quantize_distributional(const CVector& v_dir, double bits, Rng& rng) {
  const int n_t = static_cast<int>(v_dir.size());
  if (n_t == 1) return v_dir;
  const double z = sample_rvq_distortion(n_t, bits, rng);
  CVector e;
  for (;;) {
    e = channel::sample_cn(n_t, rng);
    e -= v_dir * v_dir.dot(e);
    const double ne = e.norm();
    if (ne > 1e-12) {
      e /= ne;
      break;
    }
  }
  return std::sqrt(1.0 - z) * v_dir + std::sqrt(z) * e;
}

double sample_residual_power(const CVector& g, int n_t, double bits, Rng& rng) {
  const double z = sample_rvq_distortion(n_t, bits, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = 1.0 - unif(rng);
  const double y = n_t > 2 ? -std::expm1(std::log(u) / (n_t - 2)) : 1.0;
  return g.squaredNorm() * z * y;
}

double rvq_mean_distortion(int n_t, double bits) {
  require_nt(n_t);
  return specfun::pow2_beta(bits, static_cast<double>(n_t) / (n_t - 1));
}

double residual_power_mean(int n_t, double bits) {
  return static_cast<double>(n_t) / (n_t - 1) * rvq_mean_distortion(n_t, bits);
}

double residual_power_stirling(int n_t, double bits) {
  require_nt(n_t);
  return specfun::gamma((2.0 * n_t - 1.0) / (n_t - 1.0)) * std::exp2(-bits / (n_t - 1));
}

BitAllocation equal_split(int b_tot, int n, bool bias) {
  BitAllocation a;
  const int per = b_tot / (n + 1);
  a.b_intra.assign(static_cast<std::size_t>(n), per);
  a.b0 = bias ? b_tot - n * per : per;
  if (per > 0) {
    a.effective_set.resize(static_cast<std::size_t>(n));
    std::iota(a.effective_set.begin(), a.effective_set.end(), std::size_t{0});
  }
  return a;
}

BitAllocation equal_allocation(int b_tot, int n, bool bias) {
  if (n < 0) throw DomainError("equal_allocation: negative interferer count");
  if (b_tot < n + 1) throw InsufficientBudget("equal_allocation: fewer bits than channels");
  return equal_split(b_tot, n, bias);
}

std::vector<std::size_t> effective_set(std::span<const double> r_intra, double b_i, int n_t,
                                       double alpha) {
  require_nt(n_t);
  std::vector<std::size_t> out;
  if (!(b_i > 0) || r_intra.empty()) return out;
  const auto lg = log2_distances(r_intra);
  for (std::size_t k = lg.size(); k >= 1; --k) {
    const double mean = prefix_mean(lg, k);
    const double weakest = *std::max_element(lg.begin(), lg.begin() + static_cast<std::ptrdiff_t>(k));
    if (alpha * (weakest - mean) < b_i / (static_cast<double>(k) * (n_t - 1))) {
      out.resize(k);
      std::iota(out.begin(), out.end(), std::size_t{0});
      return out;
    }
  }
  return out;
}

std::vector<double> interferer_bits(std::span<const double> r_intra, std::size_t k, double b_i,
                                    int n_t, double alpha) {
  std::vector<double> out;
  if (k == 0) return out;
  const auto lg = log2_distances(r_intra);
  const double mean = prefix_mean(lg, k);
  out.resize(k);
  for (std::size_t l = 0; l < k; ++l) out[l] = b_i / static_cast<double>(k) + (n_t - 1) * alpha * (mean - lg[l]);
  return out;
}

double residual_objective(std::span<const double> r_intra, std::span<const double> bits, int n_t,
                          double alpha) {
  double sum = 0.0;
  for (std::size_t l = 0; l < r_intra.size(); ++l) {
    const double b = l < bits.size() ? bits[l] : 0.0;
    sum += std::pow(1.0 + r_intra[l], -alpha) * residual_power_stirling(n_t, b);
  }
  return sum;
}

double geometric_mean_gain(std::span<const double> r_intra, std::size_t k, double alpha) {
  return std::exp2(-alpha * prefix_mean(log2_distances(r_intra), k));
}

double intercluster_c0(double b_tot, std::size_t k, int n_t, double mean_gain, double e_iout,
                       double inv_snr) {
  const double kk = static_cast<double>(k);
  return static_cast<double>(n_t) / (n_t - 1) * kk * std::exp2(-b_tot / (kk * (n_t - 1))) *
         mean_gain / (e_iout + inv_snr);
}

double b0_intercluster(double b_tot, std::size_t k, int n_t, double mean_gain, double e_iout,
                       double inv_snr) {
  const double kk = static_cast<double>(k);
  const double w = (n_t - 1) * kk / (kk + 1.0);
  return b_tot / (kk + 1.0) - std::log2(static_cast<double>(n_t) * kk / (n_t - 1) * mean_gain) * w +
         std::log2(e_iout + inv_snr) * w;
}

double b0_intercluster_stationary(double b_tot, std::size_t k, int n_t, double mean_gain,
                                  double e_iout, double inv_snr) {
  const double kk = static_cast<double>(k);
  return b0_intercluster(b_tot, k, n_t, mean_gain, e_iout, inv_snr) +
         (n_t - 1) * kk / (kk + 1.0) * std::log2(kk);
}

double b0_residual(std::size_t k, int n_t) {
  return (n_t - 1) * std::log2(static_cast<double>(k) * std::numbers::log2e *
                               specfun::gamma(static_cast<double>(n_t) / (n_t - 1)));
}

double b0_residual_stationary(std::size_t k, int n_t) {
  return (n_t - 1) *
         std::log2(static_cast<double>(k) * specfun::gamma(static_cast<double>(n_t) / (n_t - 1)));
}

std::vector<int> round_largest_remainder(std::span<const double> x, int total) {
  std::vector<int> out(x.size());
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  int sum = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = static_cast<int>(std::floor(std::max(0.0, x[i])));
    sum += out[i];
  }
  auto frac = [&](std::size_t i) { return std::max(0.0, x[i]) - out[i]; };
  if (sum < total && !x.empty()) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac(a) > frac(b); });
    for (std::size_t j = 0; sum < total; j = (j + 1) % order.size(), ++sum) ++out[order[j]];
  } else if (sum > total) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac(a) < frac(b); });
    while (sum > total) {
      bool moved = false;
      for (std::size_t j : order) {
        if (sum == total) break;
        if (out[j] > 0) {
          --out[j];
          --sum;
          moved = true;
        }
      }
      if (!moved) break;
    }
  }
  return out;
}

std::vector<int> split_interferer_bits(std::span<const double> r_intra, int b_i, int n_t, double alpha) {
  std::vector<int> out(r_intra.size(), 0);
  const auto k = effective_set(r_intra, b_i, n_t, alpha).size();
  const auto bits = round_largest_remainder(interferer_bits(r_intra, k, b_i, n_t, alpha), b_i);
  std::copy(bits.begin(), bits.end(), out.begin());
  return out;
}

BitAllocation adaptive_allocation(std::span<const double> r_intra, int b_tot, int n_t, double alpha,
                                  double e_iout, double inv_snr, const AdaptiveOptions& opt) {
  require_nt(n_t);
  if (b_tot < 0) throw InsufficientBudget("adaptive_allocation: negative budget");
  const std::size_t n = r_intra.size();
  BitAllocation a;
  a.b_intra.assign(n, 0);
  if (n == 0) {
    a.b0 = b_tot;
    return a;
  }
  const double total = b_tot;
  const double threshold = e_iout + inv_snr;

  auto clamp = [&](double b0) { return std::clamp(b0, 0.0, total); };
  auto b0_for = [&](Regime regime, std::size_t k) {
    if (k == 0) return total;
    if (regime == Regime::DominantResidual) {
      return clamp(opt.rule == B0Rule::Printed ? b0_residual(k, n_t) : b0_residual_stationary(k, n_t));
    }
    const double g = geometric_mean_gain(r_intra, k, alpha);
    return clamp(opt.rule == B0Rule::Printed
                     ? b0_intercluster(total, k, n_t, g, e_iout, inv_snr)
                     : b0_intercluster_stationary(total, k, n_t, g, e_iout, inv_snr));
  };
  // The closed forms depend on |K|, and K depends on the bits left after B0.
  auto solve = [&](Regime regime) {
    std::size_t k = effective_set(r_intra, total * n / (n + 1.0), n_t, alpha).size();
    double b0 = b0_for(regime, k);
    for (std::size_t it = 0; it <= n + 1; ++it) {
      const std::size_t next = effective_set(r_intra, total - b0, n_t, alpha).size();
      if (next == k) break;
      k = next;
      b0 = b0_for(regime, k);
    }
    return b0;
  };
  auto residual_at = [&](double b0) {
    const double b_i = total - b0;
    const auto k = effective_set(r_intra, b_i, n_t, alpha).size();
    return residual_objective(r_intra, interferer_bits(r_intra, k, b_i, n_t, alpha), n_t, alpha);
  };

  const std::vector<double> equal(n, total / (n + 1.0));
  double b0 = solve(Regime::DominantInterCluster);
  a.regime = Regime::DominantInterCluster;
  if (residual_objective(r_intra, equal, n_t, alpha) > threshold && residual_at(b0) > threshold) {
    a.regime = Regime::DominantResidual;
    b0 = solve(Regime::DominantResidual);
  }

  a.b0 = static_cast<int>(a.regime == Regime::DominantResidual ? std::ceil(b0 - 1e-9) : std::floor(b0 + 1e-9));
  a.b0 = std::clamp(a.b0, 0, b_tot);
  a.b_intra = split_interferer_bits(r_intra, b_tot - a.b0, n_t, alpha);
  if (std::all_of(a.b_intra.begin(), a.b_intra.end(), [](int b) { return b == 0; })) a.b0 = b_tot;
  for (std::size_t l = 0; l < n; ++l) {
    if (a.b_intra[l] > 0) a.effective_set.push_back(l);
  }
  return a;
}

}  // namespace clustersim::feedback
