#include "clustersim/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace clustersim::channel {

double path_loss(double r, double alpha) { return std::pow(1.0 + r, alpha); }

CVector sample_cn(int n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  CVector v(n);
  for (int i = 0; i < n; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v(i) = {re, im};
  }
  return v;
}

CVector sample_isotropic(int n, Rng& rng) {
  for (;;) {
    CVector v = sample_cn(n, rng);
    const double nv = v.norm();
    if (nv > 0) return v / nv;
  }
}

ChannelSet sample_channels(int n_t, int n, std::size_t n_out, Rng& rng) {
  ChannelSet ch;
  ch.h0 = sample_cn(n_t, rng);
  ch.g_intra.reserve(static_cast<std::size_t>(n));
  ch.g_cross.reserve(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) ch.g_intra.push_back(sample_cn(n_t, rng));
  for (int l = 0; l < n; ++l) ch.g_cross.push_back(sample_cn(n_t, rng));
  std::exponential_distribution<double> expo(1.0);
  ch.out_fading.resize(n_out);
  for (auto& x : ch.out_fading) x = expo(rng);
  ch.intra_fading.resize(static_cast<std::size_t>(n));
  for (auto& x : ch.intra_fading) x = expo(rng);
  return ch;
}

double far_field_mean(double radius, double lambda_b, double alpha) {
  const double q = 1.0 + radius;
  return 2.0 * std::numbers::pi * lambda_b *
         (std::pow(q, 2.0 - alpha) / (alpha - 2.0) - std::pow(q, 1.0 - alpha) / (alpha - 1.0));
}

}  // namespace clustersim::channel
