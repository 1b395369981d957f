#include "clustersim/config.hpp"

#include <cmath>

#include "clustersim/errors.hpp"

namespace clustersim {

double SimConfig::noise_power() const { return std::pow(10.0, -snr_db / 10.0); }

int SimConfig::antennas_for(int n) const {
  if (const auto* f = std::get_if<FollowN>(&antenna_mode)) return n + f->extra_dof;
  return std::get<Fixed>(antenna_mode).antennas;
}

void SimConfig::validate() const {
  if (!(lambda_b > 0.0) || !(lambda_c > 0.0)) throw ConfigError("densities must be positive");
  if (lambda_c > lambda_b) throw ConfigError("lambda_c must not exceed lambda_b");
  if (!(alpha > 2.0)) throw ConfigError("path-loss exponent must exceed 2");
  if (!std::isfinite(snr_db)) throw ConfigError("snr_db must be finite");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (!(window_cluster_count > 0.0)) throw ConfigError("window_cluster_count must be positive");
  if (b_tot < 0) throw ConfigError("b_tot must be non-negative");
  if (const auto* f = std::get_if<FollowN>(&antenna_mode)) {
    if (f->extra_dof < 1) throw ConfigError("extra degrees of freedom must be at least 1");
  } else if (std::get<Fixed>(antenna_mode).antennas < 1) {
    throw ConfigError("antenna count must be at least 1");
  }
}

SimConfig SimConfig::with_ratio(double ratio) const {
  SimConfig copy = *this;
  copy.lambda_c = lambda_b / ratio;
  return copy;
}

}  // namespace clustersim
