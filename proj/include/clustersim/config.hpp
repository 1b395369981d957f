#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>

namespace clustersim {

/// Antennas track the cluster size: N_t = N + extra_dof.
struct FollowN {
  int extra_dof = 7;
};

/// Antenna count fixed at every base station; coordination only when N < antennas.
struct Fixed {
  int antennas = 10;
};

using AntennaMode = std::variant<FollowN, Fixed>;

/// Parameters of one simulated or analysed network. Lengths are in units of
/// lambda_b^(-1/2) when lambda_b = 1 (the default normalization).
struct SimConfig {
  double lambda_b = 1.0;
  double lambda_c = 1.0 / 3.0;
  double alpha = 4.0;
  double snr_db = 10.0;
  AntennaMode antenna_mode = FollowN{};
  int b_tot = 50;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  double window_cluster_count = 100.0;

  /// Average cluster size lambda_b / lambda_c.
  double ratio() const { return lambda_b / lambda_c; }
  /// Noise power sigma^2 with E_s = 1, i.e. 1/SNR.
  double noise_power() const;
  /// Transmit antennas used when the typical cluster holds n interferers.
  int antennas_for(int n) const;
  bool follows_n() const { return std::holds_alternative<FollowN>(antenna_mode); }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  /// Copy with lambda_c set so that lambda_b / lambda_c == ratio.
  SimConfig with_ratio(double ratio) const;
};

}  // namespace clustersim
