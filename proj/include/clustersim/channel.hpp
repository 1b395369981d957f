#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "clustersim/rng.hpp"

namespace clustersim::channel {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// L(r) = (1+r)^alpha; received power scales as 1/L(r).
double path_loss(double r, double alpha);

/// Fading draws for one trial.
struct ChannelSet {
  CVector h0;                     ///< serving BS -> typical user
  std::vector<CVector> g_intra;   ///< intra-cluster interferer l -> typical user
  std::vector<CVector> g_cross;   ///< serving BS -> user of interferer l (the vectors it nulls)
  std::vector<double> out_fading; ///< effective powers of out-of-cluster interferers, Exp(1)
  std::vector<double> intra_fading; ///< effective intra powers when nobody coordinates, Exp(1)
};

/// Circularly symmetric CN(0, I) vector.
CVector sample_cn(int n, Rng& rng);

/// Isotropic unit vector in C^n.
CVector sample_isotropic(int n, Rng& rng);

ChannelSet sample_channels(int n_t, int n, std::size_t n_out, Rng& rng);

/// Mean interference from a unit-density PPP of interferers with Exp(1) fading
/// lying beyond `radius` from the receiver (Campbell), scaled by lambda_b.
double far_field_mean(double radius, double lambda_b, double alpha);

}  // namespace clustersim::channel
