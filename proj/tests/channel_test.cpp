#include <doctest.h>

#include <cmath>
#include <numbers>

#include "clustersim/channel.hpp"
#include "clustersim/quadrature.hpp"
#include "oracles.hpp"

using namespace clustersim;
using namespace clustersim::channel;

TEST_CASE("path loss values") {
  CHECK(path_loss(0, 4) == 1.0);
  CHECK(path_loss(1, 4) == 16.0);
  CHECK(path_loss(2, 3) == doctest::Approx(27.0).epsilon(1e-15));
}

TEST_CASE("path loss increases in distance and exponent") {
  for (double r = 0.1; r < 50; r *= 1.5) {
    CHECK(path_loss(r * 1.01, 3.5) > path_loss(r, 3.5));
    CHECK(path_loss(r, 3.6) > path_loss(r, 3.5));
  }
}

TEST_CASE("CN(0,I) entries have variance one half per component") {
  Rng rng(1);
  const int reps = 100000;
  std::vector<double> re, im, nrm;
  for (int i = 0; i < reps; ++i) {
    const auto ch = sample_channels(4, 0, 1, rng);
    re.push_back(ch.h0(0).real() * ch.h0(0).real());
    im.push_back(ch.h0(1).imag() * ch.h0(1).imag());
    nrm.push_back(ch.h0.squaredNorm());
  }
  for (const auto* xs : {&re, &im}) {
    const auto s = oracle::mean_se(*xs);
    CHECK(std::abs(s.mean - 0.5) < 3 * s.se);
  }
  const auto s = oracle::mean_se(nrm);
  CHECK(std::abs(s.mean - 4.0) < 3 * s.se);
}

TEST_CASE("out-of-cluster fading is unit exponential") {
  Rng rng(2);
  auto ch = sample_channels(2, 3, 100000, rng);
  const auto s = oracle::mean_se(ch.out_fading);
  CHECK(std::abs(s.mean - 1.0) < 3 * s.se);
  CHECK(oracle::ks_distance(ch.out_fading, [](double x) { return 1 - std::exp(-x); }) < 0.01);
  CHECK(ch.g_intra.size() == 3);
  CHECK(ch.g_cross.size() == 3);
  CHECK(ch.intra_fading.size() == 3);
}

TEST_CASE("projection on an independent unit vector is exponential") {
  Rng rng(3);
  std::vector<double> p;
  for (int i = 0; i < 100000; ++i) {
    const CVector g = sample_cn(5, rng);
    const CVector f = sample_isotropic(5, rng);
    p.push_back(std::norm(g.dot(f)));
  }
  CHECK(oracle::ks_distance(p, [](double x) { return 1 - std::exp(-x); }) < 0.01);
}

TEST_CASE("isotropic vectors have unit norm") {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) CHECK(sample_isotropic(7, rng).norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("far-field mean is the Campbell integral") {
  for (double alpha : {3.0, 4.0, 5.0}) {
    for (double radius : {0.5, 3.0, 9.77}) {
      auto r = quad::integrate_to_infinity(
          [&](double x) { return 2 * std::numbers::pi * x * std::pow(1 + x, -alpha); }, radius,
          {1e-14, 1e-12, 2000});
      CHECK(far_field_mean(radius, 0.7, alpha) == doctest::Approx(0.7 * r.value).epsilon(1e-9));
    }
  }
}
