#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "clustersim/errors.hpp"
#include "clustersim/feedback.hpp"
#include "oracles.hpp"

using namespace clustersim;
using namespace clustersim::feedback;
using channel::sample_cn;
using channel::sample_isotropic;

namespace {

// Stirling-form residual interference, written out independently of the library.
double objective(const std::vector<double>& r, const std::vector<int>& bits, int n_t, double alpha) {
  double s = 0;
  for (std::size_t l = 0; l < r.size(); ++l) {
    s += std::pow(1 + r[l], -alpha) * std::tgamma((2.0 * n_t - 1) / (n_t - 1)) * std::exp2(-bits[l] / (n_t - 1.0));
  }
  return s;
}

double exhaustive_optimum(const std::vector<double>& r, int b_i, int n_t, double alpha) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> bits(r.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t l, int left) {
    if (l + 1 == r.size()) {
      bits[l] = left;
      best = std::min(best, objective(r, bits, n_t, alpha));
      return;
    }
    for (int b = 0; b <= left; ++b) {
      bits[l] = b;
      rec(l + 1, left - b);
    }
  };
  rec(0, b_i);
  return best;
}

// Admissibility of one candidate prefix of size k, straight from the definition.
bool prefix_admissible(const std::vector<double>& r, std::size_t k, double b_i, int n_t, double alpha) {
  double log_prod = 0;
  for (std::size_t j = 0; j < k; ++j) log_prod += -alpha / k * std::log2(1 + r[j]);
  for (std::size_t l = 0; l < k; ++l) {
    if (!(log_prod + alpha * std::log2(1 + r[l]) < b_i / (k * (n_t - 1.0)))) return false;
  }
  return true;
}

std::vector<double> sorted_distances(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 3.0);
  std::vector<double> r(n);
  for (auto& x : r) x = u(rng);
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace

TEST_CASE("codebook size limits") {
  Rng rng(1);
  const CVector v = sample_isotropic(4, rng);
  CHECK_THROWS_AS(rvq_quantize(v, 0, rng), DomainError);
  CHECK_THROWS_AS(rvq_quantize(v, kMaxCodebookBits + 1, rng), BudgetExceeded);
}

TEST_CASE("selection is the exhaustive argmax with lowest-index ties") {
  Rng rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const CVector v = sample_isotropic(3, rng);
    std::vector<CVector> book{sample_isotropic(3, rng), sample_isotropic(3, rng)};
    const double g0 = std::norm(v.dot(book[0])), g1 = std::norm(v.dot(book[1]));
    CHECK(rvq_select(v, book) == (g1 > g0 ? 1u : 0u));
  }
  const CVector v = sample_isotropic(3, rng);
  std::vector<CVector> twins{v, v};
  CHECK(rvq_select(v, twins) == 0);
}

TEST_CASE("quantizer returns the best codeword of the codebook it streams") {
  Rng rng(3);
  for (int bits : {1, 3, 6}) {
    const CVector v = sample_isotropic(4, rng);
    Rng replay = rng;
    std::vector<CVector> book;
    for (int i = 0; i < (1 << bits); ++i) book.push_back(sample_isotropic(4, replay));
    const CVector c = rvq_quantize(v, bits, rng);
    CHECK((c - book[rvq_select(v, book)]).norm() == 0.0);
  }
}

TEST_CASE("a codeword quantizes to itself") {
  Rng rng(4);
  Rng replay = rng;
  std::vector<CVector> book;
  for (int i = 0; i < 16; ++i) book.push_back(sample_isotropic(5, replay));
  const CVector v = book[11];
  const CVector c = rvq_quantize(v, 4, rng);
  CHECK(std::abs(v.dot(c)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("explicit RVQ distortion has the closed-form mean and law") {
  Rng rng(5);
  for (int n_t : {2, 4}) {
    for (int bits : {2, 6, 10}) {
      const int reps = bits == 10 ? 2000 : 10000;
      std::vector<double> z;
      for (int i = 0; i < reps; ++i) {
        const CVector v = sample_isotropic(n_t, rng);
        z.push_back(1 - std::norm(v.dot(rvq_quantize(v, bits, rng))));
      }
      const auto s = oracle::mean_se(z);
      const double mean = std::exp2(bits) * oracle::beta_fn(std::exp2(bits), n_t / (n_t - 1.0));
      CHECK(std::abs(s.mean - mean) < 3 * s.se);
      CHECK(rvq_mean_distortion(n_t, bits) == doctest::Approx(mean).epsilon(1e-12));
      const double ks = oracle::ks_distance(z, [&](double x) { return 1 - std::pow(1 - std::pow(x, n_t - 1), std::exp2(bits)); });
      CHECK(ks < 1.63 / std::sqrt(reps));  // 1% level
    }
  }
}

TEST_CASE("distributional quantizer matches the explicit codebook") {
  Rng rng(6);
  const int n_t = 4, bits = 5, reps = 20000;
  std::vector<double> z_explicit, z_dist, phase_dist;
  for (int i = 0; i < reps; ++i) {
    const CVector v = sample_isotropic(n_t, rng);
    z_explicit.push_back(1 - std::norm(v.dot(rvq_quantize(v, bits, rng))));
    const CVector c = rvq_quantize_distributional(v, bits, rng);
    CHECK(c.norm() == doctest::Approx(1.0).epsilon(1e-12));
    z_dist.push_back(1 - std::norm(v.dot(c)));
  }
  auto cdf = [&](double x) { return 1 - std::pow(1 - std::pow(x, n_t - 1), std::exp2(bits)); };
  CHECK(oracle::ks_distance(z_explicit, cdf) < 0.0115);
  CHECK(oracle::ks_distance(z_dist, cdf) < 0.0115);
  // Huge codebooks stay finite and shrink the distortion geometrically.
  CHECK(sample_rvq_distortion(4, 60, rng) < 1e-5);
  CHECK(sample_rvq_distortion(1, 3, rng) == 0.0);
}

TEST_CASE("residual interference generator mean") {
  Rng rng(7);
  for (int n_t : {4, 8}) {
    for (int bits : {4, 8, 12}) {
      std::vector<double> p;
      for (int i = 0; i < 100000; ++i) p.push_back(sample_residual_power(sample_cn(n_t, rng), n_t, bits, rng));
      const auto s = oracle::mean_se(p);
      const double ref = n_t / (n_t - 1.0) * std::exp2(bits) * oracle::beta_fn(std::exp2(bits), n_t / (n_t - 1.0));
      CHECK(std::abs(s.mean - ref) < 3 * s.se);
      CHECK(residual_power_mean(n_t, bits) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("residual generator matches nulling against an explicit quantization") {
  // Physical oracle: the interferer quantizes g with a real codebook and beams
  // isotropically inside the orthogonal complement of the quantized direction.
  Rng rng(8);
  const int n_t = 4, bits = 4, reps = 20000;
  std::vector<double> direct, generated;
  for (int i = 0; i < reps; ++i) {
    const CVector g = sample_cn(n_t, rng);
    const CVector q = rvq_quantize(g.normalized(), bits, rng);
    CVector f = sample_cn(n_t, rng);
    f -= q * q.dot(f);
    f.normalize();
    direct.push_back(std::norm(g.dot(f)));
    generated.push_back(sample_residual_power(sample_cn(n_t, rng), n_t, bits, rng));
  }
  // two-sample KS at the 1% level
  std::sort(direct.begin(), direct.end());
  std::sort(generated.begin(), generated.end());
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < direct.size() && j < generated.size()) {
    if (direct[i] <= generated[j]) ++i; else ++j;
    d = std::max(d, std::abs(double(i) - double(j)) / reps);
  }
  CHECK(d < 1.63 * std::sqrt(2.0 / reps));
}

TEST_CASE("Stirling form is the large-codebook limit") {
  for (int n_t : {3, 6}) {
    CHECK(residual_power_stirling(n_t, 40) / residual_power_mean(n_t, 40) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(residual_power_stirling(n_t, 0) == doctest::Approx(std::tgamma((2.0 * n_t - 1) / (n_t - 1))));
  }
}

TEST_CASE("equal allocation examples") {
  auto a = equal_allocation(50, 3, true);
  CHECK(a.b_intra == std::vector<int>{12, 12, 12});
  CHECK(a.b0 == 14);
  CHECK(a.total() == 50);
  auto b = equal_allocation(50, 3, false);
  CHECK(b.b_intra == std::vector<int>{12, 12, 12});
  CHECK(b.b0 == 12);
  CHECK(b.total() == 48);
  auto c = equal_allocation(8, 7, true);
  CHECK(c.b_intra == std::vector<int>(7, 1));
  CHECK(c.b0 == 1);
  CHECK_THROWS_AS(equal_allocation(6, 7, true), InsufficientBudget);
  auto d = equal_split(6, 7, true);
  CHECK(d.b0 == 6);
  CHECK(d.effective_set.empty());
}

TEST_CASE("effective set edge cases") {
  std::vector<double> same{1.0, 1.0, 1.0, 1.0};
  CHECK(effective_set(same, 0.5, 4, 4).size() == 4);
  std::vector<double> spread{0.2, 1.0, 7.0, 40.0};
  CHECK(effective_set(spread, 1e6, 4, 4).size() == 4);
  CHECK(effective_set(spread, 0.0, 4, 4).empty());
}

TEST_CASE("effective set equals the brute-force prefix search") {
  std::vector<double> r{1, 2, 50};
  std::size_t expect = 0;
  for (std::size_t k = 1; k <= 3; ++k) if (prefix_admissible(r, k, 6, 4, 4)) expect = k;
  CHECK(effective_set(r, 6, 4, 4).size() == expect);

  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 2000; ++rep) {
    const auto d = sorted_distances(1 + rng() % 6, rng);
    const double b_i = std::uniform_real_distribution<double>(0.1, 40)(rng);
    const int n_t = 2 + static_cast<int>(rng() % 8);
    std::size_t best = 0;
    for (std::size_t k = 1; k <= d.size(); ++k) if (prefix_admissible(d, k, b_i, n_t, 4)) best = k;
    CHECK(effective_set(d, b_i, n_t, 4).size() == best);
  }
}

TEST_CASE("closer interferers never receive fewer bits") {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 500; ++rep) {
    const auto d = sorted_distances(1 + rng() % 5, rng);
    const int b_i = static_cast<int>(rng() % 40);
    const auto bits = split_interferer_bits(d, b_i, 6, 4);
    CHECK(std::accumulate(bits.begin(), bits.end(), 0) == b_i);
    CHECK(std::is_sorted(bits.rbegin(), bits.rend()));
  }
}

TEST_CASE("symmetric interferers split evenly") {
  std::vector<double> d{1.3, 1.3, 1.3};
  const auto bits = split_interferer_bits(d, 31, 4, 4);
  CHECK(*std::max_element(bits.begin(), bits.end()) - *std::min_element(bits.begin(), bits.end()) <= 1);
  const auto a = adaptive_allocation(d, 40, 6, 4, 0.05, 0.1);
  CHECK(*std::max_element(a.b_intra.begin(), a.b_intra.end()) - *std::min_element(a.b_intra.begin(), a.b_intra.end()) <= 1);
}

TEST_CASE("continuous split is stationary for the residual objective") {
  // Lagrange condition: every member of the effective set has the same marginal gain.
  std::vector<double> d{0.3, 0.8, 1.4};
  const auto k = effective_set(d, 24, 5, 4).size();
  REQUIRE(k == 3);
  const auto b = interferer_bits(d, k, 24, 5, 4);
  CHECK(std::accumulate(b.begin(), b.end(), 0.0) == doctest::Approx(24.0));
  std::vector<double> marginal;
  for (std::size_t l = 0; l < k; ++l) marginal.push_back(std::pow(1 + d[l], -4.0) * std::exp2(-b[l] / 4));
  for (double m : marginal) CHECK(m == doctest::Approx(marginal[0]).epsilon(1e-12));
  CHECK(residual_objective(d, b, 5, 4) == doctest::Approx(3 * std::tgamma(9.0 / 4) * marginal[0]).epsilon(1e-12));
}

TEST_CASE("integer split is within 5% of the exhaustive optimum") {
  std::mt19937_64 rng(11);
  double worst = 0;
  for (int n_t : {4, 6}) {
    for (std::size_t n = 1; n <= 3; ++n) {
      for (int b_i = 0; b_i <= 14; ++b_i) {
        for (int rep = 0; rep < 20; ++rep) {
          const auto d = sorted_distances(n, rng);
          const double got = objective(d, split_interferer_bits(d, b_i, n_t, 4), n_t, 4);
          worst = std::max(worst, got / exhaustive_optimum(d, b_i, n_t, 4) - 1);
        }
      }
    }
  }
  CHECK(worst <= 0.05);
}

TEST_CASE("largest remainder rounding") {
  std::vector<double> x{2.6, 1.3, 0.1};
  CHECK(round_largest_remainder(x, 4) == std::vector<int>{3, 1, 0});
  std::vector<double> y{-0.5, 3.7};
  CHECK(round_largest_remainder(y, 4) == std::vector<int>{0, 4});
}

TEST_CASE("printed inter-cluster B0 meets the stated equality condition") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t k = 1 + rng() % 5;
    const int n_t = static_cast<int>(k) + 1 + static_cast<int>(rng() % 6);
    const double b_tot = 10 + 40 * u(rng), g = std::pow(10.0, -3 * u(rng)), e = 0.01 + u(rng), w = 0.1 * u(rng);
    const double c0 = intercluster_c0(b_tot, k, n_t, g, e, w);
    const double b0 = b0_intercluster(b_tot, k, n_t, g, e, w);
    const double lhs = std::exp2(-b0 / (n_t - 1));
    CHECK(lhs == doctest::Approx(c0 * std::exp2(b0 / (k * (n_t - 1.0)))).epsilon(1e-9));
    // the exact minimizer satisfies the weighted AM-GM condition with C0/k
    const double bs = b0_intercluster_stationary(b_tot, k, n_t, g, e, w);
    CHECK(std::exp2(-bs / (n_t - 1)) == doctest::Approx(c0 / k * std::exp2(bs / (k * (n_t - 1.0)))).epsilon(1e-9));
  }
}

TEST_CASE("stationary B0 forms minimize the low and high SNR objectives") {
  const int n_t = 6;
  const std::size_t k = 3;
  const double g = 0.02, e = 0.3, w = 0.1, b_tot = 40;
  const double g1 = std::tgamma(n_t / (n_t - 1.0)), g2 = std::tgamma((2.0 * n_t - 1) / (n_t - 1));
  auto scan = [](auto&& f) {
    double best_x = 0, best = std::numeric_limits<double>::infinity();
    for (double x = 0; x <= 40; x += 1e-4) {
      if (f(x) < best) best = f(x), best_x = x;
    }
    return best_x;
  };
  // low SNR: linearized log2(I_res + E + 1/SNR)
  const double low = scan([&](double b0) {
    return g1 * std::exp2(-b0 / (n_t - 1)) + k * g * g2 * std::exp2(-(b_tot - b0) / (k * (n_t - 1.0))) / (e + w);
  });
  CHECK(b0_intercluster_stationary(b_tot, k, n_t, g, e, w) == doctest::Approx(low).epsilon(1e-3));
  // high SNR: residual dominates the interference
  const double high = scan([&](double b0) {
    return std::numbers::log2e * g1 * std::exp2(-b0 / (n_t - 1)) +
           std::log2(k * g * g2 * std::exp2(-(b_tot - b0) / (k * (n_t - 1.0))));
  });
  CHECK(b0_residual_stationary(k, n_t) == doctest::Approx(high).epsilon(1e-3));
  CHECK(std::round(b0_residual_stationary(k, n_t)) == 7);
  // the printed closed form sits (n_t-1) log2(log2 e) bits higher
  CHECK(b0_residual(k, n_t) - b0_residual_stationary(k, n_t) ==
        doctest::Approx((n_t - 1) * std::log2(std::numbers::log2e)).epsilon(1e-12));
  CHECK(std::round(b0_residual(k, n_t)) == 10);
}

TEST_CASE("adaptive allocation respects the budget") {
  std::mt19937_64 rng(13);
  for (auto rule : {B0Rule::Printed, B0Rule::Stationary}) {
    for (int rep = 0; rep < 1000; ++rep) {
      const auto d = sorted_distances(rng() % 7, rng);
      const int b_tot = static_cast<int>(rng() % 60);
      const int n_t = static_cast<int>(d.size()) + 2 + static_cast<int>(rng() % 6);
      const double inv_snr = std::pow(10.0, -static_cast<double>(rng() % 6));
      const auto a = adaptive_allocation(d, b_tot, n_t, 4, 0.05, inv_snr, {rule});
      CHECK(a.total() == b_tot);
      CHECK(a.b0 >= 0);
      for (int b : a.b_intra) CHECK(b >= 0);
      for (std::size_t l = 0; l < d.size(); ++l) {
        const bool in = std::find(a.effective_set.begin(), a.effective_set.end(), l) != a.effective_set.end();
        CHECK(in == (a.b_intra[l] > 0));
      }
    }
  }
  CHECK(adaptive_allocation({}, 17, 4, 4, 0.1, 0.1).b0 == 17);
}

TEST_CASE("regime follows the residual versus noise-plus-interference test") {
  std::vector<double> d{0.5, 0.9};
  // loud network: residual is small next to E{I_out} + 1/SNR
  CHECK(adaptive_allocation(d, 30, 6, 4, 10.0, 1.0).regime == Regime::DominantInterCluster);
  // quiet network: residual dominates; B0 comes from the residual closed form, rounded up
  const auto a = adaptive_allocation(d, 30, 6, 4, 1e-6, 1e-6);
  CHECK(a.regime == Regime::DominantResidual);
  CHECK(a.b0 == static_cast<int>(std::ceil(b0_residual(2, 6))));
}
