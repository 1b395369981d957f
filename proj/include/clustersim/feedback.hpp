#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "clustersim/channel.hpp"
#include "clustersim/rng.hpp"

namespace clustersim::feedback {

using channel::CVector;

/// Largest per-channel budget for an explicit RVQ codebook (4M codewords).
inline constexpr int kMaxCodebookBits = 22;

enum class Regime { DominantInterCluster, DominantResidual };

struct BitAllocation {
  int b0 = 0;
  std::vector<int> b_intra;              ///< one entry per intra-cluster interferer
  std::vector<std::size_t> effective_set; ///< interferers with positive bits, ascending
  Regime regime = Regime::DominantInterCluster;

  int total() const;
};

/// Quantizes v_dir with a fresh codebook of 2^bits isotropic unit vectors and returns the
/// codeword maximizing |v_dir^* c| (lowest index on ties). Codewords are streamed, not stored.
/// Throws DomainError for bits < 1, BudgetExceeded for bits > kMaxCodebookBits.
CVector rvq_quantize(const CVector& v_dir, int bits, Rng& rng);

/// Index of the codeword maximizing |v^* c|; ties go to the lowest index.
std::size_t rvq_select(const CVector& v, std::span<const CVector> codebook);

/// Draws the RVQ quantization error Z = 1 - |v^* c_best|^2 for a 2^bits codebook in C^n_t
/// from its exact law P(Z > z) = (1 - z^(n_t-1))^(2^bits). Valid for any bits >= 0 (bits = 0
/// means no feedback, i.e. a single random codeword). Zero when n_t = 1.
double sample_rvq_distortion(int n_t, double bits, Rng& rng);

/// Quantized direction with the same joint law as rvq_quantize: distortion from
/// sample_rvq_distortion, error direction isotropic in the complement of v_dir.
CVector rvq_quantize_distributional(const CVector& v_dir, double bits, Rng& rng);

/// E{Z} = 2^B B(2^B, n_t/(n_t-1)).
double rvq_mean_distortion(int n_t, double bits);

/// E{|g^* f|^2} for g ~ CN(0, I) and f orthogonal to a B-bit quantization of g's
/// direction: n_t/(n_t-1) * 2^B B(2^B, n_t/(n_t-1)).
double residual_power_mean(int n_t, double bits);

/// Draws |g^* f|^2 for an interferer that nulls towards a B-bit quantization of g's
/// direction: |g|^2 Z Y, Z the RVQ distortion and Y ~ Beta(1, n_t-2) the share of the
/// error direction falling on the interferer's own beam (Y = 1 when n_t = 2).
double sample_residual_power(const CVector& g, int n_t, double bits, Rng& rng);

/// Large-codebook form of residual_power_mean: Gamma((2n_t-1)/(n_t-1)) 2^(-B/(n_t-1)).
double residual_power_stirling(int n_t, double bits);

/// Near-equal split: every interferer gets floor(b_tot/(n+1)); with bias the desired
/// channel also takes the remainder. Throws InsufficientBudget when b_tot < n + 1.
BitAllocation equal_allocation(int b_tot, int n, bool bias);

/// Same split without the budget precondition: when b_tot < n + 1 the interferers get
/// zero bits and the desired channel keeps whatever the rule leaves it.
BitAllocation equal_split(int b_tot, int n, bool bias);

/// Largest prefix of the (ascending) interferer distances that can all receive positive
/// bits from a budget b_i. Empty when b_i <= 0.
std::vector<std::size_t> effective_set(std::span<const double> r_intra, double b_i, int n_t,
                                       double alpha);

/// Continuous bits per member of the first k interferers minimizing the residual
/// interference under a budget b_i.
std::vector<double> interferer_bits(std::span<const double> r_intra, std::size_t k, double b_i,
                                    int n_t, double alpha);

/// sum_l (1+r_l)^(-alpha) Gamma((2n_t-1)/(n_t-1)) 2^(-B_l/(n_t-1)) over all interferers
/// (bits beyond `bits.size()` count as zero).
double residual_objective(std::span<const double> r_intra, std::span<const double> bits, int n_t,
                          double alpha);

/// Geometric mean of the path gains (1+r)^(-alpha) of the first k interferers.
double geometric_mean_gain(std::span<const double> r_intra, std::size_t k, double alpha);

/// Closed-form desired-channel bits when inter-cluster interference dominates
/// (low-SNR form of the loss, k effective interferers).
double b0_intercluster(double b_tot, std::size_t k, int n_t, double mean_gain, double e_iout,
                       double inv_snr);

/// Closed-form desired-channel bits when residual interference dominates.
double b0_residual(std::size_t k, int n_t);

/// C_0 of the low-SNR objective 2^(-B0/(n_t-1)) + C_0 2^(B0/(k(n_t-1))).
double intercluster_c0(double b_tot, std::size_t k, int n_t, double mean_gain, double e_iout,
                       double inv_snr);

/// Which closed form supplies the desired-channel bits.
enum class B0Rule {
  Printed,    ///< the standard closed forms as usually stated
  Stationary  ///< exact stationary points of the same low/high-SNR objectives
};

/// Minimizer of 2^(-B0/(n_t-1)) + C_0 2^(B0/(k(n_t-1))) (differs from the printed
/// form by (n_t-1) k/(k+1) log2 k).
double b0_intercluster_stationary(double b_tot, std::size_t k, int n_t, double mean_gain,
                                  double e_iout, double inv_snr);

/// Minimizer of the high-SNR objective (differs from the printed form by (n_t-1) log2 log2 e).
double b0_residual_stationary(std::size_t k, int n_t);

/// Integer split of b_i over the interferers: effective set, continuous optimum, then
/// largest-remainder rounding. Interferers outside the effective set get zero.
std::vector<int> split_interferer_bits(std::span<const double> r_intra, int b_i, int n_t, double alpha);

/// Largest-remainder rounding of nonnegative reals to integers summing to `total`.
std::vector<int> round_largest_remainder(std::span<const double> x, int total);

struct AdaptiveOptions {
  B0Rule rule = B0Rule::Printed;
};

/// Per-realization adaptive split of b_tot between the desired channel and the
/// intra-cluster interferers (given at ascending distances r_intra).
BitAllocation adaptive_allocation(std::span<const double> r_intra, int b_tot, int n_t, double alpha,
                                  double e_iout, double inv_snr, const AdaptiveOptions& opt = {});

}  // namespace clustersim::feedback
