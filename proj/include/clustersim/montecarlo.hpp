#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "clustersim/config.hpp"
#include "clustersim/feedback.hpp"
#include "clustersim/rng.hpp"

namespace clustersim::montecarlo {

enum class Policy { Adaptive, EqualBias, EqualNoBias };

/// ICIN when the cluster fits in the antenna budget, single-cell MRT otherwise.
enum class Branch { Icin, SingleCell };

struct TrialOptions {
  /// Limited-feedback policies evaluated on the same channel draw.
  std::vector<Policy> policies;
  /// Mean inter-cluster interference used by the adaptive allocator.
  double e_iout = 0.0;
  feedback::B0Rule b0_rule = feedback::B0Rule::Printed;
};

struct TrialOutcome {
  /// SINR of the coordinated strategy: ICIN, or single-cell MRT when ICIN is infeasible.
  double sinr_ic = 0.0;
  /// SINR under unconditional single-cell MRT.
  double sinr_nic = 0.0;
  /// One limited-feedback SINR per requested policy.
  std::vector<double> sinr_ic_lf;
  std::vector<feedback::BitAllocation> allocations;
  int n_interferers = 0;
  int n_t = 0;
  Branch regime_used = Branch::Icin;
  /// |h0^* f0|^2 of the perfect-CSI ICIN beamformer (zero in the single-cell branch).
  double desired_gain_ic = 0.0;
  /// Realizations discarded (degenerate geometry or singular nulling) before this one.
  std::size_t rejections = 0;
};

struct Estimate {
  double mean = 0.0;
  double ci95_halfwidth = 0.0;
  std::size_t trials = 0;
};

/// Streaming mean/variance with an associative merge.
struct Accumulator {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const Accumulator& other);
  Estimate estimate() const;
};

/// Options with e_iout taken from the analytical interference moments.
TrialOptions default_trial_options(const SimConfig& cfg, std::vector<Policy> policies);

/// One realization: geometry, fading, beamformers and every requested SINR.
TrialOutcome run_trial(const SimConfig& cfg, Rng& rng, const TrialOptions& opt = {});

/// cfg.trials outcomes; trial i draws from substream(cfg.seed, i), so the result does
/// not depend on the number of worker threads.
std::vector<TrialOutcome> run_trials(const SimConfig& cfg, const TrialOptions& opt = {});

enum class Strategy { Icin, NoCoordination, LimitedFeedback };

/// SINR of one outcome under a strategy (policy indexes TrialOptions::policies).
double strategy_sinr(const TrialOutcome& t, Strategy s, std::size_t policy = 0);

/// Fraction of trials with SINR >= T for each linear threshold T.
std::vector<Estimate> estimate_coverage(std::span<const TrialOutcome> trials, std::span<const double> thresholds,
                                        Strategy s, std::size_t policy = 0);

/// Mean of log2(1 + SINR).
Estimate estimate_rate(std::span<const TrialOutcome> trials, Strategy s, std::size_t policy = 0);

/// Paired mean of log2(1 + SINR_ic) - log2(1 + SINR_lf).
Estimate estimate_rate_loss(std::span<const TrialOutcome> trials, std::size_t policy);

/// Network average of the per-realization adaptive rate-loss bound, with the geometry
/// sampled and the channel terms analytical.
Estimate estimate_adaptive_loss_bound(const SimConfig& cfg, feedback::B0Rule rule = feedback::B0Rule::Printed);

}  // namespace clustersim::montecarlo
