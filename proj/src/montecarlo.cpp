#include "clustersim/montecarlo.hpp"

#include <cmath>
#include <random>

#include "clustersim/analysis.hpp"
#include "clustersim/beamforming.hpp"
#include "clustersim/channel.hpp"
#include "clustersim/errors.hpp"
#include "clustersim/geometry.hpp"
#include "clustersim/parallel.hpp"

namespace clustersim::montecarlo {
namespace {

constexpr int kMaxRetries = 1000;

std::vector<double> distances(const std::vector<geometry::Interferer>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].distance;
  return out;
}

feedback::BitAllocation allocate(Policy p, const SimConfig& cfg, std::span<const double> r_intra, int n_t,
                                 const TrialOptions& opt) {
  const int n = static_cast<int>(r_intra.size());
  switch (p) {
    case Policy::EqualBias:
      return feedback::equal_split(cfg.b_tot, n, true);
    case Policy::EqualNoBias:
      return feedback::equal_split(cfg.b_tot, n, false);
    case Policy::Adaptive:
      break;
  }
  return feedback::adaptive_allocation(r_intra, cfg.b_tot, n_t, cfg.alpha, opt.e_iout, cfg.noise_power(),
                                       {opt.b0_rule});
}

TrialOutcome attempt(const SimConfig& cfg, Rng& rng, const TrialOptions& opt, std::size_t& rejections) {
  const auto tc = geometry::sample_typical_cluster(cfg, rng, &rejections);
  const int n = tc.n();
  const int n_t = cfg.antennas_for(n);
  const auto ch = channel::sample_channels(n_t, n, tc.out_interferers.size(), rng);
  const double alpha = cfg.alpha;
  const double w = cfg.noise_power();

  double i_out = channel::far_field_mean(geometry::window_radius(cfg), cfg.lambda_b, alpha);
  for (std::size_t j = 0; j < tc.out_interferers.size(); ++j) {
    i_out += ch.out_fading[j] / channel::path_loss(tc.out_interferers[j].distance, alpha);
  }
  double i_in = 0.0;
  for (int l = 0; l < n; ++l) i_in += ch.intra_fading[l] / channel::path_loss(tc.intra_interferers[l].distance, alpha);
  const double gain0 = 1.0 / channel::path_loss(tc.r0, alpha);

  TrialOutcome out;
  out.n_interferers = n;
  out.n_t = n_t;
  out.sinr_nic = ch.h0.squaredNorm() * gain0 / (i_out + i_in + w);

  if (n >= n_t) {
    out.regime_used = Branch::SingleCell;
    out.sinr_ic = out.sinr_nic;
    out.sinr_ic_lf.assign(opt.policies.size(), out.sinr_nic);
    out.allocations.resize(opt.policies.size());
    return out;
  }

  channel::CMatrix G(n_t, n);
  for (int l = 0; l < n; ++l) G.col(l) = ch.g_cross[l].normalized();
  const channel::CVector h_dir = ch.h0.normalized();
  const auto f0 = beamforming::zf_null_beamformer(h_dir, G);
  out.desired_gain_ic = std::norm(ch.h0.dot(f0.f));
  out.sinr_ic = out.desired_gain_ic * gain0 / (i_out + w);

  if (opt.policies.empty()) return out;
  const auto r_intra = distances(tc.intra_interferers);
  // Every policy replays the same quantization randomness (common random numbers).
  const Rng lf_start = rng;
  for (Policy p : opt.policies) {
    Rng lf = lf_start;
    auto alloc = allocate(p, cfg, r_intra, n_t, opt);
    const auto h_hat = feedback::rvq_quantize_distributional(h_dir, alloc.b0, lf);
    const auto f_hat = beamforming::zf_null_beamformer(h_hat, G);
    double residual = 0.0;
    for (int l = 0; l < n; ++l) {
      residual += feedback::sample_residual_power(ch.g_intra[l], n_t, alloc.b_intra[l], lf) /
                  channel::path_loss(tc.intra_interferers[l].distance, alpha);
    }
    out.sinr_ic_lf.push_back(std::norm(ch.h0.dot(f_hat.f)) * gain0 / (i_out + residual + w));
    out.allocations.push_back(std::move(alloc));
  }
  return out;
}

}  // namespace

void Accumulator::add(double x) {
  ++count;
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

void Accumulator::merge(const Accumulator& o) {
  if (o.count == 0) return;
  if (count == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(count + o.count);
  const double delta = o.mean - mean;
  mean += delta * static_cast<double>(o.count) / n;
  m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
  count += o.count;
}

Estimate Accumulator::estimate() const {
  Estimate e;
  e.mean = mean;
  e.trials = count;
  if (count > 1) e.ci95_halfwidth = 1.96 * std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
  return e;
}

TrialOptions default_trial_options(const SimConfig& cfg, std::vector<Policy> policies) {
  TrialOptions opt;
  opt.policies = std::move(policies);
  opt.e_iout = analysis::iout_moments(cfg.lambda_b, cfg.lambda_c, cfg.alpha).mean;
  return opt;
}

TrialOutcome run_trial(const SimConfig& cfg, Rng& rng, const TrialOptions& opt) {
  std::size_t rejections = 0;
  for (int retry = 0; retry < kMaxRetries; ++retry) {
    try {
      auto out = attempt(cfg, rng, opt, rejections);
      out.rejections = rejections;
      return out;
    } catch (const RankDeficient&) {
      ++rejections;
    } catch (const ZeroVector&) {
      ++rejections;
    }
  }
  throw DegenerateRealization("run_trial: no usable realization after repeated resampling");
}

std::vector<TrialOutcome> run_trials(const SimConfig& cfg, const TrialOptions& opt) {
  cfg.validate();
  std::vector<TrialOutcome> out(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t i) {
    Rng rng = substream(cfg.seed, i);
    out[i] = run_trial(cfg, rng, opt);
  });
  return out;
}

double strategy_sinr(const TrialOutcome& t, Strategy s, std::size_t policy) {
  switch (s) {
    case Strategy::Icin:
      return t.sinr_ic;
    case Strategy::NoCoordination:
      return t.sinr_nic;
    case Strategy::LimitedFeedback:
      break;
  }
  if (policy >= t.sinr_ic_lf.size()) throw DomainError("strategy_sinr: policy was not simulated");
  return t.sinr_ic_lf[policy];
}

std::vector<Estimate> estimate_coverage(std::span<const TrialOutcome> trials, std::span<const double> thresholds,
                                        Strategy s, std::size_t policy) {
  std::vector<Estimate> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    Accumulator acc;
    for (const auto& tr : trials) acc.add(strategy_sinr(tr, s, policy) >= t ? 1.0 : 0.0);
    out.push_back(acc.estimate());
  }
  return out;
}

Estimate estimate_rate(std::span<const TrialOutcome> trials, Strategy s, std::size_t policy) {
  Accumulator acc;
  for (const auto& tr : trials) acc.add(std::log2(1.0 + strategy_sinr(tr, s, policy)));
  return acc.estimate();
}

Estimate estimate_rate_loss(std::span<const TrialOutcome> trials, std::size_t policy) {
  Accumulator acc;
  for (const auto& tr : trials) {
    acc.add(std::log2(1.0 + tr.sinr_ic) - std::log2(1.0 + strategy_sinr(tr, Strategy::LimitedFeedback, policy)));
  }
  return acc.estimate();
}

Estimate estimate_adaptive_loss_bound(const SimConfig& cfg, feedback::B0Rule rule) {
  cfg.validate();
  if (!cfg.follows_n()) throw DomainError("estimate_adaptive_loss_bound: expected antennas that follow N");
  const auto ctx = analysis::adaptive_context(cfg);
  std::vector<double> values(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t i) {
    Rng rng = substream(cfg.seed, i);
    const auto tc = geometry::sample_typical_cluster(cfg, rng);
    const auto r = distances(tc.intra_interferers);
    const int n_t = cfg.antennas_for(tc.n());
    const auto alloc = feedback::adaptive_allocation(r, cfg.b_tot, n_t, cfg.alpha, ctx.e_iout, ctx.inv_snr, {rule});
    values[i] = analysis::rate_loss_ub_adaptive(r, alloc, cfg.b_tot, n_t, cfg.alpha, ctx);
  });
  Accumulator acc;
  for (double v : values) acc.add(v);
  return acc.estimate();
}

}  // namespace clustersim::montecarlo
