#include "fbcov/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "fbcov/channel.hpp"
#include "fbcov/integrate.hpp"

namespace fbcov {

namespace {

constexpr double kZ95 = 1.96;
// Keeps the diagnostic downlink streams disjoint from the trial streams.
constexpr std::uint64_t kAuxStreamOffset = 1ULL << 62;

struct Tally {
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;
};

unsigned resolve_workers(unsigned requested, std::int64_t n) {
  unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::int64_t>(w, n));
}

// Splits [0, n) into contiguous chunks; integer tallies make the reduction
// exact, hence independent of the split.
Tally parallel_tally(std::int64_t n, unsigned workers,
                     const std::function<std::int64_t(std::int64_t)>& trial) {
  workers = resolve_workers(workers, n);
  std::vector<Tally> partial(workers);
  auto run = [&](unsigned w) {
    const std::int64_t begin = n * w / workers;
    const std::int64_t end = n * (w + 1) / workers;
    Tally t;
    for (std::int64_t i = begin; i < end; ++i) {
      const std::int64_t v = trial(i);
      t.sum += v;
      t.sum_sq += v * v;
    }
    partial[w] = t;
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  Tally total;
  for (const auto& t : partial) {
    total.sum += t.sum;
    total.sum_sq += t.sum_sq;
  }
  return total;
}

double feedback_threshold(double downlink_mean_snr, double h_d_sq, const SystemConfig& cfg) {
  return critical_snr_feedback(10.0 * std::log10(downlink_mean_snr * h_d_sq), cfg.code.a_ratio,
                               cfg.code.u)
      .omega_linear;
}

McEstimate finish(double mean, double std_error, std::int64_t n, std::uint64_t seed) {
  McEstimate est;
  est.mean = mean;
  est.std_error = std_error;
  est.ci95 = {mean - kZ95 * std_error, mean + kZ95 * std_error};
  est.n_trials = n;
  est.seed = seed;
  return est;
}

}  // namespace

Interval wilson_interval(std::int64_t successes, std::int64_t n) {
  const double nn = static_cast<double>(n);
  const double p = successes / nn;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double mean_feedback_threshold(double distance, const SystemConfig& cfg) {
  const double eta_bar = snr(distance, 1.0, cfg.downlink);
  const double mu_d = cfg.downlink.fading_rate;
  auto integrand = [&](double s) {
    const double t = std::exp(s);
    return feedback_threshold(eta_bar, t / mu_d, cfg) * std::exp(-t) * t;
  };
  IntegrationOptions io;
  io.abs_tol = 1e-12;
  io.initial_panels = 25;
  return integrate_adaptive(integrand, std::log(1e-20), std::log(50.0), io).value;
}

double trials_to_resolve(double p, double rel_se) {
  if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
  return (1.0 - p) / (p * rel_se * rel_se);
}

McEstimate mc_coverage(double distance, Mode mode, const SystemConfig& cfg, std::int64_t n_trials,
                       std::uint64_t seed, const McOptions& opt) {
  if (n_trials < 100) throw std::invalid_argument("mc_coverage: n_trials must be >= 100");
  if (!(distance > 0.0)) throw std::domain_error("mc_coverage: distance must be positive");

  const double mu_u = cfg.uplink.fading_rate;
  const double mu_d = cfg.downlink.fading_rate;
  const double uplink_mean_snr = snr(distance, 1.0, cfg.uplink);
  const double downlink_mean_snr = snr(distance, 1.0, cfg.downlink);
  double fixed_threshold = 0.0;
  bool fixed = true;
  if (opt.threshold_override) {
    fixed_threshold = *opt.threshold_override;
  } else if (mode == Mode::kForward) {
    fixed_threshold = critical_snr_forward(cfg.code).omega_linear;
  } else if (opt.coupling == Coupling::kMeanThreshold) {
    fixed_threshold = mean_feedback_threshold(distance, cfg);
  } else {
    fixed = false;
  }

  auto trial = [&](std::int64_t i) -> std::int64_t {
    RandomStream rng(seed, static_cast<std::uint64_t>(i));
    const double h_u = sample_fading(mu_u, rng);
    double threshold = fixed_threshold;
    if (!fixed) {
      double h_d = 0.0;
      if (opt.coupling == Coupling::kShuffled) {
        const std::int64_t partner = (i + n_trials / 2 + 1) % n_trials;
        RandomStream other(seed, kAuxStreamOffset + static_cast<std::uint64_t>(partner));
        h_d = sample_fading(mu_d, other);
      } else {
        h_d = sample_fading(mu_d, rng);
      }
      threshold = feedback_threshold(downlink_mean_snr, h_d, cfg);
    }
    return uplink_mean_snr * h_u >= threshold ? 1 : 0;
  };

  const Tally t = parallel_tally(n_trials, opt.workers, trial);
  const double n = static_cast<double>(n_trials);
  const double p = t.sum / n;
  McEstimate est = finish(p, std::sqrt(p * (1.0 - p) / n), n_trials, seed);
  if (t.sum < 10 || n_trials - t.sum < 10) est.wilson = wilson_interval(t.sum, n_trials);
  return est;
}

McEstimate mc_connectable_aps(double radius, Mode mode, const SystemConfig& cfg,
                              std::int64_t n_realizations, std::uint64_t seed,
                              const McOptions& opt) {
  if (n_realizations < 10) {
    throw std::invalid_argument("mc_connectable_aps: n_realizations must be >= 10");
  }
  if (opt.coupling == Coupling::kMeanThreshold) {
    throw std::invalid_argument("mc_connectable_aps: mean-threshold coupling is coverage-only");
  }
  const double mu_u = cfg.uplink.fading_rate;
  const double mu_d = cfg.downlink.fading_rate;
  const double forward_threshold =
      opt.threshold_override ? *opt.threshold_override
                             : critical_snr_forward(cfg.code).omega_linear;
  const bool feedback = mode == Mode::kFeedback && !opt.threshold_override;

  auto realization = [&](std::int64_t r) -> std::int64_t {
    RandomStream rng(seed, static_cast<std::uint64_t>(r));
    RandomStream aux(seed, kAuxStreamOffset + static_cast<std::uint64_t>(r));
    const auto distances = sample_ppp_disk(cfg.ap_density, radius, rng, cfg.min_distance);
    std::int64_t connectable = 0;
    for (double d : distances) {
      const double eta_u = snr(d, sample_fading(mu_u, rng), cfg.uplink);
      double threshold = forward_threshold;
      if (feedback) {
        RandomStream& src = opt.coupling == Coupling::kShuffled ? aux : rng;
        const double h_d = sample_fading(mu_d, src);
        threshold = feedback_threshold(snr(d, 1.0, cfg.downlink), h_d, cfg);
      }
      if (eta_u >= threshold) ++connectable;
    }
    return connectable;
  };

  const Tally t = parallel_tally(n_realizations, opt.workers, realization);
  const double n = static_cast<double>(n_realizations);
  const double mean = t.sum / n;
  const double var = std::max(0.0, (t.sum_sq - n * mean * mean) / (n - 1.0));
  return finish(mean, std::sqrt(var / n), n_realizations, seed);
}

nlohmann::json to_json(const McEstimate& est) {
  nlohmann::json j = {{"mean", est.mean},
                      {"std_error", est.std_error},
                      {"ci95", {est.ci95.low, est.ci95.high}},
                      {"n_trials", est.n_trials},
                      {"seed", est.seed}};
  if (est.wilson) j["wilson95"] = {est.wilson->low, est.wilson->high};
  return j;
}

}  // namespace fbcov
