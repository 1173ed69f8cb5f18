#pragma once

#include <cstdint>
#include <optional>

#include "fbcov/config.hpp"
#include "fbcov/thresholds.hpp"
#include "json.hpp"

namespace fbcov {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  Interval ci95;                  // mean +/- 1.96 std_error
  std::optional<Interval> wilson;  // binomial estimates with fewer than 10 successes or failures
  std::int64_t n_trials = 0;
  std::uint64_t seed = 0;
};

/// How the feedback threshold is tied to the downlink draw in each trial.
/// Anything other than kPerTrial is a diagnostic for coupling tests.
enum class Coupling {
  kPerTrial,       // Omega_f from the same trial's |h_D|^2
  kShuffled,       // |h_D|^2 taken from a different trial's stream
  kMeanThreshold,  // Omega_f replaced by its expectation over |h_D|^2
};

struct McOptions {
  unsigned workers = 0;  // 0: hardware concurrency
  Coupling coupling = Coupling::kPerTrial;
  std::optional<double> threshold_override;  // fixed linear threshold, both modes
};

/// Success-rate estimate of P(eta_U(R) >= threshold) with one uplink (and,
/// in feedback mode, one downlink) fade per trial. Trial i draws from
/// RandomStream(seed, i), so the result does not depend on `workers`.
/// Requires n_trials >= 100.
McEstimate mc_coverage(double distance, Mode mode, const SystemConfig& cfg, std::int64_t n_trials,
                       std::uint64_t seed, const McOptions& opt = {});

/// Mean number of connectable APs in a PPP disk of radius D.
/// Requires n_realizations >= 10.
McEstimate mc_connectable_aps(double radius, Mode mode, const SystemConfig& cfg,
                              std::int64_t n_realizations, std::uint64_t seed,
                              const McOptions& opt = {});

/// Wilson score interval for k successes out of n at 95% confidence.
Interval wilson_interval(std::int64_t successes, std::int64_t n);

/// E[Omega_f] (linear) over the downlink fade at distance R.
double mean_feedback_threshold(double distance, const SystemConfig& cfg);

/// Trials needed for a relative standard error of at most `rel_se` at
/// success probability p.
double trials_to_resolve(double p, double rel_se = 0.2);

nlohmann::json to_json(const McEstimate& est);

}  // namespace fbcov
