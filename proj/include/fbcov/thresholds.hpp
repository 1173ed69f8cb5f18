#pragma once

#include <string_view>

#include "fbcov/config.hpp"

namespace fbcov {

enum class Mode { kForward, kFeedback };

std::string_view to_string(Mode mode);

/// Critical uplink SNR, carried in both scales.
struct ThresholdResult {
  double omega_linear = 0.0;
  double omega_db = 0.0;
  Mode mode = Mode::kForward;
};

/// V(eta) = eta (eta + 2) / (2 (eta + 1)^2) * log2(e)^2.
double channel_dispersion(double eta);

/// Normal-approximation packet error rate of a (K, N) code at SNR eta,
/// with log base 2 so rates are in bits per channel use.
double per_forward(double eta, int k_bits, int n_uses);

/// Solves per_forward(eta) = eps_star by bisection in log(eta) over
/// [1e-6, 1e6]. Requires 0 < eps_star < 0.5; throws std::invalid_argument
/// otherwise and std::runtime_error when the bracket does not straddle the
/// target.
ThresholdResult critical_snr_forward(int k_bits, int n_uses, double eps_star);
ThresholdResult critical_snr_forward(const FeedbackCodeParams& code);

/// Logistic feedback threshold in dB:
///   1 / (exp(u0 eta + u1 a + u2 eta a + u3) + u4) + u5,  eta = downlink SNR [dB].
/// Saturates cleanly at u5 and 1/u4 + u5 when the exponential over/underflows.
ThresholdResult critical_snr_feedback(double eta_d_db, int a, const LogisticCoefficients& u);

}  // namespace fbcov
