#include "fbcov/thresholds.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fbcov/specfun.hpp"

namespace fbcov {

std::string_view to_string(Mode mode) {
  return mode == Mode::kForward ? "forward" : "feedback";
}

double channel_dispersion(double eta) {
  constexpr double log2e = std::numbers::log2e;
  return eta * (eta + 2.0) / (2.0 * (eta + 1.0) * (eta + 1.0)) * log2e * log2e;
}

double per_forward(double eta, int k_bits, int n_uses) {
  const double n = n_uses;
  const double backoff = 0.5 * n * std::log2(1.0 + eta) - k_bits;
  return q_function(backoff / std::sqrt(n * channel_dispersion(eta)));
}

ThresholdResult critical_snr_forward(int k_bits, int n_uses, double eps_star) {
  if (!(eps_star > 0.0 && eps_star < 0.5)) {
    throw std::invalid_argument("critical_snr_forward: eps_star must lie in (0, 0.5)");
  }
  double lo = 1e-6;
  double hi = 1e6;
  if (per_forward(lo, k_bits, n_uses) < eps_star || per_forward(hi, k_bits, n_uses) > eps_star) {
    throw std::runtime_error("critical_snr_forward: target PER not bracketed by [1e-6, 1e6]");
  }
  // per_forward decreases in eta; keep per(lo) >= eps_star >= per(hi).
  while (hi - lo > 1e-12 * hi) {
    const double mid = std::sqrt(lo * hi);
    if (per_forward(mid, k_bits, n_uses) > eps_star) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double omega = 0.5 * (lo + hi);
  return {omega, 10.0 * std::log10(omega), Mode::kForward};
}

ThresholdResult critical_snr_forward(const FeedbackCodeParams& code) {
  return critical_snr_forward(code.k_bits, code.n_uses, code.target_per);
}

ThresholdResult critical_snr_feedback(double eta_d_db, int a, const LogisticCoefficients& u) {
  // Grouped by eta so that eta = -inf with u0 = 0 stays well defined.
  const double arg = (u[0] + u[2] * a) * eta_d_db + (u[1] * a + u[3]);
  const double omega_db = 1.0 / (std::exp(arg) + u[4]) + u[5];
  return {std::pow(10.0, omega_db / 10.0), omega_db, Mode::kFeedback};
}

}  // namespace fbcov
