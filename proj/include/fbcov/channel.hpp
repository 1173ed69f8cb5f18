#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fbcov/config.hpp"

namespace fbcov {

/// One device-AP link draw.
struct LinkRealization {
  double distance = 0.0;     // R [m]
  double fading_gain = 0.0;  // |h|^2
  double snr_linear = 0.0;   // eta
};

/// Path gain C * R^{-alpha}. Throws std::domain_error for R <= 0.
double path_loss(double distance, const LinkParams& link);

/// Received SNR P Gt Gr L(R) |h|^2 / sigma^2; serves both link directions.
double snr(double distance, double fading_gain, const LinkParams& link);

/// Counter-based random stream.
///
/// The stream for (seed, index) depends only on those two integers, so trial
/// i of a simulation sees the same draws regardless of how trials are split
/// across threads. The generator is SplitMix64 started from a mixed key.
/// Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();

 private:
  std::uint64_t state_;
};

/// Exponential |h|^2 with rate mu, by inverting the CDF.
double sample_fading(double rate, RandomStream& rng);

/// AP distances of a PPP of intensity `density` restricted to a disk of
/// radius `radius`. Only radii are generated; each is clamped to at least
/// `min_distance` (far-field guard).
std::vector<double> sample_ppp_disk(double density, double radius, RandomStream& rng,
                                    double min_distance = kDefaultMinDistance);

LinkRealization realize_link(double distance, const LinkParams& link, RandomStream& rng);

}  // namespace fbcov
