#include "fbcov/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fbcov {

namespace {

constexpr std::uint64_t splitmix(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double path_loss(double distance, const LinkParams& link) {
  if (!(distance > 0.0)) throw std::domain_error("path_loss: distance must be positive");
  return link.intercept * std::pow(distance, -link.exponent);
}

double snr(double distance, double fading_gain, const LinkParams& link) {
  if (!(fading_gain >= 0.0)) throw std::domain_error("snr: fading gain must be nonnegative");
  return link.power * link.g_tx * link.g_rx * path_loss(distance, link) * fading_gain /
         link.noise_power;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t k = seed;
  const std::uint64_t a = splitmix(k);
  std::uint64_t j = index ^ 0x6a09e667f3bcc909ULL;
  const std::uint64_t b = splitmix(j);
  state_ = a ^ (b * 0xd1342543de82ef95ULL);
}

RandomStream::result_type RandomStream::operator()() { return splitmix(state_); }

double RandomStream::uniform() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_fading(double rate, RandomStream& rng) {
  return -std::log1p(-rng.uniform()) / rate;
}

std::vector<double> sample_ppp_disk(double density, double radius, RandomStream& rng,
                                    double min_distance) {
  if (!(density > 0.0) || !(radius > 0.0)) {
    throw std::domain_error("sample_ppp_disk: density and radius must be positive");
  }
  const double mean = density * std::numbers::pi * radius * radius;
  std::poisson_distribution<long> count_dist(mean);
  const long count = count_dist(rng);
  std::vector<double> distances(static_cast<std::size_t>(count));
  for (double& r : distances) {
    r = std::max(radius * std::sqrt(rng.uniform()), min_distance);
  }
  return distances;
}

LinkRealization realize_link(double distance, const LinkParams& link, RandomStream& rng) {
  LinkRealization out;
  out.distance = distance;
  out.fading_gain = sample_fading(link.fading_rate, rng);
  out.snr_linear = snr(distance, out.fading_gain, link);
  return out;
}

}  // namespace fbcov
