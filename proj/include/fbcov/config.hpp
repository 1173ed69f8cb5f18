#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace fbcov {

/// Raised for malformed config documents and for invariant violations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear/dB conversions. linear_to_db throws std::domain_error on x <= 0.
double db_to_linear(double x_db);
double linear_to_db(double x);
double dbm_to_watts(double p_dbm);

/// One direction of the radio link. Powers in watts, gains linear.
struct LinkParams {
  double power = 0.0;        // transmit power P [W]
  double g_tx = 1.0;         // transmit antenna gain
  double g_rx = 1.0;         // receive antenna gain
  double noise_power = 0.0;  // AWGN power sigma^2 [W]
  double intercept = 0.0;    // path-loss intercept C
  double exponent = 0.0;     // path-loss exponent alpha
  double fading_rate = 0.0;  // rate mu of the exponential |h|^2

  bool operator==(const LinkParams&) const = default;
};

/// Logistic fit coefficients u0..u5 of the feedback critical SNR.
using LogisticCoefficients = std::array<double, 6>;

struct FeedbackCodeParams {
  int k_bits = 0;
  int n_uses = 0;
  double target_per = 0.0;
  int a_ratio = 1;  // downlink uses N' = a * N
  LogisticCoefficients u{};

  bool operator==(const FeedbackCodeParams&) const = default;
};

/// Complete scenario. Immutable once validated; share by const reference.
struct SystemConfig {
  LinkParams uplink;
  LinkParams downlink;
  FeedbackCodeParams code;
  double ap_density = 0.0;     // lambda [APs / m^2]
  double region_radius = 0.0;  // D [m]
  int quadrature_order = 16;   // Gauss-Laguerre order L
  double min_distance = 0.1;   // far-field guard [m]

  bool operator==(const SystemConfig&) const = default;
};

inline constexpr int kDefaultQuadratureOrder = 16;
inline constexpr int kMaxQuadratureOrder = 64;
inline constexpr double kDefaultMinDistance = 0.1;

/// Throws ConfigError naming the first violated invariant.
void validate(const SystemConfig& cfg);

/// Parses and validates a JSON document (schema in README.md).
SystemConfig parse_config(const nlohmann::json& doc);
SystemConfig parse_config(std::string_view text);
SystemConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form: linear units, every field explicit.
nlohmann::json to_json(const SystemConfig& cfg);

/// 16 hex digits, FNV-1a over the canonical JSON dump.
std::string config_hash(const SystemConfig& cfg);

/// Built-in defaults, identical to configs/default.json.
SystemConfig default_config();

/// Copy of `cfg` with a different feedback ratio / uplink power.
SystemConfig with_feedback_ratio(SystemConfig cfg, int a);
SystemConfig with_uplink_power(SystemConfig cfg, double watts);

}  // namespace fbcov
