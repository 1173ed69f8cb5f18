#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbcov/config.hpp"
#include "fbcov/specfun.hpp"
#include "fbcov/thresholds.hpp"
#include "json.hpp"

namespace fbcov {

/// Z2 = sigma_U^2 / (P_U Gt Gr C_U): uplink threshold scale per unit R^alpha.
double uplink_threshold_scale(const SystemConfig& cfg);

/// Effective uplink fading threshold g(R, |h_D|^2): the |h_U|^2 an AP at
/// distance R needs given the downlink fade. Exact, no series expansions.
double threshold_function_g(double distance, double h_d_sq, const SystemConfig& cfg);

struct ExactOptions {
  double abs_tol = 1e-12;
};

/// Feedback coverage by adaptive quadrature over the downlink fade. This is
/// the ground truth the quadrature and closed-form tiers are checked against.
/// Throws IntegrationError if the tolerance cannot be met.
double coverage_feedback_exact(double distance, const SystemConfig& cfg,
                               const ExactOptions& opt = {});

/// Same integral by an L-point Gauss-Laguerre rule, still with exact g.
double coverage_feedback_gl(double distance, const SystemConfig& cfg, const QuadratureRule& rule);

/// Per-node coefficients of the closed-form feedback coverage.
///
/// B1_k is also carried in its split form W_k + Q_k * a (W_k, Q_k depend on
/// the node through lg Z1_k).
struct ClosedFormCoefficients {
  int a = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> z1;
  std::vector<double> b1;
  std::vector<double> j1;
  std::vector<double> j2;
  std::vector<double> w;
  std::vector<double> q;
  double z2 = 0.0;
  double b2 = 0.0;
};

/// Throws std::domain_error naming the node if any B1_k <= 0.
ClosedFormCoefficients closed_form_coefficients(const SystemConfig& cfg, const QuadratureRule& rule);

struct ClosedFormValue {
  double probability = 0.0;  // clamped to [0, 1]
  double raw = 0.0;          // as evaluated; can exceed 1 at small R
};

ClosedFormValue coverage_feedback_closed(double distance, const ClosedFormCoefficients& coeffs,
                                         const SystemConfig& cfg);

/// exp(-A R^alpha) with A = mu_U Omega_c Z2.
double coverage_forward(double distance, const SystemConfig& cfg, const ThresholdResult& omega_c);

/// Expected connectable APs inside a disk of radius D (lower incomplete gamma forms).
double aps_forward(double radius, const SystemConfig& cfg, const ThresholdResult& omega_c);
double aps_feedback(double radius, const ClosedFormCoefficients& coeffs, const SystemConfig& cfg);

enum class CoverageMethod { kForwardClosed, kFeedbackExact, kFeedbackGl, kFeedbackClosed };

std::string_view to_string(CoverageMethod method);
std::optional<CoverageMethod> parse_coverage_method(std::string_view name);

struct CoveragePoint {
  double distance = 0.0;
  double probability = 0.0;
};

struct CoverageCurve {
  CoverageMethod method = CoverageMethod::kFeedbackExact;
  std::vector<CoveragePoint> points;
  std::string config_hash;
};

/// Evaluates one method on an ascending distance grid. Throws
/// std::invalid_argument unless the grid is strictly increasing and >= the
/// configured far-field guard.
CoverageCurve coverage_curve(CoverageMethod method, const SystemConfig& cfg,
                             std::span<const double> distances);

/// Columns: distance_m,probability,method
std::string to_csv(const CoverageCurve& curve);
nlohmann::json to_json(const CoverageCurve& curve);

void check_distance_grid(std::span<const double> distances, double min_distance);

}  // namespace fbcov
