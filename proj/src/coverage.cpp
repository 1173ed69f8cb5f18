#include "fbcov/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fbcov/channel.hpp"
#include "fbcov/integrate.hpp"
#include "fbcov/io.hpp"

namespace fbcov {

namespace {

constexpr double kLn10 = std::numbers::ln10;

// g(R, h) = Omega_f(eta_D(R) h) * Z2 R^alpha_U, with the R-dependent factors
// hoisted out of the integration loops.
class ThresholdAtDistance {
 public:
  ThresholdAtDistance(double distance, const SystemConfig& cfg)
      : cfg_(cfg),
        downlink_mean_snr_(snr(distance, 1.0, cfg.downlink)),
        uplink_scale_(uplink_threshold_scale(cfg) * std::pow(distance, cfg.uplink.exponent)) {}

  double operator()(double h_d_sq) const {
    const double eta_db = 10.0 * std::log10(downlink_mean_snr_ * h_d_sq);
    const auto omega = critical_snr_feedback(eta_db, cfg_.code.a_ratio, cfg_.code.u);
    return omega.omega_linear * uplink_scale_;
  }

 private:
  const SystemConfig& cfg_;
  double downlink_mean_snr_;
  double uplink_scale_;
};

void require_positive_distance(double distance, const char* what) {
  if (!(distance > 0.0)) throw std::domain_error(std::string(what) + ": distance must be positive");
}

}  // namespace

double uplink_threshold_scale(const SystemConfig& cfg) {
  const auto& up = cfg.uplink;
  return up.noise_power / (up.power * up.g_tx * up.g_rx * up.intercept);
}

double threshold_function_g(double distance, double h_d_sq, const SystemConfig& cfg) {
  require_positive_distance(distance, "threshold_function_g");
  if (!(h_d_sq > 0.0)) throw std::domain_error("threshold_function_g: h_d_sq must be positive");
  return ThresholdAtDistance(distance, cfg)(h_d_sq);
}

double coverage_feedback_exact(double distance, const SystemConfig& cfg, const ExactOptions& opt) {
  require_positive_distance(distance, "coverage_feedback_exact");
  const ThresholdAtDistance g(distance, cfg);
  const double mu_u = cfg.uplink.fading_rate;
  const double mu_d = cfg.downlink.fading_rate;
  // t = mu_D |h_D|^2 is standard exponential; integrate over s = ln t.
  // Mass dropped below t = 1e-20 and above t = 50 is < 1e-20 each.
  auto integrand = [&](double s) {
    const double t = std::exp(s);
    return std::exp(-mu_u * g(t / mu_d) - t) * t;
  };
  IntegrationOptions io;
  io.abs_tol = opt.abs_tol;
  io.initial_panels = 25;
  return integrate_adaptive(integrand, std::log(1e-20), std::log(50.0), io).value;
}

double coverage_feedback_gl(double distance, const SystemConfig& cfg, const QuadratureRule& rule) {
  require_positive_distance(distance, "coverage_feedback_gl");
  const ThresholdAtDistance g(distance, cfg);
  const double mu_u = cfg.uplink.fading_rate;
  const double mu_d = cfg.downlink.fading_rate;
  double sum = 0.0;
  for (int k = 0; k < rule.order; ++k) {
    sum += rule.weights[k] * std::exp(-mu_u * g(rule.nodes[k] / mu_d));
  }
  return sum;
}

ClosedFormCoefficients closed_form_coefficients(const SystemConfig& cfg, const QuadratureRule& rule) {
  const auto& u = cfg.code.u;
  const auto& dn = cfg.downlink;
  const int a = cfg.code.a_ratio;
  ClosedFormCoefficients c;
  c.a = a;
  c.nodes = rule.nodes;
  c.weights = rule.weights;
  c.z2 = uplink_threshold_scale(cfg);
  c.b2 = 10.0 / kLn10 * (u[0] + u[2] * a);

  const std::size_t n = rule.nodes.size();
  c.z1.resize(n);
  c.b1.resize(n);
  c.j1.resize(n);
  c.j2.resize(n);
  c.w.resize(n);
  c.q.resize(n);
  const double ln10_sq = kLn10 * kLn10;
  for (std::size_t k = 0; k < n; ++k) {
    const double z1 = dn.power * dn.g_tx * dn.g_rx * dn.intercept * rule.nodes[k] /
                      (dn.fading_rate * dn.noise_power);
    const double lg_shift = std::log10(z1) - 1.0 / kLn10;
    const double b1 = 1.0 + u[1] * a + u[3] + u[4] + 10.0 * (u[0] + u[2] * a) * lg_shift;
    if (!(b1 > 0.0)) {
      throw std::domain_error("closed_form_coefficients: B1 at node " + std::to_string(k) + " is " +
                              format_number(b1) + "; the series expansion needs B1 > 0");
    }
    const double lift = 1.0 + u[5] * b1;  // 1 + u5 B1
    c.z1[k] = z1;
    c.b1[k] = b1;
    c.w[k] = 1.0 + u[3] + u[4] + 10.0 * u[0] * lg_shift;
    c.q[k] = u[1] + 10.0 * u[2] * lg_shift;
    c.j1[k] = c.z2 + c.z2 * lift * kLn10 / (10.0 * b1) +
              c.z2 * lift * lift * ln10_sq / (200.0 * b1 * b1);
    c.j2[k] = c.z2 * c.b2 * kLn10 / (10.0 * b1 * b1) +
              c.z2 * c.b2 * lift * ln10_sq / (100.0 * b1 * b1 * b1);
  }
  return c;
}

ClosedFormValue coverage_feedback_closed(double distance, const ClosedFormCoefficients& coeffs,
                                         const SystemConfig& cfg) {
  require_positive_distance(distance, "coverage_feedback_closed");
  const double mu_u = cfg.uplink.fading_rate;
  const double r_alpha = std::pow(distance, cfg.uplink.exponent);
  double raw = 0.0;
  for (std::size_t k = 0; k < coeffs.weights.size(); ++k) {
    raw += coeffs.weights[k] * std::exp(-mu_u * (coeffs.j1[k] * r_alpha - coeffs.j2[k]));
  }
  return {std::clamp(raw, 0.0, 1.0), raw};
}

double coverage_forward(double distance, const SystemConfig& cfg, const ThresholdResult& omega_c) {
  require_positive_distance(distance, "coverage_forward");
  const double a_coef = cfg.uplink.fading_rate * omega_c.omega_linear * uplink_threshold_scale(cfg);
  return std::exp(-a_coef * std::pow(distance, cfg.uplink.exponent));
}

double aps_forward(double radius, const SystemConfig& cfg, const ThresholdResult& omega_c) {
  require_positive_distance(radius, "aps_forward");
  const double alpha = cfg.uplink.exponent;
  const double a_coef = cfg.uplink.fading_rate * omega_c.omega_linear * uplink_threshold_scale(cfg);
  const double s = 2.0 / alpha;
  return 2.0 * std::numbers::pi * cfg.ap_density *
         lower_incomplete_gamma(s, a_coef * std::pow(radius, alpha)) /
         (alpha * std::pow(a_coef, s));
}

double aps_feedback(double radius, const ClosedFormCoefficients& coeffs, const SystemConfig& cfg) {
  require_positive_distance(radius, "aps_feedback");
  const double alpha = cfg.uplink.exponent;
  const double mu_u = cfg.uplink.fading_rate;
  const double s = 2.0 / alpha;
  const double d_alpha = std::pow(radius, alpha);
  double sum = 0.0;
  for (std::size_t k = 0; k < coeffs.weights.size(); ++k) {
    const double rate = mu_u * coeffs.j1[k];
    sum += coeffs.weights[k] * std::exp(mu_u * coeffs.j2[k]) *
           lower_incomplete_gamma(s, rate * d_alpha) / (std::pow(rate, s) * alpha);
  }
  return 2.0 * std::numbers::pi * cfg.ap_density * sum;
}

std::string_view to_string(CoverageMethod method) {
  switch (method) {
    case CoverageMethod::kForwardClosed: return "forward-closed";
    case CoverageMethod::kFeedbackExact: return "feedback-exact";
    case CoverageMethod::kFeedbackGl: return "feedback-gl";
    case CoverageMethod::kFeedbackClosed: return "feedback-closed";
  }
  return "unknown";
}

std::optional<CoverageMethod> parse_coverage_method(std::string_view name) {
  for (auto m : {CoverageMethod::kForwardClosed, CoverageMethod::kFeedbackExact,
                 CoverageMethod::kFeedbackGl, CoverageMethod::kFeedbackClosed}) {
    if (name == to_string(m)) return m;
  }
  if (name == "forward") return CoverageMethod::kForwardClosed;
  return std::nullopt;
}

void check_distance_grid(std::span<const double> distances, double min_distance) {
  if (distances.empty()) throw std::invalid_argument("distance grid is empty");
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] >= min_distance)) {
      throw std::invalid_argument("distance " + format_number(distances[i]) +
                                  " m is inside the far-field guard (min_distance_m = " +
                                  format_number(min_distance) + ")");
    }
    if (i > 0 && !(distances[i] > distances[i - 1])) {
      throw std::invalid_argument("distance grid must be strictly increasing");
    }
  }
}

CoverageCurve coverage_curve(CoverageMethod method, const SystemConfig& cfg,
                             std::span<const double> distances) {
  check_distance_grid(distances, cfg.min_distance);
  CoverageCurve curve;
  curve.method = method;
  curve.config_hash = config_hash(cfg);
  curve.points.reserve(distances.size());

  std::optional<ThresholdResult> omega_c;
  std::optional<QuadratureRule> rule;
  std::optional<ClosedFormCoefficients> coeffs;
  if (method == CoverageMethod::kForwardClosed) omega_c = critical_snr_forward(cfg.code);
  if (method == CoverageMethod::kFeedbackGl || method == CoverageMethod::kFeedbackClosed) {
    rule = gauss_laguerre(cfg.quadrature_order);
  }
  if (method == CoverageMethod::kFeedbackClosed) coeffs = closed_form_coefficients(cfg, *rule);

  for (double r : distances) {
    double p = 0.0;
    switch (method) {
      case CoverageMethod::kForwardClosed: p = coverage_forward(r, cfg, *omega_c); break;
      case CoverageMethod::kFeedbackExact: p = coverage_feedback_exact(r, cfg); break;
      case CoverageMethod::kFeedbackGl: p = coverage_feedback_gl(r, cfg, *rule); break;
      case CoverageMethod::kFeedbackClosed:
        p = coverage_feedback_closed(r, *coeffs, cfg).probability;
        break;
    }
    curve.points.push_back({r, p});
  }
  return curve;
}

std::string to_csv(const CoverageCurve& curve) {
  CsvTable table({"distance_m", "probability", "method"});
  const std::string method(to_string(curve.method));
  for (const auto& p : curve.points) {
    table.row({format_number(p.distance), format_number(p.probability), method});
  }
  return table.str();
}

nlohmann::json to_json(const CoverageCurve& curve) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : curve.points) {
    pts.push_back({{"distance_m", p.distance}, {"probability", p.probability}});
  }
  return {{"method", to_string(curve.method)},
          {"config_hash", curve.config_hash},
          {"points", pts}};
}

}  // namespace fbcov
