#include "fbcov/sensitivity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "fbcov/coverage.hpp"
#include "fbcov/integrate.hpp"
#include "fbcov/io.hpp"

namespace fbcov {

namespace {

constexpr double kLn10 = std::numbers::ln10;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Slack on the M_f trend checks; the oracle is accurate to about this.
constexpr double kMfTrendSlack = 1e-8;

void check_axis(const std::vector<double>& axis, const char* name, double lower) {
  if (axis.empty()) throw std::invalid_argument(std::string(name) + " axis is empty");
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!(axis[i] >= lower) || !std::isfinite(axis[i])) {
      throw std::invalid_argument(std::string(name) + " axis value " + format_number(axis[i]) +
                                  " is out of range");
    }
    if (i > 0 && !(axis[i] > axis[i - 1])) {
      throw std::invalid_argument(std::string(name) + " axis must be strictly increasing");
    }
  }
}

const double& node_at(const QuadratureRule& rule, int k) {
  if (k < 0 || k >= rule.order) {
    throw std::out_of_range("node index " + std::to_string(k) + " outside quadrature rule");
  }
  return rule.nodes[static_cast<std::size_t>(k)];
}

double r_power(double distance, const SystemConfig& cfg) {
  if (!(distance > 0.0)) throw std::domain_error("distance must be positive");
  return std::pow(distance, -cfg.downlink.exponent);
}

std::string where(double a, double r, int k) {
  return "a=" + format_number(a) + " R=" + format_number(r) + " k=" + std::to_string(k);
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
  if (!workers) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
}

}  // namespace

NodeTerms node_terms(double a, double node, const SystemConfig& cfg) {
  const auto& u = cfg.code.u;
  const auto& dn = cfg.downlink;
  NodeTerms t;
  t.z1 = dn.power * dn.g_tx * dn.g_rx * dn.intercept * node / (dn.fading_rate * dn.noise_power);
  const double lg_shift = std::log10(t.z1) - 1.0 / kLn10;
  t.w = 1.0 + u[3] + u[4] + 10.0 * u[0] * lg_shift;
  t.q = u[1] + 10.0 * u[2] * lg_shift;
  t.b1 = 1.0 + u[1] * a + u[3] + u[4] + 10.0 * (u[0] + u[2] * a) * lg_shift;
  t.b2 = 10.0 / kLn10 * (u[0] + u[2] * a);
  return t;
}

double step1_delta(double y, double u4) {
  // (e^y - 1 - y) / ((y + 1 + u4)(e^y + u4)), cancellation-free near y = 0.
  const double excess = std::expm1(y) - y;
  return std::isfinite(excess) ? excess / ((y + 1.0 + u4) * (std::exp(y) + u4))
                               : 1.0 / (y + 1.0 + u4);
}

double step2_delta(double z, double w_plus_qa) { return z * z / (1.0 + z) / w_plus_qa; }

double step3_delta(double v, double w_plus_qa, double u5) {
  return kLn10 * kLn10 / 200.0 * std::pow(1.0 / w_plus_qa + u5, 2) * v * v;
}

StepErrorPoint step1_error(double a, double distance, int node_index, const SystemConfig& cfg,
                           const QuadratureRule& rule) {
  const double u4 = cfg.code.u[4];
  const NodeTerms t = node_terms(a, node_at(rule, node_index), cfg);
  const double y = t.b1 + t.b2 * r_power(distance, cfg) - 1.0 - u4;
  if (!(y + 1.0 + u4 > 0.0)) {
    throw std::domain_error("step 1: y + 1 + u4 = " + format_number(y + 1.0 + u4) + " at " +
                            where(a, distance, node_index));
  }
  StepErrorPoint p{Step::kExp, a, distance, node_index, y, 0.0, 0.0};
  p.error_direct = 1.0 / (y + 1.0 + u4) - 1.0 / (std::exp(y) + u4);
  p.error = step1_delta(y, u4);
  return p;
}

StepErrorPoint step2_error(double a, double distance, int node_index, const SystemConfig& cfg,
                           const QuadratureRule& rule) {
  const NodeTerms t = node_terms(a, node_at(rule, node_index), cfg);
  const double denom = t.w + t.q * a;
  if (!(denom > 0.0)) {
    throw std::domain_error("step 2: W + Q a = " + format_number(denom) + " at " +
                            where(a, distance, node_index));
  }
  const double z = t.b2 * r_power(distance, cfg) / denom;
  if (!(1.0 + z > 0.0)) {
    throw std::domain_error("step 2: 1 + z <= 0 at " + where(a, distance, node_index));
  }
  StepErrorPoint p{Step::kReciprocal, a, distance, node_index, z, 0.0, 0.0};
  p.error = step2_delta(z, denom);
  p.error_direct = (1.0 / (1.0 + z) - (1.0 - z)) / denom;
  return p;
}

StepErrorPoint step3_error(double a, double distance, int node_index, const SystemConfig& cfg,
                           const QuadratureRule& rule) {
  const double u5 = cfg.code.u[5];
  const NodeTerms t = node_terms(a, node_at(rule, node_index), cfg);
  const double denom = t.b1 * (1.0 + u5 * t.b1);
  const double wqa = t.w + t.q * a;
  if (denom == 0.0 || wqa == 0.0 || !std::isfinite(denom)) {
    throw std::domain_error("step 3: degenerate B1 (1 + u5 B1) at " +
                            where(a, distance, node_index));
  }
  const double v = -t.b2 * r_power(distance, cfg) / denom;
  const double lead = kLn10 * kLn10 / 200.0 * std::pow(1.0 / wqa + u5, 2);
  StepErrorPoint p{Step::kPower, a, distance, node_index, v, 0.0, 0.0};
  p.error = step3_delta(v, wqa, u5);
  p.error_direct = lead * ((1.0 + v) * (1.0 + v) - (1.0 + 2.0 * v));
  return p;
}

StepErrorPoint step_error(Step step, double a, double distance, int node_index,
                          const SystemConfig& cfg, const QuadratureRule& rule) {
  switch (step) {
    case Step::kExp: return step1_error(a, distance, node_index, cfg, rule);
    case Step::kReciprocal: return step2_error(a, distance, node_index, cfg, rule);
    case Step::kPower: return step3_error(a, distance, node_index, cfg, rule);
  }
  throw std::invalid_argument("unknown step");
}

const StepErrorPoint& StepGrid::at(std::size_t ia, std::size_t ir, std::size_t k) const {
  return points[(ia * distances.size() + ir) * weights.size() + k];
}

double StepGrid::weighted(std::size_t ia, std::size_t ir) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) sum += weights[k] * at(ia, ir, k).error;
  return sum;
}

StepGrid step_error_grid(Step step, const SystemConfig& cfg, std::vector<double> a_values,
                         std::vector<double> distances) {
  check_axis(a_values, "a", 1.0);
  check_axis(distances, "R", std::numeric_limits<double>::min());
  const QuadratureRule rule = gauss_laguerre(cfg.quadrature_order);
  StepGrid g;
  g.step = step;
  g.a_values = std::move(a_values);
  g.distances = std::move(distances);
  g.weights = rule.weights;
  g.points.reserve(g.a_values.size() * g.distances.size() * g.weights.size());
  for (double a : g.a_values) {
    for (double r : g.distances) {
      for (int k = 0; k < rule.order; ++k) {
        try {
          g.points.push_back(step_error(step, a, r, k, cfg, rule));
        } catch (const std::domain_error& e) {
          if (g.regime_violations++ == 0) g.first_violation = e.what();
          g.points.push_back({step, a, r, k, kNaN, kNaN, kNaN});
        }
      }
    }
  }
  return g;
}

ErrorGrid mf_error_grid(const SystemConfig& cfg, std::vector<double> a_values,
                        std::vector<double> d_values, std::vector<double> pu_values,
                        const GridOptions& opt) {
  check_axis(a_values, "a", 1.0);
  check_axis(d_values, "D", std::numeric_limits<double>::min());
  check_axis(pu_values, "P_U", std::numeric_limits<double>::min());
  for (double a : a_values) {
    if (a != std::floor(a)) {
      throw std::invalid_argument("a axis value " + format_number(a) + " is not an integer");
    }
  }
  ErrorGrid g;
  g.a_values = std::move(a_values);
  g.d_values = std::move(d_values);
  g.pu_values = std::move(pu_values);
  const std::size_t n = g.a_values.size() * g.d_values.size() * g.pu_values.size();
  g.closed.assign(n, kNaN);
  g.oracle.assign(n, kNaN);
  g.error.assign(n, kNaN);
  g.reference = "adaptive Gauss-Kronrod of 2 pi lambda R * exact feedback coverage, abs tol " +
                format_number(opt.panel_tol) + " per D panel";

  const QuadratureRule rule = gauss_laguerre(cfg.quadrature_order);
  const std::size_t n_pairs = g.a_values.size() * g.pu_values.size();
  std::vector<std::string> failures(n_pairs);

  parallel_for(n_pairs, opt.workers, [&](std::size_t pair) {
    const std::size_t ia = pair / g.pu_values.size();
    const std::size_t ip = pair % g.pu_values.size();
    const double a = g.a_values[ia];
    SystemConfig c = cfg;
    c.code.a_ratio = static_cast<int>(a);
    c.uplink.power = g.pu_values[ip];
    const auto& u = c.code.u;
    if (!(u[0] + u[2] * a > 0.0)) {
      failures[pair] = "M_f: u0 + u2 a <= 0 at a=" + format_number(a);
      return;
    }
    ClosedFormCoefficients coeffs;
    try {
      coeffs = closed_form_coefficients(c, rule);
    } catch (const std::domain_error& e) {
      failures[pair] = std::string("M_f at a=") + format_number(a) + ": " + e.what();
      return;
    }
    const double two_pi_lambda = 2.0 * std::numbers::pi * c.ap_density;
    auto integrand = [&](double r) { return two_pi_lambda * r * coverage_feedback_exact(r, c); };
    IntegrationOptions io;
    io.abs_tol = opt.panel_tol;
    io.initial_panels = 4;
    double cumulative = 0.0;
    double left = 0.0;
    for (std::size_t id = 0; id < g.d_values.size(); ++id) {
      const double d = g.d_values[id];
      cumulative += integrate_adaptive(integrand, left, d, io).value;
      left = d;
      const std::size_t i = g.index(ia, id, ip);
      g.closed[i] = aps_feedback(d, coeffs, c);
      g.oracle[i] = cumulative;
      g.error[i] = std::abs(g.closed[i] - g.oracle[i]);
    }
  });

  for (const auto& f : failures) {
    if (f.empty()) continue;
    if (g.regime_violations++ == 0) g.first_violation = f;
  }
  return g;
}

std::string_view to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::kPass: return "pass";
    case VerdictStatus::kFail: return "fail";
    case VerdictStatus::kInsufficientAxis: return "insufficient axis length";
    case VerdictStatus::kPreconditionUnmet: return "precondition unmet";
  }
  return "unknown";
}

namespace {

// Records the first failing location for a precondition.
class PreconditionProbe {
 public:
  PreconditionProbe(std::string name, std::string statement)
      : name_(std::move(name)), statement_(std::move(statement)) {}

  void check(bool ok, const std::string& at) {
    if (!ok && holds_) {
      holds_ = false;
      first_ = at;
    }
  }
  Precondition result() const {
    return {name_, holds_, holds_ ? statement_ : statement_ + "; violated at " + first_};
  }

 private:
  std::string name_;
  std::string statement_;
  bool holds_ = true;
  std::string first_;
};

double s_fn(double y, double u4) { return (y + 1.0) * (y + 1.0) - std::exp(y) + 2.0 * u4; }
double s_prime(double y) { return 2.0 * y + 2.0 - std::exp(y); }
double s_second(double y) { return 2.0 - std::exp(y); }

// dv/da at fixed R, from B1' = Q and B2' = 10 u2 / ln 10.
double v_slope(double a, double distance, double node, const SystemConfig& cfg) {
  const double u5 = cfg.code.u[5];
  const NodeTerms t = node_terms(a, node, cfg);
  const double db2 = 10.0 / kLn10 * cfg.code.u[2];
  const double f = t.b1 + u5 * t.b1 * t.b1;
  const double df = t.q + 2.0 * u5 * t.b1 * t.q;
  return -r_power(distance, cfg) * (db2 * f - t.b2 * df) / (f * f);
}

}  // namespace

std::vector<Precondition> check_preconditions(const SystemConfig& cfg,
                                              const std::vector<double>& a_values,
                                              const std::vector<double>& distances) {
  const auto& u = cfg.code.u;
  const QuadratureRule rule = gauss_laguerre(cfg.quadrature_order);

  PreconditionProbe b2_pos("b2_positive", "u0 + u2 a > 0 for every a");
  PreconditionProbe y_inc("y_increasing_in_a", "Q_k + 10 u2 R^-alpha_D / ln10 > 0");
  PreconditionProbe s2("s2_negative", "s''(y(1 R)) < 0");
  PreconditionProbe s1("s1_negative", "s'(y(1 R)) < 0");
  PreconditionProbe s0("s_negative", "s(y(1 R)) < 0");
  PreconditionProbe wqa("w_plus_qa_positive", "W_k + Q_k a > 0");
  PreconditionProbe q_pos("q_positive", "Q_k > 0");
  PreconditionProbe z_slope("z_decreasing_in_a", "u2 (1 + u3 + u4) - u0 u1 < 0");
  PreconditionProbe quad("u2u5q2_negative", "u2 u5 Q_k^2 < 0");
  PreconditionProbe vertex("vertex_left", "-u0 / u2 < 0");
  PreconditionProbe v_slope1("v_slope_negative", "v'(1 R) < 0");
  PreconditionProbe v_pos("v_positive", "v(a R) > 0");

  for (double a : a_values) b2_pos.check(u[0] + u[2] * a > 0.0, "a=" + format_number(a));
  z_slope.check(u[2] * (1.0 + u[3] + u[4]) - u[0] * u[1] < 0.0, "config u");
  vertex.check(u[2] != 0.0 && -u[0] / u[2] < 0.0, "config u");

  for (int k = 0; k < rule.order; ++k) {
    const double x = rule.nodes[static_cast<std::size_t>(k)];
    const NodeTerms t1 = node_terms(1.0, x, cfg);
    const std::string at_k = "k=" + std::to_string(k);
    q_pos.check(t1.q > 0.0, at_k);
    quad.check(u[2] * u[5] * t1.q * t1.q < 0.0, at_k);
    for (double r : distances) {
      const double rp = r_power(r, cfg);
      const double y1 = t1.b1 + t1.b2 * rp - 1.0 - u[4];
      const std::string at = where(1.0, r, k);
      y_inc.check(t1.q + 10.0 * u[2] * rp / kLn10 > 0.0, at);
      s2.check(s_second(y1) < 0.0, at);
      s1.check(s_prime(y1) < 0.0, at);
      s0.check(s_fn(y1, u[4]) < 0.0, at);
      v_slope1.check(v_slope(1.0, r, x, cfg) < 0.0, at);
      for (double a : a_values) {
        const NodeTerms t = node_terms(a, x, cfg);
        const std::string at_a = where(a, r, k);
        wqa.check(t.w + t.q * a > 0.0, at_a);
        v_pos.check(-t.b2 * rp / (t.b1 * (1.0 + u[5] * t.b1)) > 0.0, at_a);
      }
    }
  }
  std::vector<Precondition> out;
  for (const auto* p : {&b2_pos, &y_inc, &s2, &s1, &s0, &wqa, &q_pos, &z_slope, &quad, &vertex,
                        &v_slope1, &v_pos}) {
    out.push_back(p->result());
  }
  return out;
}

double step1_gamma_bound(const SystemConfig& cfg) {
  const auto& u = cfg.code.u;
  const QuadratureRule rule = gauss_laguerre(cfg.quadrature_order);
  double gamma = std::numeric_limits<double>::infinity();
  for (double x : rule.nodes) {
    const double lg_shift = std::log10(node_terms(1.0, x, cfg).z1) - 1.0 / kLn10;
    gamma = std::min(gamma, u[1] + u[3] + 10.0 * (u[0] + u[2]) * lg_shift);
  }
  return gamma;
}

namespace {

enum class Trend { kDecreasing, kIncreasing };

bool in_order(double before, double after, Trend trend, double slack) {
  return trend == Trend::kDecreasing ? after < before + slack : after > before - slack;
}

// Scans a step grid along one axis for every fixed (other axis, node).
// Returns an empty string when the trend holds everywhere.
std::string scan_step(const StepGrid& g, bool along_a, Trend trend) {
  const std::size_t na = g.a_values.size();
  const std::size_t nr = g.distances.size();
  const std::size_t nk = g.weights.size();
  for (std::size_t k = 0; k < nk; ++k) {
    if (along_a) {
      for (std::size_t ir = 0; ir < nr; ++ir) {
        for (std::size_t ia = 1; ia < na; ++ia) {
          const auto& p = g.at(ia - 1, ir, k);
          const auto& q = g.at(ia, ir, k);
          if (!in_order(p.error, q.error, trend, 0.0)) {
            return where(q.a, q.distance, q.node_index) + ": " + format_number(q.error) +
                   " after " + format_number(p.error);
          }
        }
      }
    } else {
      for (std::size_t ia = 0; ia < na; ++ia) {
        for (std::size_t ir = 1; ir < nr; ++ir) {
          const auto& p = g.at(ia, ir - 1, k);
          const auto& q = g.at(ia, ir, k);
          if (!in_order(p.error, q.error, trend, 0.0)) {
            return where(q.a, q.distance, q.node_index) + ": " + format_number(q.error) +
                   " after " + format_number(p.error);
          }
        }
      }
    }
  }
  return {};
}

Verdict decide(std::string claim, std::size_t axis_len, const std::vector<Precondition>& pre,
               const std::vector<std::string>& needs, const std::string& violation) {
  Verdict v;
  v.claim = std::move(claim);
  if (axis_len < 2) {
    v.status = VerdictStatus::kInsufficientAxis;
    v.detail = "axis has " + std::to_string(axis_len) + " value(s)";
    return v;
  }
  std::string unmet;
  for (const auto& name : needs) {
    for (const auto& p : pre) {
      if (p.name == name && !p.holds) unmet += (unmet.empty() ? "" : " ") + name;
    }
  }
  const std::string observed = violation.empty() ? "trend holds on grid"
                                                 : "trend broken at " + violation;
  if (!unmet.empty()) {
    v.status = VerdictStatus::kPreconditionUnmet;
    v.detail = "needs " + unmet + "; " + observed;
    return v;
  }
  v.status = violation.empty() ? VerdictStatus::kPass : VerdictStatus::kFail;
  v.detail = observed;
  return v;
}

}  // namespace

SensitivityReport run_sensitivity(const SystemConfig& cfg, const SensitivityGrids& grids,
                                  const GridOptions& opt) {
  SensitivityReport rep;
  for (Step s : {Step::kExp, Step::kReciprocal, Step::kPower}) {
    rep.steps.push_back(step_error_grid(s, cfg, grids.a_values, grids.distances));
  }
  rep.mf = mf_error_grid(cfg, grids.a_values, grids.distances, grids.pu_values, opt);
  rep.preconditions = check_preconditions(cfg, grids.a_values, grids.distances);
  rep.gamma = step1_gamma_bound(cfg);

  const std::size_t na = grids.a_values.size();
  const std::size_t nr = grids.distances.size();
  auto step_regime = [&](const StepGrid& g) {
    return g.regime_violations ? "regime violated: " + g.first_violation : std::string();
  };
  auto step_claim = [&](const StepGrid& g, std::string name, bool along_a, Trend trend,
                        std::vector<std::string> needs) {
    std::string broken = step_regime(g);
    if (broken.empty()) broken = scan_step(g, along_a, trend);
    rep.verdicts.push_back(decide(std::move(name), along_a ? na : nr, rep.preconditions, needs,
                                  broken));
  };
  const std::vector<std::string> s_conds = {"b2_positive", "s2_negative", "s1_negative",
                                            "s_negative"};
  auto with = [](std::vector<std::string> v, std::string extra) {
    v.push_back(std::move(extra));
    return v;
  };
  step_claim(rep.steps[0], "step1_decreasing_in_a", true, Trend::kDecreasing,
             with(s_conds, "y_increasing_in_a"));
  step_claim(rep.steps[0], "step1_increasing_in_R", false, Trend::kIncreasing, s_conds);
  step_claim(rep.steps[1], "step2_decreasing_in_a", true, Trend::kDecreasing,
             {"b2_positive", "w_plus_qa_positive", "q_positive", "z_decreasing_in_a"});
  step_claim(rep.steps[1], "step2_decreasing_in_R", false, Trend::kDecreasing,
             {"b2_positive", "w_plus_qa_positive"});
  step_claim(rep.steps[2], "step3_decreasing_in_a", true, Trend::kDecreasing,
             {"b2_positive", "u2u5q2_negative", "vertex_left", "v_slope_negative", "v_positive"});
  step_claim(rep.steps[2], "step3_decreasing_in_R", false, Trend::kDecreasing,
             {"b2_positive", "v_positive"});

  const ErrorGrid& mf = rep.mf;
  const std::size_t nd = mf.d_values.size();
  const std::size_t np = mf.pu_values.size();
  std::string mf_regime = mf.regime_violations ? "regime violated: " + mf.first_violation : "";

  std::string broken_a = mf_regime;
  for (std::size_t id = 0; id < nd && broken_a.empty(); ++id) {
    for (std::size_t ip = 0; ip < np && broken_a.empty(); ++ip) {
      for (std::size_t ia = 1; ia < na && broken_a.empty(); ++ia) {
        const double before = mf.error[mf.index(ia - 1, id, ip)];
        const double after = mf.error[mf.index(ia, id, ip)];
        if (!(after <= before + kMfTrendSlack)) {
          broken_a = "a=" + format_number(mf.a_values[ia]) + " D=" +
                     format_number(mf.d_values[id]) + " P_U=" + format_number(mf.pu_values[ip]);
        }
      }
    }
  }
  rep.verdicts.push_back(decide("mf_error_nonincreasing_in_a", na, rep.preconditions,
                                {"b2_positive"}, broken_a));

  std::string broken_d = mf_regime;
  std::size_t d_len = 0;
  for (std::size_t id = 0; id < nd; ++id) d_len += mf.d_values[id] >= grids.mf_growth_from;
  for (std::size_t ia = 0; ia < na && broken_d.empty(); ++ia) {
    for (std::size_t ip = 0; ip < np && broken_d.empty(); ++ip) {
      for (std::size_t id = 1; id < nd && broken_d.empty(); ++id) {
        if (mf.d_values[id - 1] < grids.mf_growth_from) continue;
        const double before = mf.error[mf.index(ia, id - 1, ip)];
        const double after = mf.error[mf.index(ia, id, ip)];
        if (!(after > before)) {
          broken_d = "a=" + format_number(mf.a_values[ia]) + " D=" +
                     format_number(mf.d_values[id]) + " P_U=" + format_number(mf.pu_values[ip]);
        }
      }
    }
  }
  rep.verdicts.push_back(decide("mf_error_increasing_in_D_from_" +
                                    format_number(grids.mf_growth_from),
                                d_len, rep.preconditions, {"b2_positive"}, broken_d));
  return rep;
}

namespace {

std::string step_name(Step s) {
  switch (s) {
    case Step::kExp: return "1";
    case Step::kReciprocal: return "2";
    case Step::kPower: return "3";
  }
  return "?";
}

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  return s;
}

}  // namespace

std::string to_csv(const StepGrid& grid) {
  CsvTable t({"step", "a", "R_m", "node", "variable", "error", "error_direct", "weight"});
  for (const auto& p : grid.points) {
    t.row({step_name(p.step), format_number(p.a), format_number(p.distance),
           std::to_string(p.node_index), format_number(p.variable), format_number(p.error),
           format_number(p.error_direct),
           format_number(grid.weights[static_cast<std::size_t>(p.node_index)])});
  }
  return t.str();
}

std::string to_csv(const ErrorGrid& grid) {
  CsvTable t({"a", "D_m", "P_U_W", "error", "mf_closed", "mf_oracle"});
  for (std::size_t ia = 0; ia < grid.a_values.size(); ++ia) {
    for (std::size_t id = 0; id < grid.d_values.size(); ++id) {
      for (std::size_t ip = 0; ip < grid.pu_values.size(); ++ip) {
        const std::size_t i = grid.index(ia, id, ip);
        t.row({format_number(grid.a_values[ia]), format_number(grid.d_values[id]),
               format_number(grid.pu_values[ip]), format_number(grid.error[i]),
               format_number(grid.closed[i]), format_number(grid.oracle[i])});
      }
    }
  }
  return t.str();
}

std::string verdicts_csv(const SensitivityReport& report) {
  CsvTable t({"claim", "status", "detail"});
  for (const auto& v : report.verdicts) {
    t.row({v.claim, std::string(to_string(v.status)), csv_safe(v.detail)});
  }
  for (const auto& p : report.preconditions) {
    t.row({"precondition:" + p.name, p.holds ? "holds" : "violated", csv_safe(p.detail)});
  }
  return t.str();
}

namespace {

// JSON has no NaN; regime violations serialize as null.
nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

nlohmann::json to_json(const StepGrid& grid) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : grid.points) {
    pts.push_back({{"a", p.a},
                   {"R_m", p.distance},
                   {"node", p.node_index},
                   {"variable", num(p.variable)},
                   {"error", num(p.error)},
                   {"error_direct", num(p.error_direct)}});
  }
  return {{"step", std::stoi(step_name(grid.step))},
          {"a_values", grid.a_values},
          {"distances_m", grid.distances},
          {"weights", grid.weights},
          {"regime_violations", grid.regime_violations},
          {"points", pts}};
}

nlohmann::json to_json(const ErrorGrid& grid) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t ia = 0; ia < grid.a_values.size(); ++ia) {
    for (std::size_t id = 0; id < grid.d_values.size(); ++id) {
      for (std::size_t ip = 0; ip < grid.pu_values.size(); ++ip) {
        const std::size_t i = grid.index(ia, id, ip);
        cells.push_back({{"a", grid.a_values[ia]},
                         {"D_m", grid.d_values[id]},
                         {"P_U_W", grid.pu_values[ip]},
                         {"error", num(grid.error[i])},
                         {"mf_closed", num(grid.closed[i])},
                         {"mf_oracle", num(grid.oracle[i])}});
      }
    }
  }
  return {{"a_values", grid.a_values},
          {"d_values_m", grid.d_values},
          {"pu_values_w", grid.pu_values},
          {"reference", grid.reference},
          {"regime_violations", grid.regime_violations},
          {"cells", cells}};
}

nlohmann::json to_json(const SensitivityReport& report) {
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : report.verdicts) {
    verdicts.push_back({{"claim", v.claim}, {"status", to_string(v.status)}, {"detail", v.detail}});
  }
  nlohmann::json pre = nlohmann::json::array();
  for (const auto& p : report.preconditions) {
    pre.push_back({{"name", p.name}, {"holds", p.holds}, {"detail", p.detail}});
  }
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : report.steps) steps.push_back(to_json(s));
  return {{"gamma", num(report.gamma)},
          {"preconditions", pre},
          {"verdicts", verdicts},
          {"steps", steps},
          {"mf", to_json(report.mf)}};
}

}  // namespace fbcov
