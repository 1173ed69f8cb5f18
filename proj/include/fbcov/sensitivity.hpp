#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fbcov/config.hpp"
#include "fbcov/specfun.hpp"
#include "json.hpp"

namespace fbcov {

/// Per-node expansion quantities at feedback ratio a. The config's own
/// a_ratio is ignored; every step function takes a explicitly.
struct NodeTerms {
  double z1 = 0.0;  // downlink SNR scale at node x_k
  double w = 0.0;   // W_k
  double q = 0.0;   // Q_k
  double b1 = 0.0;  // W_k + Q_k a
  double b2 = 0.0;  // 10 (u0 + u2 a) / ln 10
};

NodeTerms node_terms(double a, double node, const SystemConfig& cfg);

/// Reduced-form step errors as functions of the expansion variable.
double step1_delta(double y, double u4);
double step2_delta(double z, double w_plus_qa);
double step3_delta(double v, double w_plus_qa, double u5);

enum class Step { kExp = 1, kReciprocal = 2, kPower = 3 };

struct StepErrorPoint {
  Step step = Step::kExp;
  double a = 0.0;
  double distance = 0.0;
  int node_index = 0;
  double variable = 0.0;      // y, z or v
  double error = 0.0;         // reduced closed form
  double error_direct = 0.0;  // defining expression
};

/// Step 1: y = B1 + B2 R^-alpha_D - 1 - u4,
/// delta(y) = 1/(y + 1 + u4) - 1/(e^y + u4). Throws std::domain_error when
/// y + 1 + u4 <= 0.
StepErrorPoint step1_error(double a, double distance, int node_index, const SystemConfig& cfg,
                           const QuadratureRule& rule);

/// Step 2: z = B2 R^-alpha_D / (W + Q a), delta(z) = z^2 / (1 + z) / (W + Q a).
/// Throws when W + Q a <= 0 or 1 + z <= 0.
StepErrorPoint step2_error(double a, double distance, int node_index, const SystemConfig& cfg,
                           const QuadratureRule& rule);

/// Step 3: v = -B2 R^-alpha_D / (B1 (1 + u5 B1)),
/// delta(v) = ln^2(10)/200 (1/(W + Q a) + u5)^2 v^2. Throws when
/// B1 (1 + u5 B1) == 0.
StepErrorPoint step3_error(double a, double distance, int node_index, const SystemConfig& cfg,
                           const QuadratureRule& rule);

StepErrorPoint step_error(Step step, double a, double distance, int node_index,
                          const SystemConfig& cfg, const QuadratureRule& rule);

/// One step evaluated over a x R x node. Cells outside the approximation
/// regime hold NaN and are counted in `regime_violations`.
struct StepGrid {
  Step step = Step::kExp;
  std::vector<double> a_values;
  std::vector<double> distances;
  std::vector<double> weights;
  std::vector<StepErrorPoint> points;  // index [(ia * nR + iR) * nK + k]
  int regime_violations = 0;
  std::string first_violation;

  const StepErrorPoint& at(std::size_t ia, std::size_t ir, std::size_t k) const;
  /// Sum_k w_k delta_k at (a_i, R_j).
  double weighted(std::size_t ia, std::size_t ir) const;
};

StepGrid step_error_grid(Step step, const SystemConfig& cfg, std::vector<double> a_values,
                         std::vector<double> distances);

/// |M_f closed form - M_f oracle| over a x D x P_U (watts). The oracle
/// integrates the exact feedback coverage over the disk.
struct ErrorGrid {
  std::vector<double> a_values;
  std::vector<double> d_values;
  std::vector<double> pu_values;
  std::vector<double> closed;  // index [(ia * nD + id) * nP + ip]
  std::vector<double> oracle;
  std::vector<double> error;
  std::string reference;
  int regime_violations = 0;
  std::string first_violation;

  std::size_t index(std::size_t ia, std::size_t id, std::size_t ip) const {
    return (ia * d_values.size() + id) * pu_values.size() + ip;
  }
};

struct GridOptions {
  unsigned workers = 0;     // 0: hardware concurrency
  double panel_tol = 1e-9;  // absolute tolerance per D panel of the oracle
};

ErrorGrid mf_error_grid(const SystemConfig& cfg, std::vector<double> a_values,
                        std::vector<double> d_values, std::vector<double> pu_values,
                        const GridOptions& opt = {});

enum class VerdictStatus { kPass, kFail, kInsufficientAxis, kPreconditionUnmet };
std::string_view to_string(VerdictStatus status);

struct Precondition {
  std::string name;
  bool holds = false;
  std::string detail;
};

struct Verdict {
  std::string claim;
  VerdictStatus status = VerdictStatus::kFail;
  std::string detail;
};

/// Sign conditions the monotonicity arguments rely on, evaluated at every
/// node and grid point. Named so verdicts can refer to them.
std::vector<Precondition> check_preconditions(const SystemConfig& cfg,
                                              const std::vector<double>& a_values,
                                              const std::vector<double>& distances);

/// min over nodes and R of u1 + u3 + 10 (u0 + u2)(lg Z1 - 1/ln 10), the lower
/// bound on y(1, R). Diagnostic only.
double step1_gamma_bound(const SystemConfig& cfg);

struct SensitivityGrids {
  std::vector<double> a_values = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> distances = {25, 50, 75, 100, 125, 150, 175, 200, 225, 250, 275, 300};
  std::vector<double> pu_values = {0.5e-3, 1e-3, 2e-3};
  double mf_growth_from = 150.0;  // D threshold for the M_f growth-in-D claim
};

struct SensitivityReport {
  std::vector<StepGrid> steps;
  ErrorGrid mf;
  std::vector<Precondition> preconditions;
  std::vector<Verdict> verdicts;
  double gamma = 0.0;
};

SensitivityReport run_sensitivity(const SystemConfig& cfg, const SensitivityGrids& grids,
                                  const GridOptions& opt = {});

/// Long-form CSV: step,a,R_m,node,variable,error,error_direct,weight.
std::string to_csv(const StepGrid& grid);
/// Long-form CSV: a,D_m,P_U_W,error,mf_closed,mf_oracle.
std::string to_csv(const ErrorGrid& grid);
/// claim,status,detail.
std::string verdicts_csv(const SensitivityReport& report);

nlohmann::json to_json(const StepGrid& grid);
nlohmann::json to_json(const ErrorGrid& grid);
nlohmann::json to_json(const SensitivityReport& report);

}  // namespace fbcov
