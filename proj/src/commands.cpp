#include "fbcov/commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "fbcov/config.hpp"
#include "fbcov/coverage.hpp"
#include "fbcov/io.hpp"
#include "fbcov/montecarlo.hpp"
#include "fbcov/sensitivity.hpp"
#include "fbcov/thresholds.hpp"

namespace fbcov {

namespace {

namespace fs = std::filesystem;

// |z| bound per point and the share of points that must meet it.
constexpr double kZLimit = 3.0;
constexpr double kPassShare = 0.95;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double parse_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("grid: cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

// Shared state of one subcommand invocation.
class Run {
 public:
  Run(std::string command, fs::path out_dir, const SystemConfig& cfg)
      : out_dir_(std::move(out_dir)) {
    manifest_.command = std::move(command);
    manifest_.config_hash = config_hash(cfg);
  }

  void set_seed(std::uint64_t seed) { manifest_.seed = seed; }

  // Header embedded in every data file; excludes the timestamp so that
  // repeated runs produce identical bytes.
  nlohmann::json stamp() const {
    nlohmann::json j = {{"command", manifest_.command}, {"config_hash", manifest_.config_hash}};
    if (manifest_.seed) j["seed"] = *manifest_.seed;
    return j;
  }

  void write(const std::string& name, std::string_view text) {
    const fs::path p = out_dir_ / name;
    write_text_file(p, text);
    manifest_.outputs.push_back(p.string());
  }

  void write_json(const std::string& name, nlohmann::json body) {
    body["manifest"] = stamp();
    write(name, body.dump(2) + "\n");
  }

  void finish() {
    manifest_.timestamp = utc_timestamp();
    const fs::path p = out_dir_ / "manifest.json";
    manifest_.outputs.push_back(p.string());
    write_text_file(p, to_json(manifest_).dump(2) + "\n");
  }

 private:
  fs::path out_dir_;
  RunManifest manifest_;
};

struct CommonArgs {
  std::string config_path;
  std::string output_dir = "fbcov_out";
};

SystemConfig load(const CommonArgs& common) {
  return common.config_path.empty() ? default_config() : load_config(common.config_path);
}

void add_common(CLI::App* sub, CommonArgs& common) {
  sub->add_option("--config", common.config_path, "Scenario JSON (built-in defaults if omitted)");
  sub->add_option("--output", common.output_dir, "Output directory")->capture_default_str();
}

// coverage --------------------------------------------------------------

struct CoverageArgs {
  CommonArgs common;
  std::string method = "all";
  std::string grid = "25:300:25";
};

int cmd_coverage(const CoverageArgs& args, std::ostream& out) {
  const SystemConfig cfg = load(args.common);
  const auto distances = parse_grid(args.grid);
  std::vector<CoverageMethod> methods;
  if (args.method == "all") {
    methods = {CoverageMethod::kForwardClosed, CoverageMethod::kFeedbackExact,
               CoverageMethod::kFeedbackGl, CoverageMethod::kFeedbackClosed};
  } else if (auto m = parse_coverage_method(args.method)) {
    methods = {*m};
  } else {
    throw std::invalid_argument("unknown method '" + args.method + "'");
  }
  check_distance_grid(distances, cfg.min_distance);

  Run run("coverage", args.common.output_dir, cfg);
  for (auto m : methods) {
    const CoverageCurve curve = coverage_curve(m, cfg, distances);
    const std::string stem = "coverage_" + std::string(to_string(m));
    run.write(stem + ".csv", to_csv(curve));
    run.write_json(stem + ".json", to_json(curve));
    out << stem << ".csv: " << curve.points.size() << " points\n";
  }
  run.finish();
  return kExitOk;
}

// aps -------------------------------------------------------------------

struct ApsArgs {
  CommonArgs common;
  std::string mode = "both";
  std::string grid = "25:300:25";
};

int cmd_aps(const ApsArgs& args, std::ostream& out) {
  const SystemConfig cfg = load(args.common);
  const auto radii = parse_grid(args.grid);
  if (args.mode != "forward" && args.mode != "feedback" && args.mode != "both") {
    throw std::invalid_argument("unknown mode '" + args.mode + "' (forward, feedback, both)");
  }
  check_distance_grid(radii, cfg.min_distance);
  const bool fwd = args.mode != "feedback";
  const bool fb = args.mode != "forward";

  std::vector<std::string> header = {"D_m"};
  if (fwd) header.push_back("M_c");
  if (fb) header.push_back("M_f");
  if (fwd && fb) header.push_back("ratio");
  CsvTable table(header);
  nlohmann::json rows = nlohmann::json::array();

  const ThresholdResult omega_c = critical_snr_forward(cfg.code);
  std::optional<ClosedFormCoefficients> coeffs;
  if (fb) coeffs = closed_form_coefficients(cfg, gauss_laguerre(cfg.quadrature_order));
  for (double d : radii) {
    std::vector<std::string> row = {format_number(d)};
    nlohmann::json j = {{"D_m", d}};
    double mc = 0.0;
    double mf = 0.0;
    if (fwd) {
      mc = aps_forward(d, cfg, omega_c);
      row.push_back(format_number(mc));
      j["M_c"] = mc;
    }
    if (fb) {
      mf = aps_feedback(d, *coeffs, cfg);
      row.push_back(format_number(mf));
      j["M_f"] = mf;
    }
    if (fwd && fb) {
      row.push_back(format_number(mf / mc));
      j["ratio"] = mf / mc;
    }
    table.row(row);
    rows.push_back(j);
  }
  Run run("aps", args.common.output_dir, cfg);
  run.write("aps.csv", table.str());
  run.write_json("aps.json", {{"mode", args.mode}, {"rows", rows}});
  run.finish();
  out << "aps.csv: " << radii.size() << " rows\n";
  return kExitOk;
}

// validate --------------------------------------------------------------

struct ValidateArgs {
  CommonArgs common;
  std::string mode = "forward";
  std::string grid = "50:200:50";
  std::string aps_grid;
  std::int64_t trials = 100000;
  std::int64_t realizations = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  bool strict = false;
};

struct ValidationRow {
  std::string mode;
  std::string kind;
  double x = 0.0;
  double analytical = 0.0;
  McEstimate mc;
  double z = 0.0;
  bool resolved = true;
};

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
  const SystemConfig cfg = load(args.common);
  if (args.trials < 100) throw std::invalid_argument("--trials must be >= 100");
  if (args.mode != "forward" && args.mode != "feedback" && args.mode != "both") {
    throw std::invalid_argument("unknown mode '" + args.mode + "' (forward, feedback, both)");
  }
  const auto distances = parse_grid(args.grid);
  check_distance_grid(distances, cfg.min_distance);
  std::vector<double> radii;
  if (!args.aps_grid.empty()) {
    radii = parse_grid(args.aps_grid);
    check_distance_grid(radii, cfg.min_distance);
  }
  std::vector<Mode> modes;
  if (args.mode != "feedback") modes.push_back(Mode::kForward);
  if (args.mode != "forward") modes.push_back(Mode::kFeedback);

  const ThresholdResult omega_c = critical_snr_forward(cfg.code);
  const QuadratureRule rule = gauss_laguerre(cfg.quadrature_order);
  McOptions opt;
  opt.workers = args.workers;

  std::vector<ValidationRow> rows;
  int warnings = 0;
  for (Mode mode : modes) {
    const bool fb = mode == Mode::kFeedback;
    for (double r : distances) {
      ValidationRow row;
      row.mode = to_string(mode);
      row.kind = "coverage";
      row.x = r;
      row.analytical = fb ? coverage_feedback_exact(r, cfg) : coverage_forward(r, cfg, omega_c);
      row.mc = mc_coverage(r, mode, cfg, args.trials, args.seed, opt);
      const double p = row.analytical;
      const double null_se = std::sqrt(p * (1.0 - p) / static_cast<double>(args.trials));
      row.z = null_se > 0.0 ? (row.mc.mean - p) / null_se : (row.mc.mean == p ? 0.0 : INFINITY);
      const double needed = trials_to_resolve(p);
      if (static_cast<double>(args.trials) < needed) {
        row.resolved = false;
        ++warnings;
        err << "warning: " << args.trials << " trials cannot resolve p = " << format_number(p)
            << " at R = " << format_number(r) << " m (" << row.mode << "); about "
            << format_number(std::ceil(needed)) << " needed\n";
      }
      rows.push_back(row);
    }
    if (radii.empty()) continue;
    ClosedFormCoefficients coeffs;
    if (fb) coeffs = closed_form_coefficients(cfg, rule);
    for (double d : radii) {
      ValidationRow row;
      row.mode = to_string(mode);
      row.kind = "aps";
      row.x = d;
      row.analytical = fb ? aps_feedback(d, coeffs, cfg) : aps_forward(d, cfg, omega_c);
      row.mc = mc_connectable_aps(d, mode, cfg, args.realizations, args.seed, opt);
      row.z = row.mc.std_error > 0.0 ? (row.mc.mean - row.analytical) / row.mc.std_error
                                     : (row.mc.mean == row.analytical ? 0.0 : INFINITY);
      rows.push_back(row);
    }
  }

  std::size_t within = 0;
  CsvTable table({"mode", "kind", "x_m", "analytical", "mc_mean", "std_error", "ci_low",
                  "ci_high", "wilson_low", "wilson_high", "z", "n", "resolved"});
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& row : rows) {
    within += std::abs(row.z) <= kZLimit;
    const std::string wl = row.mc.wilson ? format_number(row.mc.wilson->low) : "";
    const std::string wh = row.mc.wilson ? format_number(row.mc.wilson->high) : "";
    table.row({row.mode, row.kind, format_number(row.x), format_number(row.analytical),
               format_number(row.mc.mean), format_number(row.mc.std_error),
               format_number(row.mc.ci95.low), format_number(row.mc.ci95.high), wl, wh,
               format_number(row.z), std::to_string(row.mc.n_trials),
               row.resolved ? "yes" : "no"});
    nlohmann::json j = {{"mode", row.mode},          {"kind", row.kind},
                        {"x_m", row.x},              {"analytical", row.analytical},
                        {"mc", to_json(row.mc)},     {"z", std::isfinite(row.z) ? row.z : 1e308},
                        {"resolved", row.resolved}};
    jrows.push_back(j);
  }
  const double share = static_cast<double>(within) / static_cast<double>(rows.size());
  const bool pass = share >= kPassShare;

  Run run("validate", args.common.output_dir, cfg);
  run.set_seed(args.seed);
  run.write("validate.csv", table.str());
  run.write_json("validate.json", {{"rows", jrows},
                                   {"summary",
                                    {{"pass", pass},
                                     {"share_within_3se", share},
                                     {"points", rows.size()},
                                     {"budget_warnings", warnings}}}});
  run.finish();

  out << "validate: " << within << "/" << rows.size() << " points with |z| <= 3 -> "
      << (pass ? "PASS" : "FAIL") << "\n";
  if (args.strict && (!pass || warnings > 0)) {
    err << "strict mode: " << (pass ? "" : "agreement check failed; ")
        << (warnings ? std::to_string(warnings) + " budget warning(s)" : std::string()) << "\n";
    return kExitStrict;
  }
  return kExitOk;
}

// sensitivity -----------------------------------------------------------

struct SensitivityArgs {
  CommonArgs common;
  std::string a_grid = "1:8:1";
  std::string grid = "25:300:25";
  std::string pu_grid = "0.5,1,2";
  unsigned workers = 0;
};

int cmd_sensitivity(const SensitivityArgs& args, std::ostream& out) {
  const SystemConfig cfg = load(args.common);
  SensitivityGrids grids;
  grids.a_values = parse_grid(args.a_grid);
  grids.distances = parse_grid(args.grid);
  grids.pu_values.clear();
  for (double mw : parse_grid(args.pu_grid)) grids.pu_values.push_back(mw * 1e-3);
  GridOptions opt;
  opt.workers = args.workers;
  const SensitivityReport rep = run_sensitivity(cfg, grids, opt);

  Run run("sensitivity", args.common.output_dir, cfg);
  for (std::size_t i = 0; i < rep.steps.size(); ++i) {
    run.write("step" + std::to_string(i + 1) + "_error.csv", to_csv(rep.steps[i]));
  }
  run.write("mf_error.csv", to_csv(rep.mf));
  run.write("verdicts.csv", verdicts_csv(rep));
  run.write_json("sensitivity.json", to_json(rep));
  run.finish();

  for (const auto& p : rep.preconditions) {
    if (!p.holds) out << "precondition " << p.name << ": violated (" << p.detail << ")\n";
  }
  for (const auto& v : rep.verdicts) {
    out << v.claim << ": " << to_string(v.status) << " (" << v.detail << ")\n";
  }
  out << "gamma bound: " << format_number(rep.gamma) << "\n";
  return kExitOk;
}

// show-config -----------------------------------------------------------

int cmd_show_config(const CommonArgs& common, std::ostream& out) {
  const SystemConfig cfg = load(common);
  nlohmann::json j = to_json(cfg);
  j["config_hash"] = config_hash(cfg);
  j["omega_c_db"] = critical_snr_forward(cfg.code).omega_db;
  out << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j = {{"command", m.command},
                      {"config_hash", m.config_hash},
                      {"outputs", m.outputs},
                      {"timestamp", m.timestamp}};
  j["seed"] = m.seed ? nlohmann::json(*m.seed) : nlohmann::json();
  return j;
}

std::vector<double> parse_grid(std::string_view spec) {
  if (spec.empty()) throw std::invalid_argument("grid: empty specification");
  std::vector<double> values;
  if (spec.find(':') != std::string_view::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw std::invalid_argument("grid: expected start:stop:step");
    const double start = parse_number(parts[0]);
    const double stop = parse_number(parts[1]);
    const double step = parse_number(parts[2]);
    if (!(step > 0.0) || stop < start) {
      throw std::invalid_argument("grid '" + std::string(spec) +
                                  "' does not ascend; grids must ascend with a positive step");
    }
    const double span = (stop - start) / step;
    if (span > 1e7) throw std::invalid_argument("grid: too many points");
    const auto n = static_cast<std::int64_t>(std::floor(span + 1e-9)) + 1;
    for (std::int64_t i = 0; i < n; ++i) values.push_back(start + static_cast<double>(i) * step);
  } else {
    for (auto part : split(spec, ',')) values.push_back(parse_number(part));
  }
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      throw std::invalid_argument("grid '" + std::string(spec) + "' must be strictly ascending");
    }
  }
  return values;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coverage and connectable-AP analysis for feedback-aided IoT uplinks", "fbcov"};
  app.require_subcommand(1);

  CoverageArgs cov;
  auto* sub_cov = app.add_subcommand("coverage", "Coverage probability curves");
  add_common(sub_cov, cov.common);
  sub_cov->add_option("--method", cov.method,
                      "forward, feedback-exact, feedback-gl, feedback-closed or all")
      ->capture_default_str();
  sub_cov->add_option("--grid", cov.grid, "Distances in m")->capture_default_str();

  ApsArgs aps;
  auto* sub_aps = app.add_subcommand("aps", "Expected connectable APs within radius D");
  add_common(sub_aps, aps.common);
  sub_aps->add_option("--mode", aps.mode, "forward, feedback or both")->capture_default_str();
  sub_aps->add_option("--grid", aps.grid, "Radii D in m")->capture_default_str();

  ValidateArgs val;
  auto* sub_val = app.add_subcommand("validate", "Analytical results against Monte Carlo");
  add_common(sub_val, val.common);
  sub_val->add_option("--mode", val.mode, "forward, feedback or both")->capture_default_str();
  sub_val->add_option("--grid", val.grid, "Coverage distances in m")->capture_default_str();
  sub_val->add_option("--aps-grid", val.aps_grid, "Radii for AP-count checks (none if empty)");
  sub_val->add_option("--trials", val.trials, "Trials per coverage point")->capture_default_str();
  sub_val->add_option("--realizations", val.realizations, "PPP realizations per radius")
      ->capture_default_str();
  sub_val->add_option("--seed", val.seed, "Master seed")->capture_default_str();
  sub_val->add_option("--workers", val.workers, "Threads (0: all cores)")->capture_default_str();
  sub_val->add_flag("--strict", val.strict, "Exit 2 on disagreement or unresolvable budget");

  SensitivityArgs sen;
  auto* sub_sen = app.add_subcommand("sensitivity", "Approximation error grids and verdicts");
  add_common(sub_sen, sen.common);
  sub_sen->add_option("--a-grid", sen.a_grid, "Feedback ratios a")->capture_default_str();
  sub_sen->add_option("--grid", sen.grid, "Distances R and radii D in m")->capture_default_str();
  sub_sen->add_option("--pu-grid", sen.pu_grid, "Uplink powers in mW")->capture_default_str();
  sub_sen->add_option("--workers", sen.workers, "Threads (0: all cores)")->capture_default_str();

  CommonArgs show;
  auto* sub_show = app.add_subcommand("show-config", "Print the canonical config and its hash");
  sub_show->add_option("--config", show.config_path, "Scenario JSON (built-in defaults if omitted)");

  std::vector<const char*> argv = {"fbcov"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (sub_cov->parsed()) return cmd_coverage(cov, out);
    if (sub_aps->parsed()) return cmd_aps(aps, out);
    if (sub_val->parsed()) return cmd_validate(val, out, err);
    if (sub_sen->parsed()) return cmd_sensitivity(sen, out);
    if (sub_show->parsed()) return cmd_show_config(show, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace fbcov
