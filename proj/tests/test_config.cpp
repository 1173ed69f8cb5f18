#include <cmath>
#include <functional>
#include <string>

#include "doctest.h"
#include "fbcov/config.hpp"

using namespace fbcov;
using nlohmann::json;

namespace {

json default_doc() { return json::parse(R"({
  "uplink": {"power_mw": 1, "noise_power_dbm": -135, "intercept_db": -47,
             "exponent": 4, "fading_rate": 2},
  "downlink": {"power_dbm": 16.98970004336019, "noise_power_dbm": -135, "intercept_db": -47,
               "exponent": 4, "fading_rate": 2},
  "code": {"k_bits": 48, "n_uses": 144, "target_per": 1e-4, "a_ratio": 4,
           "u": [2.0, 2.0, 0.01, 210.0, 0.25, -1.0]},
  "ap_density_per_m2": 6e-3
})"); }

// Expects a ConfigError whose message names `field`.
void expect_rejected(const std::function<void(SystemConfig&)>& mutate, const std::string& field) {
  SystemConfig cfg = default_config();
  mutate(cfg);
  try {
    validate(cfg);
    FAIL("accepted invalid " << field);
  } catch (const ConfigError& e) {
    CHECK_MESSAGE(std::string(e.what()).find(field) != std::string::npos, e.what());
  }
}

void expect_doc_rejected(const std::function<void(json&)>& mutate, const std::string& fragment) {
  json doc = default_doc();
  mutate(doc);
  try {
    parse_config(doc);
    FAIL("accepted document, expected " << fragment);
  } catch (const ConfigError& e) {
    CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
  }
}

}  // namespace

TEST_CASE("dB conversions") {
  CHECK(db_to_linear(0.0) == 1.0);
  CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
  CHECK(linear_to_db(100.0) == doctest::Approx(20.0));
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
  CHECK(dbm_to_watts(-135.0) == doctest::Approx(3.1622776601683795e-17));
  CHECK_THROWS_AS(linear_to_db(0.0), std::domain_error);
  CHECK_THROWS_AS(linear_to_db(-1.0), std::domain_error);
  for (double x : {-40.0, -3.0, 0.5, 17.0}) CHECK(linear_to_db(db_to_linear(x)) == doctest::Approx(x));
}

TEST_CASE("default config equals the shipped file") {
  const SystemConfig file = load_config(std::string(FBCOV_SOURCE_DIR) + "/configs/default.json");
  CHECK(file == default_config());
  CHECK(config_hash(file) == config_hash(default_config()));
  CHECK_NOTHROW(validate(default_config()));
}

TEST_CASE("unit variants parse to the same linear values") {
  const SystemConfig cfg = parse_config(default_doc());
  const SystemConfig ref = default_config();
  CHECK(cfg.uplink.power == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(cfg.downlink.power == doctest::Approx(0.05).epsilon(1e-13));
  CHECK(cfg.uplink.noise_power == doctest::Approx(ref.uplink.noise_power).epsilon(1e-14));
  CHECK(cfg.uplink.intercept == doctest::Approx(std::pow(10.0, -4.7)).epsilon(1e-14));
  CHECK(cfg.uplink.g_tx == 1.0);
  CHECK(cfg.region_radius == 250.0);
  CHECK(cfg.quadrature_order == 16);
  CHECK(cfg.min_distance == 0.1);
}

TEST_CASE("canonical JSON round-trips exactly") {
  const SystemConfig cfg = parse_config(default_doc());
  const SystemConfig back = parse_config(to_json(cfg));
  CHECK(back == cfg);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);
  CHECK(config_hash(with_feedback_ratio(cfg, 5)) != config_hash(cfg));
}

TEST_CASE("parse_config accepts text and reports malformed JSON") {
  CHECK_NOTHROW(parse_config(std::string_view(default_doc().dump())));
  CHECK_THROWS_AS(parse_config(std::string_view("{not json")), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/fbcov.json"), ConfigError);
}

TEST_CASE("document structure errors") {
  expect_doc_rejected([](json& d) { d["uplink"]["powr_w"] = 1; }, "unknown key uplink.powr_w");
  expect_doc_rejected([](json& d) { d["extra"] = 1; }, "unknown key extra");
  expect_doc_rejected([](json& d) { d["uplink"]["power_w"] = 1e-3; }, "has both");
  expect_doc_rejected([](json& d) { d["uplink"].erase("power_mw"); }, "missing one of");
  expect_doc_rejected([](json& d) { d.erase("ap_density_per_m2"); }, "ap_density_per_m2");
  expect_doc_rejected([](json& d) { d["code"]["u"] = {1, 2, 3}; }, "code.u");
  expect_doc_rejected([](json& d) { d["code"]["k_bits"] = 48.5; }, "code.k_bits");
  expect_doc_rejected([](json& d) { d["code"]["u"][2] = "x"; }, "code.u[2]");
  expect_doc_rejected([](json& d) { d["uplink"]["exponent"] = "4"; }, "uplink.exponent");
}

// One test per invariant.
TEST_CASE("invariant: link powers positive") {
  expect_rejected([](SystemConfig& c) { c.uplink.power = 0.0; }, "uplink.power");
  expect_rejected([](SystemConfig& c) { c.downlink.power = -1.0; }, "downlink.power");
}
TEST_CASE("invariant: antenna gains positive") {
  expect_rejected([](SystemConfig& c) { c.uplink.g_tx = 0.0; }, "uplink.g_tx");
  expect_rejected([](SystemConfig& c) { c.downlink.g_rx = NAN; }, "downlink.g_rx");
}
TEST_CASE("invariant: noise power positive") {
  expect_rejected([](SystemConfig& c) { c.uplink.noise_power = 0.0; }, "uplink.noise_power");
}
TEST_CASE("invariant: intercept positive") {
  expect_rejected([](SystemConfig& c) { c.downlink.intercept = 0.0; }, "downlink.intercept");
}
TEST_CASE("invariant: path-loss exponent exceeds 2") {
  expect_rejected([](SystemConfig& c) { c.uplink.exponent = 2.0; }, "uplink.exponent");
}
TEST_CASE("invariant: fading rate positive") {
  expect_rejected([](SystemConfig& c) { c.downlink.fading_rate = 0.0; }, "downlink.fading_rate");
}
TEST_CASE("invariant: target PER in (0, 1)") {
  expect_rejected([](SystemConfig& c) { c.code.target_per = 0.0; }, "code.target_per");
  expect_rejected([](SystemConfig& c) { c.code.target_per = 1.0; }, "code.target_per");
}
TEST_CASE("invariant: k_bits >= 1 and n_uses >= k_bits") {
  expect_rejected([](SystemConfig& c) { c.code.k_bits = 0; }, "code.k_bits");
  expect_rejected([](SystemConfig& c) { c.code.n_uses = 47; }, "code.n_uses");
}
TEST_CASE("invariant: a_ratio >= 1") {
  expect_rejected([](SystemConfig& c) { c.code.a_ratio = 0; }, "code.a_ratio");
}
TEST_CASE("invariant: logistic coefficients finite") {
  expect_rejected([](SystemConfig& c) { c.code.u[1] = INFINITY; }, "code.u[1]");
}
TEST_CASE("invariant: u4 positive") {
  expect_rejected([](SystemConfig& c) { c.code.u[4] = 0.0; }, "code.u[4]");
}
TEST_CASE("invariant: u5 negative") {
  expect_rejected([](SystemConfig& c) { c.code.u[5] = 0.0; }, "code.u[5]");
}
TEST_CASE("invariant: u0 + u2 a positive") {
  expect_rejected([](SystemConfig& c) { c.code.u[0] = -0.05; }, "code.u[0] + code.u[2] * a_ratio");
}
TEST_CASE("invariant: AP density positive") {
  expect_rejected([](SystemConfig& c) { c.ap_density = 0.0; }, "ap_density_per_m2");
}
TEST_CASE("invariant: region radius positive") {
  expect_rejected([](SystemConfig& c) { c.region_radius = -5.0; }, "region_radius_m");
}
TEST_CASE("invariant: quadrature order in [1, 64]") {
  expect_rejected([](SystemConfig& c) { c.quadrature_order = 0; }, "quadrature_order");
  expect_rejected([](SystemConfig& c) { c.quadrature_order = 65; }, "quadrature_order");
}
TEST_CASE("invariant: far-field guard positive") {
  expect_rejected([](SystemConfig& c) { c.min_distance = 0.0; }, "min_distance_m");
}

TEST_CASE("with_* helpers change one field") {
  const SystemConfig base = default_config();
  const SystemConfig a = with_feedback_ratio(base, 7);
  CHECK(a.code.a_ratio == 7);
  SystemConfig back = a;
  back.code.a_ratio = base.code.a_ratio;
  CHECK(back == base);
  CHECK(with_uplink_power(base, 2e-3).uplink.power == 2e-3);
  CHECK(with_uplink_power(base, 2e-3).downlink == base.downlink);
}
