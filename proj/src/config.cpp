#include "fbcov/config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace fbcov {

using nlohmann::json;

double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }

double linear_to_db(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("linear_to_db: input must be positive");
  }
  return 10.0 * std::log10(x);
}

double dbm_to_watts(double p_dbm) { return std::pow(10.0, (p_dbm - 30.0) / 10.0); }

namespace {

std::string fmt_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& field, const std::string& rule, double got) {
  throw ConfigError(field + " " + rule + ", got " + fmt_value(got));
}

void require(bool ok, const std::string& field, const std::string& rule, double got) {
  if (!ok) fail(field, rule, got);
}

void validate_link(const LinkParams& l, const std::string& name) {
  auto positive = [&](double v, const char* f) {
    require(std::isfinite(v) && v > 0.0, name + "." + f, "must be positive and finite", v);
  };
  positive(l.power, "power");
  positive(l.g_tx, "g_tx");
  positive(l.g_rx, "g_rx");
  positive(l.noise_power, "noise_power");
  positive(l.intercept, "intercept");
  require(std::isfinite(l.exponent) && l.exponent > 2.0, name + ".exponent", "must exceed 2",
          l.exponent);
  positive(l.fading_rate, "fading_rate");
}

// Tracks which keys of an object were consumed so leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + " must be a JSON object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    return v.get<double>();
  }

  int integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
    auto i = v.get<std::int64_t>();
    if (i < -1'000'000'000 || i > 1'000'000'000) {
      throw ConfigError(where(key) + " is out of range");
    }
    return static_cast<int>(i);
  }

  const json& at(const std::string& key) {
    if (!obj_.contains(key)) throw ConfigError("missing required key " + where(key));
    seen_.insert(key);
    return obj_.at(key);
  }

  // Exactly one of the alternative spellings (unit variants) must be present.
  std::string pick(std::initializer_list<const char*> keys, bool required) {
    std::string found;
    for (const char* k : keys) {
      if (obj_.contains(k)) {
        if (!found.empty()) {
          throw ConfigError(where() + " has both " + found + " and " + k);
        }
        found = k;
      }
    }
    if (found.empty() && required) {
      std::string alts;
      for (const char* k : keys) alts += (alts.empty() ? "" : " | ") + std::string(k);
      throw ConfigError(where() + " is missing one of: " + alts);
    }
    return found;
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key " + where(key));
    }
  }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

double read_power(ObjectReader& r, const char* w, const char* mw, const char* dbm) {
  const std::string key = r.pick({w, mw, dbm}, true);
  const double v = r.number(key);
  if (key == w) return v;
  if (key == mw) return v * 1e-3;
  return dbm_to_watts(v);
}

double read_ratio(ObjectReader& r, const char* lin, const char* db, bool required,
                  double fallback) {
  const std::string key = r.pick({lin, db}, required);
  if (key.empty()) return fallback;
  const double v = r.number(key);
  return key == lin ? v : db_to_linear(v);
}

LinkParams read_link(const json& doc, const std::string& name) {
  ObjectReader r(doc, name);
  LinkParams l;
  l.power = read_power(r, "power_w", "power_mw", "power_dbm");
  l.g_tx = read_ratio(r, "tx_gain", "tx_gain_dbi", false, 1.0);
  l.g_rx = read_ratio(r, "rx_gain", "rx_gain_dbi", false, 1.0);
  l.noise_power = read_power(r, "noise_power_w", "noise_power_mw", "noise_power_dbm");
  l.intercept = read_ratio(r, "intercept", "intercept_db", true, 0.0);
  l.exponent = r.number("exponent");
  l.fading_rate = r.number("fading_rate");
  r.finish();
  return l;
}

FeedbackCodeParams read_code(const json& doc) {
  ObjectReader r(doc, "code");
  FeedbackCodeParams c;
  c.k_bits = r.integer("k_bits");
  c.n_uses = r.integer("n_uses");
  c.target_per = r.number("target_per");
  c.a_ratio = r.integer("a_ratio");
  const json& u = r.at("u");
  if (!u.is_array() || u.size() != c.u.size()) {
    throw ConfigError("code.u must be an array of 6 numbers");
  }
  for (std::size_t i = 0; i < c.u.size(); ++i) {
    if (!u[i].is_number()) throw ConfigError("code.u[" + std::to_string(i) + "] must be a number");
    c.u[i] = u[i].get<double>();
  }
  r.finish();
  return c;
}

json link_to_json(const LinkParams& l) {
  return json{{"power_w", l.power},         {"tx_gain", l.g_tx},
              {"rx_gain", l.g_rx},          {"noise_power_w", l.noise_power},
              {"intercept", l.intercept},   {"exponent", l.exponent},
              {"fading_rate", l.fading_rate}};
}

}  // namespace

void validate(const SystemConfig& cfg) {
  validate_link(cfg.uplink, "uplink");
  validate_link(cfg.downlink, "downlink");

  const auto& c = cfg.code;
  require(c.target_per > 0.0 && c.target_per < 1.0, "code.target_per", "must lie in (0, 1)",
          c.target_per);
  require(c.k_bits >= 1, "code.k_bits", "must be >= 1", c.k_bits);
  require(c.n_uses >= c.k_bits, "code.n_uses", "must be >= k_bits", c.n_uses);
  require(c.a_ratio >= 1, "code.a_ratio", "must be >= 1", c.a_ratio);
  for (std::size_t i = 0; i < c.u.size(); ++i) {
    require(std::isfinite(c.u[i]), "code.u[" + std::to_string(i) + "]", "must be finite", c.u[i]);
  }
  require(c.u[4] > 0.0, "code.u[4]", "must be positive", c.u[4]);
  require(c.u[5] < 0.0, "code.u[5]", "must be negative", c.u[5]);
  const double slope = c.u[0] + c.u[2] * c.a_ratio;
  require(slope > 0.0, "code.u[0] + code.u[2] * a_ratio", "must be positive", slope);

  require(std::isfinite(cfg.ap_density) && cfg.ap_density > 0.0, "ap_density_per_m2",
          "must be positive", cfg.ap_density);
  require(std::isfinite(cfg.region_radius) && cfg.region_radius > 0.0, "region_radius_m",
          "must be positive", cfg.region_radius);
  require(cfg.quadrature_order >= 1 && cfg.quadrature_order <= kMaxQuadratureOrder,
          "quadrature_order", "must lie in [1, 64]", cfg.quadrature_order);
  require(std::isfinite(cfg.min_distance) && cfg.min_distance > 0.0, "min_distance_m",
          "must be positive", cfg.min_distance);
}

SystemConfig parse_config(const json& doc) {
  ObjectReader r(doc, "");
  SystemConfig cfg;
  cfg.uplink = read_link(r.at("uplink"), "uplink");
  cfg.downlink = read_link(r.at("downlink"), "downlink");
  cfg.code = read_code(r.at("code"));
  cfg.ap_density = r.number("ap_density_per_m2");
  cfg.region_radius = r.has("region_radius_m") ? r.number("region_radius_m") : 250.0;
  cfg.quadrature_order =
      r.has("quadrature_order") ? r.integer("quadrature_order") : kDefaultQuadratureOrder;
  cfg.min_distance = r.has("min_distance_m") ? r.number("min_distance_m") : kDefaultMinDistance;
  if (r.has("description")) r.at("description");  // free-form note, ignored
  r.finish();
  validate(cfg);
  return cfg;
}

SystemConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return parse_config(doc);
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(std::string_view(ss.str()));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const SystemConfig& cfg) {
  json u = json::array();
  for (double v : cfg.code.u) u.push_back(v);
  return json{{"uplink", link_to_json(cfg.uplink)},
              {"downlink", link_to_json(cfg.downlink)},
              {"code",
               {{"k_bits", cfg.code.k_bits},
                {"n_uses", cfg.code.n_uses},
                {"target_per", cfg.code.target_per},
                {"a_ratio", cfg.code.a_ratio},
                {"u", u}}},
              {"ap_density_per_m2", cfg.ap_density},
              {"region_radius_m", cfg.region_radius},
              {"quadrature_order", cfg.quadrature_order},
              {"min_distance_m", cfg.min_distance}};
}

std::string config_hash(const SystemConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SystemConfig default_config() {
  SystemConfig cfg;
  cfg.uplink = LinkParams{.power = 1e-3,
                          .g_tx = 1.0,
                          .g_rx = 1.0,
                          .noise_power = dbm_to_watts(-135.0),
                          .intercept = db_to_linear(-47.0),
                          .exponent = 4.0,
                          .fading_rate = 2.0};
  cfg.downlink = cfg.uplink;
  cfg.downlink.power = 50e-3;
  cfg.code = FeedbackCodeParams{.k_bits = 48,
                                .n_uses = 144,
                                .target_per = 1e-4,
                                .a_ratio = 4,
                                .u = {2.0, 2.0, 0.01, 210.0, 0.25, -1.0}};
  cfg.ap_density = 6e-3;
  cfg.region_radius = 250.0;
  cfg.quadrature_order = kDefaultQuadratureOrder;
  cfg.min_distance = kDefaultMinDistance;
  return cfg;
}

SystemConfig with_feedback_ratio(SystemConfig cfg, int a) {
  cfg.code.a_ratio = a;
  return cfg;
}

SystemConfig with_uplink_power(SystemConfig cfg, double watts) {
  cfg.uplink.power = watts;
  return cfg;
}

}  // namespace fbcov
