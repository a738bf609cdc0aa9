#include "rsacdda/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rsacdda/errors.hpp"

namespace rsacdda {
namespace {

using json = nlohmann::ordered_json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (known.find(key) == known.end())
      throw ConfigError("unknown config field '" + where + key + "'");
}

template <typename T>
void read_field(const json& obj, const char* key, T& dst, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + where + key + "' has the wrong type");
  }
}

}  // namespace

std::string to_string(NormalizeMode mode) {
  switch (mode) {
    case NormalizeMode::none: return "none";
    case NormalizeMode::zscore_then_unit_l2: return "zscore_then_unit_l2";
    case NormalizeMode::unit_l2: return "unit_l2";
  }
  return "none";
}

NormalizeMode normalize_mode_from_string(const std::string& name) {
  if (name == "none") return NormalizeMode::none;
  if (name == "zscore_then_unit_l2") return NormalizeMode::zscore_then_unit_l2;
  if (name == "unit_l2") return NormalizeMode::unit_l2;
  throw ConfigError("unknown normalize_mode '" + name +
                    "' (expected none|zscore_then_unit_l2|unit_l2)");
}

void AlmConfig::validate() const {
  if (lambda_ridge <= 0.0) throw ConfigError("alm.lambda_ridge must be positive");
  if (lambda1 <= 0.0) throw ConfigError("alm.lambda1 must be positive");
  if (lambda2 <= 0.0) throw ConfigError("alm.lambda2 must be positive");
  if (mu0 <= 0.0) throw ConfigError("alm.mu0 must be positive");
  if (rho <= 1.0) throw ConfigError("alm.rho must be > 1");
  if (mu_max <= 0.0) throw ConfigError("alm.mu_max must be positive");
  if (epsilon <= 0.0 || epsilon >= 1.0) throw ConfigError("alm.epsilon must lie in (0, 1)");
  if (k_final < 1) throw ConfigError("alm.k_final must be >= 1");
  if (max_iterations < 1) throw ConfigError("alm.max_iterations must be >= 1");
  if (pseudo_refresh_every < 1) throw ConfigError("alm.pseudo_refresh_every must be >= 1");
}

void AdaptationConfig::validate() const {
  if (k_init < 1) throw ConfigError("k_init must be >= 1");
  if (lambda <= 0.0) throw ConfigError("lambda must be positive");
  if (iterations_T < 1) throw ConfigError("iterations_T must be >= 1");
  alm.validate();
}

AdaptationConfig config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  reject_unknown(root,
                 {"k_init", "lambda", "iterations_T", "alm", "normalize_mode",
                  "normalize_mmd", "seed"},
                 "");

  AdaptationConfig cfg;
  read_field(root, "k_init", cfg.k_init, "");
  read_field(root, "lambda", cfg.lambda, "");
  read_field(root, "iterations_T", cfg.iterations_T, "");
  if (root.contains("normalize_mode")) {
    std::string mode;
    read_field(root, "normalize_mode", mode, "");
    cfg.normalize_mode = normalize_mode_from_string(mode);
  }
  read_field(root, "normalize_mmd", cfg.normalize_mmd, "");
  read_field(root, "seed", cfg.seed, "");

  // lambda_ridge inherits the top-level lambda unless set explicitly.
  cfg.alm.lambda_ridge = cfg.lambda;
  if (root.contains("alm")) {
    const json& alm = root.at("alm");
    if (!alm.is_object()) throw ConfigError("config field 'alm' must be an object");
    reject_unknown(alm,
                   {"lambda_ridge", "lambda1", "lambda2", "mu0", "rho", "mu_max",
                    "epsilon", "k_final", "max_iterations", "pseudo_refresh_every"},
                   "alm.");
    read_field(alm, "lambda_ridge", cfg.alm.lambda_ridge, "alm.");
    read_field(alm, "lambda1", cfg.alm.lambda1, "alm.");
    read_field(alm, "lambda2", cfg.alm.lambda2, "alm.");
    read_field(alm, "mu0", cfg.alm.mu0, "alm.");
    read_field(alm, "rho", cfg.alm.rho, "alm.");
    read_field(alm, "mu_max", cfg.alm.mu_max, "alm.");
    read_field(alm, "epsilon", cfg.alm.epsilon, "alm.");
    read_field(alm, "k_final", cfg.alm.k_final, "alm.");
    read_field(alm, "max_iterations", cfg.alm.max_iterations, "alm.");
    read_field(alm, "pseudo_refresh_every", cfg.alm.pseudo_refresh_every, "alm.");
  }
  cfg.validate();
  return cfg;
}

AdaptationConfig config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

std::string config_to_json(const AdaptationConfig& cfg) {
  json alm;
  alm["lambda_ridge"] = cfg.alm.lambda_ridge;
  alm["lambda1"] = cfg.alm.lambda1;
  alm["lambda2"] = cfg.alm.lambda2;
  alm["mu0"] = cfg.alm.mu0;
  alm["rho"] = cfg.alm.rho;
  alm["mu_max"] = cfg.alm.mu_max;
  alm["epsilon"] = cfg.alm.epsilon;
  alm["k_final"] = cfg.alm.k_final;
  alm["max_iterations"] = cfg.alm.max_iterations;
  alm["pseudo_refresh_every"] = cfg.alm.pseudo_refresh_every;

  json root;
  root["k_init"] = cfg.k_init;
  root["lambda"] = cfg.lambda;
  root["iterations_T"] = cfg.iterations_T;
  root["alm"] = alm;
  root["normalize_mode"] = to_string(cfg.normalize_mode);
  root["normalize_mmd"] = cfg.normalize_mmd;
  root["seed"] = cfg.seed;
  return root.dump(2);
}

}  // namespace rsacdda
