#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace rsacdda {

enum class NormalizeMode { none, zscore_then_unit_l2, unit_l2 };

std::string to_string(NormalizeMode mode);
NormalizeMode normalize_mode_from_string(const std::string& name);

/// Hyperparameters of the inexact-ALM solve. The defaults mu0=0.18, rho=1.01,
/// mu_max=1e8 and epsilon=1e-7 are the method's standard initialization;
/// lambda1/lambda2/k_final follow the usual RSA-CDDA experimental setup.
struct AlmConfig {
  double lambda_ridge = 0.1;  // weight of ‖A‖_F²
  double lambda1 = 1.0;       // sparsity of the reconstruction error E
  double lambda2 = 0.1;       // sparsity of Z_s
  double mu0 = 0.18;
  double rho = 1.01;
  double mu_max = 1e8;
  double epsilon = 1e-7;
  std::size_t k_final = 10;
  std::size_t max_iterations = 1000;
  /// Pseudo-labels (and with them M_RSA) are refreshed every this many
  /// iterations; 1 refreshes every sweep.
  std::size_t pseudo_refresh_every = 1;

  void validate() const;  // throws ConfigError
};

/// Full pipeline configuration. JSON field names match the member names exactly;
/// unknown fields are rejected.
struct AdaptationConfig {
  std::size_t k_init = 100;
  double lambda = 0.1;
  std::size_t iterations_T = 10;
  AlmConfig alm;
  NormalizeMode normalize_mode = NormalizeMode::zscore_then_unit_l2;
  bool normalize_mmd = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Parse a config JSON document. Absent fields take defaults; when
/// alm.lambda_ridge is absent it inherits the top-level lambda. Unknown fields
/// throw ConfigError.
AdaptationConfig config_from_json(const std::string& text);
AdaptationConfig config_from_file(const std::string& path);

/// Serialization is a fixed point: parse(to_json(c)) == c and
/// to_json(parse(s)) == canonical form of s.
std::string config_to_json(const AdaptationConfig& cfg);

}  // namespace rsacdda
