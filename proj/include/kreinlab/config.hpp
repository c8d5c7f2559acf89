#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kreinlab {

/// Every knob of one experiment. Unset optionals mean "derive from the model":
/// alpha = alpha_fraction / a, z = eta - alpha b - 2, schedule = decades up
/// to the largest level the mesh resolves (at most 1e6).
struct ExperimentConfig {
  // [mesh]
  double half_length = 10.0;
  int k_per_side = 2000;
  double grading_exponent = 3.0;
  // [potential]
  double kappa = 1.0;
  double beta = 1.5;
  bool zero_potential = false;
  std::optional<double> cap;  // permanent cap: bounded substitute min(n, cap, V)
  // [experiment]
  std::optional<double> alpha;
  double alpha_fraction = 0.5;
  double eta = -1.0;
  std::optional<double> z;
  double margin = 1.0;
  std::vector<std::string> specs{"friedrichs", "krein", "general"};
  std::vector<double> schedule;
  std::uint64_t seed = 1;
  int random_vectors = 3;
  int norm_iterations = 100;
  int eigen_k = 3;
  bool refinement = false;
  // [general]
  double general_q = 1.0;
  std::string general_directions = "both";  // both | plus | minus | symmetric
};

/// Parses the flat format:
///   # comment
///   [section]
///   key = value
/// Keys may also be written fully qualified (section.key) outside a section.
/// Unknown sections or keys raise ValidationError naming the key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// key=value override; key is "section.key" or an unambiguous bare key.
void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value);
/// "key=value" form; throws ValidationError when '=' is missing.
void apply_override(ExperimentConfig& config, const std::string& assignment);

nlohmann::json to_json(const ExperimentConfig& config);
/// Accepts the object produced by to_json, or a report sidecar holding it
/// under "config".
ExperimentConfig config_from_json(const nlohmann::json& j);

/// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Names of all keys as "section.key", in canonical order.
std::vector<std::string> config_keys();

}  // namespace kreinlab
