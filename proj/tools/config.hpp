#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "elm/datagen.hpp"
#include "elm/experiments.hpp"
#include "elm/smoothness.hpp"

namespace elm::cli {

/// Invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StudyKind { train, approx, rate, uncertainty, remedy };

std::string to_string(StudyKind kind);
std::optional<StudyKind> parse_study_kind(std::string_view name);

/// Fully resolved study configuration (defaults filled in).
struct StudyConfig {
  StudyKind study = StudyKind::train;
  TargetId target = TargetId::holder_low;
  double r = 1.0;
  int d = 1;
  int s = 0;  // kernel order; 0 = max(1, ceil(r))
  double constant = 0.0;
  std::vector<Variant> variants = {Variant::plain};
  Index m = 1000;
  std::vector<Index> m_list = {256, 512, 1024, 2048, 4096};
  std::optional<double> sigma;
  std::vector<double> sigma_list = {0.02, 0.04, 0.08, 0.16, 0.32, 0.5};
  Index n = 100;
  int trials = 20;
  double epsilon = 0.05;
  NoiseSpec noise;
  double a = 0.5;
  int T = 10;
  double validation_fraction = 0.25;
  double threshold = 0.1;
  int grid_points = 0;
  int repetitions = 20;
  std::uint64_t master_seed = 0;
  std::string out = "elm_out";

  TargetFunction make_target_function() const;
  ElmSettings settings(int threads) const;
};

/// Reads a flat JSON object from a file. Throws ConfigError naming the path
/// when the file is missing or malformed.
nlohmann::json load_config_file(const std::string& path);

/// Applies "key=value"; the value is parsed as JSON, or taken as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Validates keys and types, fills defaults and checks the study's
/// preconditions. Throws ConfigError naming the offending key.
StudyConfig resolve_config(StudyKind kind, const nlohmann::json& raw);

/// Every key of the resolved configuration.
nlohmann::json echo_config(const StudyConfig& config);

}  // namespace elm::cli
