#pragma once

#include "smectic/bps_profile.hpp"
#include "smectic/entropy_measure.hpp"
#include "smectic/minimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace smectic {

enum class Experiment { profile, cube, dislocation, entropy_check, identity_suite, minimize };

std::string to_string(Experiment e);
std::optional<Experiment> experiment_from_string(const std::string& name);
const std::vector<std::string>& experiment_names();

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JumpConfig {
  Eigen::Vector3d m_plus;
  Eigen::Vector3d m_minus;
  std::optional<Eigen::Vector3d> nu;

  JumpStates states() const {
    return nu ? JumpStates(m_plus, m_minus, *nu) : JumpStates(m_plus, m_minus);
  }
};

struct ExperimentConfig {
  Experiment experiment = Experiment::profile;
  std::vector<double> epsilons;
  std::vector<int> grid_sizes;
  Box box = Box::unit_centered();
  JumpConfig jump;
  double t_max = 40.0;
  double tol = 1e-10;
  DislocationSpec dislocation;
  int refinements = 3;
  MinimizeConfig minimize;
  std::optional<std::filesystem::path> initial_field;
  int n_theta = 360;
  int samples = 10000;
  std::vector<double> exponents{2.0, 4.0, 8.0};
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  bool write_fields = true;
};

/// Per-experiment defaults, before any document is applied.
ExperimentConfig default_config(Experiment e);

/// Parses and validates a JSON config. `experiment` (from the command line)
/// takes precedence; a document naming a different experiment is rejected.
/// Relative paths inside the document resolve against `base_dir`.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::optional<std::string>& experiment = std::nullopt,
                                   const std::filesystem::path& base_dir = ".");
ExperimentConfig parse_config(const std::filesystem::path& path,
                              const std::optional<std::string>& experiment = std::nullopt);

/// Closest candidate by edit distance, if reasonably close.
std::optional<std::string> nearest_key(const std::string& key,
                                       const std::vector<std::string>& candidates);

}  // namespace smectic
