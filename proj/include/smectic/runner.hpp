#pragma once

#include "smectic/config.hpp"
#include "smectic/field_io.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace smectic {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int numerical = 3;
inline constexpr int io = 4;
}  // namespace exit_code

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One output file, held in memory until emitted. `path` is relative to the
/// output directory.
struct Artifact {
  std::string path;
  std::string content;
};

/// Collects artifacts as an experiment proceeds, so a failure part-way
/// still leaves everything produced so far.
struct ArtifactSink {
  std::vector<Artifact> artifacts;

  void add(std::string path, std::string content) {
    artifacts.push_back({std::move(path), std::move(content)});
  }
  void add_json(std::string path, const Json& j) { add(std::move(path), j.dump(2) + "\n"); }
  void add_field(const std::string& stem, const ScalarField& f) {
    add(stem + ".f64", field_bytes(f));
    add_json(stem + ".json", field_sidecar(f, stem));
  }
};

Json to_json(const ExperimentConfig& cfg);

/// Deterministic smooth test field Σ aₖ sin(bₖ·x + cₖ) with coefficients drawn from `seed`.
struct TrigField {
  std::vector<double> amplitude;
  std::vector<Eigen::Vector3d> wave;
  std::vector<double> phase;

  static TrigField random(std::uint64_t seed, int terms = 3);
  double operator()(double x, double y, double z) const;
  Json to_json() const;
};

void run_experiment(const ExperimentConfig& cfg, ArtifactSink& sink);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Writes artifacts and manifest.json into `dir`. Refuses to touch a
/// directory that already holds a manifest unless `force` is set.
Json emit_outputs(const std::vector<Artifact>& artifacts, const std::filesystem::path& dir,
                  bool force, const Json& meta = Json::object());

/// Runs, emits, and maps failures to exit codes; a failed run still writes a
/// manifest of whatever was produced, flagged with the error.
int run_and_emit(const ExperimentConfig& cfg, const std::filesystem::path& dir, bool force,
                 std::string* message = nullptr);

}  // namespace smectic
