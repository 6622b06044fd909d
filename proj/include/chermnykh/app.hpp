#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chermnykh/model.hpp"
#include "chermnykh/zvc.hpp"

namespace chermnykh::app {

inline constexpr const char* kVersion = "1.0.0";

/// Raised for anything wrong with the run configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { Json, Csv };

struct ModelConfig {
  std::optional<double> mu;
  std::optional<double> q1;
  std::optional<double> epsilon;
  double A2 = 0.0;
  double Mb = 0.0;
  double flatness = 0.0;
  double core = 0.0;
  std::optional<double> rc;
};

struct StabilityConfig {
  std::string sweep = "none";  // none | mu | atlas
  double mu_min = 0.001;
  double mu_max = 0.05;
  int mu_steps = 50;
  std::vector<double> atlas_q1{1.0, 0.75, 0.5, 0.25};
  double a2_min = 0.0;
  double a2_max = 1.0;
  int a2_steps = 21;
  double mb_min = 0.0;
  double mb_max = 2.0;
  int mb_steps = 21;
  double atlas_rc = 0.9999;
  double atlas_flatness = 0.01;
  double atlas_core = 0.0;
};

struct ZvcConfig {
  /// Each entry is a number or an equilibrium label with an optional offset, e.g. "L4+1e-3".
  std::vector<std::string> levels{"L1", "L2", "L3", "L4+1e-3"};
  Bounds bounds;
  std::size_t resolution = 512;
};

struct OrbitConfig {
  std::string origin = "l4";  // l4: (x, y, vx, vy) are offsets from rest at L4; absolute otherwise
  double x = 1e-3;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double t_end = 100.0;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double stride = 0.1;
};

struct RunConfig {
  ModelConfig model;
  std::filesystem::path out = ".";
  OutputFormat format = OutputFormat::Json;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  double tolerance = 1e-12;  // equilibrium refinement
  StabilityConfig stability;
  ZvcConfig zvc;
  OrbitConfig orbit;
};

/// INI text with sections [model], [output], [run], [stability], [zvc], [orbit].
/// Relative paths resolve against `base_dir`. Unknown sections or keys are rejected.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Validated model inputs. Throws ConfigError.
ModelInputs model_inputs(const ModelConfig& m);

struct Artifact {
  std::string name;
  std::string content;
};

std::vector<Artifact> cmd_equilibria(const RunConfig& cfg);
std::vector<Artifact> cmd_stability(const RunConfig& cfg);
std::vector<Artifact> cmd_zvc(const RunConfig& cfg);
std::vector<Artifact> cmd_orbit(const RunConfig& cfg);
std::vector<Artifact> cmd_normalform(const RunConfig& cfg);

/// Resolves a zvc level token against the critical levels of `p`.
double resolve_level(const std::string& token, const SystemParams& p);

/// Full command-line entry point. Returns 0, 2 (configuration) or 3 (computation).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace chermnykh::app
