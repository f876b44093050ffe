#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "vortex/background.hpp"
#include "vortex/grid.hpp"
#include "vortex/params.hpp"
#include "vortex/torus.hpp"

namespace vortex {

inline constexpr int kConfigSchemaVersion = 1;

enum class RunMode { plane, torus };

struct SolveSettings {
  std::optional<double> tol;  // plane 1e-8, torus 1e-10 when absent
  std::optional<int> max_iter;
  TorusSeed seed = TorusSeed::tarantello;
  double lambda_t = 0.0;  // 0: 4 alpha beta
  bool second_solution = false;
  int path_nodes = 17;
  double separation = 1e-3;
  std::uint64_t rng_seed = 1;
};

struct RunConfig {
  RunMode mode = RunMode::plane;
  ModelParams params;
  VortexSet vortices;
  GridDomain domain;
  SolveSettings solve;
  std::filesystem::path out_dir = "vortex_out";

  double tol() const;
  int max_iter() const;
};

// Malformed configuration; the message names the line or the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
// normalized form with every default spelled out; parse_config round-trips it
std::string config_json(const RunConfig& c);

const char* to_string(RunMode m);
const char* to_string(TorusSeed s);
TorusSeed parse_seed(const std::string& s);

}  // namespace vortex
