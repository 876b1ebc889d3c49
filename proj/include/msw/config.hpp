#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "msw/physics.hpp"
#include "msw/testcases.hpp"

namespace msw {

/// Everything needed to reproduce a run. Physics q0, H and xi live in spec
/// and are copied into the physics parameters by physics_params().
struct RunConfig {
  TestCaseSpec spec;
  FrameworkConfig framework;
  PhysicsParams physics;
  std::string preset = "paper";
  double dt = 0.0;         // s; 0 derives it from the Courant number
  double courant = 0.1;    // target advective Courant number when dt = 0
  double snapshot_days = 1.0;  // 0 writes only the initial and final snapshots
  bool limiter = true;
  int outer_iterations = 2;
  int inner_iterations = 1;  // later inner passes reuse stale transported fields
  double linear_tolerance = 1e-10;
  int max_level = kDefaultMaxLevel;
  std::filesystem::path output_dir;
  std::filesystem::path restart;  // checkpoint to continue from

  PhysicsParams physics_params() const;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat `key = value` text with `#` comments. Throws ConfigError naming the
/// line for malformed or duplicate entries.
KeyValues parse_config_text(const std::string& text, const std::string& origin = "config");
KeyValues read_config_file(const std::filesystem::path& path);

/// Resolves layered key/values (later layers win) on top of the defaults for
/// the selected test, framework and preset. Unknown keys, bad values and
/// failed validation are collected and thrown together as one ConfigError.
RunConfig resolve_config(const std::vector<KeyValues>& layers);

/// Paper defaults for a test and framework; preset "desk" shrinks the mountain
/// to level 4 / 15 days and the jet to level 5 / 6 days.
RunConfig default_config(TestCase test, Framework framework, const std::string& preset = "paper");

/// Every key with its resolved value, one `key = value` per line. Parsing the
/// echo back reproduces the configuration exactly.
std::string echo_config(const RunConfig& cfg);

/// Key names in echo order.
std::vector<std::string> config_keys();

}  // namespace msw
