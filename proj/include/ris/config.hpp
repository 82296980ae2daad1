#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ris/dqn.hpp"
#include "ris/geometry.hpp"
#include "ris/search.hpp"

namespace ris {

// File-level description of a problem instance.  Every field has a default;
// a config file overrides only what it names.  When `window` is absent it is
// derived from the index-grid periods of the two synthesized profiles, and
// the step budget follows the derived window unless max_steps was explicit.
struct ScenarioConfig {
  ArrayConfig array;
  Direction direction1{45.0, 45.0};
  Direction direction2{45.0, 135.0};
  int rect_w = 24;
  int rect_h = 30;
  std::optional<WindowRect> window = WindowRect{6, 10, 18, 10};
  FarFieldGridSpec grid;
  double disk_radius_deg = 20.0;
  DqnConfig dqn;
  bool max_steps_explicit = false;
};

ScenarioConfig default_config();

// Parses JSON with strict key checking: an unrecognized key anywhere fails,
// naming the offending key.
ScenarioConfig load_config(const std::string& path);

// Window, step budget, and content hash after applying the derivation rules;
// cheap (no steering matrix involved).
struct ResolvedConfig {
  WindowRect window;
  DqnConfig dqn;
  std::string hash;
};

ResolvedConfig resolve_config(const ScenarioConfig& config);

struct BuiltScenario {
  Scenario scenario;
  DqnConfig dqn;          // max_steps resolved
  std::string hash;       // content hash of the fully resolved config
};

BuiltScenario build_scenario(const ScenarioConfig& config);

}  // namespace ris
