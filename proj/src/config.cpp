#include "ris/config.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "ris/profile.hpp"

namespace ris {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string join_key(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw std::runtime_error("config value must be an object: " +
                             (path.empty() ? std::string("<root>") : path));
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }))
      throw std::runtime_error("unknown config key: " + join_key(path, key));
  }
}

template <typename T>
void read_field(const json& j, const char* key, const std::string& path,
                T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::runtime_error("bad value for config key: " +
                             join_key(path, key));
  }
}

Direction read_direction(const json& j, const std::string& path,
                         const Direction& fallback) {
  reject_unknown(j, path, {"theta_deg", "phi_deg"});
  double theta = fallback.theta_deg;
  double phi = fallback.phi_deg;
  read_field(j, "theta_deg", path, theta);
  read_field(j, "phi_deg", path, phi);
  return Direction(theta, phi);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Canonical serialization of the fully resolved config; field order is fixed
// so the hash is stable.
std::string canonical_json(const ScenarioConfig& cfg, const WindowRect& window,
                           const DqnConfig& dqn) {
  ordered_json j;
  j["array"] = {{"nx", cfg.array.nx},         {"ny", cfg.array.ny},
                {"dx", cfg.array.dx},         {"dy", cfg.array.dy},
                {"frequency", cfg.array.frequency},
                {"amplitude", cfg.array.amplitude},
                {"bits", cfg.array.bits}};
  j["direction1"] = {{"theta_deg", cfg.direction1.theta_deg},
                     {"phi_deg", cfg.direction1.phi_deg}};
  j["direction2"] = {{"theta_deg", cfg.direction2.theta_deg},
                     {"phi_deg", cfg.direction2.phi_deg}};
  j["superposition"] = {{"rect_w", cfg.rect_w},
                        {"rect_h", cfg.rect_h},
                        {"window", {{"x0", window.x0},
                                    {"y0", window.y0},
                                    {"w", window.w},
                                    {"h", window.h}}}};
  j["grid"] = {{"theta_min_deg", cfg.grid.theta_min_deg},
               {"theta_max_deg", cfg.grid.theta_max_deg},
               {"phi_min_deg", cfg.grid.phi_min_deg},
               {"phi_max_deg", cfg.grid.phi_max_deg},
               {"step_deg", cfg.grid.step_deg}};
  j["disk_radius_deg"] = cfg.disk_radius_deg;
  j["dqn"] = {{"epsilon", dqn.epsilon},
              {"batch_size", dqn.batch_size},
              {"max_steps", dqn.max_steps},
              {"target_sync_interval", dqn.target_sync_interval},
              {"gamma", dqn.gamma},
              {"lr", dqn.lr},
              {"episodes", dqn.episodes},
              {"learn_start", dqn.learn_start},
              {"replay_capacity", dqn.replay_capacity},
              {"hidden_sizes", dqn.hidden_sizes},
              {"seed", dqn.seed}};
  return j.dump();
}

}  // namespace

ScenarioConfig default_config() { return ScenarioConfig{}; }

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed config JSON in " + path + ": " +
                             e.what());
  }
  reject_unknown(j, "", {"array", "direction1", "direction2", "superposition",
                         "grid", "disk_radius_deg", "dqn", "seed"});

  ScenarioConfig cfg;
  if (j.contains("array")) {
    const json& ja = j.at("array");
    reject_unknown(ja, "array",
                   {"nx", "ny", "dx", "dy", "frequency", "amplitude", "bits"});
    ArrayConfig d;  // defaults
    int nx = d.nx, ny = d.ny, bits = d.bits;
    double dx = d.dx, dy = d.dy, frequency = d.frequency,
           amplitude = d.amplitude;
    read_field(ja, "nx", "array", nx);
    read_field(ja, "ny", "array", ny);
    read_field(ja, "dx", "array", dx);
    read_field(ja, "dy", "array", dy);
    read_field(ja, "frequency", "array", frequency);
    read_field(ja, "amplitude", "array", amplitude);
    read_field(ja, "bits", "array", bits);
    cfg.array = ArrayConfig(nx, ny, dx, dy, frequency, amplitude, bits);
  }
  if (j.contains("direction1"))
    cfg.direction1 = read_direction(j.at("direction1"), "direction1",
                                    cfg.direction1);
  if (j.contains("direction2"))
    cfg.direction2 = read_direction(j.at("direction2"), "direction2",
                                    cfg.direction2);

  // Overlay-geometry defaults track the array size: the rectangle covers 4/5
  // of the width at full height, the window is (up to) 18 x 10 centered.
  cfg.rect_w = std::max(1, 4 * cfg.array.nx / 5);
  cfg.rect_h = cfg.array.ny;
  const int ww = std::min(18, cfg.array.nx);
  const int wh = std::min(10, cfg.array.ny);
  cfg.window = WindowRect{
      std::clamp(cfg.array.nx / 2 - ww / 2, 0, cfg.array.nx - ww),
      std::clamp(cfg.array.ny / 2 - wh / 2, 0, cfg.array.ny - wh), ww, wh};

  if (j.contains("superposition")) {
    const json& js = j.at("superposition");
    reject_unknown(js, "superposition", {"rect_w", "rect_h", "window"});
    read_field(js, "rect_w", "superposition", cfg.rect_w);
    read_field(js, "rect_h", "superposition", cfg.rect_h);
    if (js.contains("window")) {
      const json& jw = js.at("window");
      reject_unknown(jw, "superposition.window", {"x0", "y0", "w", "h"});
      WindowRect w;
      read_field(jw, "x0", "superposition.window", w.x0);
      read_field(jw, "y0", "superposition.window", w.y0);
      read_field(jw, "w", "superposition.window", w.w);
      read_field(jw, "h", "superposition.window", w.h);
      cfg.window = w;
    } else {
      cfg.window.reset();  // derive from profile periods at build time
    }
  }

  if (j.contains("grid")) {
    const json& jg = j.at("grid");
    reject_unknown(jg, "grid", {"theta_min_deg", "theta_max_deg",
                                "phi_min_deg", "phi_max_deg", "step_deg"});
    FarFieldGridSpec d;
    double tmin = d.theta_min_deg, tmax = d.theta_max_deg,
           pmin = d.phi_min_deg, pmax = d.phi_max_deg, step = d.step_deg;
    read_field(jg, "theta_min_deg", "grid", tmin);
    read_field(jg, "theta_max_deg", "grid", tmax);
    read_field(jg, "phi_min_deg", "grid", pmin);
    read_field(jg, "phi_max_deg", "grid", pmax);
    read_field(jg, "step_deg", "grid", step);
    cfg.grid = FarFieldGridSpec(tmin, tmax, pmin, pmax, step);
  }

  read_field(j, "disk_radius_deg", "", cfg.disk_radius_deg);

  if (j.contains("dqn")) {
    const json& jd = j.at("dqn");
    reject_unknown(jd, "dqn",
                   {"epsilon", "batch_size", "max_steps",
                    "target_sync_interval", "gamma", "lr", "episodes",
                    "learn_start", "replay_capacity", "hidden_sizes"});
    read_field(jd, "epsilon", "dqn", cfg.dqn.epsilon);
    read_field(jd, "batch_size", "dqn", cfg.dqn.batch_size);
    if (jd.contains("max_steps")) {
      read_field(jd, "max_steps", "dqn", cfg.dqn.max_steps);
      cfg.max_steps_explicit = true;
    }
    read_field(jd, "target_sync_interval", "dqn",
               cfg.dqn.target_sync_interval);
    read_field(jd, "gamma", "dqn", cfg.dqn.gamma);
    read_field(jd, "lr", "dqn", cfg.dqn.lr);
    read_field(jd, "episodes", "dqn", cfg.dqn.episodes);
    read_field(jd, "learn_start", "dqn", cfg.dqn.learn_start);
    read_field(jd, "replay_capacity", "dqn", cfg.dqn.replay_capacity);
    read_field(jd, "hidden_sizes", "dqn", cfg.dqn.hidden_sizes);
  }
  read_field(j, "seed", "", cfg.dqn.seed);
  cfg.dqn.validate();
  return cfg;
}

ResolvedConfig resolve_config(const ScenarioConfig& cfg) {
  WindowRect window;
  DqnConfig dqn = cfg.dqn;
  if (cfg.window) {
    window = *cfg.window;
  } else {
    const PhaseProfile base = synthesize_profile(cfg.array, cfg.direction1)
                                  .profile;
    const PhaseProfile overlay =
        synthesize_profile_grid(cfg.array, cfg.direction2, cfg.rect_w,
                                cfg.rect_h)
            .profile;
    const DerivedWindow derived = derive_window(base, overlay, cfg.array);
    window = derived.window;
    if (!cfg.max_steps_explicit) dqn.max_steps = derived.max_steps;
  }
  dqn.validate();
  return ResolvedConfig{window, dqn,
                        to_hex(fnv1a(canonical_json(cfg, window, dqn)))};
}

BuiltScenario build_scenario(const ScenarioConfig& cfg) {
  ResolvedConfig resolved = resolve_config(cfg);
  SuperpositionSpec spec(cfg.rect_w, cfg.rect_h, resolved.window,
                         cfg.direction1, cfg.direction2);
  return BuiltScenario{Scenario(cfg.array, spec, cfg.grid,
                                cfg.disk_radius_deg, resolved.hash),
                       std::move(resolved.dqn), std::move(resolved.hash)};
}

}  // namespace ris
