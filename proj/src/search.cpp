#include "ris/search.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ris {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::uint64_t placement_key(const OverlayPlacement& p) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.cx)) << 32) |
         static_cast<std::uint32_t>(p.cy);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

void require_searchable(const Scenario& scenario) {
  require(scenario.array().bits >= 2,
          "placement search requires bits >= 2: 1-bit quantization reflects "
          "a mirrored twin beam of equal strength");
}

Scenario::Scenario(const ArrayConfig& array, const SuperpositionSpec& spec,
                   const FarFieldGridSpec& grid, double disk_radius_deg,
                   std::string content_hash)
    : array_(array),
      spec_(spec),
      base_(synthesize_profile(array, spec.direction1).profile),
      overlay_(synthesize_profile_grid(array, spec.direction2, spec.rect_w,
                                       spec.rect_h)
                   .profile),
      steering_(array, grid),
      disks_{DiskSpec(spec.direction1, disk_radius_deg),
             DiskSpec(spec.direction2, disk_radius_deg)},
      content_hash_(std::move(content_hash)) {
  require(spec_.window.x0 >= 0 && spec_.window.y0 >= 0 &&
              spec_.window.x0 + spec_.window.w <= array_.nx &&
              spec_.window.y0 + spec_.window.h <= array_.ny,
          "window must fit inside the array");
  const OverlayPlacement ref = reference_placement();
  require(spec_.window.contains(ref.cx, ref.cy),
          "window must contain the centered placement");
  for (const DiskSpec& d : disks_)
    require(grid.contains(d.center), "disk center outside the sampling grid");
  baseline_ = compute_baseline(pattern_at(ref));
}

OverlayPlacement Scenario::reference_placement() const {
  return {array_.nx / 2, array_.ny / 2};
}

PhaseProfile Scenario::profile_at(const OverlayPlacement& placement) const {
  return superpose(base_, overlay_, spec_, placement);
}

FarFieldPattern Scenario::pattern_at(const OverlayPlacement& placement) const {
  return array_factor(steering_, profile_at(placement));
}

const ObjectiveReport& Scenario::objective_at(
    const OverlayPlacement& placement) const {
  const std::uint64_t key = placement_key(placement);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  ObjectiveReport report = evaluate_coverage(
      pattern_at(placement), disks_[0], disks_[1], baseline_, placement);
  ++evals_;
  return cache_.emplace(key, std::move(report)).first->second;
}

Eigen::VectorXd state_vector(const PhaseProfile& p) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(p.nx()) * p.ny());
  for (int x = 0; x < p.nx(); ++x)
    for (int y = 0; y < p.ny(); ++y)
      v(static_cast<Eigen::Index>(x) * p.ny() + y) = p.phase(x, y) / kPi;
  return v;
}

Environment::Environment(const Scenario& scenario, int max_steps)
    : scenario_(scenario), max_steps_(max_steps) {
  require(max_steps_ >= 1, "max_steps must be at least 1");
}

Eigen::VectorXd Environment::reset(const std::optional<OverlayPlacement>& start,
                                   Rng& rng) {
  const WindowRect& w = scenario_.spec().window;
  if (start) {
    require(w.contains(start->cx, start->cy),
            "start placement outside the window");
    placement_ = *start;
  } else {
    placement_ = {w.x0 + static_cast<int>(uniform_below(rng, w.w)),
                  w.y0 + static_cast<int>(uniform_below(rng, w.h))};
  }
  steps_ = 0;
  active_ = true;
  state_ = state_vector(scenario_.profile_at(placement_));
  return state_;
}

Transition Environment::step(int action) {
  if (!active_) throw std::logic_error("environment must be reset first");
  if (done()) throw std::logic_error("episode finished; reset to continue");
  Transition t;
  t.state = state_;
  t.action = action;
  placement_ = move(placement_, scenario_.spec(), action);
  t.reward = scenario_.objective_at(placement_).a_total;
  state_ = state_vector(scenario_.profile_at(placement_));
  t.next_state = state_;
  ++steps_;
  t.done = done();
  return t;
}

const OverlayPlacement& Environment::placement() const {
  if (!active_) throw std::logic_error("environment must be reset first");
  return placement_;
}

ExhaustiveResult exhaustive_search(const Scenario& scenario) {
  require_searchable(scenario);
  const auto t0 = std::chrono::steady_clock::now();
  const WindowRect& w = scenario.spec().window;
  ExhaustiveResult result;
  result.map.reserve(static_cast<size_t>(w.w) * w.h);
  bool found = false;
  for (int cx = w.x0; cx < w.x0 + w.w; ++cx) {
    for (int cy = w.y0; cy < w.y0 + w.h; ++cy) {
      const ObjectiveReport& report = scenario.objective_at({cx, cy});
      result.map.push_back(report);
      if (!found || report.a_total > result.best_a_total) {
        found = true;
        result.best_a_total = report.a_total;
        result.best = report.placement;
      }
    }
  }
  result.wall_seconds = seconds_since(t0);
  return result;
}

RandomSearchResult random_search(const Scenario& scenario,
                                 const OverlayPlacement& start, int max_steps,
                                 int runs, std::uint64_t seed) {
  require_searchable(scenario);
  require(runs >= 1, "random search needs at least one run");
  require(max_steps >= 1, "max_steps must be at least 1");
  require(scenario.spec().window.contains(start.cx, start.cy),
          "start placement outside the window");
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(seed);
  RandomSearchResult result;
  bool found = false;
  for (int r = 0; r < runs; ++r) {
    RandomSearchResult::Run run;
    OverlayPlacement placement = start;
    run.placements.push_back(placement);
    run.a_totals.push_back(scenario.objective_at(placement).a_total);
    for (int t = 0; t < max_steps; ++t) {
      const int action = static_cast<int>(uniform_below(rng, kNumActions));
      placement = move(placement, scenario.spec(), action);
      run.placements.push_back(placement);
      run.a_totals.push_back(scenario.objective_at(placement).a_total);
    }
    run.best_a_total = *std::max_element(run.a_totals.begin(),
                                         run.a_totals.end());
    for (size_t i = 0; i < run.a_totals.size(); ++i) {
      if (!found || run.a_totals[i] > result.best_a_total) {
        found = true;
        result.best_a_total = run.a_totals[i];
        result.best_placement = run.placements[i];
      }
    }
    result.runs.push_back(std::move(run));
  }
  result.wall_seconds = seconds_since(t0);
  return result;
}

int derive_max_steps(const WindowRect& window) {
  return static_cast<int>(std::ceil(std::hypot(window.w, window.h) / 2.0));
}

DerivedWindow derive_window(const PhaseProfile& base,
                            const PhaseProfile& overlay,
                            const ArrayConfig& array) {
  const Eigen::Vector2i pb = period_lengths(base);
  const Eigen::Vector2i po = period_lengths(overlay);
  const int w = std::min(std::max(pb.x(), po.x()), array.nx);
  const int h = std::min(std::max(pb.y(), po.y()), array.ny);
  const int x0 = std::clamp(array.nx / 2 - w / 2, 0, array.nx - w);
  const int y0 = std::clamp(array.ny / 2 - h / 2, 0, array.ny - h);
  DerivedWindow out;
  out.window = WindowRect{x0, y0, w, h};
  out.max_steps = derive_max_steps(out.window);
  return out;
}

void write_exhaustive_map(const ExhaustiveResult& result,
                          const std::string& path,
                          const std::string& config_hash) {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["best"] = {{"cx", result.best.cx},
               {"cy", result.best.cy},
               {"a_total", result.best_a_total}};
  j["wall_seconds"] = result.wall_seconds;
  nlohmann::ordered_json map = nlohmann::ordered_json::array();
  for (const ObjectiveReport& r : result.map)
    map.push_back({{"cx", r.placement.cx},
                   {"cy", r.placement.cy},
                   {"a_total", r.a_total}});
  j["map"] = std::move(map);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

void write_random_search(const RandomSearchResult& result,
                         const std::string& path,
                         const std::string& config_hash) {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["best_a_total"] = result.best_a_total;
  j["best_placement"] = {result.best_placement.cx, result.best_placement.cy};
  j["wall_seconds"] = result.wall_seconds;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& run : result.runs) {
    nlohmann::ordered_json jr;
    nlohmann::ordered_json placements = nlohmann::ordered_json::array();
    for (const auto& p : run.placements) placements.push_back({p.cx, p.cy});
    jr["placements"] = std::move(placements);
    jr["a_totals"] = run.a_totals;
    jr["best_a_total"] = run.best_a_total;
    runs.push_back(std::move(jr));
  }
  j["runs"] = std::move(runs);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace ris
