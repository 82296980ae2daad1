#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ris/farfield.hpp"
#include "ris/objective.hpp"
#include "ris/profile.hpp"
#include "ris/rng.hpp"

namespace ris {

// One placement-optimization problem instance: the array, the two steered
// profiles, the overlay geometry, the sampling grid, and the coverage disks.
// The steering matrix is built once; the reference baseline is the global
// magnitude peak of the pattern with the overlay at the centered placement.
// Per-placement objective values are memoized, so repeated queries are free.
class Scenario {
 public:
  Scenario(const ArrayConfig& array, const SuperpositionSpec& spec,
           const FarFieldGridSpec& grid, double disk_radius_deg,
           std::string content_hash = "");

  Scenario(const Scenario&) = delete;
  Scenario& operator=(const Scenario&) = delete;
  Scenario(Scenario&&) = default;
  Scenario& operator=(Scenario&&) = default;

  const ArrayConfig& array() const { return array_; }
  const SuperpositionSpec& spec() const { return spec_; }
  const FarFieldGridSpec& grid() const { return steering_.grid(); }
  const SteeringMatrix& steering() const { return steering_; }
  const PhaseProfile& base_profile() const { return base_; }
  const PhaseProfile& overlay_profile() const { return overlay_; }
  const DiskSpec& disk(int m) const { return disks_.at(m); }
  double baseline() const { return baseline_; }
  const std::string& content_hash() const { return content_hash_; }

  // The unmoved position: overlay centered on the array center.
  OverlayPlacement reference_placement() const;

  PhaseProfile profile_at(const OverlayPlacement& placement) const;
  FarFieldPattern pattern_at(const OverlayPlacement& placement) const;
  const ObjectiveReport& objective_at(const OverlayPlacement& placement) const;

  // Number of non-memoized objective evaluations performed so far.
  std::uint64_t objective_evaluations() const { return evals_; }
  void clear_cache() const { cache_.clear(); }

 private:
  ArrayConfig array_;
  SuperpositionSpec spec_;
  PhaseProfile base_;
  PhaseProfile overlay_;
  SteeringMatrix steering_;
  std::array<DiskSpec, 2> disks_;
  double baseline_ = 0.0;
  std::string content_hash_;
  mutable std::unordered_map<std::uint64_t, ObjectiveReport> cache_;
  mutable std::uint64_t evals_ = 0;
};

// Placement searches tell the two reflected beams apart by their coverage
// counts; 1-bit phases make the pattern mirror-symmetric, which defeats the
// comparison, so every search entry point rejects bits == 1.
void require_searchable(const Scenario& scenario);

// Row-major flattening of the realized phases, scaled by 1/pi so every entry
// lies in (-1, 1).
Eigen::VectorXd state_vector(const PhaseProfile& p);

struct Transition {
  Eigen::VectorXd state;
  int action = 0;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool done = false;
};

// Episodic overlay-moving process: each step applies one window-clamped move
// and earns the coverage total of the new placement; the episode ends after
// max_steps moves.
class Environment {
 public:
  Environment(const Scenario& scenario, int max_steps);

  // Starts an episode at `start`, or at a uniformly random window cell
  // (x drawn before y) when absent; returns the initial state.
  Eigen::VectorXd reset(const std::optional<OverlayPlacement>& start,
                        Rng& rng);
  Transition step(int action);

  const Scenario& scenario() const { return scenario_; }
  const OverlayPlacement& placement() const;
  int steps_taken() const { return steps_; }
  int max_steps() const { return max_steps_; }
  bool done() const { return active_ && steps_ >= max_steps_; }

 private:
  const Scenario& scenario_;
  int max_steps_;
  int steps_ = 0;
  bool active_ = false;
  OverlayPlacement placement_;
  Eigen::VectorXd state_;
};

struct ExhaustiveResult {
  OverlayPlacement best;
  int best_a_total = 0;
  std::vector<ObjectiveReport> map;  // one entry per window cell
  double wall_seconds = 0.0;
};

// Evaluates every window cell once; ties resolve to the lowest (cx, cy),
// compared x first.
ExhaustiveResult exhaustive_search(const Scenario& scenario);

struct RandomSearchResult {
  struct Run {
    std::vector<OverlayPlacement> placements;  // start plus one per step
    std::vector<int> a_totals;
    int best_a_total = 0;
  };
  std::vector<Run> runs;
  int best_a_total = 0;
  OverlayPlacement best_placement;
  double wall_seconds = 0.0;
};

// Seeded uniform-action walks from `start`, scoring every visited placement
// (the start included).
RandomSearchResult random_search(const Scenario& scenario,
                                 const OverlayPlacement& start, int max_steps,
                                 int runs, std::uint64_t seed);

struct DerivedWindow {
  WindowRect window;
  int max_steps = 0;
};

// Window sized by the larger per-axis index-grid period of the two profiles
// (clamped to the array), centered on the array center; the step budget is
// half the window diagonal, rounded up.
DerivedWindow derive_window(const PhaseProfile& base,
                            const PhaseProfile& overlay,
                            const ArrayConfig& array);

int derive_max_steps(const WindowRect& window);

void write_exhaustive_map(const ExhaustiveResult& result,
                          const std::string& path,
                          const std::string& config_hash = "");
void write_random_search(const RandomSearchResult& result,
                         const std::string& path,
                         const std::string& config_hash = "");

}  // namespace ris
