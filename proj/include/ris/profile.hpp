#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "ris/geometry.hpp"

namespace ris {

// Quantized phase map over an nx * ny cell grid.  indices(x, y) selects an
// entry of `levels` (the realized reflection phase, radians); levels is the
// ascending table produced by quantization_levels(bits).
class PhaseProfile {
 public:
  PhaseProfile(int nx, int ny, int bits);
  PhaseProfile(Eigen::MatrixXi indices, int bits);

  int nx() const { return static_cast<int>(indices_.rows()); }
  int ny() const { return static_cast<int>(indices_.cols()); }
  int bits() const { return bits_; }
  int n_levels() const { return static_cast<int>(levels_.size()); }

  int index(int x, int y) const { return indices_(x, y); }
  void set_index(int x, int y, int level_index);
  const Eigen::MatrixXi& indices() const { return indices_; }
  const std::vector<double>& levels() const { return levels_; }

  double phase(int x, int y) const { return levels_[indices_(x, y)]; }
  Eigen::ArrayXXd realized_phases() const;

  friend bool operator==(const PhaseProfile&, const PhaseProfile&) = default;

 private:
  Eigen::MatrixXi indices_;  // rows = x, cols = y
  int bits_;
  std::vector<double> levels_;
};

// Integer rectangle of admissible overlay-center positions.
struct WindowRect {
  int x0 = 0;
  int y0 = 0;
  int w = 1;
  int h = 1;

  bool contains(int cx, int cy) const {
    return cx >= x0 && cx < x0 + w && cy >= y0 && cy < y0 + h;
  }
  friend bool operator==(const WindowRect&, const WindowRect&) = default;
};

// Center cell of the movable overlay rectangle.
struct OverlayPlacement {
  int cx = 0;
  int cy = 0;
  friend bool operator==(const OverlayPlacement&,
                         const OverlayPlacement&) = default;
};

// Two-beam overlay geometry: a base profile steered to `direction1` covers the
// whole array; a rect_w * rect_h overlay steered to `direction2` is stamped on
// top, its center constrained to `window`.  The overlay's phase map is defined
// in rectangle-local coordinates, so it translates rigidly with the rectangle.
struct SuperpositionSpec {
  int rect_w = 24;
  int rect_h = 30;
  WindowRect window{6, 10, 18, 10};
  Direction direction1;
  Direction direction2;

  SuperpositionSpec() = default;
  SuperpositionSpec(int rect_w, int rect_h, WindowRect window,
                    Direction direction1, Direction direction2);
};

// A rectangle of width w centered at c spans cells [c - w/2, c - w/2 + w).
int rect_origin(int center, int extent);

// Phase offset map that steers a reflected beam toward `d`: cell (x, y) stores
// the negated propagation-path phase advance, wrapped to [-pi, pi].
struct SynthesisResult {
  PhaseProfile profile;
  Eigen::ArrayXXd continuous;  // pre-quantization phases, radians
};
SynthesisResult synthesize_profile(const ArrayConfig& config,
                                   const Direction& d);
// Same map evaluated on an nx_cells * ny_cells grid whose cell (0, 0) sits at
// the origin; used for rectangle-local overlay synthesis.
SynthesisResult synthesize_profile_grid(const ArrayConfig& config,
                                        const Direction& d, int nx_cells,
                                        int ny_cells);

// Reduce to [-pi, pi].
double wrap_phase(double phase);

// Index of the quantization level nearest to `phase` (which must already be
// wrapped); exact midpoints resolve toward the higher level.
int quantize_phase(double phase, int bits);

// Stamp `overlay` (rect-local) onto `base` with its center at `placement`;
// cells outside the rectangle, and rectangle parts clipped off by the array
// edge, keep the base phases.
PhaseProfile superpose(const PhaseProfile& base, const PhaseProfile& overlay,
                       const SuperpositionSpec& spec,
                       const OverlayPlacement& placement);

// Smallest positive per-axis shifts under which the index grid is invariant
// on the overlapping region; an axis with no smaller period reports its span.
Eigen::Vector2i period_lengths(const PhaseProfile& p);

// Overlay-center moves: 0 stays put, 1..8 step one cell toward
// N, NE, E, SE, S, SW, W, NW (east = +x, north = +y), clamped per axis so the
// center stays inside the window.
inline constexpr int kNumActions = 9;
OverlayPlacement move(const OverlayPlacement& placement,
                      const SuperpositionSpec& spec, int action);

// Lossless JSON round-trip.  `continuous` and `config_hash`, when provided,
// are embedded alongside the index grid (row-major, x outer).
void save_profile(const PhaseProfile& p, const std::string& path,
                  const Eigen::ArrayXXd* continuous = nullptr,
                  const std::string& config_hash = "");
PhaseProfile load_profile(const std::string& path);

}  // namespace ris
