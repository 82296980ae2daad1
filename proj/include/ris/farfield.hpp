#pragma once

#include <Eigen/Core>
#include <complex>
#include <string>

#include "ris/geometry.hpp"
#include "ris/profile.hpp"

namespace ris {

// Per-(direction, element) propagation phasors e^{j k opd}, precomputed once
// for a sampling grid and reused for every profile evaluation.  Row index is
// theta-major (i_theta * n_phi + j_phi); column index is x * ny + y.
class SteeringMatrix {
 public:
  SteeringMatrix(const ArrayConfig& config, const FarFieldGridSpec& grid);

  const ArrayConfig& config() const { return config_; }
  const FarFieldGridSpec& grid() const { return grid_; }
  const Eigen::MatrixXcd& entries() const { return entries_; }
  int directions() const { return static_cast<int>(entries_.rows()); }
  int elements() const { return static_cast<int>(entries_.cols()); }

 private:
  ArrayConfig config_;
  FarFieldGridSpec grid_;
  Eigen::MatrixXcd entries_;
};

SteeringMatrix build_steering_matrix(const ArrayConfig& config,
                                     const FarFieldGridSpec& grid);

// Complex far-field response sampled on `grid`; value(i, j) corresponds to
// direction (theta_at(i), phi_at(j)).
struct FarFieldPattern {
  FarFieldGridSpec grid;
  Eigen::MatrixXcd value;
  Eigen::ArrayXXd magnitude;
};

// Extra one-way path length (meters) from cell (x, y) toward direction `d`,
// relative to cell (0, 0).
double opd(const ArrayConfig& config, int x, int y, const Direction& d);

// Coherent sum over elements of amplitude * e^{j(k opd + phase)} for every
// grid direction.  The three forms take a quantized profile, raw per-cell
// phases (radians), or explicit complex element weights.
FarFieldPattern array_factor(const SteeringMatrix& sm, const PhaseProfile& p);
FarFieldPattern array_factor(const SteeringMatrix& sm,
                             const Eigen::ArrayXXd& phases);
FarFieldPattern array_factor(const SteeringMatrix& sm,
                             const Eigen::VectorXcd& weights);

inline constexpr double kMagnitudeFloor = 1e-6;
inline constexpr double kDbFloor = -120.0;

// 20 log10 |E|, with magnitudes below kMagnitudeFloor clamped to kDbFloor.
Eigen::ArrayXXd pattern_db(const FarFieldPattern& p);

// Circular angular region: member directions satisfy
// (theta - center.theta)^2 + (phi - center.phi)^2 <= radius^2 (degrees).
struct DiskSpec {
  Direction center;
  double radius_deg = 20.0;

  DiskSpec() = default;
  DiskSpec(Direction center, double radius_deg);

  bool contains(double theta_deg, double phi_deg) const {
    const double dt = theta_deg - center.theta_deg;
    const double dp = phi_deg - center.phi_deg;
    return dt * dt + dp * dp <= radius_deg * radius_deg;
  }
};

struct PeakGain {
  double db = 0.0;
  Direction at;
};

// Maximum of pattern_db over the whole grid, or over the member cells of
// `within` if given; ties resolve to the lowest (theta, phi).
PeakGain peak_gain_db(const FarFieldPattern& p,
                      const DiskSpec* within = nullptr);

// Rows "theta_deg,phi_deg,magnitude,db" in theta-major order, 9 significant
// digits; a "# config_hash=..." comment line precedes the header if provided.
void write_farfield_csv(const FarFieldPattern& p, const std::string& path,
                        const std::string& config_hash = "");

}  // namespace ris
