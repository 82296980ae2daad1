#pragma once

#include <Eigen/Core>
#include <vector>

namespace ris {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Planar reflectarray: nx * ny unit cells on a rectangular lattice with pitch
// (dx, dy) meters, illuminated at `frequency` Hz.  Every cell reflects with the
// same magnitude `amplitude` and a phase drawn from a 2^bits-level table.
struct ArrayConfig {
  int nx = 30;
  int ny = 30;
  double dx = 0.003;   // element pitch along x, meters
  double dy = 0.003;   // element pitch along y, meters
  double frequency = 28e9;  // Hz
  double amplitude = 0.7;   // per-element reflection magnitude
  int bits = 2;             // phase-quantization depth

  ArrayConfig() = default;
  ArrayConfig(int nx, int ny, double dx, double dy, double frequency,
              double amplitude, int bits);

  int cell_count() const { return nx * ny; }
};

// Observation / steering direction in spherical coordinates, degrees.
// theta is the polar angle off broadside in [0, 90], phi the azimuth in
// [0, 180].
struct Direction {
  double theta_deg = 0.0;
  double phi_deg = 0.0;

  Direction() = default;
  Direction(double theta_deg, double phi_deg);

  double theta_rad() const { return theta_deg * kPi / 180.0; }
  double phi_rad() const { return phi_deg * kPi / 180.0; }
};

// Regular (theta, phi) sampling grid for far-field evaluation, degrees.
// `step` must divide both angular spans exactly.
struct FarFieldGridSpec {
  double theta_min_deg = 0.0;
  double theta_max_deg = 90.0;
  double phi_min_deg = 0.0;
  double phi_max_deg = 180.0;
  double step_deg = 1.0;

  FarFieldGridSpec() = default;
  FarFieldGridSpec(double theta_min_deg, double theta_max_deg,
                   double phi_min_deg, double phi_max_deg, double step_deg);

  int n_theta() const;
  int n_phi() const;
  int cell_count() const { return n_theta() * n_phi(); }
  double theta_at(int i) const { return theta_min_deg + i * step_deg; }
  double phi_at(int j) const { return phi_min_deg + j * step_deg; }
  bool contains(const Direction& d) const;
};

double wavelength(const ArrayConfig& config);
double wavenumber(const ArrayConfig& config);

// Metric position (Dx, Dy) of cell (x, y); cell (0, 0) sits at the origin.
Eigen::Vector2d element_position(const ArrayConfig& config, int x, int y);

// Midpoints of 2^bits equal arcs of [-pi, pi), ascending:
// level_i = -pi + (i + 0.5) * 2*pi / 2^bits.
std::vector<double> quantization_levels(int bits);

}  // namespace ris
