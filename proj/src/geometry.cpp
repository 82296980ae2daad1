#include "ris/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ris {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

ArrayConfig::ArrayConfig(int nx_, int ny_, double dx_, double dy_,
                         double frequency_, double amplitude_, int bits_)
    : nx(nx_),
      ny(ny_),
      dx(dx_),
      dy(dy_),
      frequency(frequency_),
      amplitude(amplitude_),
      bits(bits_) {
  require(nx >= 1 && ny >= 1, "array dimensions must be at least 1x1");
  require(dx > 0.0 && dy > 0.0, "element pitch must be positive");
  require(frequency > 0.0, "frequency must be positive");
  require(amplitude > 0.0 && amplitude <= 1.0,
          "amplitude must lie in (0, 1]");
  require(bits >= 1, "bits must be at least 1");
}

Direction::Direction(double theta, double phi)
    : theta_deg(theta), phi_deg(phi) {
  require(theta_deg >= 0.0 && theta_deg <= 90.0,
          "theta_deg must lie in [0, 90]");
  require(phi_deg >= 0.0 && phi_deg <= 180.0,
          "phi_deg must lie in [0, 180]");
}

FarFieldGridSpec::FarFieldGridSpec(double theta_min, double theta_max,
                                   double phi_min, double phi_max, double step)
    : theta_min_deg(theta_min),
      theta_max_deg(theta_max),
      phi_min_deg(phi_min),
      phi_max_deg(phi_max),
      step_deg(step) {
  require(step_deg > 0.0, "grid step must be positive");
  require(theta_max_deg > theta_min_deg && phi_max_deg > phi_min_deg,
          "grid spans must be nonempty");
  for (double span : {theta_max_deg - theta_min_deg,
                      phi_max_deg - phi_min_deg}) {
    const double cells = span / step_deg;
    require(std::abs(cells - std::round(cells)) < 1e-9,
            "grid step must divide both angular spans exactly");
  }
}

int FarFieldGridSpec::n_theta() const {
  return static_cast<int>(
             std::llround((theta_max_deg - theta_min_deg) / step_deg)) +
         1;
}

int FarFieldGridSpec::n_phi() const {
  return static_cast<int>(
             std::llround((phi_max_deg - phi_min_deg) / step_deg)) +
         1;
}

bool FarFieldGridSpec::contains(const Direction& d) const {
  return d.theta_deg >= theta_min_deg && d.theta_deg <= theta_max_deg &&
         d.phi_deg >= phi_min_deg && d.phi_deg <= phi_max_deg;
}

double wavelength(const ArrayConfig& config) {
  return kSpeedOfLight / config.frequency;
}

double wavenumber(const ArrayConfig& config) {
  return 2.0 * kPi / wavelength(config);
}

Eigen::Vector2d element_position(const ArrayConfig& config, int x, int y) {
  if (x < 0 || x >= config.nx || y < 0 || y >= config.ny)
    throw std::out_of_range("element index outside array");
  return {x * config.dx, y * config.dy};
}

std::vector<double> quantization_levels(int bits) {
  if (bits < 1 || bits > 30) throw std::invalid_argument("bits out of range");
  const int n = 1 << bits;
  const double gap = 2.0 * kPi / n;
  std::vector<double> levels(n);
  for (int i = 0; i < n; ++i) levels[i] = -kPi + (i + 0.5) * gap;
  return levels;
}

}  // namespace ris
