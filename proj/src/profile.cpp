#include "ris/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ris {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

PhaseProfile::PhaseProfile(int nx, int ny, int bits)
    : indices_(Eigen::MatrixXi::Zero(nx, ny)),
      bits_(bits),
      levels_(quantization_levels(bits)) {
  require(nx >= 1 && ny >= 1, "profile dimensions must be at least 1x1");
}

PhaseProfile::PhaseProfile(Eigen::MatrixXi indices, int bits)
    : indices_(std::move(indices)),
      bits_(bits),
      levels_(quantization_levels(bits)) {
  require(indices_.rows() >= 1 && indices_.cols() >= 1,
          "profile dimensions must be at least 1x1");
  require(indices_.minCoeff() >= 0 && indices_.maxCoeff() < n_levels(),
          "level index outside table");
}

void PhaseProfile::set_index(int x, int y, int level_index) {
  if (x < 0 || x >= nx() || y < 0 || y >= ny())
    throw std::out_of_range("cell index outside profile");
  require(level_index >= 0 && level_index < n_levels(),
          "level index outside table");
  indices_(x, y) = level_index;
}

Eigen::ArrayXXd PhaseProfile::realized_phases() const {
  Eigen::ArrayXXd phases(nx(), ny());
  for (int x = 0; x < nx(); ++x)
    for (int y = 0; y < ny(); ++y) phases(x, y) = levels_[indices_(x, y)];
  return phases;
}

SuperpositionSpec::SuperpositionSpec(int rect_w_, int rect_h_,
                                     WindowRect window_, Direction d1,
                                     Direction d2)
    : rect_w(rect_w_),
      rect_h(rect_h_),
      window(window_),
      direction1(d1),
      direction2(d2) {
  require(rect_w >= 1 && rect_h >= 1, "overlay rectangle must be nonempty");
  require(window.w >= 1 && window.h >= 1, "window must be nonempty");
}

int rect_origin(int center, int extent) { return center - extent / 2; }

double wrap_phase(double phase) {
  return std::remainder(phase, 2.0 * kPi);
}

int quantize_phase(double phase, int bits) {
  require(phase >= -kPi && phase <= kPi,
          "phase to quantize must lie in [-pi, pi]");
  const int n = 1 << bits;
  const double gap = 2.0 * kPi / n;
  const int idx = static_cast<int>(std::floor((phase + kPi) / gap));
  return std::clamp(idx, 0, n - 1);
}

namespace {

SynthesisResult synthesize_on_grid(const ArrayConfig& config,
                                   const Direction& d, int nx, int ny) {
  require(nx >= 1 && ny >= 1, "grid dimensions must be at least 1x1");
  const double k = wavenumber(config);
  const double ax = k * config.dx * std::cos(d.phi_rad()) *
                    std::sin(d.theta_rad());
  const double ay = k * config.dy * std::sin(d.phi_rad()) *
                    std::sin(d.theta_rad());
  Eigen::ArrayXXd continuous(nx, ny);
  Eigen::MatrixXi indices(nx, ny);
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) {
      const double stored = wrap_phase(-(x * ax + y * ay));
      continuous(x, y) = stored;
      indices(x, y) = quantize_phase(stored, config.bits);
    }
  }
  return {PhaseProfile(std::move(indices), config.bits),
          std::move(continuous)};
}

}  // namespace

SynthesisResult synthesize_profile(const ArrayConfig& config,
                                   const Direction& d) {
  return synthesize_on_grid(config, d, config.nx, config.ny);
}

SynthesisResult synthesize_profile_grid(const ArrayConfig& config,
                                        const Direction& d, int nx_cells,
                                        int ny_cells) {
  return synthesize_on_grid(config, d, nx_cells, ny_cells);
}

PhaseProfile superpose(const PhaseProfile& base, const PhaseProfile& overlay,
                       const SuperpositionSpec& spec,
                       const OverlayPlacement& placement) {
  require(base.bits() == overlay.bits(),
          "base and overlay quantization depth must match");
  require(overlay.nx() == spec.rect_w && overlay.ny() == spec.rect_h,
          "overlay profile dimensions must match the rectangle");
  require(spec.window.x0 >= 0 && spec.window.y0 >= 0 &&
              spec.window.x0 + spec.window.w <= base.nx() &&
              spec.window.y0 + spec.window.h <= base.ny(),
          "window must fit inside the array");
  require(spec.window.contains(placement.cx, placement.cy),
          "placement outside the window");

  PhaseProfile out = base;
  const int x0 = rect_origin(placement.cx, spec.rect_w);
  const int y0 = rect_origin(placement.cy, spec.rect_h);
  for (int u = 0; u < spec.rect_w; ++u) {
    const int x = x0 + u;
    if (x < 0 || x >= base.nx()) continue;
    for (int v = 0; v < spec.rect_h; ++v) {
      const int y = y0 + v;
      if (y < 0 || y >= base.ny()) continue;
      out.set_index(x, y, overlay.index(u, v));
    }
  }
  return out;
}

Eigen::Vector2i period_lengths(const PhaseProfile& p) {
  const auto& m = p.indices();
  const int nx = p.nx();
  const int ny = p.ny();

  int px = nx;
  for (int s = 1; s < nx; ++s) {
    if (m.topRows(nx - s) == m.bottomRows(nx - s)) {
      px = s;
      break;
    }
  }
  int py = ny;
  for (int s = 1; s < ny; ++s) {
    if (m.leftCols(ny - s) == m.rightCols(ny - s)) {
      py = s;
      break;
    }
  }
  return {px, py};
}

OverlayPlacement move(const OverlayPlacement& placement,
                      const SuperpositionSpec& spec, int action) {
  require(action >= 0 && action < kNumActions, "action must lie in [0, 8]");
  //                          stay  N  NE  E  SE   S  SW   W  NW
  static constexpr int dx[] = {0,   0,  1, 1,  1,  0, -1, -1, -1};
  static constexpr int dy[] = {0,   1,  1, 0, -1, -1, -1,  0,  1};
  const WindowRect& w = spec.window;
  return {std::clamp(placement.cx + dx[action], w.x0, w.x0 + w.w - 1),
          std::clamp(placement.cy + dy[action], w.y0, w.y0 + w.h - 1)};
}

void save_profile(const PhaseProfile& p, const std::string& path,
                  const Eigen::ArrayXXd* continuous,
                  const std::string& config_hash) {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["nx"] = p.nx();
  j["ny"] = p.ny();
  j["bits"] = p.bits();
  std::vector<int> flat;
  flat.reserve(static_cast<size_t>(p.nx()) * p.ny());
  for (int x = 0; x < p.nx(); ++x)
    for (int y = 0; y < p.ny(); ++y) flat.push_back(p.index(x, y));
  j["indices"] = flat;
  if (continuous) {
    require(continuous->rows() == p.nx() && continuous->cols() == p.ny(),
            "continuous grid dimensions must match the profile");
    std::vector<double> cflat;
    cflat.reserve(flat.size());
    for (int x = 0; x < p.nx(); ++x)
      for (int y = 0; y < p.ny(); ++y) cflat.push_back((*continuous)(x, y));
    j["continuous"] = cflat;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump() << '\n';
}

PhaseProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed profile JSON in " + path + ": " +
                             e.what());
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "nx" && key != "ny" && key != "bits" && key != "indices" &&
        key != "continuous" && key != "config_hash")
      throw std::runtime_error("unknown profile key: " + key);
  }
  for (const char* key : {"nx", "ny", "bits", "indices"})
    if (!j.contains(key))
      throw std::runtime_error(std::string("profile missing key: ") + key);
  const int nx = j["nx"].get<int>();
  const int ny = j["ny"].get<int>();
  const int bits = j["bits"].get<int>();
  const auto flat = j["indices"].get<std::vector<int>>();
  if (nx < 1 || ny < 1)
    throw std::runtime_error("profile dimensions must be at least 1x1");
  if (flat.size() != static_cast<size_t>(nx) * static_cast<size_t>(ny))
    throw std::runtime_error("profile index count does not match nx*ny");
  Eigen::MatrixXi indices(nx, ny);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y)
      indices(x, y) = flat[static_cast<size_t>(x) * ny + y];
  return PhaseProfile(std::move(indices), bits);
}

}  // namespace ris
