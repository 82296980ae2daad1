#include "ris/farfield.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace ris {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

int thread_count() {
  if (const char* env = std::getenv("RIS_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

// Splits [0, n_rows) into contiguous blocks, one worker per block.  Each row
// is produced by exactly one worker with a fixed per-row evaluation order, so
// results are identical for any thread count.
void parallel_rows(int n_rows, const std::function<void(int, int)>& body) {
  const int workers = std::min(thread_count(), n_rows);
  if (workers <= 1) {
    body(0, n_rows);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n_rows + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int r0 = w * chunk;
    const int r1 = std::min(n_rows, r0 + chunk);
    if (r0 >= r1) break;
    pool.emplace_back(body, r0, r1);
  }
  for (auto& t : pool) t.join();
}

FarFieldPattern pattern_from_flat(const FarFieldGridSpec& grid,
                                  const Eigen::VectorXcd& flat) {
  FarFieldPattern p;
  p.grid = grid;
  const int nt = grid.n_theta();
  const int np = grid.n_phi();
  p.value.resize(nt, np);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < np; ++j)
      p.value(i, j) = flat(static_cast<Eigen::Index>(i) * np + j);
  p.magnitude = p.value.array().abs();
  return p;
}

}  // namespace

SteeringMatrix::SteeringMatrix(const ArrayConfig& config,
                               const FarFieldGridSpec& grid)
    : config_(config), grid_(grid) {
  const int n_dirs = grid_.cell_count();
  const int n_elems = config_.cell_count();
  const double k = wavenumber(config_);
  const int np = grid_.n_phi();
  const int ny = config_.ny;
  entries_.resize(n_dirs, n_elems);
  parallel_rows(n_dirs, [&](int r0, int r1) {
    for (int row = r0; row < r1; ++row) {
      const Direction d(grid_.theta_at(row / np), grid_.phi_at(row % np));
      const double st = std::sin(d.theta_rad());
      const double ax = k * config_.dx * std::cos(d.phi_rad()) * st;
      const double ay = k * config_.dy * std::sin(d.phi_rad()) * st;
      for (int x = 0; x < config_.nx; ++x)
        for (int y = 0; y < ny; ++y)
          entries_(row, static_cast<Eigen::Index>(x) * ny + y) =
              std::polar(1.0, x * ax + y * ay);
    }
  });
}

SteeringMatrix build_steering_matrix(const ArrayConfig& config,
                                     const FarFieldGridSpec& grid) {
  return SteeringMatrix(config, grid);
}

double opd(const ArrayConfig& config, int x, int y, const Direction& d) {
  const Eigen::Vector2d pos = element_position(config, x, y);
  const double st = std::sin(d.theta_rad());
  return pos.x() * std::cos(d.phi_rad()) * st +
         pos.y() * std::sin(d.phi_rad()) * st;
}

FarFieldPattern array_factor(const SteeringMatrix& sm,
                             const Eigen::VectorXcd& weights) {
  require(weights.size() == sm.elements(),
          "weight vector length must equal the element count");
  const int n_dirs = sm.directions();
  Eigen::VectorXcd flat(n_dirs);
  parallel_rows(n_dirs, [&](int r0, int r1) {
    flat.segment(r0, r1 - r0).noalias() =
        sm.entries().middleRows(r0, r1 - r0) * weights;
  });
  return pattern_from_flat(sm.grid(), flat);
}

FarFieldPattern array_factor(const SteeringMatrix& sm,
                             const Eigen::ArrayXXd& phases) {
  require(phases.rows() == sm.config().nx && phases.cols() == sm.config().ny,
          "phase grid dimensions must match the array");
  const int ny = sm.config().ny;
  Eigen::VectorXcd weights(sm.elements());
  for (int x = 0; x < sm.config().nx; ++x)
    for (int y = 0; y < ny; ++y)
      weights(static_cast<Eigen::Index>(x) * ny + y) =
          std::polar(sm.config().amplitude, phases(x, y));
  return array_factor(sm, weights);
}

FarFieldPattern array_factor(const SteeringMatrix& sm, const PhaseProfile& p) {
  require(p.nx() == sm.config().nx && p.ny() == sm.config().ny,
          "profile dimensions must match the array");
  const int ny = sm.config().ny;
  // Only 2^bits distinct weights exist; build the table once.
  std::vector<std::complex<double>> level_weights;
  level_weights.reserve(p.levels().size());
  for (double phase : p.levels())
    level_weights.push_back(std::polar(sm.config().amplitude, phase));
  Eigen::VectorXcd weights(sm.elements());
  for (int x = 0; x < p.nx(); ++x)
    for (int y = 0; y < ny; ++y)
      weights(static_cast<Eigen::Index>(x) * ny + y) =
          level_weights[p.index(x, y)];
  return array_factor(sm, weights);
}

Eigen::ArrayXXd pattern_db(const FarFieldPattern& p) {
  return (p.magnitude < kMagnitudeFloor)
      .select(kDbFloor, 20.0 * p.magnitude.max(kMagnitudeFloor).log10());
}

DiskSpec::DiskSpec(Direction center_, double radius)
    : center(center_), radius_deg(radius) {
  if (radius_deg <= 0.0)
    throw std::invalid_argument("disk radius must be positive");
}

PeakGain peak_gain_db(const FarFieldPattern& p, const DiskSpec* within) {
  if (within) {
    require(p.grid.contains(within->center),
            "disk center outside the sampling grid");
  }
  const Eigen::ArrayXXd db = pattern_db(p);
  bool found = false;
  PeakGain best;
  for (int i = 0; i < p.grid.n_theta(); ++i) {
    const double theta = p.grid.theta_at(i);
    for (int j = 0; j < p.grid.n_phi(); ++j) {
      const double phi = p.grid.phi_at(j);
      if (within && !within->contains(theta, phi)) continue;
      if (!found || db(i, j) > best.db) {
        found = true;
        best.db = db(i, j);
        best.at = Direction(theta, phi);
      }
    }
  }
  require(found, "disk does not intersect the sampling grid");
  return best;
}

void write_farfield_csv(const FarFieldPattern& p, const std::string& path,
                        const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "theta_deg,phi_deg,magnitude,db\n";
  const Eigen::ArrayXXd db = pattern_db(p);
  char line[160];
  for (int i = 0; i < p.grid.n_theta(); ++i) {
    for (int j = 0; j < p.grid.n_phi(); ++j) {
      std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g\n",
                    p.grid.theta_at(i), p.grid.phi_at(j), p.magnitude(i, j),
                    db(i, j));
      out << line;
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace ris
