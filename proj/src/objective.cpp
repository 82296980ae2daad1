#include "ris/objective.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ris {

double compute_baseline(const FarFieldPattern& reference) {
  return reference.magnitude.maxCoeff();
}

int coverage_area(const FarFieldPattern& p, const DiskSpec& disk,
                  double baseline) {
  if (!p.grid.contains(disk.center))
    throw std::invalid_argument("disk center outside the sampling grid");
  if (baseline < 0.0)
    throw std::invalid_argument("baseline must be nonnegative");

  const FarFieldGridSpec& g = p.grid;
  // Cells outside the disk's bounding box cannot be members.
  const int i_lo = std::max(
      0, static_cast<int>(std::ceil(
             (disk.center.theta_deg - disk.radius_deg - g.theta_min_deg) /
             g.step_deg)));
  const int i_hi = std::min(
      g.n_theta() - 1,
      static_cast<int>(std::floor(
          (disk.center.theta_deg + disk.radius_deg - g.theta_min_deg) /
          g.step_deg)));
  const int j_lo = std::max(
      0, static_cast<int>(std::ceil(
             (disk.center.phi_deg - disk.radius_deg - g.phi_min_deg) /
             g.step_deg)));
  const int j_hi = std::min(
      g.n_phi() - 1,
      static_cast<int>(std::floor(
          (disk.center.phi_deg + disk.radius_deg - g.phi_min_deg) /
          g.step_deg)));

  int count = 0;
  for (int i = i_lo; i <= i_hi; ++i) {
    const double theta = g.theta_at(i);
    for (int j = j_lo; j <= j_hi; ++j) {
      if (disk.contains(theta, g.phi_at(j)) && p.magnitude(i, j) >= baseline)
        ++count;
    }
  }
  return count;
}

ObjectiveReport evaluate_coverage(const FarFieldPattern& p,
                                  const DiskSpec& disk1, const DiskSpec& disk2,
                                  double baseline,
                                  const OverlayPlacement& placement) {
  ObjectiveReport report;
  report.baseline = baseline;
  report.a_m[0] = coverage_area(p, disk1, baseline);
  report.a_m[1] = coverage_area(p, disk2, baseline);
  report.a_total = report.a_m[0] + report.a_m[1];
  report.placement = placement;
  return report;
}

void write_objective_report(const ObjectiveReport& report,
                            const std::string& path,
                            const std::string& config_hash) {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["baseline"] = report.baseline;
  j["a_m"] = report.a_m;
  j["a_total"] = report.a_total;
  j["placement"] = {report.placement.cx, report.placement.cy};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace ris
