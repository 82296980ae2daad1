#pragma once

#include <array>
#include <string>

#include "ris/farfield.hpp"
#include "ris/profile.hpp"

namespace ris {

// Coverage score of one evaluated overlay placement: a_m counts the grid
// cells inside each beam's disk whose field magnitude reaches the baseline;
// a_total is their sum (cells in both disks count twice).
struct ObjectiveReport {
  double baseline = 0.0;
  std::array<int, 2> a_m{0, 0};
  int a_total = 0;
  OverlayPlacement placement;
};

// Reference level: the global magnitude peak of `reference`.
double compute_baseline(const FarFieldPattern& reference);

// Number of grid cells that lie inside `disk` and whose magnitude is >= the
// baseline.  The disk center must lie inside the sampling grid.
int coverage_area(const FarFieldPattern& p, const DiskSpec& disk,
                  double baseline);

ObjectiveReport evaluate_coverage(const FarFieldPattern& p,
                                  const DiskSpec& disk1, const DiskSpec& disk2,
                                  double baseline,
                                  const OverlayPlacement& placement);

void write_objective_report(const ObjectiveReport& report,
                            const std::string& path,
                            const std::string& config_hash = "");

}  // namespace ris
