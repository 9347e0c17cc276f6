#pragma once

#include <cstdint>
#include <vector>

#include "racer/geometry.hpp"

namespace racer {

/// Ground plane y = a*x + b*z + h in the sensor frame. Near-flat track:
/// |a| and |b| stay below the slope limit, h within the height bounds of
/// RansacConfig (both enforced on fitted models, not on this plain struct).
struct PlaneModel {
  double a = 0.0;
  double b = 0.0;
  double h = 0.0;
};

/// Region of interest in the sensor frame: x lateral, z forward.
struct RoiBox {
  double x_min = -6.0;
  double x_max = 6.0;
  double z_min = 0.0;
  double z_max = 20.0;
};

struct RansacConfig {
  double tau = 0.05;          // inlier threshold, meters
  int max_iter = 100;
  double slope_limit = 1.0;   // reject hypotheses with |a| or |b| at/above this
  double h_min = 0.05;        // plausible sensor mount heights
  double h_max = 3.0;
  // Reproduce the uncorrected distance normalization (intercept folded into
  // the denominator) instead of the plane point-to-plane distance.
  bool paper_literal_error = false;
};

/// Signed distance from point to plane. The default denominator is
/// sqrt(1 + a^2 + b^2); the literal flag switches to the legacy
/// sqrt(1 + a^2 + b^2 + h^2) normalization kept for comparison runs.
double planeError(const Point3& p, const PlaneModel& m, bool paper_literal_error = false);

/// Strict test: |planeError| < tau. A point exactly at tau is an outlier.
bool classifyInlier(const Point3& p, const PlaneModel& m, double tau,
                    bool paper_literal_error = false);

struct SegmentationResult {
  PlaneModel model;
  std::vector<int> roi_indices;       // cloud indices inside the ROI
  std::vector<int> ground_indices;    // subset of roi_indices: inliers
  std::vector<int> obstacle_indices;  // subset of roi_indices: outliers
  int best_inlier_count = 0;
  // One entry per sampled (non-degenerate, bounds-respecting) hypothesis;
  // diagnostic only, used to assert the argmax property in tests.
  std::vector<int> hypothesis_inlier_counts;
};

/// RANSAC plane fit over the ROI subset of `cloud`. Deterministic for a
/// fixed seed. Ties on inlier count keep the earliest hypothesis.
SegmentationResult ransacFit(const std::vector<Point3>& cloud, const RoiBox& roi,
                             const RansacConfig& cfg, std::uint64_t seed);

}  // namespace racer
