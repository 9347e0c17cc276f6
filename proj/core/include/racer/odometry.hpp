#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "racer/geometry.hpp"
#include "racer/scan.hpp"

namespace racer {

/// Local shape score of ring point i: norm of the summed offsets to its
/// 2*half_window contiguous ring neighbors, normalized by window size and
/// range. Collinear, equally spaced neighborhoods score ~0; corners and
/// range discontinuities score high.
double smoothness(const LaserScan& scan, int layer, int index, int half_window);

struct FeaturePoint {
  Point3 p;
  int layer = 0;
  int index = 0;       // position within the layer at extraction time
  double score = 0.0;  // smoothness value
};

struct FeatureSet {
  std::vector<FeaturePoint> edges;
  std::vector<FeaturePoint> planars;
};

struct OdometryConfig {
  int half_window = 5;
  double edge_thresh = 0.10;    // smoothness above: edge candidate
  double plane_thresh = 0.005;  // smoothness below: planar candidate
  int sectors = 6;              // azimuth sectors for the per-sector caps
  int max_edge_per_sector = 8;
  int max_planar_per_sector = 24;
  // Points on the far side of a range jump larger than this are silhouette
  // shadows, not structure; they are never promoted to edge features.
  double occlusion_jump = 0.5;
  double min_range = 0.3;

  double max_corr_dist = 2.0;   // association gate, meters
  int max_lm_iter = 20;
  double lambda0 = 1e-3;
  int association_rounds = 2;
  // Rank test on the 6x6 normal matrix; below this ratio the geometry does
  // not constrain all six degrees of freedom.
  double degeneracy_ratio = 1e-6;
};

/// Edge/planar feature selection with per-azimuth-sector caps so features
/// spread around the scan instead of crowding one structure.
FeatureSet extractFeatures(const LaserScan& scan, const OdometryConfig& cfg);

struct OdometryEstimate {
  /// World pose of the scan's frame (same parent frame as the `prev`
  /// features handed to matchAndSolve).
  PoseTransform pose;
  double residual_initial = 0.0;
  double residual = 0.0;
  int iterations = 0;
  int correspondences = 0;
};

/// Register `curr` against the previous feature set by Levenberg-Marquardt
/// on point-to-line (2 nearest previous edges) and point-to-plane (3 nearest
/// previous planars) residuals. `prev` may be expressed in any frame; the
/// solved pose maps curr-frame points into that frame. T_init seeds the
/// solve (constant-position prior in the pipeline).
///
/// Throws DegenerateError when fewer than 6 correspondences survive gating
/// or the normal matrix is rank-deficient (e.g. featureless flat ground).
OdometryEstimate matchAndSolve(const FeatureSet& prev, const LaserScan& curr,
                               const PoseTransform& t_init, const OdometryConfig& cfg);
OdometryEstimate matchAndSolve(const FeatureSet& prev, const FeatureSet& curr_features,
                               const PoseTransform& t_init, const OdometryConfig& cfg);

/// Union of the last m frames' points, re-expressed in the target frame.
std::vector<Point3> accumulateFrames(
    const std::vector<std::pair<LaserScan, PoseTransform>>& frames,
    const PoseTransform& target, int m);

/// Same, for already-extracted point subsets (e.g. obstacle points).
std::vector<Point3> accumulatePoints(
    const std::vector<std::pair<std::vector<Point3>, PoseTransform>>& frames,
    const PoseTransform& target, int m);

struct FusedPose {
  PoseTransform pose;
  double lidar_weight = 0.0;
  double gps_weight = 0.0;
};

/// Complementary blend: translation lerp, rotation slerp, alpha weighting
/// the absolute (GPS-INS) source. Falls back to whichever source exists;
/// throws LocalizationLost when both are absent.
FusedPose fusePose(const std::optional<OdometryEstimate>& lidar,
                   const std::optional<PoseTransform>& gps, double alpha);

/// Scan-to-scan odometry with features kept in the world frame, anchored
/// each cycle on the externally fused pose.
class OdometryPipeline {
 public:
  OdometryPipeline(const OdometryConfig& cfg, const PoseTransform& initial)
      : cfg_(cfg), pose_(initial) {}

  /// Register the scan; returns the estimated world pose. The first scan
  /// returns the initial pose. Throws DegenerateError like matchAndSolve.
  OdometryEstimate step(const LaserScan& scan);

  /// Commit the fused pose for the scan last given to step(); its features
  /// are stored in world coordinates for the next registration.
  void anchor(const PoseTransform& fused);

  const PoseTransform& pose() const { return pose_; }

 private:
  OdometryConfig cfg_;
  PoseTransform pose_;
  FeatureSet prev_world_;
  FeatureSet pending_;
  bool has_prev_ = false;
  bool has_pending_ = false;
};

}  // namespace racer
