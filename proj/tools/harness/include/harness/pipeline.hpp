#pragma once

#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

#include "harness/config.hpp"
#include "racer/geometry.hpp"
#include "racer/odometry.hpp"
#include "racer/scan.hpp"
#include "racer/sim.hpp"
#include "racer/track_map.hpp"
#include "racer/vision.hpp"

namespace racer::harness {

// Seed derivation for independent deterministic random streams.
std::uint64_t subSeed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

// Per-scan perception: ground removal, scan-matching odometry fused with
// gps, accumulation, clustering, camera verification, and map maintenance.
// The simulated camera needs the true vehicle pose (it is a sensor); all
// downstream processing uses the estimated pose only.
class PerceptionPipeline {
 public:
  PerceptionPipeline(const RunConfig& cfg, const SimTrack& track, const LinearSvmModel& svm,
                     const PoseTransform& initial_pose);

  struct ScanResult {
    PoseTransform fused_pose;
    double est_x = 0.0, est_y = 0.0, est_heading = 0.0;
    std::vector<Vec2> detections;  // world-frame positions of verified cones
    std::vector<std::pair<Vec2, ConeColor>> colored_detections;
    int candidates = 0;
    int inserted = 0;
    bool gps_used = false;
    bool alignment_used = false;
    bool odometry_degenerate = false;
    bool odometry_rejected = false;  // scan match failed the motion gate
  };

  // Process one lidar revolution.  true_* is the actual vehicle pose used
  // only to render camera patches; insert_into_map is on during the mapping
  // lap and off afterwards.
  ScanResult processScan(const LaserScan& scan, const GpsFix& gps, double true_x, double true_y,
                         double true_heading, bool insert_into_map);

  TrackMap& map() { return map_; }
  const TrackMap& map() const { return map_; }
  const std::vector<Vec2>& travelPath() const { return travel_path_; }
  const PoseTransform& pose() const { return pose_; }

 private:
  RunConfig cfg_;
  const SimTrack* track_;
  LinearSvmModel svm_;
  OdometryPipeline odom_;
  TrackMap map_;
  PoseTransform pose_;
  std::deque<std::vector<Point3>> recent_obstacles_;
  std::vector<Vec2> travel_path_;
  Rng camera_rng_;
  std::uint64_t master_seed_;
  std::uint64_t scan_index_ = 0;
  std::uint64_t color_index_ = 0;
};

}  // namespace racer::harness
