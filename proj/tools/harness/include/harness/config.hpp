#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "racer/control.hpp"
#include "racer/ground_seg.hpp"
#include "racer/odometry.hpp"
#include "racer/sim.hpp"
#include "racer/track_map.hpp"

namespace racer::harness {

// Everything a mission run needs, with defaults that complete the reference
// track.  Values are addressed by dotted keys (e.g. "mpc.w_e_y") in config
// files and -P overrides; unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string controller = "mpc";  // "mpc" or "pure_pursuit"

  TrackSpec track;
  LidarConfig lidar;
  GpsConfig gps;
  CameraConfig camera;
  RansacConfig ransac;
  OdometryConfig odometry;
  TrackMapConfig map;
  LoopClosureConfig loop;
  MpcConfig mpc;
  PurePursuitConfig pursuit;
  SpeedGovernorConfig governor;
  VehicleParams vehicle;

  double cluster_radius = 0.35;
  int cluster_min_points = 4;

  double detection_speed = 5.0;        // lap-1 target speed
  double tracking_speed_factor = 2.2;  // lap-2 multiplier
  double control_dt = 0.05;
  double lidar_period = 0.1;
  int accumulate_scans = 5;
  double max_time = 150.0;
  double waypoint_spacing = 0.5;
  double pair_gate = 7.0;
  double local_chain_gate = 12.0;
  double local_range = 25.0;
  // Weight of the gps fix in the pose blend.  The fix is white noise while
  // scan matching is locally smooth, so the blend low-passes the absolute
  // source: enough gps to bound drift, little enough that fix noise stays
  // out of the steering loop.
  double fusion_alpha = 0.25;
  double alignment_gate = 2.0;
  double gps_outage_start = -1.0;  // scripted outage window; disabled when negative
  double gps_outage_duration = 0.0;

  int svm_positives = 150;
  int svm_negatives = 150;
  int svm_epochs = 80;
};

// Set one dotted key from its text value; throws InvalidInput on unknown
// keys or unparsable values.
void applyOverride(RunConfig* cfg, const std::string& key, const std::string& value);

// "key=value" convenience used by the CLI's -P flag.
void applyOverrideExpr(RunConfig* cfg, const std::string& expr);

// Config file: "# racer-config v1" header, then key=value lines ('#' starts
// a comment).  Unknown keys are errors.
RunConfig loadRunConfig(const std::string& path);
void saveRunConfig(const std::string& path, const RunConfig& cfg);

// All known keys with their current values, in stable order.
std::vector<std::pair<std::string, std::string>> listConfig(const RunConfig& cfg);

}  // namespace racer::harness
