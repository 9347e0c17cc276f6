#pragma once

#include <string>
#include <vector>

#include "harness/config.hpp"
#include "racer/control.hpp"
#include "racer/mission.hpp"
#include "racer/planning.hpp"
#include "racer/track_map.hpp"

namespace racer::harness {

// One control-tick record; the `truth` block comes from the plant, the
// estimate/controller block from what the stack actually used.
struct StepRecord {
  double t = 0.0;
  VehicleState truth;
  double s_true = 0.0;      // arc position on the reference centerline
  double lat_true = 0.0;    // signed lateral offset from the centerline
  double est_x = 0.0, est_y = 0.0, est_heading = 0.0;
  double e_y = 0.0, e_psi = 0.0;  // tracking errors against the active path
  double zeta_cmd = 0.0, jerk_cmd = 0.0;
  double u_ref = 0.0;
  double a_lat = 0.0;  // lateral acceleration U*r
  int mode = 0;        // 0 detection drive, 1 tracking drive
  int closures = 0;
  bool gps_valid = true;
};

struct MissionResult {
  bool completed = false;
  bool boundary_violation = false;
  bool infeasible_stop = false;
  bool localization_lost = false;
  std::string failure_reason;
  double total_time = 0.0;
  int closures = 0;
  std::vector<double> closure_times;
  std::vector<double> closure_distances;  // true distance to the start line at closure
  std::vector<double> mid_lap_min_coefficient;  // diagnostic
  std::vector<StepRecord> steps;
  std::vector<MissionTransitionRecord> transitions;
  TrackMapFile map_file;
  std::vector<Waypoint> global_waypoints;
  double classifier_train_accuracy = 0.0;
};

MissionResult runTwoLapMission(const RunConfig& cfg);

// Derived per-mission metrics.
struct MissionMetrics {
  bool completed = false;
  double total_time = 0.0;
  double lap1_time = 0.0;
  double lap2_time = 0.0;
  double mean_abs_lat = 0.0;
  double max_abs_lat = 0.0;
  double mean_speed = 0.0;
  double lat_acc_std = 0.0;
  double mean_sideslip = 0.0;
  double mean_abs_lat_lap2 = 0.0;
  double mean_speed_lap2 = 0.0;
  int closures = 0;
  int boundary_violations = 0;
};

MissionMetrics computeMetrics(const MissionResult& result);

std::vector<std::pair<std::string, std::string>> metricsRows(const MissionMetrics& m);

// Steps file ("# racer-steps v1" header then CSV).
void saveSteps(const std::string& path, const std::vector<StepRecord>& steps);
std::vector<StepRecord> loadSteps(const std::string& path);

// Metrics recomputed from a steps file alone (for the compute-metrics
// command); lap split comes from the recorded closure counter.
MissionMetrics metricsFromSteps(const std::vector<StepRecord>& steps);

}  // namespace racer::harness
