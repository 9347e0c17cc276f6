#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "racer/geometry.hpp"
#include "racer/vision.hpp"

namespace racer {

// Planar landmark map of the cone-marked track, built incrementally from
// world-frame cone detections.  Positions live in the planar world frame
// (x forward at zero heading, y left, heading counterclockwise).

struct TrackMapConfig {
  double merge_radius = 1.0;  // detections closer than this to an existing cone merge into it
};

struct MappedCone {
  Vec2 position{0.0, 0.0};
  int observation_count = 0;
  // Color votes indexed as Red, Blue, Yellow, Unknown.
  std::array<int, 4> color_votes{0, 0, 0, 0};

  ConeColor color() const;
};

class TrackMap {
 public:
  explicit TrackMap(const TrackMapConfig& cfg = {});

  // Merge one detection into the map (running-average position update).
  // Returns the index of the cone it merged into or created.
  std::size_t insert(const Vec2& position, ConeColor color);

  // Append a cone verbatim, bypassing the merge; used when reloading a map.
  void restore(const MappedCone& cone) { cones_.push_back(cone); }

  const std::vector<MappedCone>& cones() const { return cones_; }
  std::size_t size() const { return cones_.size(); }
  const TrackMapConfig& config() const { return cfg_; }

 private:
  TrackMapConfig cfg_;
  std::vector<MappedCone> cones_;
};

// Loop-closure detection: a weighted coefficient combining how well current
// detections re-match the map, how close the vehicle is to the lap start
// pose, and how aligned its heading is.  A closure fires when the coefficient
// drops below the threshold, and only after the vehicle has traveled the
// arming distance since the previous closure (or since the start).
struct LoopClosureConfig {
  double w_cone = 0.5;
  double w_heading = 1.0;
  double w_dist = 1.0;
  double threshold = 2.5;
  double arming_distance = 15.0;
};

class LoopDetector {
 public:
  LoopDetector(const LoopClosureConfig& cfg, double start_x, double start_y,
               double start_heading);

  // Feed the current pose and the world-frame cone detections of the latest
  // scan.  Returns true exactly when a new closure fires.
  bool update(double x, double y, double heading, const std::vector<Vec2>& detections,
              const TrackMap& map);

  double lastCoefficient() const { return last_coefficient_; }
  int closureCount() const { return closures_; }
  double traveled() const { return traveled_; }
  double armedDistance() const { return since_event_; }

 private:
  LoopClosureConfig cfg_;
  double start_x_, start_y_, start_heading_;
  double prev_x_, prev_y_;
  bool has_prev_ = false;
  double traveled_ = 0.0;
  double since_event_ = 0.0;
  double last_coefficient_ = 0.0;
  int closures_ = 0;
};

// Pair red (left) cones with their nearest blue (right) partner within the
// gate and return the midpoints, ordered by arc-length projection onto the
// traveled path.  Requires at least one cone of each color.
std::vector<Vec2> extractMidline(const TrackMap& map, const std::vector<Vec2>& travel_path,
                                 double pair_gate = 7.0);

// Rigid planar correction that best re-aligns world-frame detections with
// their nearest map cones:  p' = R(dtheta) * p + dt.  Valid only when at
// least three detections matched inside the gate; otherwise the identity is
// returned with the match count telling the caller nothing usable was found.
struct PlanarCorrection {
  double dtheta = 0.0;
  Vec2 dt{0.0, 0.0};
  int matches = 0;

  Vec2 apply(const Vec2& p) const;
};

PlanarCorrection alignToMap(const TrackMap& map, const std::vector<Vec2>& world_detections,
                            double match_gate = 2.0);

// Serialization ("# racer-map v1"): cones with color and observation count,
// start pose, closed flag, lap count.
struct TrackMapFile {
  TrackMap map;
  double start_x = 0.0, start_y = 0.0, start_heading = 0.0;
  bool closed = false;
  int laps = 0;
};

void saveTrackMap(const std::string& path, const TrackMapFile& file);
TrackMapFile loadTrackMap(const std::string& path);

}  // namespace racer
