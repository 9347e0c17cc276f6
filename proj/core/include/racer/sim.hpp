#pragma once

#include <cstdint>
#include <vector>

#include "racer/geometry.hpp"
#include "racer/image.hpp"
#include "racer/random.hpp"
#include "racer/scan.hpp"
#include "racer/vision.hpp"

namespace racer {

// Synthetic closed test track: a stadium (two straights joined by two
// semicircular arcs, driven counterclockwise) marked by cones.  Red cones
// line the left edge, blue the right, and the start-line pair is yellow.
// Planar world frame: x forward at zero heading, y left, heading
// counterclockwise; the lap starts at the origin heading +x.
struct TrackSpec {
  double straight_length = 50.0;
  double radius = 15.0;
  double width = 4.0;
  double cone_spacing = 5.0;
};

struct TrackCone {
  Vec2 position{0.0, 0.0};
  ConeColor color = ConeColor::Unknown;
};

class SimTrack {
 public:
  explicit SimTrack(const TrackSpec& spec);

  double perimeter() const { return perimeter_; }
  const TrackSpec& spec() const { return spec_; }
  const std::vector<TrackCone>& cones() const { return cones_; }

  // Centerline sample at arc position s (wrapped to the perimeter).
  void centerline(double s, Vec2* pos, double* heading, double* kappa) const;

  // Arc position and signed lateral offset (positive left of travel) of the
  // centerline point nearest to p.
  void locate(const Vec2& p, double* s, double* lateral) const;

 private:
  TrackSpec spec_;
  double perimeter_ = 0.0;
  std::vector<TrackCone> cones_;
};

// ---------------------------------------------------------------------------
// Sensors.  The scanning lidar sits mount_height above the ground at the
// vehicle reference point.  Scans come back in the sensor frame (x lateral
// right, y down toward the ground, z forward), one ring per elevation layer,
// points ordered by azimuth; rays that hit nothing inside max_range produce
// no return.

struct LidarConfig {
  int layers = 16;
  double elev_min_deg = -15.0;
  double elev_max_deg = 15.0;
  double azimuth_step_deg = 0.4;
  double max_range = 30.0;
  double range_noise = 0.01;
  double mount_height = 0.3;
  double cone_radius = 0.12;
  double cone_height = 0.3;
};

LaserScan simulateLidar(const SimTrack& track, double px, double py, double heading,
                        const LidarConfig& cfg, Rng& rng, double timestamp);

struct GpsConfig {
  double pos_sigma = 0.05;
  double heading_sigma = 0.01;
  double dropout_prob = 0.0;
};

struct GpsFix {
  double x = 0.0, y = 0.0, heading = 0.0;
  bool valid = false;
};

GpsFix simulateGps(double px, double py, double heading, const GpsConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Camera patches.  The simulated camera crops a fixed-size patch around a
// candidate detection; cones appear as a saturated triangular silhouette
// whose size shrinks with range, over a low-saturation textured ground.

struct CameraConfig {
  int patch_size = 64;
  double max_range = 18.0;
  double fov_deg = 100.0;
  double noise_sigma = 0.03;
};

ImagePatch renderConePatch(ConeColor color, double range, const CameraConfig& cfg, Rng& rng);
ImagePatch renderNegativePatch(const CameraConfig& cfg, Rng& rng);

struct CameraObservation {
  ImagePatch patch;
  bool true_cone = false;
  ConeColor true_color = ConeColor::Unknown;
  double range = 0.0;
  bool in_view = false;
};

// Render what the camera sees at a world-frame candidate position: the real
// cone there if one exists (within in-view range and field of view), a
// conefree background crop otherwise.
CameraObservation observeCandidate(const SimTrack& track, double px, double py, double heading,
                                   const Vec2& candidate_world, const CameraConfig& cfg,
                                   Rng& rng);

}  // namespace racer
