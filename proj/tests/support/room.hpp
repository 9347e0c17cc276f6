#pragma once

#include <vector>

#include "racer/scan.hpp"

namespace racer::testsupport {

// Rectangular walled room on flat ground, used as a structure-rich world
// for registration tests: every scan sees large planar patches (floor,
// walls) plus the wall corners, so consecutive scans constrain all six
// degrees of freedom.
struct RoomSpec {
  double x_min = -8.0;  // planar world extents of the walls
  double x_max = 48.0;
  double y_min = -8.0;
  double y_max = 23.0;
  double wall_height = 9.0;

  int layers = 16;
  double elev_min_deg = -15.0;
  double elev_max_deg = 15.0;
  double azimuth_step_deg = 0.4;
  double max_range = 30.0;
  double mount_height = 0.5;
};

// Noise-free raycast of the room from a planar pose. Points come back in
// the sensor frame (x right, y down, z forward), rings ordered by azimuth,
// rays that exit through the open ceiling or exceed max range return
// nothing.
LaserScan roomScan(const RoomSpec& room, double px, double py, double heading,
                   double timestamp = 0.0);

struct PathSample {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

// Closed rounded-rectangle loop inside the default room: corner posts at
// (0,0)..(40,15), corner radius 3, total length about 105 m. Samples are
// `step` meters apart in arc length; the heading follows the path.
std::vector<PathSample> roomLoopPath(double step);

double roomLoopLength();

}  // namespace racer::testsupport
