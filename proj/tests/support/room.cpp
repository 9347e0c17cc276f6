#include "room.hpp"

#include <cmath>
#include <limits>

namespace racer::testsupport {

namespace {

constexpr double kDeg = M_PI / 180.0;

// Shortest positive ray parameter that lands on one of the four walls or
// the floor, or infinity when the ray escapes. Planar direction (fx, fy)
// and climb rate per unit ray length; the sensor sits `mount` above ground.
double hitDistance(const RoomSpec& room, double px, double py, double fx, double fy,
                   double climb) {
  double best = std::numeric_limits<double>::infinity();

  if (climb < -1e-12) {  // descending: floor hit
    const double t = -room.mount_height / climb;
    if (t > 0.0) best = std::min(best, t);
  }

  auto wall_x = [&](double xw) {
    if (std::abs(fx) < 1e-12) return;
    const double t = (xw - px) / fx;
    if (t <= 0.0 || t >= best) return;
    const double y = py + t * fy;
    const double alt = room.mount_height + t * climb;
    if (y >= room.y_min && y <= room.y_max && alt >= 0.0 && alt <= room.wall_height) {
      best = t;
    }
  };
  auto wall_y = [&](double yw) {
    if (std::abs(fy) < 1e-12) return;
    const double t = (yw - py) / fy;
    if (t <= 0.0 || t >= best) return;
    const double x = px + t * fx;
    const double alt = room.mount_height + t * climb;
    if (x >= room.x_min && x <= room.x_max && alt >= 0.0 && alt <= room.wall_height) {
      best = t;
    }
  };
  wall_x(room.x_min);
  wall_x(room.x_max);
  wall_y(room.y_min);
  wall_y(room.y_max);
  return best;
}

}  // namespace

LaserScan roomScan(const RoomSpec& room, double px, double py, double heading,
                   double timestamp) {
  const int az_steps = static_cast<int>(std::llround(360.0 / room.azimuth_step_deg));
  const double az_step = 2.0 * M_PI / az_steps;
  const double elev_step = room.layers > 1 ? (room.elev_max_deg - room.elev_min_deg) * kDeg /
                                                 (room.layers - 1)
                                           : 0.0;
  const double ch = std::cos(heading), sh = std::sin(heading);

  LaserScan scan;
  scan.timestamp = timestamp;
  scan.layers.resize(room.layers);
  for (int layer = 0; layer < room.layers; ++layer) {
    const double elev = room.elev_min_deg * kDeg + layer * elev_step;
    const double ce = std::cos(elev), se = std::sin(elev);
    auto& ring = scan.layers[layer];
    for (int a = 0; a < az_steps; ++a) {
      const double az = -M_PI + a * az_step;
      // Sensor frame: x right, y down, z forward.
      const double dsx = ce * std::sin(az);
      const double dsy = -se;
      const double dsz = ce * std::cos(az);
      // Planar world direction; sensor x points right of the heading.
      const double fx = ch * dsz + sh * dsx;
      const double fy = sh * dsz - ch * dsx;
      const double climb = -dsy;

      const double t = hitDistance(room, px, py, fx, fy, climb);
      if (!std::isfinite(t) || t > room.max_range) continue;
      ring.push_back({dsx * t, dsy * t, dsz * t});
    }
  }
  return scan;
}

namespace {

constexpr double kCorner = 3.0;   // corner radius
constexpr double kLongRun = 34.0;  // straight length on the 40 m sides
constexpr double kShortRun = 9.0;  // straight length on the 15 m sides

struct Corner {
  double cx, cy, phi0;
};

}  // namespace

double roomLoopLength() { return 2.0 * (kLongRun + kShortRun) + 2.0 * M_PI * kCorner; }

std::vector<PathSample> roomLoopPath(double step) {
  const double quarter = 0.5 * M_PI * kCorner;
  const Corner corners[4] = {
      {37.0, 3.0, -0.5 * M_PI},  // after the bottom straight
      {37.0, 12.0, 0.0},         // after the right straight
      {3.0, 12.0, 0.5 * M_PI},   // after the top straight
      {3.0, 3.0, M_PI},          // after the left straight
  };
  const double runs[4] = {kLongRun, kShortRun, kLongRun, kShortRun};
  const double run_heading[4] = {0.0, 0.5 * M_PI, M_PI, 1.5 * M_PI};
  // Straight-run start points, in driving order.
  const double run_start[4][2] = {{3.0, 0.0}, {40.0, 3.0}, {37.0, 15.0}, {0.0, 12.0}};

  std::vector<PathSample> path;
  const double total = roomLoopLength();
  for (double s = 0.0; s < total - 0.5 * step; s += step) {
    double rem = s;
    for (int leg = 0; leg < 4; ++leg) {
      if (rem < runs[leg]) {
        const double h = run_heading[leg];
        path.push_back({run_start[leg][0] + rem * std::cos(h),
                        run_start[leg][1] + rem * std::sin(h), h});
        break;
      }
      rem -= runs[leg];
      if (rem < quarter) {
        const double phi = corners[leg].phi0 + rem / kCorner;
        path.push_back({corners[leg].cx + kCorner * std::cos(phi),
                        corners[leg].cy + kCorner * std::sin(phi), phi + 0.5 * M_PI});
        break;
      }
      rem -= quarter;
    }
  }
  return path;
}

}  // namespace racer::testsupport
