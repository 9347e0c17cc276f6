#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "racer/geometry.hpp"

namespace racer {

// Planar cubic in the power basis: p(u) = c0 + c1 u + c2 u^2 + c3 u^3 per axis.
struct CubicSegment {
  std::array<double, 4> ax{0, 0, 0, 0};
  std::array<double, 4> ay{0, 0, 0, 0};

  Vec2 position(double u) const;
  Vec2 derivative(double u) const;
  Vec2 second(double u) const;
  // Signed curvature (positive turning left).
  double curvature(double u) const;
};

// Interpolating cubic through four points at parameters 0, u1, u2, 1.
// Requires 0 < u1 < u2 < 1.
CubicSegment fitSegment(const std::array<Vec2, 4>& pts, double u1, double u2);

// One window of the sliding fit with the parameter span actually used.
struct TrajectoryPiece {
  CubicSegment seg;
  double u_lo = 0.0;
  double u_hi = 1.0;
};

struct Trajectory {
  std::vector<TrajectoryPiece> pieces;
  bool closed = false;
};

// Sliding-window interpolation: each four-point window is fitted with
// chord-length parameters and only the central span is kept, so consecutive
// pieces join exactly at the shared interpolation points.  Open curves keep
// the outer spans of the first and last windows so the whole point range is
// covered.  Needs at least four distinct points.
Trajectory buildTrajectory(const std::vector<Vec2>& points, bool closed);

struct Waypoint {
  Vec2 position{0.0, 0.0};
  double heading = 0.0;    // tangent direction, counterclockwise from +x
  double curvature = 0.0;  // signed, positive turning left
  double s = 0.0;          // arc length from the start of the trajectory
};

double trajectoryLength(const Trajectory& traj, int fine_subdivisions = 64);

// Arc-length resampling.  The actual spacing is the total length divided by
// the rounded waypoint count, so it matches the request to within one half
// step.  Open trajectories include the final endpoint; closed ones do not
// repeat the start.
std::vector<Waypoint> sampleWaypoints(const Trajectory& traj, double spacing,
                                      int fine_subdivisions = 64);

// Projection of a point onto the waypoint polyline.
struct PathProjection {
  std::size_t segment = 0;   // index of the polyline segment hit
  double t = 0.0;            // fraction along that segment
  Vec2 point{0.0, 0.0};      // closest point on the polyline
  double heading = 0.0;      // segment direction
  double curvature = 0.0;    // interpolated waypoint curvature
  double s = 0.0;            // interpolated arc length
  double lateral = 0.0;      // signed offset, positive left of the path
};

PathProjection projectOntoWaypoints(const std::vector<Waypoint>& waypoints, const Vec2& p,
                                    bool closed);

void saveWaypoints(const std::string& path, const std::vector<Waypoint>& waypoints);
std::vector<Waypoint> loadWaypoints(const std::string& path);

}  // namespace racer
