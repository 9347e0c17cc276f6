#pragma once

#include <vector>

#include "racer/geometry.hpp"
#include "racer/ground_seg.hpp"

namespace racer {

struct Cluster {
  std::vector<int> indices;  // into the input cloud
  Point3 centroid;
  // Axis-aligned extents in the sensor frame: ex/ez horizontal, ey vertical.
  double ex = 0.0, ey = 0.0, ez = 0.0;
};

/// Transitive-closure grouping under Euclidean distance <= radius, via a
/// uniform hash grid with cell size = radius (so neighbors live in the
/// 27 surrounding cells). Clusters below min_points are dropped; every
/// point of the cloud belongs to exactly one (possibly dropped) cluster.
std::vector<Cluster> euclideanCluster(const std::vector<Point3>& points, double radius,
                                      int min_points);

struct ConeSizeWindow {
  double min_extent = 0.08;  // max horizontal extent window, meters
  double max_extent = 0.55;
  double max_height = 0.5;   // vertical extent cap
  int max_points = 2000;
};

struct ConeCandidate {
  Point3 position;  // centroid projected onto the ground plane (sensor frame)
  double extent = 0.0;
  int point_count = 0;
};

/// Keep clusters that look cone-sized; candidate position is the centroid
/// dropped onto the fitted ground plane.
std::vector<ConeCandidate> filterConeSized(const std::vector<Cluster>& clusters,
                                           const ConeSizeWindow& window,
                                           const PlaneModel& ground);

}  // namespace racer
