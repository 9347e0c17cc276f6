#pragma once

#include <string>
#include <vector>

#include "racer/geometry.hpp"

namespace racer {

/// One rotation of a multi-layer scanner. Points within a layer are ordered
/// by azimuth (producer contract; the feature extractor relies on it).
/// Missing returns are simply absent, so array neighbors may be far apart
/// in angle across range gaps.
struct LaserScan {
  double timestamp = 0.0;
  std::vector<std::vector<Point3>> layers;

  std::size_t totalPoints() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.size();
    return n;
  }
};

/// Text format, versioned ("# racer-scan v1"). See README for the layout.
void saveScan(const std::string& path, const LaserScan& scan);
LaserScan loadScan(const std::string& path);

}  // namespace racer
