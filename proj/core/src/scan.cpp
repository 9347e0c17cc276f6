#include "racer/scan.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "racer/errors.hpp"

namespace racer {

void saveScan(const std::string& path, const LaserScan& scan) {
  std::ofstream f(path);
  if (!f) throw IoError("saveScan: cannot open " + path);
  f << "# racer-scan v1\n";
  char buf[96];
  std::snprintf(buf, sizeof(buf), "timestamp %.9g\n", scan.timestamp);
  f << buf << "layers " << scan.layers.size() << "\n";
  for (std::size_t li = 0; li < scan.layers.size(); ++li) {
    f << "layer " << li << " " << scan.layers[li].size() << "\n";
    for (const Point3& p : scan.layers[li]) {
      std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x, p.y, p.z);
      f << buf;
    }
  }
  if (!f) throw IoError("saveScan: write failed for " + path);
}

LaserScan loadScan(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("loadScan: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != "# racer-scan v1") {
    throw IoError("loadScan: missing or unsupported format header in " + path);
  }
  LaserScan scan;
  std::string key;
  std::size_t layer_count = 0;
  f >> key >> scan.timestamp;
  if (key != "timestamp") throw IoError("loadScan: expected timestamp in " + path);
  f >> key >> layer_count;
  if (key != "layers") throw IoError("loadScan: expected layer count in " + path);
  scan.layers.resize(layer_count);
  for (std::size_t li = 0; li < layer_count; ++li) {
    std::size_t idx = 0, count = 0;
    f >> key >> idx >> count;
    if (!f || key != "layer" || idx != li) {
      throw IoError("loadScan: malformed layer header in " + path);
    }
    auto& pts = scan.layers[li];
    pts.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      f >> pts[i].x >> pts[i].y >> pts[i].z;
    }
    if (!f) throw IoError("loadScan: truncated point data in " + path);
  }
  return scan;
}

}  // namespace racer
