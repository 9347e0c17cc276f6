#include "racer/detection.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include "racer/errors.hpp"

namespace racer {

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xc2b2ae3d27d4eb4fULL;
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667b19e3779f9ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

CellKey cellOf(const Point3& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x / cell)),
          static_cast<std::int64_t>(std::floor(p.y / cell)),
          static_cast<std::int64_t>(std::floor(p.z / cell))};
}

double dist2(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

std::vector<Cluster> euclideanCluster(const std::vector<Point3>& points, double radius,
                                      int min_points) {
  if (radius <= 0.0) throw InvalidInput("euclideanCluster: radius must be positive");
  if (min_points < 1) throw InvalidInput("euclideanCluster: min_points must be >= 1");

  const int n = static_cast<int>(points.size());
  std::unordered_map<CellKey, std::vector<int>, CellHash> grid;
  grid.reserve(static_cast<std::size_t>(n) * 2);
  for (int i = 0; i < n; ++i) grid[cellOf(points[i], radius)].push_back(i);

  const double r2 = radius * radius;
  std::vector<int> label(n, -1);
  std::vector<Cluster> out;

  std::vector<int> stack;
  for (int seed = 0; seed < n; ++seed) {
    if (label[seed] >= 0) continue;
    const int id = static_cast<int>(out.size());
    Cluster c;
    label[seed] = id;
    stack.assign(1, seed);
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      c.indices.push_back(i);
      const CellKey k = cellOf(points[i], radius);
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          for (std::int64_t dz = -1; dz <= 1; ++dz) {
            auto it = grid.find({k.x + dx, k.y + dy, k.z + dz});
            if (it == grid.end()) continue;
            for (int j : it->second) {
              if (label[j] < 0 && dist2(points[i], points[j]) <= r2) {
                label[j] = id;
                stack.push_back(j);
              }
            }
          }
        }
      }
    }
    out.push_back(std::move(c));
  }

  std::vector<Cluster> kept;
  for (auto& c : out) {
    if (static_cast<int>(c.indices.size()) < min_points) continue;
    double lo[3] = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                    std::numeric_limits<double>::max()};
    double hi[3] = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
                    std::numeric_limits<double>::lowest()};
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (int i : c.indices) {
      const Point3& p = points[i];
      sum += toEigen(p);
      lo[0] = std::min(lo[0], p.x);
      hi[0] = std::max(hi[0], p.x);
      lo[1] = std::min(lo[1], p.y);
      hi[1] = std::max(hi[1], p.y);
      lo[2] = std::min(lo[2], p.z);
      hi[2] = std::max(hi[2], p.z);
    }
    c.centroid = fromEigen(sum / static_cast<double>(c.indices.size()));
    c.ex = hi[0] - lo[0];
    c.ey = hi[1] - lo[1];
    c.ez = hi[2] - lo[2];
    kept.push_back(std::move(c));
  }
  return kept;
}

std::vector<ConeCandidate> filterConeSized(const std::vector<Cluster>& clusters,
                                           const ConeSizeWindow& window,
                                           const PlaneModel& ground) {
  std::vector<ConeCandidate> out;
  for (const auto& c : clusters) {
    const double horiz = std::max(c.ex, c.ez);
    if (horiz < window.min_extent || horiz > window.max_extent) continue;
    if (c.ey > window.max_height) continue;
    if (static_cast<int>(c.indices.size()) > window.max_points) continue;
    ConeCandidate cand;
    cand.position = c.centroid;
    cand.position.y = ground.a * c.centroid.x + ground.b * c.centroid.z + ground.h;
    cand.extent = horiz;
    cand.point_count = static_cast<int>(c.indices.size());
    out.push_back(cand);
  }
  return out;
}

}  // namespace racer
