#include "racer/ground_seg.hpp"

#include <cmath>

#include "racer/errors.hpp"
#include "racer/random.hpp"

namespace racer {

double planeError(const Point3& p, const PlaneModel& m, bool paper_literal_error) {
  const double num = p.y - m.a * p.x - m.b * p.z - m.h;
  double den2 = 1.0 + m.a * m.a + m.b * m.b;
  if (paper_literal_error) den2 += m.h * m.h;
  return num / std::sqrt(den2);
}

bool classifyInlier(const Point3& p, const PlaneModel& m, double tau, bool paper_literal_error) {
  return std::abs(planeError(p, m, paper_literal_error)) < tau;
}

namespace {

// Exact plane through three points: solve y_i = a x_i + b z_i + h.
// Returns false when the xz-projections are (near-)collinear.
bool planeThrough(const Point3& p0, const Point3& p1, const Point3& p2, PlaneModel& out) {
  const double x1 = p1.x - p0.x, z1 = p1.z - p0.z, y1 = p1.y - p0.y;
  const double x2 = p2.x - p0.x, z2 = p2.z - p0.z, y2 = p2.y - p0.y;
  const double det = x1 * z2 - x2 * z1;
  // Scale-aware degeneracy test: area of the xz triangle.
  const double scale = std::max({std::abs(x1), std::abs(z1), std::abs(x2), std::abs(z2), 1e-12});
  if (std::abs(det) < 1e-9 * scale * scale) return false;
  out.a = (y1 * z2 - y2 * z1) / det;
  out.b = (x1 * y2 - x2 * y1) / det;
  out.h = p0.y - out.a * p0.x - out.b * p0.z;
  return true;
}

}  // namespace

SegmentationResult ransacFit(const std::vector<Point3>& cloud, const RoiBox& roi,
                             const RansacConfig& cfg, std::uint64_t seed) {
  if (roi.x_min >= roi.x_max || roi.z_min >= roi.z_max) {
    throw InvalidInput("ransacFit: ROI box has empty extent");
  }
  if (cfg.tau <= 0.0 || cfg.max_iter <= 0) {
    throw InvalidInput("ransacFit: tau and max_iter must be positive");
  }

  SegmentationResult res;
  for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
    const Point3& p = cloud[i];
    if (p.x >= roi.x_min && p.x <= roi.x_max && p.z >= roi.z_min && p.z <= roi.z_max) {
      res.roi_indices.push_back(i);
    }
  }
  const int n = static_cast<int>(res.roi_indices.size());
  if (n < 3) {
    throw InsufficientData("ransacFit: fewer than 3 points inside the ROI");
  }

  Rng rng(seed);
  PlaneModel best;
  int best_count = -1;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    int ia = static_cast<int>(rng.uniformInt(static_cast<std::uint32_t>(n)));
    int ib = static_cast<int>(rng.uniformInt(static_cast<std::uint32_t>(n)));
    int ic = static_cast<int>(rng.uniformInt(static_cast<std::uint32_t>(n)));
    if (ia == ib || ib == ic || ia == ic) continue;

    PlaneModel m;
    if (!planeThrough(cloud[res.roi_indices[ia]], cloud[res.roi_indices[ib]],
                      cloud[res.roi_indices[ic]], m)) {
      continue;
    }
    if (std::abs(m.a) >= cfg.slope_limit || std::abs(m.b) >= cfg.slope_limit) continue;
    if (m.h < cfg.h_min || m.h > cfg.h_max) continue;

    int count = 0;
    for (int idx : res.roi_indices) {
      if (classifyInlier(cloud[idx], m, cfg.tau, cfg.paper_literal_error)) ++count;
    }
    res.hypothesis_inlier_counts.push_back(count);
    if (count > best_count) {
      best_count = count;
      best = m;
    }
  }

  if (best_count < 3) {
    throw DegenerateError("ransacFit: no acceptable plane hypothesis found");
  }

  res.model = best;
  res.best_inlier_count = best_count;
  res.ground_indices.reserve(best_count);
  for (int idx : res.roi_indices) {
    if (classifyInlier(cloud[idx], best, cfg.tau, cfg.paper_literal_error)) {
      res.ground_indices.push_back(idx);
    } else {
      res.obstacle_indices.push_back(idx);
    }
  }
  return res;
}

}  // namespace racer
