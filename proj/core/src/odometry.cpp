#include "racer/odometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "racer/errors.hpp"

namespace racer {

double smoothness(const LaserScan& scan, int layer, int index, int half_window) {
  if (layer < 0 || layer >= static_cast<int>(scan.layers.size())) {
    throw OutOfRange("smoothness: layer out of range");
  }
  const auto& ring = scan.layers[layer];
  const int n = static_cast<int>(ring.size());
  if (half_window < 1) throw InvalidInput("smoothness: half_window must be >= 1");
  if (index < half_window || index >= n - half_window) {
    throw OutOfRange("smoothness: window exceeds layer bounds");
  }
  const Eigen::Vector3d xi = toEigen(ring[index]);
  const double range = xi.norm();
  if (range <= 0.0) throw InvalidInput("smoothness: zero-range point");

  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int j = index - half_window; j <= index + half_window; ++j) {
    if (j == index) continue;
    sum += xi - toEigen(ring[j]);
  }
  const double window = 2.0 * half_window;
  return sum.norm() / (window * range);
}

FeatureSet extractFeatures(const LaserScan& scan, const OdometryConfig& cfg) {
  if (cfg.plane_thresh >= cfg.edge_thresh) {
    throw InvalidInput("extractFeatures: plane_thresh must be below edge_thresh");
  }
  struct Scored {
    FeaturePoint fp;
    int sector;
    bool edge_ok;
  };
  std::vector<Scored> edge_cand, plane_cand;

  const double sector_width = 2.0 * M_PI / cfg.sectors;
  for (int li = 0; li < static_cast<int>(scan.layers.size()); ++li) {
    const auto& ring = scan.layers[li];
    const int n = static_cast<int>(ring.size());
    for (int i = cfg.half_window; i < n - cfg.half_window; ++i) {
      const Eigen::Vector3d xi = toEigen(ring[i]);
      const double range = xi.norm();
      if (range < cfg.min_range) continue;
      const double c = smoothness(scan, li, i, cfg.half_window);

      // Far side of a range discontinuity: a shadow edge that moves with
      // the viewpoint. Never an edge; may still be locally planar.
      bool occluded = false;
      for (int j = i - cfg.half_window; j <= i + cfg.half_window && !occluded; ++j) {
        if (j == i) continue;
        if (toEigen(ring[j]).norm() < range - cfg.occlusion_jump) occluded = true;
      }

      const double az = std::atan2(ring[i].x, ring[i].z);
      int sector = static_cast<int>((az + M_PI) / sector_width);
      sector = std::clamp(sector, 0, cfg.sectors - 1);

      if (c > cfg.edge_thresh && !occluded) {
        edge_cand.push_back({{ring[i], li, i, c}, sector, true});
      } else if (c < cfg.plane_thresh) {
        plane_cand.push_back({{ring[i], li, i, c}, sector, false});
      }
    }
  }

  FeatureSet out;
  auto take = [&](std::vector<Scored>& cand, bool descending, int cap,
                  std::vector<FeaturePoint>& dst) {
    std::stable_sort(cand.begin(), cand.end(), [&](const Scored& a, const Scored& b) {
      return descending ? a.fp.score > b.fp.score : a.fp.score < b.fp.score;
    });
    std::vector<int> used(cfg.sectors, 0);
    for (const auto& s : cand) {
      if (used[s.sector] >= cap) continue;
      ++used[s.sector];
      dst.push_back(s.fp);
    }
  };
  take(edge_cand, true, cfg.max_edge_per_sector, out.edges);
  take(plane_cand, false, cfg.max_planar_per_sector, out.planars);
  return out;
}

namespace {

struct EdgeCorr {
  Eigen::Vector3d x;     // curr point, sensor frame
  Eigen::Vector3d a, b;  // prev edge points defining the line
  double len;            // |a - b|
};

struct PlaneCorr {
  Eigen::Vector3d x;
  Eigen::Vector3d a;  // point on the plane
  Eigen::Vector3d n;  // unit normal
};

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Rodrigues; small-angle safe.
Eigen::Matrix3d expSo3(const Eigen::Vector3d& w) {
  const double th = w.norm();
  if (th < 1e-12) return Eigen::Matrix3d::Identity() + skew(w);
  const Eigen::Vector3d axis = w / th;
  const Eigen::Matrix3d k = skew(axis);
  return Eigen::Matrix3d::Identity() + std::sin(th) * k + (1.0 - std::cos(th)) * k * k;
}

// Unit quaternion (x,y,z,w) of a rotation matrix (Shepperd's method).
void quatOf(const Eigen::Matrix3d& r, double& qx, double& qy, double& qz, double& qw) {
  const double tr = r.trace();
  if (tr > 0.0) {
    double s = std::sqrt(tr + 1.0) * 2.0;
    qw = 0.25 * s;
    qx = (r(2, 1) - r(1, 2)) / s;
    qy = (r(0, 2) - r(2, 0)) / s;
    qz = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
    qw = (r(2, 1) - r(1, 2)) / s;
    qx = 0.25 * s;
    qy = (r(0, 1) + r(1, 0)) / s;
    qz = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
    qw = (r(0, 2) - r(2, 0)) / s;
    qx = (r(0, 1) + r(1, 0)) / s;
    qy = 0.25 * s;
    qz = (r(1, 2) + r(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
    qw = (r(1, 0) - r(0, 1)) / s;
    qx = (r(0, 2) + r(2, 0)) / s;
    qy = (r(1, 2) + r(2, 1)) / s;
    qz = 0.25 * s;
  }
}

struct Associations {
  std::vector<EdgeCorr> edges;
  std::vector<PlaneCorr> planes;
  std::size_t count() const { return edges.size() + planes.size(); }
};

Associations associate(const FeatureSet& prev, const FeatureSet& curr,
                       const Eigen::Matrix3d& r, const Eigen::Vector3d& t,
                       const OdometryConfig& cfg) {
  Associations as;
  const double gate2 = cfg.max_corr_dist * cfg.max_corr_dist;

  for (const auto& f : curr.edges) {
    const Eigen::Vector3d xp = r * toEigen(f.p) + t;
    int i0 = -1, i1 = -1;
    double d0 = gate2, d1 = gate2;
    for (int i = 0; i < static_cast<int>(prev.edges.size()); ++i) {
      const double d = (toEigen(prev.edges[i].p) - xp).squaredNorm();
      if (d < d0) {
        d1 = d0;
        i1 = i0;
        d0 = d;
        i0 = i;
      } else if (d < d1) {
        d1 = d;
        i1 = i;
      }
    }
    if (i0 < 0 || i1 < 0) continue;
    EdgeCorr c;
    c.x = toEigen(f.p);
    c.a = toEigen(prev.edges[i0].p);
    c.b = toEigen(prev.edges[i1].p);
    c.len = (c.a - c.b).norm();
    if (c.len < 0.02) continue;  // coincident picks define no line
    as.edges.push_back(c);
  }

  for (const auto& f : curr.planars) {
    const Eigen::Vector3d xp = r * toEigen(f.p) + t;
    int idx[3] = {-1, -1, -1};
    double dist[3] = {gate2, gate2, gate2};
    for (int i = 0; i < static_cast<int>(prev.planars.size()); ++i) {
      const double d = (toEigen(prev.planars[i].p) - xp).squaredNorm();
      for (int k = 0; k < 3; ++k) {
        if (d < dist[k]) {
          for (int m = 2; m > k; --m) {
            dist[m] = dist[m - 1];
            idx[m] = idx[m - 1];
          }
          dist[k] = d;
          idx[k] = i;
          break;
        }
      }
    }
    if (idx[2] < 0) continue;
    const Eigen::Vector3d a = toEigen(prev.planars[idx[0]].p);
    const Eigen::Vector3d b = toEigen(prev.planars[idx[1]].p);
    const Eigen::Vector3d c3 = toEigen(prev.planars[idx[2]].p);
    Eigen::Vector3d n = (b - a).cross(c3 - a);
    const double nn = n.norm();
    const double span = std::max((b - a).norm(), (c3 - a).norm());
    if (nn < 1e-6 * std::max(span * span, 1e-12)) continue;  // collinear triple
    PlaneCorr pc;
    pc.x = toEigen(f.p);
    pc.a = a;
    pc.n = n / nn;
    as.planes.push_back(pc);
  }
  return as;
}

double residualCost(const Associations& as, const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  double c = 0.0;
  for (const auto& e : as.edges) {
    const Eigen::Vector3d xp = r * e.x + t;
    c += ((xp - e.a).cross(xp - e.b) / e.len).squaredNorm();
  }
  for (const auto& p : as.planes) {
    const Eigen::Vector3d xp = r * p.x + t;
    const double d = p.n.dot(xp - p.a);
    c += d * d;
  }
  return c;
}

}  // namespace

OdometryEstimate matchAndSolve(const FeatureSet& prev, const FeatureSet& curr_features,
                               const PoseTransform& t_init, const OdometryConfig& cfg) {
  Eigen::Matrix3d r = quatToRotation(t_init);
  Eigen::Vector3d t = t_init.translation();

  OdometryEstimate est;
  bool have_initial = false;

  for (int round = 0; round < std::max(1, cfg.association_rounds); ++round) {
    Associations as = associate(prev, curr_features, r, t, cfg);
    if (as.count() < 6) {
      throw DegenerateError("matchAndSolve: fewer than 6 correspondences");
    }

    double cost = residualCost(as, r, t);
    if (!have_initial) {
      est.residual_initial = cost;
      have_initial = true;
    }

    double lambda = cfg.lambda0;
    for (int iter = 0; iter < cfg.max_lm_iter; ++iter) {
      // Accumulate the normal equations for the local step (dt, dw):
      // x' = exp([dw]x) R x + t + dt.
      Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
      Eigen::Matrix<double, 6, 1> jtd = Eigen::Matrix<double, 6, 1>::Zero();

      for (const auto& e : as.edges) {
        const Eigen::Vector3d rx = r * e.x;
        const Eigen::Vector3d xp = rx + t;
        const Eigen::Vector3d resid = (xp - e.a).cross(xp - e.b) / e.len;
        const Eigen::Matrix3d dr_dxp = -skew((e.a - e.b) / e.len);
        Eigen::Matrix<double, 3, 6> j;
        j.block<3, 3>(0, 0) = dr_dxp * -skew(rx);  // rotation block
        j.block<3, 3>(0, 3) = dr_dxp;              // translation block
        jtj += j.transpose() * j;
        jtd += j.transpose() * resid;
      }
      for (const auto& p : as.planes) {
        const Eigen::Vector3d rx = r * p.x;
        const Eigen::Vector3d xp = rx + t;
        const double resid = p.n.dot(xp - p.a);
        Eigen::Matrix<double, 1, 6> j;
        j.block<1, 3>(0, 0) = p.n.transpose() * -skew(rx);
        j.block<1, 3>(0, 3) = p.n.transpose();
        jtj += j.transpose() * j;
        jtd += j.transpose() * resid;
      }

      if (iter == 0 && round == 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(jtj);
        const double lmax = es.eigenvalues().maxCoeff();
        const double lmin = es.eigenvalues().minCoeff();
        if (lmax <= 0.0 || lmin < cfg.degeneracy_ratio * lmax) {
          throw DegenerateError("matchAndSolve: geometry does not constrain all 6 DoF");
        }
      }

      Eigen::Matrix<double, 6, 6> damped = jtj;
      for (int d = 0; d < 6; ++d) damped(d, d) += lambda * jtj(d, d);
      const Eigen::Matrix<double, 6, 1> delta = damped.ldlt().solve(-jtd);
      if (!delta.allFinite()) break;

      const Eigen::Matrix3d r_cand = expSo3(delta.head<3>()) * r;
      const Eigen::Vector3d t_cand = t + delta.tail<3>();
      const double cand_cost = residualCost(as, r_cand, t_cand);
      ++est.iterations;
      if (cand_cost < cost) {
        r = r_cand;
        t = t_cand;
        cost = cand_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        if (delta.norm() < 1e-10) break;
      } else {
        lambda *= 10.0;
        if (lambda > 1e10) break;
      }
    }
    est.residual = cost;
    est.correspondences = static_cast<int>(as.count());
  }

  double qx, qy, qz, qw;
  quatOf(r, qx, qy, qz, qw);
  est.pose = makePose(t, qx, qy, qz, qw);
  return est;
}

OdometryEstimate matchAndSolve(const FeatureSet& prev, const LaserScan& curr,
                               const PoseTransform& t_init, const OdometryConfig& cfg) {
  return matchAndSolve(prev, extractFeatures(curr, cfg), t_init, cfg);
}

std::vector<Point3> accumulateFrames(
    const std::vector<std::pair<LaserScan, PoseTransform>>& frames,
    const PoseTransform& target, int m) {
  if (m < 1) throw InvalidInput("accumulateFrames: m must be >= 1");
  std::vector<Point3> out;
  const int start = std::max(0, static_cast<int>(frames.size()) - m);
  for (int f = start; f < static_cast<int>(frames.size()); ++f) {
    for (const auto& ring : frames[f].first.layers) {
      for (const Point3& p : ring) {
        out.push_back(transferPoint(p, frames[f].second, target));
      }
    }
  }
  return out;
}

std::vector<Point3> accumulatePoints(
    const std::vector<std::pair<std::vector<Point3>, PoseTransform>>& frames,
    const PoseTransform& target, int m) {
  if (m < 1) throw InvalidInput("accumulatePoints: m must be >= 1");
  std::vector<Point3> out;
  const int start = std::max(0, static_cast<int>(frames.size()) - m);
  for (int f = start; f < static_cast<int>(frames.size()); ++f) {
    for (const Point3& p : frames[f].first) {
      out.push_back(transferPoint(p, frames[f].second, target));
    }
  }
  return out;
}

FusedPose fusePose(const std::optional<OdometryEstimate>& lidar,
                   const std::optional<PoseTransform>& gps, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw InvalidInput("fusePose: alpha outside [0, 1]");
  if (!lidar && !gps) {
    throw LocalizationLost("fusePose: no pose source available");
  }
  FusedPose out;
  if (lidar && !gps) {
    out.pose = lidar->pose;
    out.lidar_weight = 1.0;
    return out;
  }
  if (!lidar && gps) {
    out.pose = *gps;
    out.gps_weight = 1.0;
    return out;
  }
  out.pose = interpolatePose(lidar->pose, *gps, alpha);
  out.lidar_weight = 1.0 - alpha;
  out.gps_weight = alpha;
  return out;
}

OdometryEstimate OdometryPipeline::step(const LaserScan& scan) {
  pending_ = extractFeatures(scan, cfg_);
  has_pending_ = true;
  if (!has_prev_) {
    OdometryEstimate est;
    est.pose = pose_;
    return est;
  }
  return matchAndSolve(prev_world_, pending_, pose_, cfg_);
}

void OdometryPipeline::anchor(const PoseTransform& fused) {
  if (!has_pending_) throw OutOfRange("OdometryPipeline::anchor before step");
  pose_ = fused;
  prev_world_.edges.clear();
  prev_world_.planars.clear();
  for (const auto& f : pending_.edges) {
    FeaturePoint w = f;
    w.p = applyPose(fused, f.p);
    prev_world_.edges.push_back(w);
  }
  for (const auto& f : pending_.planars) {
    FeaturePoint w = f;
    w.p = applyPose(fused, f.p);
    prev_world_.planars.push_back(w);
  }
  has_prev_ = true;
  has_pending_ = false;
}

}  // namespace racer
