#include "harness/pipeline.hpp"

#include <cmath>
#include <optional>

#include "harness/classifier.hpp"
#include "racer/detection.hpp"
#include "racer/errors.hpp"
#include "racer/ground_seg.hpp"

namespace racer::harness {

std::uint64_t subSeed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (stream + 0x632be59bd9b4e019ULL));
  splitmix64(s);
  s ^= 0xd6e8feb86659fd93ULL * (index + 0xa5a5a5a5a5a5a5a5ULL);
  splitmix64(s);
  return splitmix64(s);
}

PerceptionPipeline::PerceptionPipeline(const RunConfig& cfg, const SimTrack& track,
                                       const LinearSvmModel& svm,
                                       const PoseTransform& initial_pose)
    : cfg_(cfg),
      track_(&track),
      svm_(svm),
      odom_(cfg.odometry, initial_pose),
      map_(cfg.map),
      pose_(initial_pose),
      camera_rng_(subSeed(cfg.seed, 3)),
      master_seed_(cfg.seed) {}

PerceptionPipeline::ScanResult PerceptionPipeline::processScan(const LaserScan& scan,
                                                               const GpsFix& gps, double true_x,
                                                               double true_y,
                                                               double true_heading,
                                                               bool insert_into_map) {
  ScanResult res;

  // Ground segmentation in the sensor frame.
  std::vector<Point3> cloud;
  cloud.reserve(scan.totalPoints());
  for (const auto& ring : scan.layers) cloud.insert(cloud.end(), ring.begin(), ring.end());
  SegmentationResult seg;
  seg = ransacFit(cloud, RoiBox{}, cfg_.ransac, subSeed(master_seed_, 5, scan_index_));

  // Scan-matching odometry, blended with gps when a fix is available.  A
  // degenerate solve (feature geometry not constraining all freedoms) drops
  // the lidar estimate for this scan instead of failing the mission.
  std::optional<OdometryEstimate> est;
  try {
    est = odom_.step(scan);
  } catch (const DegenerateError&) {
    res.odometry_degenerate = true;
  }
  std::optional<PoseTransform> gps_pose;
  if (gps.valid) gps_pose = planarPose(gps.x, gps.y, gps.heading);

  // The repeating cone pattern occasionally aliases the matcher onto a pose
  // no vehicle motion could reach within one revolution.  Gate the step
  // against the previous fused pose and drop the lidar estimate when it
  // jumps sideways, backwards, or in heading — but only while a gps fix
  // exists to carry the scan, so outages keep whatever odometry offers.
  if (est && gps_pose) {
    double px = 0.0, py = 0.0, ph = 0.0;
    planarOf(pose_, px, py, ph);
    double ox = 0.0, oy = 0.0, oh = 0.0;
    planarOf(est->pose, ox, oy, oh);
    const double fwd = (ox - px) * std::cos(ph) + (oy - py) * std::sin(ph);
    const double lat = -(ox - px) * std::sin(ph) + (oy - py) * std::cos(ph);
    if (fwd < -0.5 || fwd > 2.5 || std::abs(lat) > 0.75 ||
        std::abs(wrapAngle(oh - ph)) > 0.35) {
      est.reset();
      res.odometry_rejected = true;
    }
  }
  // Robust blend: odometry drift episodes show up as a widening gap between
  // the two sources.  Inflate the gps weight with the squared gap so bias
  // washes out quickly, while the quiescent blend keeps the low gps weight
  // that holds fix noise out of the steering loop.
  double alpha = cfg_.fusion_alpha;
  if (est && gps_pose) {
    double ox = 0.0, oy = 0.0, oh = 0.0;
    planarOf(est->pose, ox, oy, oh);
    double gx = 0.0, gy = 0.0, gh = 0.0;
    planarOf(*gps_pose, gx, gy, gh);
    const double gap = std::hypot(ox - gx, oy - gy) / 0.45;
    alpha += (1.0 - alpha) * std::min(1.0, gap * gap);
  }
  const FusedPose fused = fusePose(est, gps_pose, alpha);
  pose_ = fused.pose;
  res.gps_used = gps.valid;

  double ex = 0.0, ey = 0.0, eh = 0.0;
  planarOf(pose_, ex, ey, eh);

  // Obstacle points into the world frame, height-gated to the cone band.
  // The scan lives in the sensor frame, mount_height above the vehicle
  // origin; poses are planar (yaw about the vertical axis), so the sensor
  // offset survives the rotation as a constant vertical shift.
  std::vector<Point3> world_pts;
  world_pts.reserve(seg.obstacle_indices.size());
  for (const std::size_t idx : seg.obstacle_indices) {
    Point3 w = applyPose(pose_, cloud[idx]);
    w.y -= cfg_.lidar.mount_height;
    if (w.y > -0.02 || w.y < -0.6) continue;  // y points down; up is negative
    world_pts.push_back(w);
  }
  recent_obstacles_.push_back(std::move(world_pts));
  while (recent_obstacles_.size() > static_cast<std::size_t>(cfg_.accumulate_scans)) {
    recent_obstacles_.pop_front();
  }
  std::vector<Point3> merged;
  std::size_t total = 0;
  for (const auto& v : recent_obstacles_) total += v.size();
  merged.reserve(total);
  for (const auto& v : recent_obstacles_) merged.insert(merged.end(), v.begin(), v.end());

  // Cluster and keep cone-sized blobs; the world ground plane is y = 0.
  const std::vector<Cluster> clusters =
      euclideanCluster(merged, cfg_.cluster_radius, cfg_.cluster_min_points);
  const std::vector<ConeCandidate> candidates =
      filterConeSized(clusters, ConeSizeWindow{}, PlaneModel{0.0, 0.0, 0.0});
  res.candidates = static_cast<int>(candidates.size());

  // Camera verification of every candidate.
  for (const ConeCandidate& cand : candidates) {
    const Vec2 planar{cand.position.z, -cand.position.x};
    const CameraObservation obs = observeCandidate(*track_, true_x, true_y, true_heading,
                                                   planar, cfg_.camera, camera_rng_);
    if (!obs.in_view) continue;
    const auto verdict = svmPredict(svm_, conePatchDescriptor(obs.patch));
    if (!verdict.first) continue;
    const ConeColor color =
        classifyColor(obs.patch, subSeed(master_seed_, 7, color_index_++));
    res.detections.push_back(planar);
    res.colored_detections.emplace_back(planar, color);
  }

  // Map-anchored drift correction when gps is out and the map is usable.
  if (!gps.valid && map_.size() >= 8 && !res.detections.empty()) {
    const PlanarCorrection corr = alignToMap(map_, res.detections, cfg_.alignment_gate);
    if (corr.matches >= 3) {
      res.alignment_used = true;
      for (Vec2& d : res.detections) d = corr.apply(d);
      for (auto& cd : res.colored_detections) cd.first = corr.apply(cd.first);
      const Vec2 corrected = corr.apply({ex, ey});
      ex = corrected.x;
      ey = corrected.y;
      eh = wrapAngle(eh + corr.dtheta);
      pose_ = planarPose(ex, ey, eh);
    }
  }
  odom_.anchor(pose_);

  if (insert_into_map) {
    for (const auto& cd : res.colored_detections) {
      map_.insert(cd.first, cd.second);
      ++res.inserted;
    }
  }

  travel_path_.push_back({ex, ey});
  res.fused_pose = pose_;
  res.est_x = ex;
  res.est_y = ey;
  res.est_heading = eh;
  ++scan_index_;
  return res;
}

}  // namespace racer::harness
