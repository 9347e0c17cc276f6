#include "racer/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "racer/errors.hpp"

namespace racer {

SimTrack::SimTrack(const TrackSpec& spec) : spec_(spec) {
  if (spec.straight_length <= 0.0 || spec.radius <= 0.0 || spec.width <= 0.0 ||
      spec.cone_spacing <= 0.0) {
    throw InvalidInput("SimTrack: all track dimensions must be positive");
  }
  if (spec.width >= 2.0 * spec.radius) {
    throw InvalidInput("SimTrack: width must be smaller than the turn diameter");
  }
  perimeter_ = 2.0 * spec.straight_length + 2.0 * M_PI * spec.radius;

  const int n = std::max(4, static_cast<int>(std::llround(perimeter_ / spec.cone_spacing)));
  const double step = perimeter_ / n;
  const double half = spec.width / 2.0;
  cones_.reserve(2 * n);
  for (int k = 0; k < n; ++k) {
    Vec2 pos;
    double heading = 0.0, kappa = 0.0;
    centerline(k * step, &pos, &heading, &kappa);
    const Vec2 left_n{-std::sin(heading), std::cos(heading)};
    const ConeColor left_c = k == 0 ? ConeColor::Yellow : ConeColor::Red;
    const ConeColor right_c = k == 0 ? ConeColor::Yellow : ConeColor::Blue;
    cones_.push_back({pos + left_n * half, left_c});
    cones_.push_back({pos - left_n * half, right_c});
  }
}

void SimTrack::centerline(double s, Vec2* pos, double* heading, double* kappa) const {
  const double l = spec_.straight_length;
  const double r = spec_.radius;
  s = std::fmod(s, perimeter_);
  if (s < 0.0) s += perimeter_;

  if (s < l) {  // bottom straight, heading +x
    *pos = {s, 0.0};
    *heading = 0.0;
    *kappa = 0.0;
    return;
  }
  s -= l;
  if (s < M_PI * r) {  // right-end arc, turning left
    const double phi = s / r;
    *pos = {l + r * std::sin(phi), r - r * std::cos(phi)};
    *heading = phi;
    *kappa = 1.0 / r;
    return;
  }
  s -= M_PI * r;
  if (s < l) {  // top straight, heading -x
    *pos = {l - s, 2.0 * r};
    *heading = M_PI;
    *kappa = 0.0;
    return;
  }
  s -= l;
  {  // left-end arc, turning left, back to the start
    const double phi = s / r;
    *pos = {-r * std::sin(phi), r + r * std::cos(phi)};
    *heading = wrapAngle(M_PI + phi);
    *kappa = 1.0 / r;
  }
}

void SimTrack::locate(const Vec2& p, double* s, double* lateral) const {
  const double l = spec_.straight_length;
  const double r = spec_.radius;
  struct Candidate {
    double dist, s, lateral;
  };
  Candidate best{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  auto consider = [&](double dist, double cs, double clat) {
    if (dist < best.dist) best = {dist, cs, clat};
  };

  {  // bottom straight: q = (clamp(px), 0), left normal +y
    const double t = std::clamp(p.x, 0.0, l);
    const double dist = std::hypot(p.x - t, p.y);
    consider(dist, t, p.y);
  }
  {  // right arc around (l, r)
    const Vec2 rel{p.x - l, p.y - r};
    double phi = std::atan2(rel.x, -rel.y);  // 0 at arc start, pi at arc end
    phi = std::clamp(phi, 0.0, M_PI);
    const Vec2 q{l + r * std::sin(phi), r - r * std::cos(phi)};
    const double dist = std::hypot(p.x - q.x, p.y - q.y);
    const double rho = std::hypot(rel.x, rel.y);
    consider(dist, l + r * phi, r - rho);
  }
  {  // top straight: q = (clamp(px), 2r), left normal -y
    const double t = std::clamp(p.x, 0.0, l);
    const double dist = std::hypot(p.x - t, p.y - 2.0 * r);
    consider(dist, l + M_PI * r + (l - t), 2.0 * r - p.y);
  }
  {  // left arc around (0, r)
    const Vec2 rel{p.x, p.y - r};
    double phi = std::atan2(-rel.x, rel.y);
    phi = std::clamp(phi, 0.0, M_PI);
    const Vec2 q{-r * std::sin(phi), r + r * std::cos(phi)};
    const double dist = std::hypot(p.x - q.x, p.y - q.y);
    const double rho = std::hypot(rel.x, rel.y);
    consider(dist, 2.0 * l + M_PI * r + r * phi, r - rho);
  }
  *s = best.s;
  *lateral = best.lateral;
}

// ---------------------------------------------------------------------------
// Lidar.

LaserScan simulateLidar(const SimTrack& track, double px, double py, double heading,
                        const LidarConfig& cfg, Rng& rng, double timestamp) {
  if (cfg.layers < 1 || cfg.azimuth_step_deg <= 0.0 || cfg.max_range <= 0.0) {
    throw InvalidInput("simulateLidar: invalid configuration");
  }
  const int az_steps = static_cast<int>(std::llround(360.0 / cfg.azimuth_step_deg));
  const double az_step = 2.0 * M_PI / az_steps;
  const double deg = M_PI / 180.0;
  const double elev_step =
      cfg.layers > 1 ? (cfg.elev_max_deg - cfg.elev_min_deg) * deg / (cfg.layers - 1) : 0.0;

  // Sensor origin in 3d world coordinates (y down, ground plane y = 0).
  const double ox = -py;          // world x is right of the planar frame
  const double oy = -cfg.mount_height;
  const double oz = px;           // world z is planar forward
  const double ch = std::cos(heading), sh = std::sin(heading);

  // Azimuth buckets of cone candidates, in the sensor frame.
  std::vector<std::vector<int>> buckets(az_steps);
  const auto& cones = track.cones();
  for (int c = 0; c < static_cast<int>(cones.size()); ++c) {
    const Vec2 rel{cones[c].position.x - px, cones[c].position.y - py};
    const double fwd = ch * rel.x + sh * rel.y;
    const double left = -sh * rel.x + ch * rel.y;
    const double dist = std::hypot(fwd, left);
    if (dist > cfg.max_range + cfg.cone_radius || dist < 1e-6) continue;
    const double az_center = std::atan2(-left, fwd);  // sensor x points right
    const double az_half = std::asin(std::min(1.0, cfg.cone_radius / dist)) + 2.0 * az_step;
    const int lo = static_cast<int>(std::floor((az_center - az_half + M_PI) / az_step));
    const int hi = static_cast<int>(std::ceil((az_center + az_half + M_PI) / az_step));
    for (int i = lo; i <= hi; ++i) {
      int idx = i % az_steps;
      if (idx < 0) idx += az_steps;
      buckets[idx].push_back(c);
    }
  }

  LaserScan scan;
  scan.timestamp = timestamp;
  scan.layers.resize(cfg.layers);
  for (int layer = 0; layer < cfg.layers; ++layer) {
    const double elev = (cfg.elev_min_deg * deg) + layer * elev_step;
    const double ce = std::cos(elev), se = std::sin(elev);
    auto& ring = scan.layers[layer];
    ring.reserve(az_steps / 4);
    for (int a = 0; a < az_steps; ++a) {
      const double az = -M_PI + a * az_step;
      // Sensor-frame direction: x right, y down, z forward.
      const double dsx = ce * std::sin(az);
      const double dsy = -se;
      const double dsz = ce * std::cos(az);
      // World direction (rotate about the vertical by the heading).
      // Sensor z maps to planar forward (cos h, sin h), sensor x to right.
      const double fwd_x = ch * dsz - sh * (-dsx);  // planar components
      const double fwd_y = sh * dsz + ch * (-dsx);
      const double dwx = -fwd_y;
      const double dwy = dsy;
      const double dwz = fwd_x;

      double t_hit = std::numeric_limits<double>::infinity();
      if (dwy > 1e-12) {
        const double t_ground = (0.0 - oy) / dwy;
        if (t_ground > 0.0 && t_ground <= cfg.max_range) t_hit = t_ground;
      }
      for (int c : buckets[a]) {
        const TrackCone& cone = cones[c];
        const double cx3 = -cone.position.y;
        const double cz3 = cone.position.x;
        // Quadratic for the ray-cylinder intersection in the xz plane.
        const double rx = ox - cx3, rz = oz - cz3;
        const double qa = dwx * dwx + dwz * dwz;
        if (qa < 1e-12) continue;
        const double qb = 2.0 * (rx * dwx + rz * dwz);
        const double qc = rx * rx + rz * rz - cfg.cone_radius * cfg.cone_radius;
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc < 0.0) continue;
        const double t = (-qb - std::sqrt(disc)) / (2.0 * qa);
        if (t <= 0.0 || t > cfg.max_range || t >= t_hit) continue;
        const double hit_y = oy + t * dwy;
        if (hit_y < -cfg.cone_height || hit_y > 0.0) continue;  // above or below the body
        t_hit = t;
      }
      if (!std::isfinite(t_hit)) continue;
      const double t_noisy = std::max(0.0, t_hit + rng.normal(0.0, cfg.range_noise));
      ring.push_back({dsx * t_noisy, dsy * t_noisy, dsz * t_noisy});
    }
  }
  return scan;
}

GpsFix simulateGps(double px, double py, double heading, const GpsConfig& cfg, Rng& rng) {
  GpsFix fix;
  // Draw the dropout decision first so the noise stream stays aligned.
  const bool dropped = rng.uniform() < cfg.dropout_prob;
  fix.x = px + rng.normal(0.0, cfg.pos_sigma);
  fix.y = py + rng.normal(0.0, cfg.pos_sigma);
  fix.heading = wrapAngle(heading + rng.normal(0.0, cfg.heading_sigma));
  fix.valid = !dropped;
  return fix;
}

// ---------------------------------------------------------------------------
// Camera.

namespace {

double nominalHue(ConeColor c) {
  switch (c) {
    case ConeColor::Red: return 0.0;
    case ConeColor::Yellow: return 60.0;
    case ConeColor::Blue: return 240.0;
    default: return 120.0;
  }
}

double wrapHue(double h) {
  h = std::fmod(h, 360.0);
  if (h < 0.0) h += 360.0;
  return h;
}

void paintGround(ImagePatch* patch, const CameraConfig& cfg, Rng& rng) {
  for (int y = 0; y < patch->height; ++y) {
    for (int x = 0; x < patch->width; ++x) {
      double* p = patch->px(x, y);
      p[0] = wrapHue(110.0 + 10.0 * rng.normal());
      p[1] = std::clamp(0.08 + 0.04 * rng.normal() + cfg.noise_sigma * rng.normal(), 0.0, 0.2);
      p[2] = std::clamp(0.38 + 0.06 * rng.normal(), 0.05, 0.8);
    }
  }
}

}  // namespace

ImagePatch renderConePatch(ConeColor color, double range, const CameraConfig& cfg, Rng& rng) {
  if (color == ConeColor::Unknown) {
    throw InvalidInput("renderConePatch: cone color must be known");
  }
  const int n = cfg.patch_size;
  ImagePatch patch = ImagePatch::hsv(n, n);
  paintGround(&patch, cfg, rng);

  const double span = static_cast<double>(n);
  const double h_px =
      std::clamp(span * 0.9 * (2.0 / std::max(range, 1.0)), span * 0.12, span * 0.9);
  const double cx = (n - 1) / 2.0;
  const double apex_y = (n - 1) / 2.0 - h_px / 2.0;
  const double base_y = apex_y + h_px;
  const double half_base = 0.45 * h_px;
  const double hue0 = nominalHue(color);

  for (int y = 0; y < n; ++y) {
    if (y < apex_y || y > base_y) continue;
    const double frac = (y - apex_y) / h_px;
    const double half = half_base * frac;
    for (int x = 0; x < n; ++x) {
      if (std::abs(x - cx) > half) continue;
      double* p = patch.px(x, y);
      p[0] = wrapHue(hue0 + 5.0 * rng.normal() * (1.0 + cfg.noise_sigma));
      p[1] = std::clamp(0.85 + 0.05 * rng.normal(), 0.5, 1.0);
      p[2] = std::clamp(0.85 + 0.05 * rng.normal(), 0.3, 1.0);
    }
  }
  return patch;
}

ImagePatch renderNegativePatch(const CameraConfig& cfg, Rng& rng) {
  const int n = cfg.patch_size;
  ImagePatch patch = ImagePatch::hsv(n, n);
  paintGround(&patch, cfg, rng);
  const std::uint64_t variant = rng.uniformInt(3);
  if (variant == 1) {
    // Matte box: strong value edges but no triangular silhouette and no
    // saturated color.
    const int bw = 12 + static_cast<int>(rng.uniformInt(28));
    const int bh = 10 + static_cast<int>(rng.uniformInt(24));
    const int x0 = static_cast<int>(rng.uniformInt(std::max(1, n - bw)));
    const int y0 = static_cast<int>(rng.uniformInt(std::max(1, n - bh)));
    for (int y = y0; y < std::min(n, y0 + bh); ++y) {
      for (int x = x0; x < std::min(n, x0 + bw); ++x) {
        double* p = patch.px(x, y);
        p[0] = wrapHue(30.0 + 10.0 * rng.normal());
        p[1] = std::clamp(0.05 + 0.02 * rng.normal(), 0.0, 0.12);
        p[2] = std::clamp(0.62 + 0.05 * rng.normal(), 0.2, 0.9);
      }
    }
  } else if (variant == 2) {
    // Bright horizontal stripe (painted line on the ground).
    const int y0 = 8 + static_cast<int>(rng.uniformInt(n - 20));
    const int sh = 4 + static_cast<int>(rng.uniformInt(6));
    for (int y = y0; y < std::min(n, y0 + sh); ++y) {
      for (int x = 0; x < n; ++x) {
        double* p = patch.px(x, y);
        p[0] = wrapHue(45.0 + 8.0 * rng.normal());
        p[1] = std::clamp(0.07 + 0.03 * rng.normal(), 0.0, 0.14);
        p[2] = std::clamp(0.8 + 0.05 * rng.normal(), 0.4, 1.0);
      }
    }
  }
  return patch;
}

CameraObservation observeCandidate(const SimTrack& track, double px, double py, double heading,
                                   const Vec2& candidate_world, const CameraConfig& cfg,
                                   Rng& rng) {
  CameraObservation obs;
  const Vec2 rel{candidate_world.x - px, candidate_world.y - py};
  const double ch = std::cos(heading), sh = std::sin(heading);
  const double fwd = ch * rel.x + sh * rel.y;
  const double left = -sh * rel.x + ch * rel.y;
  obs.range = std::hypot(fwd, left);
  const double bearing = std::atan2(left, fwd);
  obs.in_view =
      obs.range <= cfg.max_range && std::abs(bearing) <= cfg.fov_deg * M_PI / 180.0 / 2.0;

  const TrackCone* nearest = nullptr;
  double best_d2 = 0.6 * 0.6;
  for (const TrackCone& c : track.cones()) {
    const Vec2 d = c.position - candidate_world;
    const double d2 = d.dot(d);
    if (d2 < best_d2) {
      best_d2 = d2;
      nearest = &c;
    }
  }
  if (nearest != nullptr && obs.in_view) {
    obs.true_cone = true;
    obs.true_color = nearest->color;
    obs.patch = renderConePatch(nearest->color, obs.range, cfg, rng);
  } else {
    obs.patch = renderNegativePatch(cfg, rng);
  }
  return obs;
}

}  // namespace racer
