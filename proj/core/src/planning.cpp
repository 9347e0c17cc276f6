#include "racer/planning.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "racer/errors.hpp"

namespace racer {

Vec2 CubicSegment::position(double u) const {
  const double u2 = u * u, u3 = u2 * u;
  return {ax[0] + ax[1] * u + ax[2] * u2 + ax[3] * u3,
          ay[0] + ay[1] * u + ay[2] * u2 + ay[3] * u3};
}

Vec2 CubicSegment::derivative(double u) const {
  const double u2 = u * u;
  return {ax[1] + 2.0 * ax[2] * u + 3.0 * ax[3] * u2,
          ay[1] + 2.0 * ay[2] * u + 3.0 * ay[3] * u2};
}

Vec2 CubicSegment::second(double u) const {
  return {2.0 * ax[2] + 6.0 * ax[3] * u, 2.0 * ay[2] + 6.0 * ay[3] * u};
}

double CubicSegment::curvature(double u) const {
  const Vec2 d = derivative(u);
  const Vec2 dd = second(u);
  const double speed2 = d.dot(d);
  if (speed2 < 1e-12) throw DegenerateError("curvature: stationary point on segment");
  return d.cross(dd) / (speed2 * std::sqrt(speed2));
}

CubicSegment fitSegment(const std::array<Vec2, 4>& pts, double u1, double u2) {
  if (!(0.0 < u1 && u1 < u2 && u2 < 1.0)) {
    throw InvalidInput("fitSegment: interior parameters must satisfy 0 < u1 < u2 < 1");
  }
  const double knots[4] = {0.0, u1, u2, 1.0};
  Eigen::Matrix4d v;
  for (int i = 0; i < 4; ++i) {
    const double u = knots[i];
    v(i, 0) = 1.0;
    v(i, 1) = u;
    v(i, 2) = u * u;
    v(i, 3) = u * u * u;
  }
  Eigen::PartialPivLU<Eigen::Matrix4d> lu(v);
  Eigen::Vector4d bx, by;
  for (int i = 0; i < 4; ++i) {
    bx(i) = pts[i].x;
    by(i) = pts[i].y;
  }
  const Eigen::Vector4d cx = lu.solve(bx);
  const Eigen::Vector4d cy = lu.solve(by);
  CubicSegment seg;
  for (int i = 0; i < 4; ++i) {
    seg.ax[i] = cx(i);
    seg.ay[i] = cy(i);
  }
  return seg;
}

namespace {

// Chord-length parameters for a four-point window; throws on coincident
// neighbors because the parameterization collapses.
void chordParams(const Vec2& p0, const Vec2& p1, const Vec2& p2, const Vec2& p3, double* u1,
                 double* u2) {
  const double c0 = (p1 - p0).norm();
  const double c1 = (p2 - p1).norm();
  const double c2 = (p3 - p2).norm();
  const double total = c0 + c1 + c2;
  if (c0 < 1e-9 || c1 < 1e-9 || c2 < 1e-9) {
    throw InvalidInput("buildTrajectory: coincident consecutive points");
  }
  *u1 = c0 / total;
  *u2 = (c0 + c1) / total;
}

}  // namespace

Trajectory buildTrajectory(const std::vector<Vec2>& points, bool closed) {
  std::vector<Vec2> pts = points;
  if (closed && pts.size() >= 2) {
    const Vec2 d = pts.back() - pts.front();
    if (d.dot(d) < 1e-18) pts.pop_back();  // tolerate an explicitly repeated start
  }
  const std::size_t n = pts.size();
  if (n < 4) throw InsufficientData("buildTrajectory: need at least four points");

  Trajectory traj;
  traj.closed = closed;
  if (closed) {
    traj.pieces.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2& a = pts[(k + n - 1) % n];
      const Vec2& b = pts[k];
      const Vec2& c = pts[(k + 1) % n];
      const Vec2& d = pts[(k + 2) % n];
      double u1 = 0.0, u2 = 0.0;
      chordParams(a, b, c, d, &u1, &u2);
      traj.pieces.push_back({fitSegment({a, b, c, d}, u1, u2), u1, u2});
    }
    return traj;
  }

  traj.pieces.reserve(n - 3);
  for (std::size_t i = 0; i + 3 < n; ++i) {
    double u1 = 0.0, u2 = 0.0;
    chordParams(pts[i], pts[i + 1], pts[i + 2], pts[i + 3], &u1, &u2);
    TrajectoryPiece piece{fitSegment({pts[i], pts[i + 1], pts[i + 2], pts[i + 3]}, u1, u2), u1,
                          u2};
    if (i == 0) piece.u_lo = 0.0;          // cover the first span too
    if (i + 4 == n) piece.u_hi = 1.0;      // cover the last span too
    traj.pieces.push_back(piece);
  }
  return traj;
}

namespace {

struct ArcEntry {
  double s;
  std::size_t piece;
  double u;
};

std::vector<ArcEntry> arcTable(const Trajectory& traj, int fine) {
  if (traj.pieces.empty()) throw InsufficientData("trajectory has no pieces");
  if (fine < 2) throw InvalidInput("fine_subdivisions must be at least 2");
  std::vector<ArcEntry> table;
  table.reserve(traj.pieces.size() * fine + 1);
  double s = 0.0;
  Vec2 prev = traj.pieces.front().seg.position(traj.pieces.front().u_lo);
  table.push_back({0.0, 0, traj.pieces.front().u_lo});
  for (std::size_t p = 0; p < traj.pieces.size(); ++p) {
    const TrajectoryPiece& piece = traj.pieces[p];
    for (int k = 1; k <= fine; ++k) {
      const double u = piece.u_lo + (piece.u_hi - piece.u_lo) * k / fine;
      const Vec2 q = piece.seg.position(u);
      s += (q - prev).norm();
      prev = q;
      table.push_back({s, p, u});
    }
  }
  return table;
}

}  // namespace

double trajectoryLength(const Trajectory& traj, int fine_subdivisions) {
  return arcTable(traj, fine_subdivisions).back().s;
}

std::vector<Waypoint> sampleWaypoints(const Trajectory& traj, double spacing,
                                      int fine_subdivisions) {
  if (spacing <= 0.0) throw InvalidInput("sampleWaypoints: spacing must be positive");
  const std::vector<ArcEntry> table = arcTable(traj, fine_subdivisions);
  const double total = table.back().s;
  if (total <= 0.0) throw DegenerateError("sampleWaypoints: zero-length trajectory");

  const int steps = std::max(1, static_cast<int>(std::llround(total / spacing)));
  const double actual = total / steps;
  const int count = traj.closed ? steps : steps + 1;

  std::vector<Waypoint> out;
  out.reserve(count);
  std::size_t lo = 0;
  for (int i = 0; i < count; ++i) {
    const double target = std::min(actual * i, total);
    while (lo + 1 < table.size() && table[lo + 1].s < target) ++lo;
    const ArcEntry& a = table[lo];
    const ArcEntry& b = table[std::min(lo + 1, table.size() - 1)];
    double u;
    std::size_t piece;
    if (b.piece != a.piece || b.s <= a.s) {
      // Piece boundary (same position evaluated in either piece) or a
      // degenerate step; evaluate at the later entry.
      piece = b.piece;
      u = b.u;
      if (target <= a.s) {
        piece = a.piece;
        u = a.u;
      }
    } else {
      const double t = (target - a.s) / (b.s - a.s);
      piece = a.piece;
      u = a.u + (b.u - a.u) * t;
    }
    const CubicSegment& seg = traj.pieces[piece].seg;
    Waypoint wp;
    wp.position = seg.position(u);
    const Vec2 d = seg.derivative(u);
    wp.heading = std::atan2(d.y, d.x);
    wp.curvature = seg.curvature(u);
    wp.s = target;
    out.push_back(wp);
  }
  return out;
}

PathProjection projectOntoWaypoints(const std::vector<Waypoint>& waypoints, const Vec2& p,
                                    bool closed) {
  if (waypoints.size() < 2) {
    throw InsufficientData("projectOntoWaypoints: need at least two waypoints");
  }
  const std::size_t segs = closed ? waypoints.size() : waypoints.size() - 1;
  PathProjection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < segs; ++i) {
    const Waypoint& a = waypoints[i];
    const Waypoint& b = waypoints[(i + 1) % waypoints.size()];
    const Vec2 ab = b.position - a.position;
    const double len2 = ab.dot(ab);
    if (len2 <= 0.0) continue;
    double t = (p - a.position).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q = a.position + ab * t;
    const Vec2 dq = p - q;
    const double d2 = dq.dot(dq);
    if (d2 < best_d2) {
      best_d2 = d2;
      best.segment = i;
      best.t = t;
      best.point = q;
      best.heading = std::atan2(ab.y, ab.x);
      best.curvature = a.curvature + (b.curvature - a.curvature) * t;
      const double seg_len = std::sqrt(len2);
      // Closed paths wrap; the final segment reuses the start waypoint whose
      // s is 0, so extend from the last stored arc length instead.
      const double s_a = a.s;
      best.s = s_a + seg_len * t;
      const double side = ab.cross(dq);
      best.lateral = (side >= 0.0 ? 1.0 : -1.0) * std::sqrt(d2);
    }
  }
  if (!std::isfinite(best_d2)) {
    throw DegenerateError("projectOntoWaypoints: all segments degenerate");
  }
  return best;
}

void saveWaypoints(const std::string& path, const std::vector<Waypoint>& waypoints) {
  std::ofstream f(path);
  if (!f) throw IoError("saveWaypoints: cannot open " + path);
  f << "# racer-waypoints v1\n";
  f << "count " << waypoints.size() << "\n";
  char buf[200];
  for (const Waypoint& wp : waypoints) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %.9g %.9g\n", wp.s, wp.position.x,
                  wp.position.y, wp.heading, wp.curvature);
    f << buf;
  }
  if (!f) throw IoError("saveWaypoints: write failed for " + path);
}

std::vector<Waypoint> loadWaypoints(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("loadWaypoints: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != "# racer-waypoints v1") {
    throw IoError("loadWaypoints: missing format header in " + path);
  }
  std::string key;
  std::size_t count = 0;
  f >> key >> count;
  if (key != "count") throw IoError("loadWaypoints: expected count in " + path);
  std::vector<Waypoint> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    f >> out[i].s >> out[i].position.x >> out[i].position.y >> out[i].heading >>
        out[i].curvature;
  }
  if (!f) throw IoError("loadWaypoints: truncated waypoint list in " + path);
  return out;
}

}  // namespace racer
