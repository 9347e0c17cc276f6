#include "racer/geometry.hpp"

#include <cmath>

#include "racer/errors.hpp"

namespace racer {

namespace {

constexpr double kPi = 3.14159265358979323846;

void normalizeQuat(double& x, double& y, double& z, double& w) {
  const double n2 = x * x + y * y + z * z + w * w;
  const double n = std::sqrt(n2);
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6) {
    throw InvalidInput("quaternion norm " + std::to_string(n) + " is not within 1e-6 of unit");
  }
  x /= n;
  y /= n;
  z /= n;
  w /= n;
}

}  // namespace

double wrapAngle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

RotationMatrix quatToRotation(double qx, double qy, double qz, double qw) {
  normalizeQuat(qx, qy, qz, qw);
  const double x = qx, y = qy, z = qz, w = qw;
  RotationMatrix r;
  r(0, 0) = 1.0 - 2.0 * (y * y + z * z);
  r(0, 1) = 2.0 * (x * y - z * w);
  r(0, 2) = 2.0 * (x * z + y * w);
  r(1, 0) = 2.0 * (x * y + z * w);
  r(1, 1) = 1.0 - 2.0 * (x * x + z * z);
  r(1, 2) = 2.0 * (y * z - x * w);
  r(2, 0) = 2.0 * (x * z - y * w);
  r(2, 1) = 2.0 * (y * z + x * w);
  r(2, 2) = 1.0 - 2.0 * (x * x + y * y);
  return r;
}

RotationMatrix quatToRotation(const PoseTransform& t) {
  return quatToRotation(t.qx, t.qy, t.qz, t.qw);
}

bool isRotationMatrix(const RotationMatrix& m, double tol) {
  const RotationMatrix sh = m.transpose() * m - RotationMatrix::Identity();
  return sh.cwiseAbs().maxCoeff() <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

PoseTransform makePose(const Eigen::Vector3d& t, double qx, double qy, double qz, double qw) {
  normalizeQuat(qx, qy, qz, qw);
  PoseTransform p;
  p.tx = t.x();
  p.ty = t.y();
  p.tz = t.z();
  p.qx = qx;
  p.qy = qy;
  p.qz = qz;
  p.qw = qw;
  return p;
}

Point3 applyPose(const PoseTransform& t, const Point3& p) {
  const Eigen::Vector3d v = quatToRotation(t) * toEigen(p) + t.translation();
  return fromEigen(v);
}

PoseTransform compose(const PoseTransform& a, const PoseTransform& b) {
  // Hamilton product a.q * b.q, components in (x, y, z, w) order.
  const double w = a.qw * b.qw - a.qx * b.qx - a.qy * b.qy - a.qz * b.qz;
  const double x = a.qw * b.qx + a.qx * b.qw + a.qy * b.qz - a.qz * b.qy;
  const double y = a.qw * b.qy - a.qx * b.qz + a.qy * b.qw + a.qz * b.qx;
  const double z = a.qw * b.qz + a.qx * b.qy - a.qy * b.qx + a.qz * b.qw;
  const Eigen::Vector3d t = quatToRotation(a) * b.translation() + a.translation();
  return makePose(t, x, y, z, w);
}

PoseTransform inversePose(const PoseTransform& t) {
  const RotationMatrix rt = quatToRotation(t).transpose();
  return makePose(-(rt * t.translation()), -t.qx, -t.qy, -t.qz, t.qw);
}

Point3 transferPoint(const Point3& x, const PoseTransform& t_k, const PoseTransform& t_hat) {
  return applyPose(compose(inversePose(t_hat), t_k), x);
}

PoseTransform interpolatePose(const PoseTransform& a, const PoseTransform& b, double alpha) {
  const Eigen::Vector3d t = (1.0 - alpha) * a.translation() + alpha * b.translation();

  double bx = b.qx, by = b.qy, bz = b.qz, bw = b.qw;
  double dot = a.qx * bx + a.qy * by + a.qz * bz + a.qw * bw;
  if (dot < 0.0) {  // take the short arc
    bx = -bx;
    by = -by;
    bz = -bz;
    bw = -bw;
    dot = -dot;
  }
  double wa, wb;
  if (dot > 1.0 - 1e-10) {  // nearly parallel: lerp is exact enough
    wa = 1.0 - alpha;
    wb = alpha;
  } else {
    const double theta = std::acos(std::min(1.0, dot));
    const double s = std::sin(theta);
    wa = std::sin((1.0 - alpha) * theta) / s;
    wb = std::sin(alpha * theta) / s;
  }
  double x = wa * a.qx + wb * bx;
  double y = wa * a.qy + wb * by;
  double z = wa * a.qz + wb * bz;
  double w = wa * a.qw + wb * bw;
  const double n = std::sqrt(x * x + y * y + z * z + w * w);
  return makePose(t, x / n, y / n, z / n, w / n);
}

PoseTransform planarPose(double px, double py, double heading) {
  const double h = 0.5 * heading;
  return makePose(Eigen::Vector3d(-py, 0.0, px), 0.0, -std::sin(h), 0.0, std::cos(h));
}

void planarOf(const PoseTransform& t, double& px, double& py, double& heading) {
  px = t.tz;
  py = -t.tx;
  const Eigen::Vector3d fwd = quatToRotation(t) * Eigen::Vector3d(0.0, 0.0, 1.0);
  heading = std::atan2(-fwd.x(), fwd.z());
}

Vec2 planarPosition(const PoseTransform& t) { return {t.tz, -t.tx}; }

double planarHeading(const PoseTransform& t) {
  const Eigen::Vector3d fwd = quatToRotation(t) * Eigen::Vector3d(0.0, 0.0, 1.0);
  return std::atan2(-fwd.x(), fwd.z());
}

Vec2 toPlanar(const PoseTransform& vehicle_pose, const Point3& p) {
  const Point3 w = applyPose(vehicle_pose, p);
  return {w.z, -w.x};
}

}  // namespace racer
