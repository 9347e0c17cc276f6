#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <cmath>

namespace racer {

/// Frame conventions used across the whole stack
/// ----------------------------------------------
/// 3D sensor/vehicle/world frames are camera-style:
///   x — lateral, positive right
///   y — vertical axis of the ground-plane model (ground sits at y = +h
///       in the sensor frame, h being the sensor mount height)
///   z — forward
/// The planar world used by mapping/planning/control is right-handed 2D:
///   planar x = 3D z (forward at zero heading)
///   planar y = -3D x (left)
///   heading  = CCW from above, zero along planar +x
/// planarPose()/planarOf() are the only places that convert; everything
/// else sticks to one of the two representations.

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Eigen::Vector3d toEigen(const Point3& p) { return {p.x, p.y, p.z}; }
inline Point3 fromEigen(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

/// Minimal 2D vector for the planar world (kept POD for file records).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

using RotationMatrix = Eigen::Matrix3d;

/// Rigid transform mapping points of its own frame into the parent frame:
/// p_parent = R(q) * p + t. Quaternion is (x, y, z, w), unit norm.
struct PoseTransform {
  double tx = 0.0, ty = 0.0, tz = 0.0;
  double qx = 0.0, qy = 0.0, qz = 0.0, qw = 1.0;

  Eigen::Vector3d translation() const { return {tx, ty, tz}; }
};

/// Wrap an angle to (-pi, pi].
double wrapAngle(double a);

/// Rotation matrix of a unit quaternion (x, y, z, w).
/// Inputs within 1e-6 of unit norm are renormalized; anything further off
/// is rejected as invalid.
RotationMatrix quatToRotation(double qx, double qy, double qz, double qw);
RotationMatrix quatToRotation(const PoseTransform& t);

bool isRotationMatrix(const RotationMatrix& m, double tol = 1e-9);

PoseTransform makePose(const Eigen::Vector3d& t, double qx, double qy, double qz, double qw);

/// p_parent = R * p + t
Point3 applyPose(const PoseTransform& t, const Point3& p);

/// compose(a, b): first apply b, then a. Equals the matrix product of the
/// two homogeneous transforms.
PoseTransform compose(const PoseTransform& a, const PoseTransform& b);

PoseTransform inversePose(const PoseTransform& t);

/// Re-express X (given in frame k with world pose T_k) in frame `hat`
/// (world pose T_hat): X_hat = R_hat^-1 (R_k X + t_k - t_hat).
Point3 transferPoint(const Point3& x, const PoseTransform& t_k, const PoseTransform& t_hat);

/// Blend two poses: linear on translation, spherical on rotation.
/// alpha = 0 gives a, alpha = 1 gives b.
PoseTransform interpolatePose(const PoseTransform& a, const PoseTransform& b, double alpha);

/// Planar embedding (see the convention block above).
PoseTransform planarPose(double px, double py, double heading);
void planarOf(const PoseTransform& t, double& px, double& py, double& heading);
Vec2 planarPosition(const PoseTransform& t);
double planarHeading(const PoseTransform& t);

/// Map a vehicle-frame 3D point to planar world coordinates through a pose.
Vec2 toPlanar(const PoseTransform& vehicle_pose, const Point3& p);

}  // namespace racer
