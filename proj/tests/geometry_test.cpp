#include <cmath>

#include "doctest.h"
#include "racer/errors.hpp"
#include "racer/geometry.hpp"
#include "racer/random.hpp"

using namespace racer;

namespace {

PoseTransform yawPose(double tx, double ty, double tz, double yaw) {
  return makePose({tx, ty, tz}, 0.0, 0.0, std::sin(yaw / 2.0), std::cos(yaw / 2.0));
}

PoseTransform randomPose(Rng& rng) {
  Eigen::Vector4d q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
  q.normalize();
  return makePose({rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)},
                  q.x(), q.y(), q.z(), q.w());
}

double poseDistance(const PoseTransform& a, const PoseTransform& b) {
  double d = std::abs(a.tx - b.tx) + std::abs(a.ty - b.ty) + std::abs(a.tz - b.tz);
  // Quaternions double-cover rotations; compare up to sign.
  const double dot = a.qx * b.qx + a.qy * b.qy + a.qz * b.qz + a.qw * b.qw;
  return d + (1.0 - std::abs(dot));
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("wrapAngle maps into (-pi, pi]") {
    CHECK(wrapAngle(0.0) == doctest::Approx(0.0));
    CHECK(wrapAngle(M_PI) == doctest::Approx(M_PI));
    CHECK(wrapAngle(-M_PI) == doctest::Approx(M_PI));
    CHECK(wrapAngle(3.0 * M_PI) == doctest::Approx(M_PI));
    CHECK(wrapAngle(2.0 * M_PI) == doctest::Approx(0.0));
    CHECK(wrapAngle(M_PI + 0.1) == doctest::Approx(-M_PI + 0.1));
    CHECK(wrapAngle(-M_PI - 0.1) == doctest::Approx(M_PI - 0.1));
    for (int k = -7; k <= 7; ++k) {
      const double a = 0.37 + k * 2.0 * M_PI;
      CHECK(wrapAngle(a) == doctest::Approx(0.37));
    }
  }

  TEST_CASE("identity quaternion gives the identity matrix") {
    const RotationMatrix r = quatToRotation(0.0, 0.0, 0.0, 1.0);
    CHECK((r - RotationMatrix::Identity()).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("90-degree yaw quaternion gives the expected matrix") {
    const double s = std::sqrt(0.5);
    const RotationMatrix r = quatToRotation(0.0, 0.0, s, s);
    RotationMatrix expected;
    expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    CHECK((r - expected).norm() == doctest::Approx(0.0).epsilon(1e-9));
  }

  TEST_CASE("random unit quaternions give orthonormal right-handed matrices") {
    Rng rng(41);
    for (int i = 0; i < 1000; ++i) {
      Eigen::Vector4d q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
      q.normalize();
      const RotationMatrix r = quatToRotation(q.x(), q.y(), q.z(), q.w());
      CHECK(isRotationMatrix(r));
      CHECK((r.transpose() * r - RotationMatrix::Identity()).norm() < 1e-9);
      CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("quaternions slightly off unit are renormalized, garbage rejected") {
    const RotationMatrix r = quatToRotation(0.0, 0.0, 0.0, 1.0 + 5e-7);
    CHECK(isRotationMatrix(r, 1e-9));
    CHECK_THROWS_AS(quatToRotation(0.0, 0.0, 0.0, 1.5), InvalidInput);
    CHECK_THROWS_AS(quatToRotation(0.0, 0.0, 0.0, 0.0), InvalidInput);
  }

  TEST_CASE("isRotationMatrix rejects scaled and reflected matrices") {
    CHECK(isRotationMatrix(RotationMatrix::Identity()));
    CHECK_FALSE(isRotationMatrix(2.0 * RotationMatrix::Identity()));
    RotationMatrix reflect = RotationMatrix::Identity();
    reflect(2, 2) = -1.0;
    CHECK_FALSE(isRotationMatrix(reflect));
  }

  TEST_CASE("applyPose rotates then translates") {
    const PoseTransform t = yawPose(1.0, 2.0, 3.0, M_PI / 2.0);
    const Point3 p = applyPose(t, {1.0, 0.0, 0.0});
    CHECK(p.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(p.z == doctest::Approx(3.0).epsilon(1e-12));
  }

  TEST_CASE("compose with identity and with the inverse") {
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
      const PoseTransform t = randomPose(rng);
      CHECK(poseDistance(compose(t, PoseTransform{}), t) < 1e-9);
      CHECK(poseDistance(compose(PoseTransform{}, t), t) < 1e-9);
      CHECK(poseDistance(compose(t, inversePose(t)), PoseTransform{}) < 1e-9);
      CHECK(poseDistance(compose(inversePose(t), t), PoseTransform{}) < 1e-9);
    }
  }

  TEST_CASE("two 90-degree yaws compose into a 180-degree yaw") {
    const PoseTransform quarter = yawPose(0.0, 0.0, 0.0, M_PI / 2.0);
    const PoseTransform half = compose(quarter, quarter);
    const RotationMatrix expected = quatToRotation(yawPose(0, 0, 0, M_PI));
    CHECK((quatToRotation(half) - expected).norm() < 1e-9);
  }

  TEST_CASE("compose is associative and matches the matrix product") {
    Rng rng(11);
    for (int i = 0; i < 30; ++i) {
      const PoseTransform a = randomPose(rng);
      const PoseTransform b = randomPose(rng);
      const PoseTransform c = randomPose(rng);
      CHECK(poseDistance(compose(compose(a, b), c), compose(a, compose(b, c))) < 1e-9);

      const RotationMatrix rab = quatToRotation(compose(a, b));
      CHECK((rab - quatToRotation(a) * quatToRotation(b)).norm() < 1e-9);
      const Point3 p{0.3, -0.7, 1.1};
      const Point3 via_compose = applyPose(compose(a, b), p);
      const Point3 via_chain = applyPose(a, applyPose(b, p));
      CHECK(via_compose.x == doctest::Approx(via_chain.x).epsilon(1e-9));
      CHECK(via_compose.y == doctest::Approx(via_chain.y).epsilon(1e-9));
      CHECK(via_compose.z == doctest::Approx(via_chain.z).epsilon(1e-9));
    }
  }

  TEST_CASE("transferPoint: same frame is the identity") {
    const Point3 p = transferPoint({1.0, 0.0, 0.0}, PoseTransform{}, PoseTransform{});
    CHECK(p.x == doctest::Approx(1.0));
    CHECK(p.y == doctest::Approx(0.0));
    CHECK(p.z == doctest::Approx(0.0));
  }

  TEST_CASE("transferPoint: frame-k origin seen from a translated frame") {
    const PoseTransform hat = makePose({1.0, 2.0, 3.0}, 0, 0, 0, 1);
    const Point3 p = transferPoint({0.0, 0.0, 0.0}, PoseTransform{}, hat);
    CHECK(p.x == doctest::Approx(-1.0));
    CHECK(p.y == doctest::Approx(-2.0));
    CHECK(p.z == doctest::Approx(-3.0));
  }

  TEST_CASE("transferPoint round trip and distance preservation") {
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
      const PoseTransform t_k = randomPose(rng);
      const PoseTransform t_hat = randomPose(rng);
      const Point3 a{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
      const Point3 b{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};

      const Point3 a_hat = transferPoint(a, t_k, t_hat);
      const Point3 b_hat = transferPoint(b, t_k, t_hat);
      const double d0 = (toEigen(a) - toEigen(b)).norm();
      const double d1 = (toEigen(a_hat) - toEigen(b_hat)).norm();
      CHECK(d0 == doctest::Approx(d1).epsilon(1e-9));

      const Point3 back = transferPoint(a_hat, t_hat, t_k);
      CHECK(back.x == doctest::Approx(a.x).epsilon(1e-9));
      CHECK(back.y == doctest::Approx(a.y).epsilon(1e-9));
      CHECK(back.z == doctest::Approx(a.z).epsilon(1e-9));

      // With identical frames the transfer is the identity.
      const Point3 same = transferPoint(a, t_k, t_k);
      CHECK(same.x == doctest::Approx(a.x).epsilon(1e-9));
    }
  }

  TEST_CASE("interpolatePose hits both endpoints and the midpoint translation") {
    Rng rng(17);
    const PoseTransform a = randomPose(rng);
    const PoseTransform b = randomPose(rng);
    CHECK(poseDistance(interpolatePose(a, b, 0.0), a) < 1e-9);
    CHECK(poseDistance(interpolatePose(a, b, 1.0), b) < 1e-9);
    const PoseTransform mid = interpolatePose(a, b, 0.5);
    CHECK(mid.tx == doctest::Approx(0.5 * (a.tx + b.tx)).epsilon(1e-12));
    CHECK(mid.ty == doctest::Approx(0.5 * (a.ty + b.ty)).epsilon(1e-12));
    CHECK(mid.tz == doctest::Approx(0.5 * (a.tz + b.tz)).epsilon(1e-12));
    CHECK(isRotationMatrix(quatToRotation(mid), 1e-9));
  }

  TEST_CASE("planar embedding round trip") {
    for (double h : {-3.0, -1.0, 0.0, 0.4, 2.9}) {
      const PoseTransform t = planarPose(2.5, -1.5, h);
      double px = 0.0, py = 0.0, heading = 0.0;
      planarOf(t, px, py, heading);
      CHECK(px == doctest::Approx(2.5).epsilon(1e-12));
      CHECK(py == doctest::Approx(-1.5).epsilon(1e-12));
      CHECK(wrapAngle(heading - h) == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(planarPosition(t).x == doctest::Approx(2.5));
      CHECK(planarPosition(t).y == doctest::Approx(-1.5));
      CHECK(wrapAngle(planarHeading(t) - h) == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  TEST_CASE("toPlanar maps a forward sensor point ahead of the vehicle") {
    // 2 m straight ahead (sensor z) from a pose facing +y of the planar world.
    const PoseTransform pose = planarPose(1.0, 2.0, M_PI / 2.0);
    const Vec2 w = toPlanar(pose, {0.0, 0.0, 2.0});
    CHECK(w.x == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(w.y == doctest::Approx(4.0).epsilon(1e-9));
    // A point to the sensor's right lands to the right of travel.
    const Vec2 r = toPlanar(pose, {1.0, 0.0, 0.0});
    CHECK(r.x == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(r.y == doctest::Approx(2.0).epsilon(1e-9));
  }
}
