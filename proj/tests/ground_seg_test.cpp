#include <cmath>
#include <vector>

#include "doctest.h"
#include "racer/errors.hpp"
#include "racer/ground_seg.hpp"
#include "racer/random.hpp"

using namespace racer;

namespace {

// Dense plane cloud y = a*x + b*z + h over the default ROI.
std::vector<Point3> planeCloud(double a, double b, double h, int nx = 25, int nz = 40) {
  std::vector<Point3> cloud;
  cloud.reserve(static_cast<std::size_t>(nx) * nz);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < nz; ++j) {
      const double x = -5.0 + 10.0 * i / (nx - 1);
      const double z = 0.5 + 19.0 * j / (nz - 1);
      cloud.push_back({x, a * x + b * z + h, z});
    }
  }
  return cloud;
}

}  // namespace

TEST_SUITE("ground_seg") {
  TEST_CASE("planeError: vertical offset from a level plane") {
    const PlaneModel m{0.0, 0.0, 0.7};
    CHECK(planeError({0.0, 1.0, 0.0}, m) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(planeError({0.0, 0.4, 0.0}, m) == doctest::Approx(-0.3).epsilon(1e-12));
    CHECK(planeError({3.0, 0.7, 11.0}, m) == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("planeError: slope changes the normalization") {
    const PlaneModel m{1.0, 0.0, 0.0};  // plane y = x
    CHECK(planeError({1.0, 0.0, 0.0}, m) == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(planeError({0.0, 1.0, 5.0}, m) == doctest::Approx(1.0 / std::sqrt(2.0)));
  }

  TEST_CASE("planeError: literal flag folds the intercept into the denominator") {
    const PlaneModel m{0.0, 0.0, 1.0};
    const Point3 p{0.0, 1.3, 0.0};
    CHECK(planeError(p, m, false) == doctest::Approx(0.3));
    CHECK(planeError(p, m, true) == doctest::Approx(0.3 / std::sqrt(2.0)));
  }

  TEST_CASE("classifyInlier is strict at the threshold") {
    const PlaneModel m{0.0, 0.0, 0.5};
    // 0.25 and 0.75 are exact in binary, so the boundary comparison is exact.
    const double tau = 0.25;
    CHECK(classifyInlier({0.0, 0.5, 1.0}, m, tau));
    CHECK(classifyInlier({0.0, 0.7, 1.0}, m, tau));
    CHECK_FALSE(classifyInlier({0.0, 0.75, 1.0}, m, tau));  // exactly tau: outlier
    CHECK_FALSE(classifyInlier({0.0, 0.25, 1.0}, m, tau));  // exactly -tau
    CHECK_FALSE(classifyInlier({0.0, 0.8, 1.0}, m, tau));
  }

  TEST_CASE("flat cloud is recovered exactly") {
    const auto cloud = planeCloud(0.0, 0.0, 0.5);
    const auto res = ransacFit(cloud, RoiBox{}, RansacConfig{}, 3);
    CHECK(res.model.a == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(res.model.b == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(res.model.h == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(res.roi_indices.size() == cloud.size());
    CHECK(res.ground_indices.size() == cloud.size());
    CHECK(res.obstacle_indices.empty());
    CHECK(res.best_inlier_count == static_cast<int>(cloud.size()));
  }

  TEST_CASE("gently sloped plane is recovered exactly") {
    const auto cloud = planeCloud(0.05, -0.03, 0.4);
    const auto res = ransacFit(cloud, RoiBox{}, RansacConfig{}, 9);
    CHECK(res.model.a == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(res.model.b == doctest::Approx(-0.03).epsilon(1e-9));
    CHECK(res.model.h == doctest::Approx(0.4).epsilon(1e-9));
  }

  TEST_CASE("ROI excludes points outside the box") {
    auto cloud = planeCloud(0.0, 0.0, 0.5, 10, 10);
    const auto inside = cloud.size();
    cloud.push_back({0.0, 0.5, 25.0});   // beyond z_max
    cloud.push_back({8.0, 0.5, 10.0});   // beyond x_max
    cloud.push_back({0.0, 0.5, -2.0});   // behind the sensor
    const auto res = ransacFit(cloud, RoiBox{}, RansacConfig{}, 5);
    CHECK(res.roi_indices.size() == inside);
    for (int idx : res.roi_indices) CHECK(idx < static_cast<int>(inside));
  }

  TEST_CASE("fewer than three ROI points is insufficient data") {
    std::vector<Point3> cloud{{0.0, 0.5, 1.0}, {1.0, 0.5, 2.0}};
    CHECK_THROWS_AS(ransacFit(cloud, RoiBox{}, RansacConfig{}, 1), InsufficientData);
    cloud.push_back({0.0, 0.5, 30.0});  // outside ROI, still only 2 usable
    CHECK_THROWS_AS(ransacFit(cloud, RoiBox{}, RansacConfig{}, 1), InsufficientData);
  }

  TEST_CASE("degenerate configuration when every hypothesis is rejected") {
    // Steeper than slope_limit in x: every 3-point hypothesis fails the bound.
    const auto steep = planeCloud(1.5, 0.0, 0.5);
    CHECK_THROWS_AS(ransacFit(steep, RoiBox{}, RansacConfig{}, 2), DegenerateError);
    // Plausible slope but implausible (below-minimum) mount height.
    const auto low = planeCloud(0.0, 0.0, 0.01);
    CHECK_THROWS_AS(ransacFit(low, RoiBox{}, RansacConfig{}, 2), DegenerateError);
  }

  TEST_CASE("invalid parameters are rejected") {
    const auto cloud = planeCloud(0.0, 0.0, 0.5, 5, 5);
    RansacConfig bad_tau;
    bad_tau.tau = 0.0;
    CHECK_THROWS_AS(ransacFit(cloud, RoiBox{}, bad_tau, 1), InvalidInput);
    RansacConfig bad_iter;
    bad_iter.max_iter = 0;
    CHECK_THROWS_AS(ransacFit(cloud, RoiBox{}, bad_iter, 1), InvalidInput);
    RoiBox bad_box;
    bad_box.x_min = 2.0;
    bad_box.x_max = -2.0;
    CHECK_THROWS_AS(ransacFit(cloud, bad_box, RansacConfig{}, 1), InvalidInput);
  }

  TEST_CASE("best model maximizes the hypothesis inlier counts") {
    // Noisy plane plus obstacle points: argmax property over the sampled set.
    Rng rng(77);
    std::vector<Point3> cloud;
    for (int i = 0; i < 2000; ++i) {
      const double x = rng.uniform(-5.0, 5.0);
      const double z = rng.uniform(0.5, 19.5);
      cloud.push_back({x, 0.3 + rng.normal(0.0, 0.01), z});
    }
    for (int i = 0; i < 200; ++i) {  // cone-like returns above the ground
      const double x = rng.uniform(-5.0, 5.0);
      const double z = rng.uniform(0.5, 19.5);
      cloud.push_back({x, 0.3 - rng.uniform(0.1, 0.3), z});
    }
    const auto res = ransacFit(cloud, RoiBox{}, RansacConfig{}, 41);
    REQUIRE_FALSE(res.hypothesis_inlier_counts.empty());
    int max_count = 0;
    for (int c : res.hypothesis_inlier_counts) max_count = std::max(max_count, c);
    CHECK(res.best_inlier_count == max_count);
    CHECK(static_cast<int>(res.ground_indices.size()) == res.best_inlier_count);
    CHECK(res.ground_indices.size() + res.obstacle_indices.size() == res.roi_indices.size());
  }

  TEST_CASE("10 percent outliers: model within 0.01 and recall at least 99 percent") {
    Rng rng(5);
    const double a = 0.02, b = -0.04, h = 0.3;
    std::vector<Point3> cloud;
    std::vector<bool> is_ground;
    for (int i = 0; i < 3000; ++i) {
      const double x = rng.uniform(-5.0, 5.0);
      const double z = rng.uniform(0.5, 19.5);
      const bool outlier = rng.uniform() < 0.10;
      double y = a * x + b * z + h;
      if (outlier) {
        y -= rng.uniform(0.08, 0.30);  // above the ground, outside tau
      } else {
        y += rng.normal(0.0, 0.008);
      }
      cloud.push_back({x, y, z});
      is_ground.push_back(!outlier);
    }
    const auto res = ransacFit(cloud, RoiBox{}, RansacConfig{}, 123);
    CHECK(std::abs(res.model.a - a) < 0.01);
    CHECK(std::abs(res.model.b - b) < 0.01);
    CHECK(std::abs(res.model.h - h) < 0.01);

    int true_ground = 0, recalled = 0;
    std::vector<bool> labeled_ground(cloud.size(), false);
    for (int idx : res.ground_indices) labeled_ground[static_cast<std::size_t>(idx)] = true;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (!is_ground[i]) continue;
      ++true_ground;
      if (labeled_ground[i]) ++recalled;
    }
    REQUIRE(true_ground > 0);
    CHECK(static_cast<double>(recalled) / true_ground >= 0.99);
  }

  TEST_CASE("same seed reproduces the result bit for bit") {
    Rng rng(99);
    std::vector<Point3> cloud;
    for (int i = 0; i < 500; ++i) {
      cloud.push_back({rng.uniform(-5.0, 5.0), 0.4 + rng.normal(0.0, 0.01),
                       rng.uniform(0.5, 19.5)});
    }
    const auto r1 = ransacFit(cloud, RoiBox{}, RansacConfig{}, 31);
    const auto r2 = ransacFit(cloud, RoiBox{}, RansacConfig{}, 31);
    CHECK(r1.model.a == r2.model.a);
    CHECK(r1.model.b == r2.model.b);
    CHECK(r1.model.h == r2.model.h);
    CHECK(r1.ground_indices == r2.ground_indices);
    CHECK(r1.hypothesis_inlier_counts == r2.hypothesis_inlier_counts);
  }
}
