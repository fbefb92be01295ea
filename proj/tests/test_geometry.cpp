#include <algorithm>
#include <random>

#include "doctest.h"
#include "mvpal/error.hpp"
#include "mvpal/geometry.hpp"
#include "test_support.hpp"

using namespace mvpal;
using mvpal::testing::code_of;
using mvpal::testing::even_ring;
using mvpal::testing::project_all;

namespace {

CameraParams unit_camera(const Eigen::Vector3d& translation) {
  return CameraParams::create(0, Eigen::Matrix3d::Identity(), Eigen::Matrix3d::Identity(), translation);
}

// Independent epipolar oracle: the epipolar line of p_a in image b is the
// image of a's back-projected ray, sampled at two depths.
double ray_line_distance(const CameraParams& from, const Point2& p, const CameraParams& to, const Point2& q) {
  const Eigen::Vector3d dir = from.rotation().transpose() * from.intrinsics().inverse() * p.homogeneous();
  const Point3 c = from.center();
  const Point2 a = project(to, c + 1000.0 * dir.normalized());
  const Point2 b = project(to, c + 5000.0 * dir.normalized());
  const Eigen::Vector2d d = (b - a).normalized();
  const Eigen::Vector2d r = q - a;
  return std::abs(r.x() * d.y() - r.y() * d.x());
}

}  // namespace

TEST_CASE("camera invariants are enforced") {
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  k(1, 0) = 0.5;
  CHECK(code_of([&] { CameraParams::create(0, k, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()); }) ==
        ErrorCode::InvariantViolation);
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  r(0, 0) = -1.0;  // reflection
  CHECK(code_of([&] { CameraParams::create(0, Eigen::Matrix3d::Identity(), r, Eigen::Vector3d::Zero()); }) ==
        ErrorCode::InvariantViolation);
  r = Eigen::Matrix3d::Identity();
  r(0, 1) = 1e-6;
  CHECK(code_of([&] { CameraParams::create(0, Eigen::Matrix3d::Identity(), r, Eigen::Vector3d::Zero()); }) ==
        ErrorCode::InvariantViolation);
}

TEST_CASE("project") {
  const CameraParams origin = unit_camera(Eigen::Vector3d::Zero());
  CHECK(project(origin, Point3(0, 0, 5)).isZero(0.0));

  const CameraParams shifted = unit_camera(Eigen::Vector3d(-1, 0, 0));
  const Point2 p = project(shifted, Point3(0, 0, 5));
  CHECK(p.x() == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(p.y() == 0.0);

  CHECK(code_of([&] { project(origin, Point3(1, 1, 0)); }) == ErrorCode::DegenerateProjection);
}

TEST_CASE("triangulate_dlt") {
  const CameraParams a = unit_camera(Eigen::Vector3d::Zero());
  const CameraParams b = unit_camera(Eigen::Vector3d(-1, 0, 0));
  const Point3 truth(0, 0, 5);
  const Observation obs[2] = {{&a, project(a, truth)}, {&b, project(b, truth)}};
  CHECK((triangulate_dlt(obs) - truth).norm() < 1e-6);

  CHECK(code_of([&] { triangulate_dlt(std::span<const Observation>(obs, 1)); }) == ErrorCode::InsufficientViews);

  SUBCASE("generate-project-recover on random rings") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      const auto cams = mvpal::testing::ring_rig(8, rng);
      const Point3 p = mvpal::testing::cube_point(rng);
      std::vector<Observation> o;
      for (const auto& c : cams) o.push_back({&c, project(c, p)});
      const Point3 got = triangulate_dlt(o);
      CHECK((got - p).norm() <= 1e-6 * std::max(1.0, p.norm()));
      // Any two views suffice as well.
      CHECK((triangulate_dlt(std::span<const Observation>(o.data(), 2)) - p).norm() <= 1e-6 * std::max(1.0, p.norm()));
    }
  }

  SUBCASE("coincident rays are ill-conditioned") {
    const Observation same[2] = {{&a, Point2(0.1, 0.2)}, {&a, Point2(0.1, 0.2)}};
    CHECK(code_of([&] { triangulate_dlt(same); }) == ErrorCode::IllConditioned);
  }
}

TEST_CASE("robust_triangulate") {
  const auto cams = even_ring(8);
  const Point3 truth(120.0, -80.0, 300.0);
  auto points = project_all(cams, truth);

  SUBCASE("noiseless: all inliers") {
    const auto kt = robust_triangulate(cams, points, 5.0);
    CHECK(kt.inlier_count() == 8);
    CHECK(kt.reproj_error_px2 <= 1e-9);
    CHECK((kt.point - truth).norm() < 1e-6);
  }

  SUBCASE("one corrupted view is excluded") {
    points[3] += Point2(100.0, 0.0);
    const auto kt = robust_triangulate(cams, points, 5.0);
    CHECK(kt.inlier_count() == 7);
    CHECK_FALSE(kt.inlier_mask[3]);
    CHECK((kt.point - truth).norm() < 1e-6);
  }

  SUBCASE("two inconsistent views have no consensus") {
    const std::vector<CameraParams> pair = {cams[0], cams[2]};
    std::vector<Point2> pts = {project(pair[0], truth), project(pair[1], truth) + Point2(0.0, 200.0)};
    CHECK(code_of([&] { robust_triangulate(pair, pts, 5.0); }) == ErrorCode::NoConsensus);
  }

  SUBCASE("preconditions") {
    CHECK(code_of([&] { robust_triangulate(std::span(cams).first(1), std::span(points).first(1), 5.0); }) ==
          ErrorCode::InsufficientViews);
  }

  SUBCASE("deterministic") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 2.0);
    for (auto& p : points) p += Point2(n(rng), n(rng));
    points[5] += Point2(0.0, 80.0);
    const auto a = robust_triangulate(cams, points, 5.0);
    const auto b = robust_triangulate(cams, points, 5.0);
    CHECK(a.point == b.point);
    CHECK(a.inlier_mask == b.inlier_mask);
    CHECK(a.reproj_error_px2 == b.reproj_error_px2);
  }
}

TEST_CASE("robust_triangulate ignores a far outlier view") {
  // Adding a view whose observation is far beyond the threshold never moves
  // the refit point by more than the clean tolerance.
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto cams = mvpal::testing::ring_rig(6, rng);
    const Point3 p = mvpal::testing::cube_point(rng);
    auto points = project_all(cams, p);
    const auto clean = robust_triangulate(cams, points, 5.0);
    cams.push_back(mvpal::testing::ring_rig(1, rng).front());
    std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
    const double t = angle(rng);
    points.push_back(project(cams.back(), p) + 60.0 * Point2(std::cos(t), std::sin(t)));
    const auto dirty = robust_triangulate(cams, points, 5.0);
    CHECK((dirty.point - clean.point).norm() <= 1e-6);
    CHECK_FALSE(dirty.inlier_mask.back());
  }
}

TEST_CASE("frame_triangulate") {
  const auto cams = even_ring(8);
  const Point3 p0(0.0, 0.0, 0.0), p1(100.0, 50.0, -200.0);

  SUBCASE("noiseless") {
    const std::vector<std::vector<Point2>> pred = {project_all(cams, p0), project_all(cams, p1)};
    const auto ft = frame_triangulate(cams, pred);
    CHECK(ft.epsilon <= 1e-9);
    CHECK(ft.inlier_count == 8);
  }

  SUBCASE("min rule over keypoints") {
    std::vector<std::vector<Point2>> pred = {project_all(cams, p0), project_all(cams, p1)};
    pred[1][4] += Point2(0.0, 100.0);
    const auto ft = frame_triangulate(cams, pred);
    CHECK(ft.per_keypoint[0].inlier_count() == 8);
    CHECK(ft.per_keypoint[1].inlier_count() == 7);
    CHECK(ft.inlier_count == 7);
    // The outlier view still contributes its residual to epsilon.
    const double r2 = (project(cams[4], ft.per_keypoint[1].point) - pred[1][4]).squaredNorm();
    CHECK(ft.epsilon == doctest::Approx(r2 / 16.0).epsilon(1e-6));
  }

  SUBCASE("epsilon is the mean squared residual over views and keypoints") {
    const std::vector<CameraParams> pair = {cams[0], cams[3]};
    std::vector<std::vector<Point2>> pred = {{project(pair[0], p1) + Point2(2.0, 0.0), project(pair[1], p1)}};
    TriangulationOptions opt;
    opt.threshold_px = 10.0;
    const auto ft = frame_triangulate(pair, pred, opt);
    const double ra = (project(pair[0], ft.per_keypoint[0].point) - pred[0][0]).squaredNorm();
    const double rb = (project(pair[1], ft.per_keypoint[0].point) - pred[0][1]).squaredNorm();
    CHECK(ra > 0.0);
    CHECK(ft.epsilon == doctest::Approx((ra + rb) / 2.0).epsilon(1e-12));
  }

  SUBCASE("failed keypoint pays the penalty") {
    const std::vector<CameraParams> pair = {cams[0], cams[2]};
    std::vector<std::vector<Point2>> pred = {{project(pair[0], p1), project(pair[1], p1) + Point2(0.0, 200.0)}};
    TriangulationOptions opt;
    const auto ft = frame_triangulate(pair, pred, opt);
    CHECK(ft.inlier_count == 0);
    CHECK_FALSE(ft.per_keypoint[0].ok);
    CHECK(ft.epsilon == doctest::Approx(1000.0 * 1000.0 * 2.0));
    opt.failure_penalty = 7.0;
    CHECK(frame_triangulate(pair, pred, opt).epsilon == doctest::Approx(7.0));
  }

  SUBCASE("euclidean mode") {
    std::vector<std::vector<Point2>> pred = {project_all(cams, p1)};
    pred[0][2] += Point2(30.0, 40.0);
    TriangulationOptions opt;
    opt.mc_error = ConsistencyError::Euclidean;
    const auto ft = frame_triangulate(cams, pred, opt);
    CHECK(ft.epsilon == doctest::Approx(50.0 / 8.0).epsilon(1e-6));
  }
}

TEST_CASE("frame_triangulate epsilon is invariant to view and keypoint order") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    auto cams = mvpal::testing::ring_rig(6, rng);
    std::vector<std::vector<Point2>> pred;
    for (int k = 0; k < 4; ++k) {
      auto pts = project_all(cams, mvpal::testing::cube_point(rng));
      for (auto& p : pts) p += Point2(noise(rng), noise(rng));
      pts[static_cast<std::size_t>(k)] += Point2(70.0, 0.0);
      pred.push_back(pts);
    }
    const double eps = frame_triangulate(cams, pred).epsilon;

    std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
    std::vector<CameraParams> cams_p;
    for (auto i : perm) cams_p.push_back(cams[i]);
    auto pred_p = pred;
    for (auto& views : pred_p) {
      std::vector<Point2> v;
      for (auto i : perm) v.push_back(views[i]);
      views = v;
    }
    std::reverse(pred_p.begin(), pred_p.end());
    CHECK(frame_triangulate(cams_p, pred_p).epsilon == doctest::Approx(eps).epsilon(1e-9));
  }
}

TEST_CASE("epipolar_distance") {
  const auto cams = even_ring(8);
  const CameraParams& a = cams[0];
  const CameraParams& b = cams[2];
  const Point3 x(150.0, -100.0, 250.0);
  const Point2 pa = project(a, x), pb = project(b, x);
  CHECK(epipolar_distance(a, b, pa, pb) <= 1e-9);

  SUBCASE("perpendicular displacement in one image") {
    const Eigen::Vector3d line_b = fundamental_matrix(a, b) * pa.homogeneous();
    const Point2 normal = line_b.head<2>().normalized();
    const Point2 moved = pb + 5.0 * normal;
    CHECK(ray_line_distance(a, pa, b, moved) == doctest::Approx(5.0).epsilon(1e-6));
    const double other = ray_line_distance(b, moved, a, pa);
    CHECK(epipolar_distance(a, b, pa, moved) == doctest::Approx(0.5 * (5.0 + other)).epsilon(1e-6));
  }

  SUBCASE("matches the ray oracle on random pairs") {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> n(0.0, 4.0);
    for (int t = 0; t < 100; ++t) {
      auto rig = mvpal::testing::ring_rig(2, rng);
      const Point3 p = mvpal::testing::cube_point(rng);
      const Point2 qa = project(rig[0], p) + Point2(n(rng), n(rng));
      const Point2 qb = project(rig[1], p) + Point2(n(rng), n(rng));
      const double oracle = 0.5 * (ray_line_distance(rig[0], qa, rig[1], qb) + ray_line_distance(rig[1], qb, rig[0], qa));
      CHECK(epipolar_distance(rig[0], rig[1], qa, qb) == doctest::Approx(oracle).epsilon(1e-6));
    }
  }

  CHECK(code_of([&] { epipolar_distance(a, a, pa, pa); }) == ErrorCode::CoincidentCenters);
}
