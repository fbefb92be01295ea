#include <algorithm>
#include <random>

#include "doctest.h"
#include "mvpal/pose.hpp"
#include "test_support.hpp"

using namespace mvpal;
using mvpal::testing::code_of;

namespace {

Pose3D random_pose(std::mt19937_64& rng, int k = 5) {
  std::normal_distribution<double> n(0.0, 100.0);
  Pose3D p;
  for (int i = 0; i < k; ++i) p.emplace_back(n(rng), n(rng), n(rng));
  return p;
}

}  // namespace

TEST_CASE("align_root") {
  const Pose3D rooted = {Point3::Zero(), {1, 2, 3}};
  CHECK(align_root(rooted, 0).keypoints() == rooted);

  const Pose3D same(4, Point3(5, 5, 5));
  const AlignedPose zeroed = align_root(same, 0);
  for (const auto& k : zeroed.keypoints()) CHECK(k == Point3::Zero());

  const Pose3D p = {{1, 1, 1}, {4, 5, 6}, {-2, 0, 3}};
  const AlignedPose a = align_root(p, 2);
  CHECK(a[2] == Point3::Zero());
  CHECK(a[0] == Point3(3, 1, -2));

  CHECK(code_of([&] { align_root(p, 3); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { align_root(p, -1); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("pose_distance") {
  const Pose3D p = {{0, 0, 0}, {10, 0, 0}, {0, 10, 0}};
  const AlignedPose a = align_root(p, 0);
  CHECK(pose_distance(a, a) == 0.0);

  // A uniform shift vanishes under alignment, so shift everything but the
  // root: per-keypoint distances 0, 3, 3.
  Pose3D q = p;
  for (std::size_t k = 1; k < q.size(); ++k) q[k] += Point3(3, 0, 0);
  CHECK(pose_distance(a, align_root(q, 0)) == doctest::Approx(2.0));

  // per-keypoint distances 0, 1, 5
  const Pose3D ra = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  const Pose3D rb = {{0, 0, 0}, {1, 0, 0}, {0, 0, 5}};
  CHECK(pose_distance(align_root(ra, 0), align_root(rb, 0)) == doctest::Approx(2.0));

  const Pose3D two_a = {{0, 0, 0}, {0, 0, 0}};
  CHECK(code_of([&] { pose_distance(align_root(ra, 0), align_root(two_a, 0)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("mkpe") {
  const Pose3D t = {{0, 0, 0}, {10, 10, 10}};
  CHECK(mkpe(t, t) == 0.0);
  const Pose3D e1 = {{1, 0, 0}, {10, 13, 10}};
  CHECK(mkpe(e1, t) == doctest::Approx(2.0));
  const Pose3D e2 = {{0, 4, 0}, {10, 10, 14}};
  CHECK(mkpe(std::vector<Pose3D>{e1, e2}, std::vector<Pose3D>{t, t}) == doctest::Approx(3.0));
  // world frame: a pure translation is an error
  const Pose3D shifted = {{5, 0, 0}, {15, 10, 10}};
  CHECK(mkpe(shifted, t) == doctest::Approx(5.0));

  CHECK(code_of([&] { mkpe(std::vector<Pose3D>{t}, std::vector<Pose3D>{t, t}); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { mkpe(Pose3D{t[0]}, t); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("pose_distance is a translation-invariant pseudometric") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> shift(0.0, 1000.0);
  for (int i = 0; i < 2000; ++i) {
    const Pose3D a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    const int root = static_cast<int>(rng() % a.size());
    const auto aa = align_root(a, root), ab = align_root(b, root), ac = align_root(c, root);
    const double ab_d = pose_distance(aa, ab);
    CHECK(ab_d == doctest::Approx(pose_distance(ab, aa)));
    CHECK(ab_d <= pose_distance(aa, ac) + pose_distance(ac, ab) + 1e-9);

    const Point3 t(shift(rng), shift(rng), shift(rng));
    Pose3D at = a, bt = b;
    for (auto& k : at) k += t;
    for (auto& k : bt) k += t;
    CHECK(pose_distance(align_root(at, root), align_root(bt, root)) == doctest::Approx(ab_d).epsilon(1e-9));
  }
}

TEST_CASE("mkpe is invariant to frame order") {
  std::mt19937_64 rng(3);
  std::vector<Pose3D> pred, truth;
  for (int i = 0; i < 20; ++i) {
    pred.push_back(random_pose(rng));
    truth.push_back(random_pose(rng));
  }
  const double base = mkpe(pred, truth);
  std::vector<int> order(20);
  for (int i = 0; i < 20; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Pose3D> p2, t2;
  for (int i : order) {
    p2.push_back(pred[i]);
    t2.push_back(truth[i]);
  }
  CHECK(mkpe(p2, t2) == doctest::Approx(base).epsilon(1e-12));
}
