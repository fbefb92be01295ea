#pragma once

#include <vector>

#include "mvpal/geometry.hpp"

namespace mvpal {

using Pose3D = std::vector<Point3>;

// A pose translated so that its root keypoint sits exactly at the origin.
// Only align_root produces one.
class AlignedPose {
 public:
  AlignedPose() = default;

  const std::vector<Point3>& keypoints() const { return keypoints_; }
  std::size_t size() const { return keypoints_.size(); }
  const Point3& operator[](std::size_t k) const { return keypoints_[k]; }

 private:
  friend AlignedPose align_root(const Pose3D& p, int root_index);
  std::vector<Point3> keypoints_;
};

AlignedPose align_root(const Pose3D& p, int root_index);

// Mean per-keypoint Euclidean distance, mm.
double pose_distance(const AlignedPose& a, const AlignedPose& b);

// Mean keypoint error over all frames and keypoints, world frame, mm.
double mkpe(const std::vector<Pose3D>& predicted, const std::vector<Pose3D>& truth);

// Single-frame MKPE.
double mkpe(const Pose3D& predicted, const Pose3D& truth);

}  // namespace mvpal
