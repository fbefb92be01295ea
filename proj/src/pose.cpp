#include "mvpal/pose.hpp"

#include "mvpal/error.hpp"

namespace mvpal {

AlignedPose align_root(const Pose3D& p, int root_index) {
  if (root_index < 0 || static_cast<std::size_t>(root_index) >= p.size())
    throw Error(ErrorCode::IndexOutOfRange, "root index " + std::to_string(root_index) + " for pose of size " +
                                                std::to_string(p.size()));
  AlignedPose out;
  const Point3 root = p[static_cast<std::size_t>(root_index)];
  out.keypoints_.reserve(p.size());
  for (const auto& kp : p) out.keypoints_.push_back(kp - root);
  out.keypoints_[static_cast<std::size_t>(root_index)] = Point3::Zero();
  return out;
}

double pose_distance(const AlignedPose& a, const AlignedPose& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "poses differ in keypoint count");
  if (a.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] - b[k]).norm();
  return sum / static_cast<double>(a.size());
}

double mkpe(const Pose3D& predicted, const Pose3D& truth) {
  if (predicted.size() != truth.size())
    throw Error(ErrorCode::DimensionMismatch, "poses differ in keypoint count");
  if (predicted.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) sum += (predicted[k] - truth[k]).norm();
  return sum / static_cast<double>(predicted.size());
}

double mkpe(const std::vector<Pose3D>& predicted, const std::vector<Pose3D>& truth) {
  if (predicted.size() != truth.size())
    throw Error(ErrorCode::DimensionMismatch, "frame counts differ");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < predicted.size(); ++f) {
    if (predicted[f].size() != truth[f].size() || predicted[f].size() != predicted.front().size())
      throw Error(ErrorCode::DimensionMismatch, "keypoint counts differ");
    for (std::size_t k = 0; k < predicted[f].size(); ++k) sum += (predicted[f][k] - truth[f][k]).norm();
    count += predicted[f].size();
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace mvpal
