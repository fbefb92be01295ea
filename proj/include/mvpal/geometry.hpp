#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mvpal {

using Point2 = Eigen::Vector2d;  // (u, v) in px
using Point3 = Eigen::Vector3d;  // (x, y, z) in mm
using Matrix34 = Eigen::Matrix<double, 3, 4>;

// Calibrated pinhole camera. Construct through CameraParams::create so the
// intrinsics/rotation invariants are checked once.
class CameraParams {
 public:
  static CameraParams create(int id, const Eigen::Matrix3d& intrinsics,
                             const Eigen::Matrix3d& rotation,
                             const Eigen::Vector3d& translation);

  int id() const { return id_; }
  const Eigen::Matrix3d& intrinsics() const { return intrinsics_; }
  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  const Matrix34& projection() const { return projection_; }

  // World coordinates of the optical center, -R^T t.
  Point3 center() const;

 private:
  CameraParams() = default;

  int id_ = 0;
  Eigen::Matrix3d intrinsics_;
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
  Matrix34 projection_;
};

struct Observation {
  const CameraParams* camera;
  Point2 point;
};

struct KeypointTriangulation {
  Point3 point = Point3::Zero();
  std::vector<bool> inlier_mask;
  double reproj_error_px2 = 0.0;  // mean over inlier views
  bool ok = false;                // false when no consensus could be reached

  int inlier_count() const;
};

enum class ConsistencyError { Squared, Euclidean };

struct TriangulationOptions {
  double threshold_px = 5.0;
  ConsistencyError mc_error = ConsistencyError::Squared;
  // Per-residual penalty for a keypoint without consensus. Unset means the
  // squared image diagonal (or the diagonal itself in Euclidean mode).
  std::optional<double> failure_penalty;
  double image_width = 1000.0;
  double image_height = 1000.0;

  double penalty() const;
};

struct FrameTriangulation {
  std::vector<KeypointTriangulation> per_keypoint;
  double epsilon = 0.0;  // frame consistency error
  int inlier_count = 0;  // min over keypoints of inlier views

  std::vector<Point3> points() const;
};

Point2 project(const CameraParams& camera, const Point3& p);

Point3 triangulate_dlt(std::span<const Observation> observations);

KeypointTriangulation robust_triangulate(std::span<const CameraParams> cameras,
                                         std::span<const Point2> points, double threshold_px);

// predictions[k][v] is keypoint k observed in view v.
FrameTriangulation frame_triangulate(std::span<const CameraParams> cameras,
                                     const std::vector<std::vector<Point2>>& predictions,
                                     const TriangulationOptions& options = {});

double epipolar_distance(const CameraParams& cam_a, const CameraParams& cam_b, const Point2& p_a,
                         const Point2& p_b);

// F such that x_b^T F x_a = 0 for corresponding homogeneous points.
Eigen::Matrix3d fundamental_matrix(const CameraParams& cam_a, const CameraParams& cam_b);

}  // namespace mvpal
