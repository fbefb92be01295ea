#include "mvpal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mvpal/error.hpp"

namespace mvpal {

namespace {

constexpr double kDepthEpsilon = 1e-9;
constexpr double kOrthonormalTolerance = 1e-9;
constexpr double kIllConditionedRatio = 0.99;
constexpr double kRankTolerance = 1e-10;

double squared_residual(const CameraParams& camera, const Point3& p, const Point2& observed) {
  const Eigen::Vector3d h = camera.projection() * p.homogeneous();
  if (std::abs(h.z()) <= kDepthEpsilon) return std::numeric_limits<double>::infinity();
  return (h.head<2>() / h.z() - observed).squaredNorm();
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

double point_line_distance(const Eigen::Vector3d& line, const Point2& p) {
  const double n = line.head<2>().norm();
  return std::abs(line.dot(p.homogeneous())) / n;
}

struct Hypothesis {
  Point3 point;
  std::vector<double> residuals;  // squared, per view
  int inliers = 0;
  double mean_inlier_error = 0.0;
};

Hypothesis evaluate(std::span<const CameraParams> cameras, std::span<const Point2> points,
                    const Point3& point, double threshold2) {
  Hypothesis h{point, std::vector<double>(cameras.size()), 0, 0.0};
  double sum = 0.0;
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    h.residuals[v] = squared_residual(cameras[v], point, points[v]);
    if (h.residuals[v] <= threshold2) {
      ++h.inliers;
      sum += h.residuals[v];
    }
  }
  h.mean_inlier_error = h.inliers > 0 ? sum / h.inliers : 0.0;
  return h;
}

KeypointTriangulation to_result(const Hypothesis& h, double threshold2) {
  KeypointTriangulation out;
  out.point = h.point;
  out.inlier_mask.resize(h.residuals.size());
  for (std::size_t v = 0; v < h.residuals.size(); ++v) out.inlier_mask[v] = h.residuals[v] <= threshold2;
  out.reproj_error_px2 = h.mean_inlier_error;
  out.ok = true;
  return out;
}

}  // namespace

CameraParams CameraParams::create(int id, const Eigen::Matrix3d& intrinsics,
                                  const Eigen::Matrix3d& rotation,
                                  const Eigen::Vector3d& translation) {
  if (!intrinsics.allFinite() || !rotation.allFinite() || !translation.allFinite())
    throw Error(ErrorCode::InvariantViolation, "camera " + std::to_string(id) + " has non-finite entries");
  for (int i = 0; i < 3; ++i) {
    if (!(intrinsics(i, i) > 0.0))
      throw Error(ErrorCode::InvariantViolation,
                  "camera " + std::to_string(id) + " intrinsics diagonal must be positive");
    for (int j = 0; j < i; ++j)
      if (intrinsics(i, j) != 0.0)
        throw Error(ErrorCode::InvariantViolation,
                    "camera " + std::to_string(id) + " intrinsics must be upper triangular");
  }
  if (((rotation.transpose() * rotation) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() >
      kOrthonormalTolerance)
    throw Error(ErrorCode::InvariantViolation, "camera " + std::to_string(id) + " rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > kOrthonormalTolerance)
    throw Error(ErrorCode::InvariantViolation, "camera " + std::to_string(id) + " rotation has det != +1");

  CameraParams c;
  c.id_ = id;
  c.intrinsics_ = intrinsics;
  c.rotation_ = rotation;
  c.translation_ = translation;
  Matrix34 rt;
  rt << rotation, translation;
  c.projection_ = intrinsics * rt;
  return c;
}

Point3 CameraParams::center() const { return -rotation_.transpose() * translation_; }

int KeypointTriangulation::inlier_count() const {
  return static_cast<int>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
}

double TriangulationOptions::penalty() const {
  if (failure_penalty) return *failure_penalty;
  const double diag2 = image_width * image_width + image_height * image_height;
  return mc_error == ConsistencyError::Squared ? diag2 : std::sqrt(diag2);
}

std::vector<Point3> FrameTriangulation::points() const {
  std::vector<Point3> out;
  out.reserve(per_keypoint.size());
  for (const auto& kp : per_keypoint) out.push_back(kp.point);
  return out;
}

Point2 project(const CameraParams& camera, const Point3& p) {
  const Eigen::Vector3d h = camera.projection() * p.homogeneous();
  if (std::abs(h.z()) <= kDepthEpsilon)
    throw Error(ErrorCode::DegenerateProjection, "point lies on the principal plane");
  return h.head<2>() / h.z();
}

Point3 triangulate_dlt(std::span<const Observation> observations) {
  if (observations.size() < 2) throw Error(ErrorCode::InsufficientViews, "need at least 2 observations");

  // Condition the system with a similarity built from the camera centers so
  // the homogeneous unknown has entries of comparable magnitude.
  Point3 mean = Point3::Zero();
  for (const auto& obs : observations) mean += obs.camera->center();
  mean /= static_cast<double>(observations.size());
  double scale = 0.0;
  for (const auto& obs : observations) scale += (obs.camera->center() - mean).norm();
  scale /= static_cast<double>(observations.size());
  if (!(scale > 0.0)) scale = 1.0;
  Eigen::Matrix4d denormalize = Eigen::Matrix4d::Identity();
  denormalize.topLeftCorner<3, 3>() *= scale;
  denormalize.topRightCorner<3, 1>() = mean;

  using SystemMatrix = Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor, 64, 4>;
  if (observations.size() > 32) throw Error(ErrorCode::DimensionMismatch, "at most 32 views supported");
  SystemMatrix a(2 * observations.size(), 4);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const Matrix34 p = observations[i].camera->projection() * denormalize;
    const Point2& x = observations[i].point;
    a.row(2 * i) = x.x() * p.row(2) - p.row(0);
    a.row(2 * i + 1) = x.y() * p.row(2) - p.row(1);
    a.row(2 * i).normalize();
    a.row(2 * i + 1).normalize();
  }

  // Same singular values and right vectors as `a`, on a fixed 4x4 system.
  Eigen::Matrix4d reduced;
  if (a.rows() == 4) {
    reduced = a;
  } else {
    const Eigen::HouseholderQR<SystemMatrix> qr(a);
    reduced = qr.matrixQR().topRows<4>().triangularView<Eigen::Upper>();
  }
  const Eigen::JacobiSVD<Eigen::Matrix4d> svd(reduced, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Rank below three means the rays do not pin down a point.
  if (!(sv(2) > kRankTolerance * sv(0)) || !(sv(3) <= kIllConditionedRatio * sv(2)))
    throw Error(ErrorCode::IllConditioned, "smallest singular values are not separated");
  const Eigen::Vector4d x = denormalize * svd.matrixV().col(3);
  if (std::abs(x(3)) <= std::numeric_limits<double>::epsilon() * x.head<3>().norm())
    throw Error(ErrorCode::IllConditioned, "solution is at infinity");
  return x.head<3>() / x(3);
}

KeypointTriangulation robust_triangulate(std::span<const CameraParams> cameras,
                                         std::span<const Point2> points, double threshold_px) {
  if (cameras.size() != points.size())
    throw Error(ErrorCode::DimensionMismatch, "one point per camera required");
  if (cameras.size() < 2) throw Error(ErrorCode::InsufficientViews, "need at least 2 views");
  if (!(threshold_px > 0.0)) throw Error(ErrorCode::InvariantViolation, "threshold must be positive");
  const double threshold2 = threshold_px * threshold_px;
  const std::size_t n = cameras.size();

  // Every view pair is a minimal sample; enumeration order is the tie break.
  std::optional<Hypothesis> best;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Observation pair[2] = {{&cameras[i], points[i]}, {&cameras[j], points[j]}};
      Point3 candidate;
      try {
        candidate = triangulate_dlt(pair);
      } catch (const Error&) {
        continue;
      }
      Hypothesis h = evaluate(cameras, points, candidate, threshold2);
      if (!best || h.inliers > best->inliers ||
          (h.inliers == best->inliers && h.mean_inlier_error < best->mean_inlier_error))
        best = std::move(h);
    }
  }
  if (!best || best->inliers < 2)
    throw Error(ErrorCode::NoConsensus, "no view pair reaches two inliers");

  std::vector<Observation> inliers;
  for (std::size_t v = 0; v < n; ++v)
    if (best->residuals[v] <= threshold2) inliers.push_back({&cameras[v], points[v]});
  try {
    Hypothesis refit = evaluate(cameras, points, triangulate_dlt(inliers), threshold2);
    if (refit.inliers >= 2) return to_result(refit, threshold2);
  } catch (const Error&) {
  }
  return to_result(*best, threshold2);
}

FrameTriangulation frame_triangulate(std::span<const CameraParams> cameras,
                                     const std::vector<std::vector<Point2>>& predictions,
                                     const TriangulationOptions& options) {
  if (cameras.size() < 2) throw Error(ErrorCode::InsufficientViews, "need at least 2 views");
  const double n = static_cast<double>(cameras.size());
  const double k = static_cast<double>(predictions.size());

  FrameTriangulation out;
  out.per_keypoint.reserve(predictions.size());
  out.inlier_count = static_cast<int>(cameras.size());
  double total = 0.0;
  for (const auto& views : predictions) {
    if (views.size() != cameras.size())
      throw Error(ErrorCode::DimensionMismatch, "prediction count differs from camera count");
    KeypointTriangulation kt;
    try {
      kt = robust_triangulate(cameras, views, options.threshold_px);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoConsensus) throw;
      // Keep a best-effort point for downstream pose distances; the
      // consistency term is the penalty regardless.
      kt.inlier_mask.assign(cameras.size(), false);
      kt.ok = false;
      std::vector<Observation> all;
      for (std::size_t v = 0; v < cameras.size(); ++v) all.push_back({&cameras[v], views[v]});
      try {
        kt.point = triangulate_dlt(all);
      } catch (const Error&) {
        kt.point = Point3::Zero();
      }
    }
    if (kt.ok) {
      for (std::size_t v = 0; v < cameras.size(); ++v) {
        const double r2 = squared_residual(cameras[v], kt.point, views[v]);
        const double term = options.mc_error == ConsistencyError::Squared ? r2 : std::sqrt(r2);
        total += std::isfinite(term) ? term : options.penalty();
      }
    } else {
      total += options.penalty() * n;
    }
    out.inlier_count = std::min(out.inlier_count, kt.inlier_count());
    out.per_keypoint.push_back(std::move(kt));
  }
  out.epsilon = k > 0 ? total / (n * k) : 0.0;
  if (predictions.empty()) out.inlier_count = 0;
  return out;
}

Eigen::Matrix3d fundamental_matrix(const CameraParams& cam_a, const CameraParams& cam_b) {
  const Point3 center_a = cam_a.center();
  if ((center_a - cam_b.center()).norm() <= 1e-9 * (1.0 + center_a.norm()))
    throw Error(ErrorCode::CoincidentCenters, "epipolar geometry undefined for coincident centers");
  // Relative pose b <- a, then F = K_b^-T [t]x R K_a^-1.
  const Eigen::Matrix3d r = cam_b.rotation() * cam_a.rotation().transpose();
  const Eigen::Vector3d t = cam_b.translation() - r * cam_a.translation();
  const Eigen::Matrix3d f = cam_b.intrinsics().inverse().transpose() * skew(t) * r *
                            cam_a.intrinsics().inverse();
  return f / f.norm();
}

double epipolar_distance(const CameraParams& cam_a, const CameraParams& cam_b, const Point2& p_a,
                         const Point2& p_b) {
  const Eigen::Matrix3d f = fundamental_matrix(cam_a, cam_b);
  const Eigen::Vector3d line_b = f * p_a.homogeneous();
  const Eigen::Vector3d line_a = f.transpose() * p_b.homogeneous();
  return 0.5 * (point_line_distance(line_b, p_b) + point_line_distance(line_a, p_a));
}

}  // namespace mvpal
