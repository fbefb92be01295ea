#pragma once

#include <cstdint>
#include <vector>

#include "mvpal/geometry.hpp"
#include "mvpal/heatmap.hpp"
#include "mvpal/pose.hpp"

namespace mvpal {

// One synchronized time instance. Ground-truth projections are derived from
// the pose and the camera rig on demand.
struct Frame {
  int id = 0;
  Pose3D pose;
};

// predictions[k][v]: keypoint-major to match frame_triangulate.
std::vector<std::vector<Point2>> gt_projections(const Frame& frame, std::span<const CameraParams> cameras);

// Synthetic stand-in for the trained network. Its per-keypoint error grows
// with the distance from the frame's pose to the nearest training pose and
// shrinks with the training-set fraction:
//
//   sigma = sigma_floor + sigma_base * (1 + d / coverage_scale) * fraction^-pool_exponent
//
// Outliers occur independently per (view, keypoint) with probability
// min(1, outlier_prob_base * (1 + d / coverage_scale)).
struct NoiseModel {
  double sigma_base_px = 0.3;
  double sigma_floor_px = 0.1;
  double coverage_scale_mm = 40.0;
  double pool_exponent = 0.3;
  double outlier_prob_base = 0.005;
  double outlier_offset_px = 60.0;
  double multi_peak_prob = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
  double sigma(double coverage_distance_mm, double labeled_fraction) const;
  double outlier_prob(double coverage_distance_mm) const;
};

struct RenderOptions {
  int heatmap_width = 64;
  int heatmap_height = 64;
  double heatmap_sigma_px = 2.0;
  double image_width = 1000.0;
  double image_height = 1000.0;

  Point2 to_heatmap(const Point2& image_px) const;
};

struct PoolSummary {
  std::vector<AlignedPose> poses;
  double labeled_fraction = 0.0;
  int root_index = 0;

  // Distance from a pose to the closest training pose, mm.
  double nearest_distance(const Pose3D& pose) const;
};

PoolSummary summarize_pool(const std::vector<Pose3D>& labeled, std::size_t total_count, int root_index = 0);

struct Inference {
  std::vector<std::vector<Point2>> predictions;  // [keypoint][view]
  std::vector<std::vector<Heatmap>> heatmaps;    // [view][keypoint], empty unless rendered
  double coverage_distance_mm = 0.0;
  double sigma_px = 0.0;
};

Inference infer(const Frame& frame, std::span<const CameraParams> cameras, const PoolSummary& summary,
                const NoiseModel& model, int iteration, const RenderOptions& render = {},
                bool render_heatmaps = true);

}  // namespace mvpal
