#pragma once

#include <map>
#include <string_view>
#include <vector>

#include "mvpal/active_learning.hpp"
#include "mvpal/geometry.hpp"
#include "mvpal/heatmap.hpp"
#include "mvpal/pose.hpp"
#include "mvpal/sim_model.hpp"

namespace mvpal {

enum class ScheduleVariant { Alternating, Enlarge, Constant };

std::string_view to_string(ScheduleVariant v);
ScheduleVariant parse_schedule(std::string_view name);

struct PseudoLabel {
  int frame_id = 0;
  std::vector<Point3> points;
  std::vector<std::vector<Heatmap>> heatmaps;  // [view][keypoint]
  double epsilon = 0.0;
  int iteration = 0;
};

// Greedy by ascending epsilon (ties by frame id); only frames whose every
// keypoint kept all `num_views` views as inliers are accepted.
FrameSet select_pseudo_labels(const PoolState& pool, const FrameSet& previous, int target,
                              const std::map<int, FrameTriangulation>& triangulations, int num_views,
                              ScheduleVariant variant = ScheduleVariant::Alternating);

std::vector<std::vector<Heatmap>> make_pseudo_targets(std::span<const CameraParams> cameras,
                                                      const FrameTriangulation& ft, const RenderOptions& render = {});

struct DriftSummary {
  std::size_t count = 0;
  double mean_mm = 0.0;
  double median_mm = 0.0;
  double max_mm = 0.0;
};

DriftSummary drift_stats(const std::vector<Pose3D>& pseudo_poses, const std::vector<Pose3D>& ground_truth);

}  // namespace mvpal
