#include "mvpal/self_training.hpp"

#include <algorithm>
#include <string>

#include "mvpal/error.hpp"

namespace mvpal {

std::string_view to_string(ScheduleVariant v) {
  switch (v) {
    case ScheduleVariant::Alternating: return "alternating";
    case ScheduleVariant::Enlarge: return "enlarge";
    case ScheduleVariant::Constant: return "constant";
  }
  return "alternating";
}

ScheduleVariant parse_schedule(std::string_view name) {
  for (auto v : {ScheduleVariant::Alternating, ScheduleVariant::Enlarge, ScheduleVariant::Constant})
    if (to_string(v) == name) return v;
  throw Error(ErrorCode::ConfigError, "unknown self-training variant '" + std::string(name) + "'");
}

FrameSet select_pseudo_labels(const PoolState& pool, const FrameSet& previous, int target,
                              const std::map<int, FrameTriangulation>& triangulations, int num_views,
                              ScheduleVariant variant) {
  FrameSet selected;
  if (variant == ScheduleVariant::Enlarge)
    for (int id : previous)
      if (pool.unlabeled.count(id)) selected.insert(id);
  if (target <= 0) return selected;

  std::vector<std::pair<double, int>> order;
  order.reserve(pool.unlabeled.size());
  for (int id : pool.unlabeled) {
    const auto it = triangulations.find(id);
    if (it == triangulations.end())
      throw Error(ErrorCode::InvariantViolation, "no triangulation for unlabeled frame " + std::to_string(id));
    order.emplace_back(it->second.epsilon, id);
  }
  std::sort(order.begin(), order.end());

  const FrameSet* excluded = variant == ScheduleVariant::Alternating ? &previous : nullptr;
  int added = 0;
  for (const auto& [epsilon, id] : order) {
    if (added == target) break;
    if (selected.count(id) || (excluded && excluded->count(id))) continue;
    if (triangulations.at(id).inlier_count != num_views) continue;
    selected.insert(id);
    ++added;
  }
  return selected;
}

std::vector<std::vector<Heatmap>> make_pseudo_targets(std::span<const CameraParams> cameras,
                                                      const FrameTriangulation& ft, const RenderOptions& render) {
  std::vector<std::vector<Heatmap>> out(cameras.size());
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    out[v].reserve(ft.per_keypoint.size());
    for (const auto& kp : ft.per_keypoint)
      out[v].push_back(render_gaussian(render.to_heatmap(project(cameras[v], kp.point)), render.heatmap_sigma_px,
                                       render.heatmap_width, render.heatmap_height));
  }
  return out;
}

DriftSummary drift_stats(const std::vector<Pose3D>& pseudo_poses, const std::vector<Pose3D>& ground_truth) {
  if (pseudo_poses.size() != ground_truth.size())
    throw Error(ErrorCode::DimensionMismatch, "pseudo-label and ground-truth counts differ");
  DriftSummary s;
  s.count = pseudo_poses.size();
  if (s.count == 0) return s;
  std::vector<double> errors;
  errors.reserve(s.count);
  for (std::size_t i = 0; i < s.count; ++i) errors.push_back(mkpe(pseudo_poses[i], ground_truth[i]));
  double sum = 0.0;
  for (double e : errors) sum += e;
  s.mean_mm = sum / static_cast<double>(s.count);
  std::sort(errors.begin(), errors.end());
  const std::size_t mid = s.count / 2;
  s.median_mm = s.count % 2 ? errors[mid] : 0.5 * (errors[mid - 1] + errors[mid]);
  s.max_mm = errors.back();
  return s;
}

}  // namespace mvpal
