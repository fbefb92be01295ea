#include "mvpal/sim_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mvpal/counter_rng.hpp"
#include "mvpal/error.hpp"

namespace mvpal {

namespace {

enum Stream : std::uint64_t { kNoise = 1, kOutlier = 2, kMultiPeak = 3 };

}  // namespace

std::vector<std::vector<Point2>> gt_projections(const Frame& frame, std::span<const CameraParams> cameras) {
  std::vector<std::vector<Point2>> out(frame.pose.size());
  for (std::size_t k = 0; k < frame.pose.size(); ++k) {
    out[k].reserve(cameras.size());
    for (const auto& cam : cameras) out[k].push_back(project(cam, frame.pose[k]));
  }
  return out;
}

void NoiseModel::validate() const {
  auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!(sigma_base_px >= 0.0) || !(sigma_floor_px >= 0.0))
    throw Error(ErrorCode::ConfigError, "noise sigmas must be non-negative");
  if (!(coverage_scale_mm > 0.0)) throw Error(ErrorCode::ConfigError, "coverage_scale_mm must be positive");
  if (!(pool_exponent >= 0.0)) throw Error(ErrorCode::ConfigError, "pool_exponent must be non-negative");
  if (!probability(outlier_prob_base) || !probability(multi_peak_prob))
    throw Error(ErrorCode::ConfigError, "noise probabilities must lie in [0, 1]");
  if (!(outlier_offset_px >= 0.0)) throw Error(ErrorCode::ConfigError, "outlier_offset_px must be non-negative");
}

double NoiseModel::sigma(double coverage_distance_mm, double labeled_fraction) const {
  return sigma_floor_px + sigma_base_px * (1.0 + coverage_distance_mm / coverage_scale_mm) *
                              std::pow(labeled_fraction, -pool_exponent);
}

double NoiseModel::outlier_prob(double coverage_distance_mm) const {
  return std::min(1.0, outlier_prob_base * (1.0 + coverage_distance_mm / coverage_scale_mm));
}

Point2 RenderOptions::to_heatmap(const Point2& image_px) const {
  return {image_px.x() * heatmap_width / image_width, image_px.y() * heatmap_height / image_height};
}

double PoolSummary::nearest_distance(const Pose3D& pose) const {
  const AlignedPose aligned = align_root(pose, root_index);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : poses) best = std::min(best, pose_distance(aligned, p));
  return best;
}

PoolSummary summarize_pool(const std::vector<Pose3D>& labeled, std::size_t total_count, int root_index) {
  if (labeled.empty()) throw Error(ErrorCode::EmptyPool, "labeled set is empty");
  if (total_count < labeled.size())
    throw Error(ErrorCode::InvariantViolation, "total count smaller than labeled count");
  PoolSummary s;
  s.root_index = root_index;
  s.poses.reserve(labeled.size());
  for (const auto& p : labeled) s.poses.push_back(align_root(p, root_index));
  s.labeled_fraction = static_cast<double>(labeled.size()) / static_cast<double>(total_count);
  return s;
}

Inference infer(const Frame& frame, std::span<const CameraParams> cameras, const PoolSummary& summary,
                const NoiseModel& model, int iteration, const RenderOptions& render, bool render_heatmaps) {
  if (summary.poses.empty()) throw Error(ErrorCode::EmptyPool, "pool summary has no poses");
  Inference out;
  out.coverage_distance_mm = summary.nearest_distance(frame.pose);
  out.sigma_px = model.sigma(out.coverage_distance_mm, summary.labeled_fraction);
  const double p_outlier = model.outlier_prob(out.coverage_distance_mm);

  const std::size_t num_k = frame.pose.size();
  out.predictions.assign(num_k, std::vector<Point2>(cameras.size()));
  if (render_heatmaps) out.heatmaps.assign(cameras.size(), std::vector<Heatmap>(num_k));

  const auto frame_key = static_cast<std::uint64_t>(frame.id);
  const auto iter_key = static_cast<std::uint64_t>(iteration);
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    for (std::size_t k = 0; k < num_k; ++k) {
      const Point2 truth = project(cameras[v], frame.pose[k]);
      CounterRng noise{model.seed, frame_key, v, k, iter_key, kNoise};
      CounterRng outlier{model.seed, frame_key, v, k, iter_key, kOutlier};
      Point2 pred = truth + out.sigma_px * Point2(noise.normal(), noise.normal());
      if (outlier.uniform() < p_outlier) {
        const double angle = 2.0 * std::numbers::pi * outlier.uniform();
        pred = truth + model.outlier_offset_px * Point2(std::cos(angle), std::sin(angle));
      }
      out.predictions[k][v] = pred;

      if (!render_heatmaps) continue;
      Heatmap h = render_gaussian(render.to_heatmap(pred), render.heatmap_sigma_px, render.heatmap_width,
                                  render.heatmap_height);
      CounterRng multi{model.seed, frame_key, v, k, iter_key, kMultiPeak};
      if (multi.uniform() < model.multi_peak_prob) {
        const Point2 second(multi.uniform() * (render.heatmap_width - 1), multi.uniform() * (render.heatmap_height - 1));
        add_gaussian(h, second, render.heatmap_sigma_px, 0.5);
      }
      out.heatmaps[v][k] = std::move(h);
    }
  }
  return out;
}

}  // namespace mvpal
