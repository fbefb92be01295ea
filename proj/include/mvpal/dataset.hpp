#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "mvpal/geometry.hpp"
#include "mvpal/sim_model.hpp"

namespace mvpal {

struct Dataset {
  std::vector<CameraParams> cameras;
  std::vector<Frame> frames;
  std::vector<int> train;
  std::vector<int> heldout;
  int num_keypoints = 0;

  // Throws InvariantViolation on duplicate ids, overlapping splits, unknown
  // split members or inconsistent keypoint counts.
  void validate() const;
  const Frame& frame(int id) const;
};

Dataset dataset_from_json(const nlohmann::json& doc);
nlohmann::json dataset_to_json(const Dataset& dataset);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

struct SyntheticSpec {
  int clusters = 10;
  int frames_per_cluster = 50;  // train split size is clusters * frames_per_cluster
  int heldout_frames = 100;
  int num_cameras = 8;
  double ring_radius_mm = 3000.0;
  double focal_px = 500.0;
  double image_width = 1000.0;
  double image_height = 1000.0;
  double pose_scale = 1.0;
  double cluster_spread_mm = 150.0;  // per-keypoint offset of a cluster prototype
  double within_cluster_mm = 25.0;   // per-keypoint jitter inside a cluster
  double root_jitter_mm = 300.0;     // horizontal placement range around the origin
  double zipf_exponent = 1.5;
  std::uint64_t seed = 0;

  void validate() const;
};

// Also returns each frame's generating cluster, indexed like Dataset::frames.
Dataset generate_synthetic(const SyntheticSpec& spec, std::vector<int>* cluster_of = nullptr);

// Camera on a horizontal ring of the given radius, looking at the origin,
// image y axis pointing down (world z is up).
CameraParams ring_camera(int id, double angle_rad, double radius_mm, double focal_px, double cx, double cy);

}  // namespace mvpal
