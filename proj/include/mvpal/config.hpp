#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mvpal/active_learning.hpp"
#include "mvpal/analysis.hpp"
#include "mvpal/dataset.hpp"
#include "mvpal/geometry.hpp"
#include "mvpal/heatmap.hpp"
#include "mvpal/self_training.hpp"
#include "mvpal/sim_model.hpp"

namespace mvpal {

struct SelfTrainingConfig {
  bool enabled = false;
  double fraction = 0.2;  // pseudo-labels per iteration, relative to batch_per_iter
  ScheduleVariant variant = ScheduleVariant::Alternating;

  int target(int batch_per_iter) const;
};

struct CampaignConfig {
  std::string dataset;               // path; empty means generate from `synthetic`
  SyntheticSpec synthetic;
  Strategy strategy = Strategy::Rand;
  int init_labeled = 20;
  int batch_per_iter = 10;
  int iterations = 8;
  SelfTrainingConfig self_training;
  NoiseModel noise;
  RenderOptions render;
  PeakParams peaks;
  TriangulationOptions triangulation;
  int coreset_root = 0;
  int cluster_root = 2;
  int clusters = 10;
  std::uint64_t cluster_seed = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  CostModel cost;
  int workers = 1;

  // Checks everything that does not need the dataset; ConfigError on failure.
  void validate() const;
  // Checks the budget and root indices against a loaded dataset.
  void validate_against(const Dataset& dataset) const;
};

// Unknown keys are rejected so typos do not silently fall back to defaults.
CampaignConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const CampaignConfig& config);
CampaignConfig load_config(const std::filesystem::path& path);

}  // namespace mvpal
